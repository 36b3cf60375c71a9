"""
文法报告器

简单文法的文本转储与 JSON 导入导出。文本格式每行一条产生式：

    start: X0
    X3 &{Leaf,Node}_2 -> X3 X4 X1
    X1 &{Leaf,Node}_1 ->

右部为空即 ε，BOT 表示 ⊥。JSON 导出可以原样读回。
"""

import json
import re
from typing import Any, Dict, List, Tuple

from models.grammar_types import BOT, NonTerm, SimpleGrammar, Word
from processors.type_lts import format_label, label_sort_key, parse_label
from utils.log_utils import get_logger

logger = get_logger(__name__)

SCHEMA_VERSION = 1

_NUMBERED = re.compile(r"X(\d+)")


def nonterminal_sort_key(name: NonTerm) -> Tuple[int, int, str]:
    """X0, X1, …, X10 按编号排序，其他名字排在后面，BOT 最后"""
    if name == BOT:
        return 2, 0, name
    match = _NUMBERED.fullmatch(name)
    if match:
        return 0, int(match.group(1)), name
    return 1, 0, name


def _sorted_productions(grammar: SimpleGrammar):
    for lhs in sorted(grammar.productions, key=nonterminal_sort_key):
        rules = grammar.productions[lhs]
        for label in sorted(rules, key=label_sort_key):
            yield lhs, label, rules[label]


def format_grammar(grammar: SimpleGrammar) -> str:
    """文本转储，相同输入给出逐字节相同的输出"""
    lines = [f"start: {' '.join(grammar.start)}".rstrip()]
    for lhs, label, rhs in _sorted_productions(grammar):
        lines.append(f"{lhs} {format_label(label)} -> {' '.join(rhs)}".rstrip())
    return "\n".join(lines)


def parse_grammar_dump(text: str) -> SimpleGrammar:
    """
    读回 format_grammar 的输出

    Raises:
        ValueError: 行格式不对或标签无法解析
    """
    grammar = SimpleGrammar()
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or not lines[0].startswith("start:"):
        raise ValueError("grammar dump must start with 'start:'")
    grammar.start = tuple(lines[0][len("start:"):].split())
    for line in lines[1:]:
        left, arrow, right = line.rpartition(" ->")
        if not arrow:
            raise ValueError(f"malformed production {line!r}")
        lhs, _, label_text = left.partition(" ")
        grammar.add_production(lhs, parse_label(label_text), tuple(right.split()))
    return grammar


def grammar_to_json(grammar: SimpleGrammar) -> Dict[str, Any]:
    productions: List[Dict[str, Any]] = [
        {"lhs": lhs, "label": format_label(label), "rhs": list(rhs)}
        for lhs, label, rhs in _sorted_productions(grammar)
    ]
    return {"schema_version": SCHEMA_VERSION, "start": list(grammar.start), "productions": productions}


def grammar_from_json(data: Dict[str, Any]) -> SimpleGrammar:
    """
    从 JSON 对象重建文法

    Raises:
        ValueError: schema_version 不支持或字段缺失
    """
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported grammar schema_version {version!r}")
    grammar = SimpleGrammar(start=tuple(data["start"]))
    for entry in data["productions"]:
        rhs: Word = tuple(entry["rhs"])
        grammar.add_production(entry["lhs"], parse_label(entry["label"]), rhs)
    logger.debug(f"📥 读入文法: {grammar.production_count()} 条产生式")
    return grammar


def dumps_grammar(grammar: SimpleGrammar) -> str:
    return json.dumps(grammar_to_json(grammar), ensure_ascii=False, indent=2)


def loads_grammar(text: str) -> SimpleGrammar:
    return grammar_from_json(json.loads(text))
