"""
程序文件解析

程序由顶层声明组成，每个声明从第 0 列开始，缩进的行是上一个声明的延续：

    type Name = Type        类型缩写（参数化的缩写写成类型层 λ）
    name : Type             签名；没有定义的签名是公理
    name = term             定义，必须有签名

`--` 开始行注释。项语法复用类型语法，参数类型标注在 `;` 层，箭头类型需加括号。
"""

import re
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Tuple

from lark import Lark, v_args

from core.renaming import free_vars, substitute
from core.term_ops import map_types, resolve_globals
from core.type_parser import TYPE_GRAMMAR, TypeTransformer, run_parser
from models.errors import MissingSignature, ParseError
from models.terms import (
    AppTerm, CaseTerm, ConstTerm, IntTerm, LamTerm, LetRecordTerm, LetTerm,
    MatchTerm, Program, ProgramBinding, RecordTerm, RecTerm, Term, TermConstKind,
    SEQ_BINDER, TypeAppTerm, TypeLamTerm, VariantTerm, VarTerm, pair_term, sorted_fields,
)
from models.types import UNIT, Type, UserVar
from utils.log_utils import get_logger

logger = get_logger(__name__)

PROGRAM_GRAMMAR = TYPE_GRAMMAR + r"""
?decl: "type" NAME "=" type          -> type_decl
     | NAME ":" type                 -> signature
     | NAME "=" term                 -> definition

?term: "let" term_binder "=" term "in" term                          -> let_term
     | "let" "{" [pattern_fields] "}" "=" term "in" term              -> let_record
     | "let" "(" term_binder "," term_binder ")" "=" term "in" term  -> let_pair
     | ("fun" | "\\") term_binder ":" seq_type "->" term             -> lam_term
     | "Fun" NAME ":" kind "->" term                                 -> tlam_term
     | "rec" NAME ":" type "." term                                  -> rec_term
     | "match" term "with" "{" handlers "}"                          -> match_term
     | "case" term "of" "{" handlers "}"                             -> case_term
     | app_term ";" term                                             -> sequence
     | app_term

?app_term: app_term atom_term                   -> app_term
         | app_term "[" type "]"                -> tapp_term
         | "tag" NAME atom_term "as" atom_type  -> variant_term
         | atom_term

?atom_term: NAME                          -> var_term
          | INT                           -> int_term
          | "{" [record_fields] "}"       -> record_term
          | "(" term ")"
          | "(" term "," term ")"         -> pair_term
          | "receive"                     -> receive_const
          | "send"                        -> send_const
          | "close"                       -> close_const
          | "fork"                        -> fork_const
          | "new"                         -> new_const
          | "select" NAME "[" type "]"    -> select_const

term_binder: NAME | UNDERSCORE

record_fields: record_field ("," record_field)*
record_field: NAME "=" term
pattern_fields: pattern_field ("," pattern_field)*
pattern_field: NAME "=" term_binder
handlers: handler ("," handler)*
handler: NAME term_binder "->" term   -> lam_handler
       | NAME "=" term           -> term_handler

UNDERSCORE: "_"

%import common.INT
"""

_COMMENT = re.compile(r"--[^\n]*")


def _checked_fields(items, what: str, line: int = 0):
    try:
        return sorted_fields(items)
    except ValueError:
        raise ParseError(f"duplicate labels in {what}", line) from None


@v_args(inline=True)
class TermTransformer(TypeTransformer):
    """在类型转换器之上增加项与声明"""

    def type_decl(self, name, body):
        return ("type", str(name), body, name.line)

    def signature(self, name, body):
        return ("signature", str(name), body, name.line)

    def definition(self, name, body):
        return ("definition", str(name), body, name.line)

    def term_binder(self, token):
        return str(token)

    def let_term(self, name, bound, body):
        return LetTerm(name, bound, body)

    def let_record(self, patterns, bound, body):
        binders = tuple(_checked_fields(patterns or [], "record pattern"))
        return LetRecordTerm(binders, bound, body)

    def let_pair(self, first, second, bound, body):
        return LetRecordTerm((("Fst", first), ("Snd", second)), bound, body)

    def pattern_fields(self, *items):
        return list(items)

    def pattern_field(self, label, name):
        return str(label), name

    def lam_term(self, param, param_type, body):
        return LamTerm(param, param_type, body)

    def tlam_term(self, name, kind, body):
        return TypeLamTerm(str(name), kind, body)

    def rec_term(self, name, rec_type, value):
        return RecTerm(str(name), rec_type, value)

    def match_term(self, scrutinee, handlers):
        return MatchTerm(scrutinee, handlers)

    def case_term(self, scrutinee, handlers):
        return CaseTerm(scrutinee, handlers)

    def sequence(self, first, second):
        # e1; e2 = (λx:{}. let {} = x in e2) e1
        body = LetRecordTerm((), VarTerm(SEQ_BINDER), second)
        return AppTerm(LamTerm(SEQ_BINDER, UNIT, body), first)

    def app_term(self, fun, arg):
        return AppTerm(fun, arg)

    def tapp_term(self, fun, type_arg):
        return TypeAppTerm(fun, type_arg)

    def variant_term(self, label, payload, variant_type):
        return VariantTerm(str(label), payload, variant_type)

    def var_term(self, token):
        return VarTerm(str(token))

    def int_term(self, token):
        return IntTerm(int(token))

    def record_term(self, items=None):
        return RecordTerm(tuple(_checked_fields(items or [], "record")))

    def record_fields(self, *items):
        return list(items)

    def record_field(self, label, body):
        return str(label), body

    def pair_term(self, first, second):
        return pair_term(first, second)

    def receive_const(self):
        return ConstTerm(TermConstKind.RECEIVE)

    def send_const(self):
        return ConstTerm(TermConstKind.SEND)

    def close_const(self):
        return ConstTerm(TermConstKind.CLOSE)

    def fork_const(self):
        return ConstTerm(TermConstKind.FORK)

    def new_const(self):
        return ConstTerm(TermConstKind.NEW)

    def select_const(self, label, annotation):
        return ConstTerm(TermConstKind.SELECT, str(label), annotation)

    def handlers(self, *items):
        return tuple(_checked_fields(items, "handlers"))

    def lam_handler(self, label, binder, body):
        return str(label), LamTerm(binder, None, body)

    def term_handler(self, label, body):
        return str(label), body


@lru_cache(maxsize=1)
def _program_parser() -> Lark:
    return Lark(PROGRAM_GRAMMAR, start=["decl", "term"], parser="lalr")


def split_declarations(text: str) -> List[Tuple[int, str]]:
    """
    按列位置切分声明

    Returns:
        (起始行号, 声明文本) 列表，注释已去掉
    """
    chunks: List[Tuple[int, List[str]]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = _COMMENT.sub("", raw).rstrip()
        if not line.strip():
            if chunks:
                chunks[-1][1].append("")
            continue
        if not line[0].isspace():
            chunks.append((number, [line]))
        elif chunks:
            chunks[-1][1].append(line)
        else:
            raise ParseError("indented line before any declaration", number, 1)
    return [(start, "\n".join(lines)) for start, lines in chunks]


def _parse_chunk(start: int, chunk: str):
    try:
        return run_parser(_program_parser(), chunk, "decl", TermTransformer())
    except ParseError as exc:
        if exc.line:
            raise ParseError(exc.message, exc.line + start - 1, exc.column) from None
        raise


def parse_term(text: str) -> Term:
    """解析单个项（不解析缩写，不解析顶层引用）"""
    return run_parser(_program_parser(), text, "term", TermTransformer())


class _Abbreviations:
    """类型缩写的按需展开，缩写体可以引用任意顺序声明的其他缩写"""

    def __init__(self, raw: Dict[str, Tuple[Type, int]]):
        self.raw = raw
        self.resolved: Dict[str, Type] = {}

    def resolve(self, name: str, visiting: FrozenSet[str] = frozenset()) -> Type:
        if name in self.resolved:
            return self.resolved[name]
        if name in visiting:
            body, line = self.raw[name]
            raise ParseError(f"recursive type abbreviation {name}; use mu", line)
        body, _ = self.raw[name]
        expanded = self.expand(body, visiting | {name})
        self.resolved[name] = expanded
        return expanded

    def expand(self, t: Type, visiting: FrozenSet[str] = frozenset()) -> Type:
        for name in sorted(self.raw):
            if UserVar(name) in free_vars(t):
                t = substitute(t, self.resolve(name, visiting), UserVar(name))
        return t


def parse_program(text: str) -> Program:
    """
    解析程序文本

    Args:
        text: 程序源文本

    Returns:
        Program；类型缩写已展开，顶层名字已改写为 GlobalRef，
        只有签名没有定义的绑定是公理

    Raises:
        ParseError: 语法错误、重复声明或递归缩写
        MissingSignature: 定义没有对应的签名
    """
    abbreviations: Dict[str, Tuple[Type, int]] = {}
    signatures: Dict[str, Tuple[Type, int]] = {}
    definitions: Dict[str, Tuple[Term, int]] = {}
    order: List[str] = []

    for start, chunk in split_declarations(text):
        kind, name, body, line = _parse_chunk(start, chunk)
        line = line + start - 1
        table = {"type": abbreviations, "signature": signatures, "definition": definitions}[kind]
        if name in table:
            raise ParseError(f"duplicate {kind} for {name}", line)
        table[name] = (body, line)
        if kind != "type" and name not in order:
            order.append(name)

    for name, (_, line) in definitions.items():
        if name not in signatures:
            raise MissingSignature(f"definition of {name} has no signature (line {line})", name)

    expander = _Abbreviations(abbreviations)
    globals_ = frozenset(signatures)
    program = Program()
    for name in order:
        signature, line = signatures[name]
        body: Optional[Term] = None
        if name in definitions:
            body = resolve_globals(map_types(definitions[name][0], expander.expand), globals_)
        program.bindings.append(ProgramBinding(name, expander.expand(signature), body, line))

    axioms = [entry.name for entry in program.bindings if entry.is_axiom]
    logger.debug(f"📄 程序解析完成: {len(program.bindings)} 个绑定, 公理 {axioms}")
    return program

