"""
类型的标记迁移系统与有界互模拟

先把类型规范化到弱头范式，再按头部形状给出迁移；后继类型都经过重命名，
因此 α 等价的状态在记忆表里会合并。
"""

import re
from collections import deque
from typing import Deque, Dict, List, Mapping, Optional, Set, Tuple

from config.base_config import EquivalenceConfig
from core.reduction import normalize
from core.renaming import renamed
from core.type_parser import parse_kind
from models.errors import NormalizationLimit, ParseError
from models.labels import AbsLabel, Bisimilar, ConstHead, Label, NotBisimilar, Unknown, VarHead, Verdict
from models.types import (
    END, SKIP, Abs, ArrowC, CanonicalVar, ChoiceC, Const, DualC, EndC, ForallC, MsgC, MuC,
    Polarity, RecordC, SemiC, SkipC, Type, UserVar, Var, VarName, VariantC, View, as_seq,
    is_dual_of_var, seq, spine,
)
from utils.log_utils import get_logger
from utils.type_printer import format_kind

logger = get_logger(__name__)

DEFAULT_DEPTH = EquivalenceConfig.get("oracle_depth", 64)
DEFAULT_NODE_CAP = EquivalenceConfig.get("node_cap", 100_000)

# ι_j 迁移：第 j 个参数即后继
_INDEXED_CONSTS = (ArrowC, ForallC, ChoiceC, RecordC, VariantC)


def _indexed(head: Const, args: List[Type]) -> Dict[Label, Type]:
    return {ConstHead(head.const, j): arg for j, arg in enumerate(args, start=1)}


def _var_headed(name: VarName, args: List[Type], continuation: Type) -> Dict[Label, Type]:
    moves: Dict[Label, Type] = {VarHead(name, 0): continuation}
    for j, arg in enumerate(args, start=1):
        moves[VarHead(name, j)] = arg
    return moves


def _seq_moves(first: Type, rest: Type) -> Dict[Label, Type]:
    """弱头范式 T;U 的迁移，T 不是 Skip 也不是顺序组合"""
    head, args = spine(first)
    if isinstance(head, Var):
        return _var_headed(head.name, args, rest)
    if first == END:
        return {ConstHead(EndC(), 0): SKIP}
    if isinstance(head, Const):
        const = head.const
        if isinstance(const, MsgC) and len(args) == 1:
            return {ConstHead(const, 1): args[0], ConstHead(const, 2): rest}
        if isinstance(const, ChoiceC) and len(args) == len(const.labels):
            return {ConstHead(const, j): seq(arg, rest) for j, arg in enumerate(args, start=1)}
        if isinstance(const, DualC) and is_dual_of_var(first):
            return {ConstHead(const, 1): args[0], ConstHead(const, 2): rest}
    return {}


def whnf_moves(t: Type) -> Dict[Label, Type]:
    """弱头范式 t 的迁移（未重命名）"""
    if isinstance(t, Var):
        return {VarHead(t.name, 0): SKIP}
    if isinstance(t, Const):
        if isinstance(t.const, SkipC):
            return {}
        return {ConstHead(t.const, 0): SKIP}
    if isinstance(t, Abs):
        return {AbsLabel(t.binder, t.kind): t.body}

    head, args = spine(t)
    if isinstance(head, Var):
        return _var_headed(head.name, args, SKIP)
    if not isinstance(head, Const):
        return {}
    const = head.const
    if isinstance(const, _INDEXED_CONSTS):
        return _indexed(head, args)
    if isinstance(const, MsgC) and len(args) == 1:
        return {ConstHead(const, 1): args[0], ConstHead(const, 2): SKIP}
    if isinstance(const, SemiC):
        if len(args) == 1:
            return {ConstHead(const, 1): args[0]}
        parts = as_seq(t)
        if parts is not None:
            return _seq_moves(*parts)
    if isinstance(const, DualC) and is_dual_of_var(t):
        return {ConstHead(const, 1): args[0], ConstHead(const, 2): SKIP}
    return {}


def transitions(delta, t: Type, fuel: Optional[int] = None) -> Dict[Label, Type]:
    """
    类型 t 的全部迁移

    Args:
        delta: 种类上下文
        t: 已通过种类检查的类型
        fuel: 规范化的步数上限，默认取配置

    Returns:
        标签到后继类型（已重命名）的映射；Skip 没有迁移
    """
    normal = normalize(delta, t, fuel)
    return {label: renamed(target) for label, target in whnf_moves(normal).items()}


# ---------------------------------------------------------------- label rendering

def _const_label_text(const) -> str:
    if isinstance(const, SkipC):
        return "Skip"
    if isinstance(const, EndC):
        return "End"
    if isinstance(const, DualC):
        return "Dual"
    if isinstance(const, SemiC):
        return ";"
    if isinstance(const, ArrowC):
        return "->"
    if isinstance(const, MsgC):
        return const.polarity.value
    if isinstance(const, ChoiceC):
        return f"{const.view.value}{{{','.join(const.labels)}}}"
    if isinstance(const, RecordC):
        return f"{{{','.join(const.labels)}}}"
    if isinstance(const, VariantC):
        return f"<{','.join(const.labels)}>"
    if isinstance(const, MuC):
        return f"mu {format_kind(const.kind)}"
    if isinstance(const, ForallC):
        return f"forall {format_kind(const.kind)}"
    raise ValueError(f"unknown constant {const!r}")


def format_label(label: Label) -> str:
    """标签的稳定字符串：a_0、&{Leaf,Node}_2、?_1、End、lambda $1:T"""
    if isinstance(label, AbsLabel):
        return f"lambda {label.binder}:{format_kind(label.kind)}"
    if isinstance(label, VarHead):
        return f"{label.name}_{label.index}"
    text = _const_label_text(label.const)
    if label.index == 0:
        return text
    return f"{text}_{label.index}"


_INDEX_SUFFIX = re.compile(r"(.+)_(\d+)")
_LABEL_LIST = re.compile(r"([&+]?)\{(.*)\}|<(.*)>")


def _parse_var_name(text: str) -> VarName:
    if text.startswith("$"):
        return CanonicalVar(int(text[1:]))
    return UserVar(text)


def _labels_of(text: str) -> Tuple[str, ...]:
    return tuple(part for part in text.split(",") if part)


def _parse_const(text: str):
    simple = {"Skip": SkipC(), "End": EndC(), "Dual": DualC(), ";": SemiC(), "->": ArrowC(),
              "?": MsgC(Polarity.IN), "!": MsgC(Polarity.OUT)}
    if text in simple:
        return simple[text]
    try:
        if text.startswith("mu "):
            return MuC(parse_kind(text[3:]))
        if text.startswith("forall "):
            return ForallC(parse_kind(text[7:]))
    except ParseError:
        return None
    match = _LABEL_LIST.fullmatch(text)
    if match is None:
        return None
    if match.group(3) is not None:
        return VariantC(_labels_of(match.group(3)))
    labels = _labels_of(match.group(2))
    if match.group(1) == "&":
        return ChoiceC(View.EXTERNAL, labels)
    if match.group(1) == "+":
        return ChoiceC(View.INTERNAL, labels)
    return RecordC(labels)


def parse_label(text: str) -> Label:
    """format_label 的逆"""
    if text.startswith("lambda "):
        binder, kind = text[len("lambda "):].split(":", 1)
        return AbsLabel(_parse_var_name(binder), parse_kind(kind))
    match = _INDEX_SUFFIX.fullmatch(text)
    if match is not None:
        head, index = match.group(1), int(match.group(2))
        const = _parse_const(head)
        if const is not None:
            return ConstHead(const, index)
        return VarHead(_parse_var_name(head), index)
    const = _parse_const(text)
    if const is None:
        raise ValueError(f"malformed label {text!r}")
    return ConstHead(const, 0)


def label_sort_key(label: Label) -> str:
    return format_label(label)


# ---------------------------------------------------------------- exploration

def replay(delta, t: Type, trace, fuel: Optional[int] = None) -> Optional[Type]:
    """沿迹前进，无法继续时返回 None"""
    current = renamed(t)
    for label in trace:
        moves = transitions(delta, current, fuel)
        if label not in moves:
            return None
        current = moves[label]
    return current


def reachable_graph(delta, t: Type, depth: int = 8, node_cap: int = 1000, fuel: Optional[int] = None):
    """
    宽度优先展开可达状态图

    Returns:
        (states, edges)：states 按发现顺序排列，edges 为 (源序号, 标签, 目标序号)
    """
    start = renamed(t)
    index: Dict[Type, int] = {start: 0}
    states: List[Type] = [start]
    edges: List[Tuple[int, Label, int]] = []
    queue: Deque[Tuple[Type, int]] = deque([(start, 0)])
    while queue:
        current, level = queue.popleft()
        if level >= depth:
            continue
        moves = transitions(delta, current, fuel)
        for label in sorted(moves, key=label_sort_key):
            target = moves[label]
            if target not in index:
                if len(states) >= node_cap:
                    continue
                index[target] = len(states)
                states.append(target)
                queue.append((target, level + 1))
            edges.append((index[current], label, index[target]))
    return states, edges


def _first_difference(left: Mapping[Label, Type], right: Mapping[Label, Type]) -> Optional[Label]:
    only_left = sorted(set(left) - set(right), key=label_sort_key)
    if only_left:
        return only_left[0]
    only_right = sorted(set(right) - set(left), key=label_sort_key)
    if only_right:
        return only_right[0]
    return None


def bounded_bisim(delta, t: Type, u: Type, depth: int = DEFAULT_DEPTH,
                  node_cap: int = DEFAULT_NODE_CAP, fuel: Optional[int] = None) -> Verdict:
    """
    有界的直接互模拟检查

    宽度优先地成对展开两侧的迁移：标签集合不同立即给出最短区分迹；
    所有状态对都已访问过则互模拟成立；否则返回 Unknown。
    """
    start = (renamed(t), renamed(u))
    seen: Set[Tuple[Type, Type]] = {start}
    queue: Deque[Tuple[Tuple[Type, Type], Tuple[Label, ...]]] = deque([(start, ())])
    exhausted = False
    capped = False
    try:
        while queue:
            (left, right), path = queue.popleft()
            if left == right:
                continue
            if len(path) >= depth:
                exhausted = True
                continue
            left_moves = transitions(delta, left, fuel)
            right_moves = transitions(delta, right, fuel)
            difference = _first_difference(left_moves, right_moves)
            if difference is not None:
                return NotBisimilar(path + (difference,))
            for label in sorted(left_moves, key=label_sort_key):
                successor = (left_moves[label], right_moves[label])
                if successor in seen:
                    continue
                if len(seen) >= node_cap:
                    capped = True
                    continue
                seen.add(successor)
                queue.append((successor, path + (label,)))
    except NormalizationLimit:
        return Unknown("oracle:norm-fuel")
    if capped:
        return Unknown("oracle:node-cap")
    if exhausted:
        return Unknown("oracle:depth-exhausted")
    return Bisimilar(f"closure:{len(seen)}")
