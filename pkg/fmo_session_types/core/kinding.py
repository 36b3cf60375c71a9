"""
预种类推导与种类检查

预种类推导是一次线性遍历，不关心规范化；种类检查在此基础上拒绝高阶递归，
并要求每个应用子项都能规范化（带标记的 μ 展开保证检查总是终止）。
"""

from dataclasses import dataclass
from typing import Dict, Mapping, Optional

from core.reduction import normalises
from core.renaming import renamed
from models.errors import DivergenceError, KindError, KindErrorReason
from models.types import (
    S_KIND, T_KIND, Abs, App, ArrowC, ArrowK, ChoiceC, Const, DualC, EndC, ForallC,
    Kind, MsgC, MuC, RecordC, SemiC, SkipC, Type, Var, VarName, VariantC, arrow_kind,
    is_proper, subterms,
)
from utils.log_utils import get_logger

logger = get_logger(__name__)

KContext = Dict[VarName, Kind]


@dataclass(frozen=True)
class _Proper:
    """常量种类中的 ∗：在检查时匹配 S 或 T"""

    def __str__(self) -> str:
        return "*"


PROPER = _Proper()


def extend(delta: Mapping[VarName, Kind], name: VarName, kind: Kind) -> KContext:
    """Δ + α:κ，覆盖已有绑定"""
    updated = dict(delta)
    updated[name] = kind
    return updated


def const_kind(const) -> Kind:
    """常量的固定种类，∗ 用 PROPER 表示"""
    if isinstance(const, ArrowC):
        return arrow_kind(PROPER, PROPER, T_KIND)
    if isinstance(const, (RecordC, VariantC)):
        return arrow_kind(*([PROPER] * len(const.labels)), T_KIND)
    if isinstance(const, MuC):
        return ArrowK(ArrowK(const.kind, const.kind), const.kind)
    if isinstance(const, ForallC):
        return ArrowK(ArrowK(const.kind, PROPER), T_KIND)
    if isinstance(const, (SkipC, EndC)):
        return S_KIND
    if isinstance(const, MsgC):
        return ArrowK(PROPER, S_KIND)
    if isinstance(const, SemiC):
        return arrow_kind(S_KIND, S_KIND, S_KIND)
    if isinstance(const, ChoiceC):
        return arrow_kind(*([S_KIND] * len(const.labels)), S_KIND)
    if isinstance(const, DualC):
        return ArrowK(S_KIND, S_KIND)
    raise ValueError(f"unknown constant {const!r}")


def _matches(expected, actual) -> bool:
    if expected == PROPER:
        return actual == PROPER or is_proper(actual)
    if actual == PROPER:
        return is_proper(expected)
    if isinstance(expected, ArrowK) and isinstance(actual, ArrowK):
        return _matches(expected.domain, actual.domain) and _matches(expected.codomain, actual.codomain)
    return expected == actual


def _default_wildcards(kind) -> Kind:
    if kind == PROPER:
        return T_KIND
    if isinstance(kind, ArrowK):
        return ArrowK(_default_wildcards(kind.domain), _default_wildcards(kind.codomain))
    return kind


def _pre_kind(delta: Mapping[VarName, Kind], t: Type):
    if isinstance(t, Var):
        return delta.get(t.name)
    if isinstance(t, Const):
        return const_kind(t.const)
    if isinstance(t, Abs):
        body = _pre_kind(extend(delta, t.binder, t.kind), t.body)
        if body is None:
            return None
        return ArrowK(t.kind, body)
    fun = _pre_kind(delta, t.fun)
    if not isinstance(fun, ArrowK):
        return None
    arg = _pre_kind(delta, t.arg)
    if arg is None or not _matches(fun.domain, arg):
        return None
    return fun.codomain


def pre_kind(delta: Mapping[VarName, Kind], t: Type) -> Optional[Kind]:
    """
    单遍预种类推导

    Returns:
        推导出的种类；没有规则适用时返回 None
    """
    kind = _pre_kind(delta, t)
    if kind is None:
        return None
    return _default_wildcards(kind)


def higher_kind_recursion(t: Type) -> Optional[Type]:
    """找出第一个种类不恰当的 μ 常量"""
    for sub in subterms(t):
        if isinstance(sub, Const) and isinstance(sub.const, MuC) and not is_proper(sub.const.kind):
            return sub
    return None


def kind_of(delta: Mapping[VarName, Kind], t: Type) -> Kind:
    """
    种类检查

    Args:
        delta: 种类上下文 Δ
        t: 待检查的类型

    Returns:
        t 的种类

    Raises:
        KindError: NOT_PRE_KINDED / HIGHER_KIND_RECURSION / NON_NORMALISING
    """
    t = renamed(t)
    kind = pre_kind(delta, t)
    if kind is None:
        raise KindError(KindErrorReason.NOT_PRE_KINDED, t)
    offending = higher_kind_recursion(t)
    if offending is not None:
        raise KindError(KindErrorReason.HIGHER_KIND_RECURSION, offending)
    # 后序遍历：先报告最小的不可规范化子项
    for sub in subterms(t):
        if isinstance(sub, App) and not normalises(renamed(sub)):
            logger.debug(f"⛔ 不可规范化的子项: {sub}")
            raise KindError(KindErrorReason.NON_NORMALISING, renamed(sub))
    return kind


def is_kinded(delta: Mapping[VarName, Kind], t: Type) -> bool:
    try:
        kind_of(delta, t)
    except (KindError, DivergenceError):
        return False
    return True
