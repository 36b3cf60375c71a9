"""
类型归约与弱头范式

归约策略是确定的、头部优先：先尝试头部的 Seq1/Assoc/μ/β/Dual 公理，
否则沿 Seq2、DCtx、TAppL 向内递归。规范化交替执行 β;D 归约与 μ 展开，
并对被展开的 μ 子项做标记，重复遇到同一标记即判定发散。
"""

from functools import lru_cache
from typing import List, Optional, Set, Tuple

from config.base_config import EquivalenceConfig
from core.renaming import renamed, substitute
from models.errors import DivergenceError, NormalizationLimit
from models.types import (
    DUAL, END, SEMI, SKIP, Abs, App, Const, DualC, MuC, SemiC, Type,
    as_choice, as_msg, as_seq, choice, dual, is_dual_of_var, is_proper, msg, seq, spine,
)
from utils.log_utils import get_logger

logger = get_logger(__name__)

DEFAULT_NORM_FUEL = EquivalenceConfig.get("norm_fuel", 100_000)


def _dual_axiom(x: Type) -> Optional[Type]:
    """Dual 作用于 x 时头部可用的公理"""
    if x == SKIP:
        return SKIP
    if x == END:
        return END
    parts = as_seq(x)
    if parts is not None:
        return seq(dual(parts[0]), dual(parts[1]))
    message = as_msg(x)
    if message is not None:
        return msg(message[0].flip(), message[1])
    selected = as_choice(x)
    if selected is not None:
        const, fields = selected
        return choice(const.view.flip(), {label: dual(body) for label, body in fields.items()})
    if is_dual_of_var(x):
        return x.arg
    return None


def _step(t: Type, allow_mu: bool) -> Optional[Tuple[Type, Optional[Type]]]:
    """
    一步确定性归约

    Returns:
        (归约结果, 本步展开的 μ 子项或 None)；无规则可用时返回 None
    """
    if not isinstance(t, App):
        return None
    fun, arg = t.fun, t.arg

    if isinstance(fun, Const) and isinstance(fun.const, MuC):
        if allow_mu:
            return App(arg, t), t
        return None

    if isinstance(fun, Abs):
        return renamed(substitute(fun.body, arg, fun.binder)), None

    if isinstance(fun, App) and fun.fun == SEMI:
        left = fun.arg
        if left == SKIP:
            return arg, None
        inner = as_seq(left)
        if inner is not None:
            return seq(inner[0], seq(inner[1], arg)), None
        reduced = _step(left, allow_mu)
        if reduced is None:
            return None
        return seq(reduced[0], arg), reduced[1]

    if fun == DUAL:
        reduct = _dual_axiom(arg)
        if reduct is not None:
            return reduct, None
        reduced = _step(arg, allow_mu)
        if reduced is None:
            return None
        return dual(reduced[0]), reduced[1]

    reduced = _step(fun, allow_mu)
    if reduced is None:
        return None
    return App(reduced[0], arg), reduced[1]


def step(t: Type) -> Optional[Type]:
    """
    按确定策略归约一步

    Args:
        t: 已重命名的类型

    Returns:
        重命名后的归约结果；t 已是弱头范式时返回 None
    """
    reduced = _step(t, allow_mu=True)
    if reduced is None:
        return None
    return renamed(reduced[0])


def is_whnf(t: Type) -> bool:
    """按弱头范式的规则判断，不借助 step"""
    if not isinstance(t, App):
        return True
    head, args = spine(t)
    if isinstance(head, Abs):
        return False
    if not isinstance(head, Const):
        return True
    const = head.const
    if isinstance(const, MuC):
        return False
    if isinstance(const, SemiC):
        if len(args) == 1:
            return True
        first = args[0]
        return is_whnf(first) and first != SKIP and as_seq(first) is None
    if isinstance(const, DualC):
        operand = args[0]
        if not is_whnf(operand):
            return False
        if operand in (SKIP, END):
            return False
        if as_msg(operand) is not None or as_seq(operand) is not None:
            return False
        if as_choice(operand) is not None or is_dual_of_var(operand):
            return False
        return True
    return True


def normalize_bd(t: Type, fuel: Optional[int] = None) -> Type:
    """
    只用 β;D 规则（不展开 μ）归约到不可再归约
    """
    limit = fuel or DEFAULT_NORM_FUEL
    current = renamed(t)
    for _ in range(limit):
        reduced = _step(current, allow_mu=False)
        if reduced is None:
            return current
        current = renamed(reduced[0])
    raise NormalizationLimit(limit)


def normalize(delta, t: Type, fuel: Optional[int] = None) -> Type:
    """
    把类型归约到弱头范式

    Args:
        delta: 种类上下文（归约本身不依赖它，保留以对齐判定接口）
        t: 待规范化的类型
        fuel: 最大归约步数，默认取配置中的 norm_fuel

    Returns:
        唯一的弱头范式

    Raises:
        DivergenceError: 同一个恰当种类的 μ 子项被第二次展开
        NormalizationLimit: 步数耗尽（只可能发生在高阶递归类型上）
    """
    limit = fuel or DEFAULT_NORM_FUEL
    current = renamed(t)
    tagged: Set[Type] = set()
    for _ in range(limit):
        reduced = _step(current, allow_mu=True)
        if reduced is None:
            return current
        reduct, unfolded = reduced
        if unfolded is not None and is_proper(unfolded.fun.const.kind):
            key = renamed(unfolded)
            if key in tagged:
                logger.debug(f"🔁 μ 子项重复展开: {key}")
                raise DivergenceError(key)
            tagged.add(key)
        current = renamed(reduct)
    raise NormalizationLimit(limit)


@lru_cache(maxsize=16384)
def normalises(t: Type) -> bool:
    """T 能否在有限步内到达弱头范式"""
    try:
        normalize(None, t)
    except DivergenceError:
        return False
    return True


def _one_steps(t: Type) -> List[Type]:
    """t 的全部一步归约结果（非确定版本）"""
    if not isinstance(t, App):
        return []
    fun, arg = t.fun, t.arg
    results: List[Type] = []
    if isinstance(fun, Const) and isinstance(fun.const, MuC):
        results.append(App(arg, t))
    if isinstance(fun, Abs):
        results.append(renamed(substitute(fun.body, arg, fun.binder)))
    parts = as_seq(t)
    if parts is not None:
        left, right = parts
        if left == SKIP:
            results.append(right)
        inner = as_seq(left)
        if inner is not None:
            results.append(seq(inner[0], seq(inner[1], right)))
        results.extend(seq(r, right) for r in _one_steps(left))
        return results
    if fun == DUAL:
        reduct = _dual_axiom(arg)
        if reduct is not None:
            results.append(reduct)
        results.extend(dual(r) for r in _one_steps(arg))
        return results
    results.extend(App(r, arg) for r in _one_steps(fun))
    return results


def reduction_paths(t: Type, limit: int = 2000) -> Set[Type]:
    """
    穷举所有归约路径，返回到达的全部弱头范式

    探索的状态数超过 limit 时停止，已找到的范式照常返回
    """
    start = renamed(t)
    seen = {start}
    frontier = [start]
    finals: Set[Type] = set()
    while frontier and len(seen) <= limit:
        current = frontier.pop()
        successors = [renamed(s) for s in _one_steps(current)]
        if not successors:
            finals.add(current)
            continue
        for successor in successors:
            if successor not in seen:
                seen.add(successor)
                frontier.append(successor)
    return finals
