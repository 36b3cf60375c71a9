"""
自由变量、最小重命名与替换

重命名把每个绑定变量换成最小的可用规范变量 $i，使 α 等价的类型在语法上相等；
替换不做即时重命名，调用方需保证被替换的项已经在应用的上下文中重命名过。
"""

from functools import lru_cache
from typing import AbstractSet, Dict, FrozenSet, Iterable

from models.types import Abs, App, CanonicalVar, Const, Type, Var, VarName


@lru_cache(maxsize=65536)
def free_vars(t: Type) -> FrozenSet[VarName]:
    """T 中自由出现的变量"""
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Abs):
        return free_vars(t.body) - {t.binder}
    if isinstance(t, App):
        return free_vars(t.fun) | free_vars(t.arg)
    return frozenset()


def least_canonical(excluded: Iterable[VarName]) -> CanonicalVar:
    """不在 excluded 中的最小规范变量"""
    taken = {name.index for name in excluded if isinstance(name, CanonicalVar)}
    index = 1
    while index in taken:
        index += 1
    return CanonicalVar(index)


def first_avail(avoid: AbstractSet[VarName], t: Abs) -> CanonicalVar:
    """
    为抽象 t 选择新的绑定名

    Returns:
        不在 avoid ∪ fv(t) 中的最小规范变量
    """
    return least_canonical(set(avoid) | free_vars(t))


def _mapped_free_vars(t: Type, env: Dict[VarName, VarName]) -> FrozenSet[VarName]:
    if not env:
        return free_vars(t)
    return frozenset(env.get(name, name) for name in free_vars(t))


def _rename(avoid: FrozenSet[VarName], t: Type, env: Dict[VarName, VarName]) -> Type:
    if isinstance(t, Var):
        target = env.get(t.name)
        return t if target is None or target == t.name else Var(target)
    if isinstance(t, Const):
        return t
    if isinstance(t, Abs):
        fresh = least_canonical(avoid | _mapped_free_vars(t, env))
        inner = dict(env)
        inner[t.binder] = fresh
        return Abs(fresh, t.kind, _rename(avoid, t.body, inner))
    # App: 左侧的绑定变量还要避开右侧的自由变量
    arg_free = _mapped_free_vars(t.arg, env)
    return App(_rename(avoid | arg_free, t.fun, env), _rename(avoid, t.arg, env))


@lru_cache(maxsize=65536)
def _rename_cached(avoid: FrozenSet[VarName], t: Type) -> Type:
    return _rename(avoid, t, {})


def rename(avoid: AbstractSet[VarName], t: Type) -> Type:
    """
    最小重命名 rename_S(T)

    Args:
        avoid: 绑定变量必须避开的变量集合 S
        t: 待重命名的类型

    Returns:
        与 t α 等价、每个绑定变量都取最小可用规范名的类型
    """
    return _rename_cached(frozenset(avoid), t)


def renamed(t: Type) -> Type:
    """rename(∅, T)"""
    return _rename_cached(frozenset(), t)


def is_renamed(t: Type) -> bool:
    return renamed(t) == t


def substitute(t: Type, u: Type, alpha: VarName) -> Type:
    """
    T[U/α]，遇到重新绑定 α 的抽象即停止，不做重命名
    """
    if alpha not in free_vars(t):
        return t
    if isinstance(t, Var):
        return u if t.name == alpha else t
    if isinstance(t, Abs):
        if t.binder == alpha:
            return t
        return Abs(t.binder, t.kind, substitute(t.body, u, alpha))
    if isinstance(t, App):
        return App(substitute(t.fun, u, alpha), substitute(t.arg, u, alpha))
    return t


def instantiate(t: Type, u: Type, alpha: VarName) -> Type:
    """
    避免变量捕获的替换 T[U/α]：先让 T 的绑定变量避开 fv(U) 和 α，再做普通替换
    """
    avoid = set(free_vars(u))
    avoid.add(alpha)
    prepared = rename(avoid, t)
    return renamed(substitute(prepared, u, alpha))
