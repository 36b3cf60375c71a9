"""
项上的通用操作：值判定、变量替换、类型替换、类型标注遍历
"""

from typing import Callable, FrozenSet, Optional, Set

from core.renaming import instantiate
from models.terms import (
    AppTerm, CaseTerm, ConstTerm, GlobalRef, IntTerm, LamTerm, LetRecordTerm, LetTerm,
    MatchTerm, RecordTerm, RecTerm, Term, TermConstKind, TypeAppTerm, TypeLamTerm,
    VariantTerm, VarTerm,
)
from models.types import Type, UserVar


def is_const(t: Term, kind: TermConstKind) -> bool:
    return isinstance(t, ConstTerm) and t.kind is kind


def session_partial(t: Term) -> bool:
    """receive[T]、receive[T][U]、send[T]、send[T] v、send[T] v [U]"""
    if isinstance(t, TypeAppTerm):
        inner = t.fun
        if is_const(inner, TermConstKind.RECEIVE) or is_const(inner, TermConstKind.SEND):
            return True
        if isinstance(inner, TypeAppTerm) and is_const(inner.fun, TermConstKind.RECEIVE):
            return True
        if isinstance(inner, AppTerm) and _is_send_t(inner.fun) and is_value(inner.arg):
            return True
        return False
    if isinstance(t, AppTerm):
        return _is_send_t(t.fun) and is_value(t.arg)
    return False


def _is_send_t(t: Term) -> bool:
    return isinstance(t, TypeAppTerm) and is_const(t.fun, TermConstKind.SEND)


def is_value(t: Term) -> bool:
    """按值调用的值：常量、变量、抽象、rec、Λ、值记录、值变体与部分应用的 send/receive"""
    if isinstance(t, (ConstTerm, VarTerm, IntTerm, LamTerm, RecTerm, TypeLamTerm)):
        return True
    if isinstance(t, RecordTerm):
        return all(is_value(field) for _, field in t.fields)
    if isinstance(t, VariantTerm):
        return is_value(t.payload)
    if isinstance(t, (AppTerm, TypeAppTerm)):
        return session_partial(t)
    return False


def map_types(t: Term, f: Callable[[Type], Type]) -> Term:
    """对项中出现的每个类型标注应用 f"""
    if isinstance(t, ConstTerm):
        if t.annotation is None:
            return t
        return ConstTerm(t.kind, t.label, f(t.annotation))
    if isinstance(t, (VarTerm, GlobalRef, IntTerm)):
        return t
    if isinstance(t, LamTerm):
        param_type = None if t.param_type is None else f(t.param_type)
        return LamTerm(t.param, param_type, map_types(t.body, f))
    if isinstance(t, RecTerm):
        return RecTerm(t.name, f(t.rec_type), map_types(t.value, f))
    if isinstance(t, TypeLamTerm):
        return TypeLamTerm(t.binder, t.kind, map_types(t.body, f))
    if isinstance(t, AppTerm):
        return AppTerm(map_types(t.fun, f), map_types(t.arg, f))
    if isinstance(t, TypeAppTerm):
        return TypeAppTerm(map_types(t.fun, f), f(t.type_arg))
    if isinstance(t, RecordTerm):
        return RecordTerm(tuple((label, map_types(field, f)) for label, field in t.fields))
    if isinstance(t, LetRecordTerm):
        return LetRecordTerm(t.binders, map_types(t.bound, f), map_types(t.body, f))
    if isinstance(t, LetTerm):
        return LetTerm(t.name, map_types(t.bound, f), map_types(t.body, f))
    if isinstance(t, VariantTerm):
        return VariantTerm(t.label, map_types(t.payload, f), f(t.variant_type))
    if isinstance(t, CaseTerm):
        return CaseTerm(map_types(t.scrutinee, f), _map_handlers(t.handlers, lambda h: map_types(h, f)))
    if isinstance(t, MatchTerm):
        return MatchTerm(map_types(t.scrutinee, f), _map_handlers(t.handlers, lambda h: map_types(h, f)))
    raise TypeError(f"not a term: {t!r}")


def _map_handlers(handlers, f):
    return tuple((label, f(handler)) for label, handler in handlers)


def free_term_vars(t: Term) -> FrozenSet[str]:
    """项中自由出现的局部变量（GlobalRef 不计入）"""
    found: Set[str] = set()
    _collect(t, frozenset(), found)
    return frozenset(found)


def _collect(t: Term, bound: FrozenSet[str], found: Set[str]) -> None:
    if isinstance(t, VarTerm):
        if t.name not in bound:
            found.add(t.name)
    elif isinstance(t, LamTerm):
        _collect(t.body, bound | {t.param}, found)
    elif isinstance(t, RecTerm):
        _collect(t.value, bound | {t.name}, found)
    elif isinstance(t, TypeLamTerm):
        _collect(t.body, bound, found)
    elif isinstance(t, AppTerm):
        _collect(t.fun, bound, found)
        _collect(t.arg, bound, found)
    elif isinstance(t, TypeAppTerm):
        _collect(t.fun, bound, found)
    elif isinstance(t, RecordTerm):
        for _, field in t.fields:
            _collect(field, bound, found)
    elif isinstance(t, LetRecordTerm):
        _collect(t.bound, bound, found)
        _collect(t.body, bound | {name for _, name in t.binders}, found)
    elif isinstance(t, LetTerm):
        _collect(t.bound, bound, found)
        _collect(t.body, bound | {t.name}, found)
    elif isinstance(t, VariantTerm):
        _collect(t.payload, bound, found)
    elif isinstance(t, (CaseTerm, MatchTerm)):
        _collect(t.scrutinee, bound, found)
        for _, handler in t.handlers:
            _collect(handler, bound, found)


def subst(t: Term, value: Term, name: str) -> Term:
    """
    t[value/name]

    value 在运行时总是封闭的（只含通道端点），端点名不会与用户变量冲突，
    因此这里不做换名。
    """
    if isinstance(t, VarTerm):
        return value if t.name == name else t
    if isinstance(t, (ConstTerm, GlobalRef, IntTerm)):
        return t
    if isinstance(t, LamTerm):
        if t.param == name:
            return t
        return LamTerm(t.param, t.param_type, subst(t.body, value, name))
    if isinstance(t, RecTerm):
        if t.name == name:
            return t
        return RecTerm(t.name, t.rec_type, subst(t.value, value, name))
    if isinstance(t, TypeLamTerm):
        return TypeLamTerm(t.binder, t.kind, subst(t.body, value, name))
    if isinstance(t, AppTerm):
        return AppTerm(subst(t.fun, value, name), subst(t.arg, value, name))
    if isinstance(t, TypeAppTerm):
        return TypeAppTerm(subst(t.fun, value, name), t.type_arg)
    if isinstance(t, RecordTerm):
        return RecordTerm(tuple((label, subst(field, value, name)) for label, field in t.fields))
    if isinstance(t, LetRecordTerm):
        body = t.body
        if name not in {binder for _, binder in t.binders}:
            body = subst(body, value, name)
        return LetRecordTerm(t.binders, subst(t.bound, value, name), body)
    if isinstance(t, LetTerm):
        body = t.body if t.name == name else subst(t.body, value, name)
        return LetTerm(t.name, subst(t.bound, value, name), body)
    if isinstance(t, VariantTerm):
        return VariantTerm(t.label, subst(t.payload, value, name), t.variant_type)
    if isinstance(t, CaseTerm):
        return CaseTerm(subst(t.scrutinee, value, name),
                        _map_handlers(t.handlers, lambda h: subst(h, value, name)))
    if isinstance(t, MatchTerm):
        return MatchTerm(subst(t.scrutinee, value, name),
                         _map_handlers(t.handlers, lambda h: subst(h, value, name)))
    raise TypeError(f"not a term: {t!r}")


def subst_type(t: Term, u: Type, binder: str) -> Term:
    """项中的类型替换 t[U/α]，遇到重新绑定 α 的 Λ 即停止"""
    alpha = UserVar(binder)
    if isinstance(t, TypeLamTerm):
        if t.binder == binder:
            return t
        return TypeLamTerm(t.binder, t.kind, subst_type(t.body, u, binder))
    if isinstance(t, LamTerm):
        param_type = None if t.param_type is None else instantiate(t.param_type, u, alpha)
        return LamTerm(t.param, param_type, subst_type(t.body, u, binder))
    if isinstance(t, RecTerm):
        return RecTerm(t.name, instantiate(t.rec_type, u, alpha), subst_type(t.value, u, binder))
    if isinstance(t, ConstTerm):
        if t.annotation is None:
            return t
        return ConstTerm(t.kind, t.label, instantiate(t.annotation, u, alpha))
    if isinstance(t, (VarTerm, GlobalRef, IntTerm)):
        return t
    if isinstance(t, AppTerm):
        return AppTerm(subst_type(t.fun, u, binder), subst_type(t.arg, u, binder))
    if isinstance(t, TypeAppTerm):
        return TypeAppTerm(subst_type(t.fun, u, binder), instantiate(t.type_arg, u, alpha))
    if isinstance(t, RecordTerm):
        return RecordTerm(tuple((label, subst_type(field, u, binder)) for label, field in t.fields))
    if isinstance(t, LetRecordTerm):
        return LetRecordTerm(t.binders, subst_type(t.bound, u, binder), subst_type(t.body, u, binder))
    if isinstance(t, LetTerm):
        return LetTerm(t.name, subst_type(t.bound, u, binder), subst_type(t.body, u, binder))
    if isinstance(t, VariantTerm):
        return VariantTerm(t.label, subst_type(t.payload, u, binder), instantiate(t.variant_type, u, alpha))
    if isinstance(t, CaseTerm):
        return CaseTerm(subst_type(t.scrutinee, u, binder),
                        _map_handlers(t.handlers, lambda h: subst_type(h, u, binder)))
    if isinstance(t, MatchTerm):
        return MatchTerm(subst_type(t.scrutinee, u, binder),
                         _map_handlers(t.handlers, lambda h: subst_type(h, u, binder)))
    raise TypeError(f"not a term: {t!r}")


def resolve_globals(t: Term, globals_: FrozenSet[str], bound: FrozenSet[str] = frozenset()) -> Term:
    """不被局部绑定遮蔽的顶层名字改写为 GlobalRef"""
    if isinstance(t, VarTerm):
        if t.name not in bound and t.name in globals_:
            return GlobalRef(t.name)
        return t
    if isinstance(t, (ConstTerm, GlobalRef, IntTerm)):
        return t
    if isinstance(t, LamTerm):
        return LamTerm(t.param, t.param_type, resolve_globals(t.body, globals_, bound | {t.param}))
    if isinstance(t, RecTerm):
        return RecTerm(t.name, t.rec_type, resolve_globals(t.value, globals_, bound | {t.name}))
    if isinstance(t, TypeLamTerm):
        return TypeLamTerm(t.binder, t.kind, resolve_globals(t.body, globals_, bound))
    if isinstance(t, AppTerm):
        return AppTerm(resolve_globals(t.fun, globals_, bound), resolve_globals(t.arg, globals_, bound))
    if isinstance(t, TypeAppTerm):
        return TypeAppTerm(resolve_globals(t.fun, globals_, bound), t.type_arg)
    if isinstance(t, RecordTerm):
        return RecordTerm(tuple((label, resolve_globals(field, globals_, bound)) for label, field in t.fields))
    if isinstance(t, LetRecordTerm):
        inner = bound | {name for _, name in t.binders}
        return LetRecordTerm(t.binders, resolve_globals(t.bound, globals_, bound),
                             resolve_globals(t.body, globals_, inner))
    if isinstance(t, LetTerm):
        return LetTerm(t.name, resolve_globals(t.bound, globals_, bound),
                       resolve_globals(t.body, globals_, bound | {t.name}))
    if isinstance(t, VariantTerm):
        return VariantTerm(t.label, resolve_globals(t.payload, globals_, bound), t.variant_type)
    if isinstance(t, CaseTerm):
        return CaseTerm(resolve_globals(t.scrutinee, globals_, bound),
                        _map_handlers(t.handlers, lambda h: resolve_globals(h, globals_, bound)))
    if isinstance(t, MatchTerm):
        return MatchTerm(resolve_globals(t.scrutinee, globals_, bound),
                         _map_handlers(t.handlers, lambda h: resolve_globals(h, globals_, bound)))
    raise TypeError(f"not a term: {t!r}")


def subject(t: Term) -> Optional[Term]:
    """
    会话操作的主体：receive[T][U] x、send[T] v [U] x、match x …、select l [T] x、close x 中的 x

    Returns:
        主体项（不一定是端点）；不是会话操作时返回 None
    """
    if isinstance(t, MatchTerm):
        return t.scrutinee
    if not isinstance(t, AppTerm):
        return None
    fun = t.fun
    if is_const(fun, TermConstKind.CLOSE):
        return t.arg
    if isinstance(fun, ConstTerm) and fun.kind is TermConstKind.SELECT:
        return t.arg
    if isinstance(fun, TypeAppTerm) and isinstance(fun.fun, TypeAppTerm) \
            and is_const(fun.fun.fun, TermConstKind.RECEIVE):
        return t.arg
    if isinstance(fun, TypeAppTerm) and isinstance(fun.fun, AppTerm) and _is_send_t(fun.fun.fun):
        return t.arg
    return None
