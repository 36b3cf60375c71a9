"""
类型与种类的打印

输出可以被 parse_type 重新解析，且对已重命名的类型满足 parse(format(T)) == T
"""

from models.types import (
    Abs, App, ArrowC, ArrowK, ChoiceC, Const, DualC, EndC, ForallC, Kind, MsgC, MuC,
    RecordC, SemiC, SkipC, Type, Var, VariantC, spine,
)

BINDER, ARROW_LEVEL, SEQ_LEVEL, APP_LEVEL, PREFIX_LEVEL, ATOM_LEVEL = range(6)


def format_kind(kind: Kind) -> str:
    if isinstance(kind, ArrowK):
        left = format_kind(kind.domain)
        if isinstance(kind.domain, ArrowK):
            left = f"({left})"
        return f"{left}=>{format_kind(kind.codomain)}"
    return str(kind)


def _brackets(const) -> tuple:
    if isinstance(const, ChoiceC):
        return f"{const.view.value}{{", "}"
    if isinstance(const, RecordC):
        return "{", "}"
    return "<", ">"


def format_const(const) -> str:
    """常量单独出现时的写法（算子截面）"""
    if isinstance(const, SkipC):
        return "Skip"
    if isinstance(const, EndC):
        return "End"
    if isinstance(const, DualC):
        return "Dual"
    if isinstance(const, SemiC):
        return "(;)"
    if isinstance(const, ArrowC):
        return "(->)"
    if isinstance(const, MsgC):
        return f"({const.polarity.value})"
    if isinstance(const, (ChoiceC, RecordC, VariantC)):
        opening, closing = _brackets(const)
        if not const.labels:
            return f"{opening}{closing}"
        return f"({opening}{','.join(const.labels)}{closing})"
    if isinstance(const, MuC):
        return f"(mu {format_kind(const.kind)})"
    if isinstance(const, ForallC):
        return f"(forall {format_kind(const.kind)})"
    raise ValueError(f"unknown constant {const!r}")


def _wrap(t: Type, required: int) -> str:
    level, text = _render(t)
    return f"({text})" if level < required else text


def _render(t: Type):
    if isinstance(t, Var):
        return ATOM_LEVEL, str(t.name)
    if isinstance(t, Const):
        return ATOM_LEVEL, format_const(t.const)
    if isinstance(t, Abs):
        return BINDER, f"\\{t.binder}:{format_kind(t.kind)}. {_wrap(t.body, BINDER)}"

    head, args = spine(t)
    if isinstance(head, Const):
        const = head.const
        if isinstance(const, (MuC, ForallC)) and len(args) == 1:
            body = args[0]
            if isinstance(body, Abs) and body.kind == const.kind:
                keyword = "mu" if isinstance(const, MuC) else "forall"
                return BINDER, (f"{keyword} {body.binder}:{format_kind(body.kind)}. "
                                f"{_wrap(body.body, BINDER)}")
        if isinstance(const, SemiC) and len(args) == 2:
            return SEQ_LEVEL, f"{_wrap(args[0], APP_LEVEL)}; {_wrap(args[1], SEQ_LEVEL)}"
        if isinstance(const, ArrowC) and len(args) == 2:
            return ARROW_LEVEL, f"{_wrap(args[0], SEQ_LEVEL)} -> {_wrap(args[1], ARROW_LEVEL)}"
        if isinstance(const, MsgC) and len(args) == 1:
            return PREFIX_LEVEL, f"{const.polarity.value}{_wrap(args[0], ATOM_LEVEL)}"
        if isinstance(const, (ChoiceC, RecordC, VariantC)) and const.labels and len(args) == len(const.labels):
            opening, closing = _brackets(const)
            fields = ", ".join(f"{label}: {_wrap(body, BINDER)}"
                               for label, body in zip(const.labels, args))
            return ATOM_LEVEL, f"{opening}{fields}{closing}"

    return APP_LEVEL, f"{_wrap(t.fun, APP_LEVEL)} {_wrap(t.arg, PREFIX_LEVEL)}"


def format_type(t: Type) -> str:
    """打印类型的表层语法"""
    return _render(t)[1]
