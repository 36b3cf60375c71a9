"""
项与进程的打印

输出使用程序文件的表层语法；`e1; e2` 的展开形式打印回分号，Fst/Snd 记录打印为序对。
"""

from models.terms import (
    AppTerm, CaseTerm, ConstTerm, GlobalRef, IntTerm, LamTerm, LetRecordTerm, LetTerm,
    MatchTerm, Nu, Par, Process, RecordTerm, RecTerm, Term, TermConstKind, Thread,
    SEQ_BINDER, TypeAppTerm, TypeLamTerm, VariantTerm, VarTerm,
)
from models.types import Type, Var, as_arrow, as_record, as_variant
from utils.type_printer import format_kind, format_type

# 优先级：0 绑定类（let/fun/match/分号），1 应用，2 原子
_BINDING, _APPLICATION, _ATOM = 0, 1, 2


def _type_atom(t: Type) -> str:
    text = format_type(t)
    if isinstance(t, Var) or as_variant(t) is not None or as_record(t) is not None:
        return text
    return f"({text})"


def _param_type(t: Type) -> str:
    text = format_type(t)
    if as_arrow(t) is not None or text.startswith(("\\", "mu ", "forall ")):
        return f"({text})"
    return text


def _sequence_parts(t: Term):
    """识别 (λ_seq:{}. let {} = _seq in e2) e1"""
    if not isinstance(t, AppTerm) or not isinstance(t.fun, LamTerm) or t.fun.param != SEQ_BINDER:
        return None
    body = t.fun.body
    if isinstance(body, LetRecordTerm) and not body.binders and body.bound == VarTerm(SEQ_BINDER):
        return t.arg, body.body
    return None


def _handlers(handlers) -> str:
    parts = []
    for label, handler in handlers:
        if isinstance(handler, LamTerm) and handler.param_type is None:
            parts.append(f"{label} {handler.param} -> {_render(handler.body, _BINDING)}")
        else:
            parts.append(f"{label} = {_render(handler, _BINDING)}")
    return "{" + ", ".join(parts) + "}"


def _render(t: Term, required: int) -> str:
    text, level = _format(t)
    if level < required:
        return f"({text})"
    return text


def _format(t: Term):
    if isinstance(t, ConstTerm):
        if t.kind is TermConstKind.SELECT:
            return f"select {t.label} [{format_type(t.annotation)}]", _APPLICATION
        return t.kind.value, _ATOM
    if isinstance(t, (VarTerm, GlobalRef)):
        return t.name, _ATOM
    if isinstance(t, IntTerm):
        return str(t.value), _ATOM
    sequence = _sequence_parts(t)
    if sequence is not None:
        first, second = sequence
        return f"{_render(first, _APPLICATION)}; {_render(second, _BINDING)}", _BINDING
    if isinstance(t, LamTerm):
        param_type = "_" if t.param_type is None else _param_type(t.param_type)
        return f"fun {t.param}:{param_type} -> {_render(t.body, _BINDING)}", _BINDING
    if isinstance(t, RecTerm):
        return f"rec {t.name}:{format_type(t.rec_type)}. {_render(t.value, _BINDING)}", _BINDING
    if isinstance(t, TypeLamTerm):
        return f"Fun {t.binder}:{format_kind(t.kind)} -> {_render(t.body, _BINDING)}", _BINDING
    if isinstance(t, AppTerm):
        return f"{_render(t.fun, _APPLICATION)} {_render(t.arg, _ATOM)}", _APPLICATION
    if isinstance(t, TypeAppTerm):
        return f"{_render(t.fun, _APPLICATION)} [{format_type(t.type_arg)}]", _APPLICATION
    if isinstance(t, RecordTerm):
        labels = tuple(label for label, _ in t.fields)
        if labels == ("Fst", "Snd"):
            first, second = (field for _, field in t.fields)
            return f"({_render(first, _BINDING)}, {_render(second, _BINDING)})", _ATOM
        inner = ", ".join(f"{label} = {_render(field, _BINDING)}" for label, field in t.fields)
        return "{" + inner + "}", _ATOM
    if isinstance(t, LetRecordTerm):
        pattern = "{" + ", ".join(f"{label} = {name}" for label, name in t.binders) + "}"
        if tuple(label for label, _ in t.binders) == ("Fst", "Snd"):
            pattern = f"({t.binders[0][1]}, {t.binders[1][1]})"
        return (f"let {pattern} = {_render(t.bound, _BINDING)} in {_render(t.body, _BINDING)}",
                _BINDING)
    if isinstance(t, LetTerm):
        return f"let {t.name} = {_render(t.bound, _BINDING)} in {_render(t.body, _BINDING)}", _BINDING
    if isinstance(t, VariantTerm):
        return f"tag {t.label} {_render(t.payload, _ATOM)} as {_type_atom(t.variant_type)}", _APPLICATION
    if isinstance(t, CaseTerm):
        return f"case {_render(t.scrutinee, _BINDING)} of {_handlers(t.handlers)}", _BINDING
    if isinstance(t, MatchTerm):
        return f"match {_render(t.scrutinee, _BINDING)} with {_handlers(t.handlers)}", _BINDING
    raise TypeError(f"not a term: {t!r}")


def format_term(t: Term) -> str:
    return _render(t, _BINDING)


def format_process(p: Process) -> str:
    if isinstance(p, Thread):
        return format_term(p.term)
    if isinstance(p, Par):
        return f"{format_process(p.left)} | {format_process(p.right)}"
    if isinstance(p, Nu):
        return f"(new {p.x} {p.y}) ({format_process(p.body)})"
    raise TypeError(f"not a process: {p!r}")
