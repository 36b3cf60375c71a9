"""
类型语法树定义

类型由常量、变量、抽象、应用四种节点构成；μ 与 ∀ 只是常量作用于抽象的语法糖。
所有节点都是不可变的，哈希值在构造时缓存，便于在记忆表中作为键使用。
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union


# ---------------------------------------------------------------- kinds

@dataclass(frozen=True)
class SessionK:
    """会话种类 S"""

    def __str__(self) -> str:
        return "S"


@dataclass(frozen=True)
class FunctionalK:
    """函数式种类 T"""

    def __str__(self) -> str:
        return "T"


@dataclass(frozen=True)
class ArrowK:
    """类型算子的种类 κ ⇒ κ'"""
    domain: "Kind"
    codomain: "Kind"

    def __str__(self) -> str:
        left = str(self.domain)
        if isinstance(self.domain, ArrowK):
            left = f"({left})"
        return f"{left}=>{self.codomain}"


Kind = Union[SessionK, FunctionalK, ArrowK]

S_KIND = SessionK()
T_KIND = FunctionalK()


def is_proper(kind: Kind) -> bool:
    """S 和 T 是仅有的两个恰当种类"""
    return isinstance(kind, (SessionK, FunctionalK))


def arrow_kind(*kinds: Kind) -> Kind:
    """右结合地构造 κ1 ⇒ … ⇒ κn"""
    result = kinds[-1]
    for kind in reversed(kinds[:-1]):
        result = ArrowK(kind, result)
    return result


# ---------------------------------------------------------------- variable names

@dataclass(frozen=True, order=True)
class UserVar:
    """用户书写的变量名"""
    ident: str

    def __str__(self) -> str:
        return self.ident


@dataclass(frozen=True, order=True)
class CanonicalVar:
    """重命名产生的规范变量 $i"""
    index: int

    def __str__(self) -> str:
        return f"${self.index}"


VarName = Union[UserVar, CanonicalVar]


# ---------------------------------------------------------------- constants

class Polarity(Enum):
    IN = "?"
    OUT = "!"

    def flip(self) -> "Polarity":
        return Polarity.OUT if self is Polarity.IN else Polarity.IN


class View(Enum):
    EXTERNAL = "&"
    INTERNAL = "+"

    def flip(self) -> "View":
        return View.INTERNAL if self is View.EXTERNAL else View.EXTERNAL


@dataclass(frozen=True)
class ArrowC:
    pass


@dataclass(frozen=True)
class RecordC:
    labels: Tuple[str, ...]


@dataclass(frozen=True)
class VariantC:
    labels: Tuple[str, ...]


@dataclass(frozen=True)
class ForallC:
    kind: Kind


@dataclass(frozen=True)
class MuC:
    kind: Kind


@dataclass(frozen=True)
class SkipC:
    pass


@dataclass(frozen=True)
class EndC:
    pass


@dataclass(frozen=True)
class MsgC:
    polarity: Polarity


@dataclass(frozen=True)
class SemiC:
    pass


@dataclass(frozen=True)
class ChoiceC:
    view: View
    labels: Tuple[str, ...]


@dataclass(frozen=True)
class DualC:
    pass


TypeConst = Union[ArrowC, RecordC, VariantC, ForallC, MuC, SkipC, EndC,
                  MsgC, SemiC, ChoiceC, DualC]

# 带标签集合的常量：按位置逐个接收字段类型
LABELLED_CONSTS = (RecordC, VariantC, ChoiceC)


# ---------------------------------------------------------------- types

@dataclass(frozen=True)
class Const:
    const: TypeConst
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("Const", self.const)))

    def __hash__(self) -> int:
        return self._hash


@dataclass(frozen=True)
class Var:
    name: VarName
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("Var", self.name)))

    def __hash__(self) -> int:
        return self._hash


@dataclass(frozen=True)
class Abs:
    binder: VarName
    kind: Kind
    body: "Type"
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("Abs", self.binder, self.kind, self.body._hash)))

    def __hash__(self) -> int:
        return self._hash


@dataclass(frozen=True)
class App:
    fun: "Type"
    arg: "Type"
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("App", self.fun._hash, self.arg._hash)))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, App) or self._hash != other._hash:
            return False
        return self.fun == other.fun and self.arg == other.arg


Type = Union[Const, Var, Abs, App]

SKIP = Const(SkipC())
END = Const(EndC())
SEMI = Const(SemiC())
DUAL = Const(DualC())
ARROW = Const(ArrowC())
UNIT = Const(RecordC(()))


# ---------------------------------------------------------------- builders

def var(name: Union[str, VarName]) -> Var:
    if isinstance(name, str):
        name = UserVar(name)
    return Var(name)


def app(fun: Type, *args: Type) -> Type:
    """左结合地构造多参数应用"""
    result = fun
    for arg in args:
        result = App(result, arg)
    return result


def spine(t: Type) -> Tuple[Type, List[Type]]:
    """把 T U1 … Um 拆成头部与参数列表"""
    args: List[Type] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def seq(first: Type, second: Type) -> Type:
    return App(App(SEMI, first), second)


def seq_all(parts: Sequence[Type]) -> Type:
    """右结合地串联多个会话类型，空序列为 Skip"""
    if not parts:
        return SKIP
    result = parts[-1]
    for part in reversed(parts[:-1]):
        result = seq(part, result)
    return result


def dual(t: Type) -> Type:
    return App(DUAL, t)


def msg(polarity: Polarity, payload: Type) -> Type:
    return App(Const(MsgC(polarity)), payload)


def arrow(domain: Type, codomain: Type) -> Type:
    return App(App(ARROW, domain), codomain)


def _sorted_fields(fields: Union[Mapping[str, Type], Iterable[Tuple[str, Type]]]) -> List[Tuple[str, Type]]:
    items = list(fields.items()) if isinstance(fields, Mapping) else list(fields)
    labels = [label for label, _ in items]
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate labels: {labels}")
    return sorted(items, key=lambda item: item[0])


def choice(view: View, fields) -> Type:
    items = _sorted_fields(fields)
    head = Const(ChoiceC(view, tuple(label for label, _ in items)))
    return app(head, *(t for _, t in items))


def record(fields) -> Type:
    items = _sorted_fields(fields)
    head = Const(RecordC(tuple(label for label, _ in items)))
    return app(head, *(t for _, t in items))


def variant(fields) -> Type:
    items = _sorted_fields(fields)
    head = Const(VariantC(tuple(label for label, _ in items)))
    return app(head, *(t for _, t in items))


def pair(first: Type, second: Type) -> Type:
    """(T, U) 是记录 {Fst: T, Snd: U} 的简写"""
    return record({"Fst": first, "Snd": second})


def mu(binder: Union[str, VarName], kind: Kind, body: Type) -> Type:
    if isinstance(binder, str):
        binder = UserVar(binder)
    return App(Const(MuC(kind)), Abs(binder, kind, body))


def forall(binder: Union[str, VarName], kind: Kind, body: Type) -> Type:
    if isinstance(binder, str):
        binder = UserVar(binder)
    return App(Const(ForallC(kind)), Abs(binder, kind, body))


def lam(binder: Union[str, VarName], kind: Kind, body: Type) -> Abs:
    if isinstance(binder, str):
        binder = UserVar(binder)
    return Abs(binder, kind, body)


# ---------------------------------------------------------------- shape queries

def as_seq(t: Type) -> Optional[Tuple[Type, Type]]:
    """若 t 是 T;U 则返回 (T, U)"""
    if isinstance(t, App) and isinstance(t.fun, App) and t.fun.fun == SEMI:
        return t.fun.arg, t.arg
    return None


def as_msg(t: Type) -> Optional[Tuple[Polarity, Type]]:
    if isinstance(t, App) and isinstance(t.fun, Const) and isinstance(t.fun.const, MsgC):
        return t.fun.const.polarity, t.arg
    return None


def as_labelled(t: Type, const_type) -> Optional[Tuple[TypeConst, Dict[str, Type]]]:
    """若 t 是完全应用的选择/记录/变体类型，返回常量与字段表"""
    head, args = spine(t)
    if not isinstance(head, Const) or not isinstance(head.const, const_type):
        return None
    labels = head.const.labels
    if len(args) != len(labels):
        return None
    return head.const, dict(zip(labels, args))


def as_choice(t: Type) -> Optional[Tuple[ChoiceC, Dict[str, Type]]]:
    return as_labelled(t, ChoiceC)


def as_record(t: Type) -> Optional[Tuple[RecordC, Dict[str, Type]]]:
    return as_labelled(t, RecordC)


def as_variant(t: Type) -> Optional[Tuple[VariantC, Dict[str, Type]]]:
    return as_labelled(t, VariantC)


def as_arrow(t: Type) -> Optional[Tuple[Type, Type]]:
    head, args = spine(t)
    if head == ARROW and len(args) == 2:
        return args[0], args[1]
    return None


def as_forall(t: Type) -> Optional[Tuple[Kind, Type]]:
    if isinstance(t, App) and isinstance(t.fun, Const) and isinstance(t.fun.const, ForallC):
        return t.fun.const.kind, t.arg
    return None


def is_var_headed(t: Type) -> bool:
    head, _ = spine(t)
    return isinstance(head, Var)


def is_dual_of_var(t: Type) -> bool:
    """Dual(α T̄)"""
    return isinstance(t, App) and t.fun == DUAL and is_var_headed(t.arg)


def subterms(t: Type) -> Iterable[Type]:
    """后序遍历全部子项"""
    stack: List[Tuple[Type, bool]] = [(t, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            yield node
            continue
        stack.append((node, True))
        if isinstance(node, App):
            stack.append((node.arg, False))
            stack.append((node.fun, False))
        elif isinstance(node, Abs):
            stack.append((node.body, False))
