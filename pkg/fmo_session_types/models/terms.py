"""
项语言与进程的数据结构

项是按值调用的多态 λ 演算加上记录、变体、递归和会话原语；
进程是线程、并行组合与双端点通道限制。
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple, Union

from models.types import Kind, Type


class TermConstKind(Enum):
    """项常量"""
    RECEIVE = "receive"
    SEND = "send"
    SELECT = "select"
    CLOSE = "close"
    FORK = "fork"
    NEW = "new"


@dataclass(frozen=True)
class ConstTerm:
    kind: TermConstKind
    # 仅 select 使用：选择的标签与内选择类型标注
    label: Optional[str] = None
    annotation: Optional[Type] = None


@dataclass(frozen=True)
class VarTerm:
    name: str


@dataclass(frozen=True)
class GlobalRef:
    """对顶层绑定的引用，不受局部替换影响"""
    name: str


@dataclass(frozen=True)
class IntTerm:
    value: int


@dataclass(frozen=True)
class LamTerm:
    param: str
    # 只有在检查模式下（match/case 分支）才允许省略
    param_type: Optional[Type]
    body: "Term"


@dataclass(frozen=True)
class RecTerm:
    name: str
    rec_type: Type
    value: "Term"


@dataclass(frozen=True)
class TypeLamTerm:
    binder: str
    kind: Kind
    body: "Term"


@dataclass(frozen=True)
class AppTerm:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True)
class TypeAppTerm:
    fun: "Term"
    type_arg: Type


@dataclass(frozen=True)
class RecordTerm:
    fields: Tuple[Tuple[str, "Term"], ...] = ()

    def field_map(self):
        return dict(self.fields)


@dataclass(frozen=True)
class LetRecordTerm:
    # (标签, 变量名) 对
    binders: Tuple[Tuple[str, str], ...]
    bound: "Term"
    body: "Term"


@dataclass(frozen=True)
class LetTerm:
    name: str
    bound: "Term"
    body: "Term"


@dataclass(frozen=True)
class VariantTerm:
    label: str
    payload: "Term"
    variant_type: Type


@dataclass(frozen=True)
class CaseTerm:
    scrutinee: "Term"
    handlers: Tuple[Tuple[str, "Term"], ...]


@dataclass(frozen=True)
class MatchTerm:
    scrutinee: "Term"
    handlers: Tuple[Tuple[str, "Term"], ...]


Term = Union[ConstTerm, VarTerm, GlobalRef, IntTerm, LamTerm, RecTerm, TypeLamTerm,
             AppTerm, TypeAppTerm, RecordTerm, LetRecordTerm, LetTerm, VariantTerm,
             CaseTerm, MatchTerm]

UNIT_TERM = RecordTerm(())

# `e1; e2` 展开时使用的绑定名，用户无法写出
SEQ_BINDER = "_seq"


def pair_term(first: "Term", second: "Term") -> RecordTerm:
    return RecordTerm((("Fst", first), ("Snd", second)))


def sorted_fields(fields) -> Tuple[Tuple[str, "Term"], ...]:
    items = list(fields)
    labels = [label for label, _ in items]
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate labels: {labels}")
    return tuple(sorted(items, key=lambda item: item[0]))


# ---------------------------------------------------------------- processes

@dataclass(frozen=True)
class Thread:
    term: Term


@dataclass(frozen=True)
class Par:
    left: "Process"
    right: "Process"


@dataclass(frozen=True)
class Nu:
    """(νxy)p：x 与 y 是同一通道的两个端点"""
    x: str
    y: str
    body: "Process"


Process = Union[Thread, Par, Nu]


# ---------------------------------------------------------------- programs

@dataclass
class ProgramBinding:
    """顶层绑定；没有 body 的绑定是公理"""
    name: str
    signature: Optional[Type]
    body: Optional[Term] = None
    line: int = 0

    @property
    def is_axiom(self) -> bool:
        return self.body is None


@dataclass
class Program:
    bindings: List[ProgramBinding] = field(default_factory=list)

    def binding(self, name: str) -> Optional[ProgramBinding]:
        for entry in self.bindings:
            if entry.name == name:
                return entry
        return None

    def entries(self) -> List[Tuple[str, Type, Optional[Term]]]:
        return [(b.name, b.signature, b.body) for b in self.bindings]

    def definitions(self):
        return {b.name: b.body for b in self.bindings if b.body is not None}


# ---------------------------------------------------------------- outcomes

class RuntimeErrorKind(Enum):
    """运行时错误的七种情形"""
    APP_NON_FUNCTION = "application-of-non-function"
    TAPP_NON_ABSTRACTION = "type-application-of-non-abstraction"
    LET_NON_RECORD = "let-on-non-record"
    CASE_MISMATCH = "case-mismatch"
    SESSION_NON_ENDPOINT = "session-operation-on-non-endpoint"
    SAME_SUBJECT = "two-threads-same-subject"
    CHANNEL_DISAGREE = "endpoints-disagree"


@dataclass(frozen=True)
class ValueOutcome:
    term: Term
    steps: int


@dataclass(frozen=True)
class StuckOutcome:
    process: Process
    steps: int


@dataclass(frozen=True)
class FuelExhausted:
    steps: int


@dataclass(frozen=True)
class RuntimeErrorOutcome:
    kind: RuntimeErrorKind
    location: str
    steps: int


Outcome = Union[ValueOutcome, StuckOutcome, FuelExhausted, RuntimeErrorOutcome]
