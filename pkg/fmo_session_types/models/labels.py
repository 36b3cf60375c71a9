"""
迁移标签与等价判定结果

标签对应类型 LTS 中的三类迁移：变量头、常量头、抽象；
判定结果是三值的：互模拟、不互模拟（附区分迹）、未知（附原因）
"""

from dataclasses import dataclass
from typing import Tuple, Union

from models.types import Kind, TypeConst, VarName


@dataclass(frozen=True)
class VarHead:
    """α_j：头部为变量的迁移"""
    name: VarName
    index: int


@dataclass(frozen=True)
class ConstHead:
    """ι_j：头部为常量的迁移"""
    const: TypeConst
    index: int


@dataclass(frozen=True)
class AbsLabel:
    """λα:κ：抽象的迁移"""
    binder: VarName
    kind: Kind


Label = Union[VarHead, ConstHead, AbsLabel]


@dataclass(frozen=True)
class Bisimilar:
    """判定互模拟成立，evidence 记录由哪个阶段给出以及规模"""
    evidence: str

    @property
    def name(self) -> str:
        return "Bisimilar"


@dataclass(frozen=True)
class NotBisimilar:
    """判定不互模拟，trace 可以在类型 LTS 中重放"""
    trace: Tuple[Label, ...]

    @property
    def name(self) -> str:
        return "NotBisimilar"


@dataclass(frozen=True)
class Unknown:
    """资源上限耗尽，无法给出判定"""
    reason: str

    @property
    def name(self) -> str:
        return "Unknown"


Verdict = Union[Bisimilar, NotBisimilar, Unknown]


def is_decisive(verdict: Verdict) -> bool:
    return not isinstance(verdict, Unknown)
