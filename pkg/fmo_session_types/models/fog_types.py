"""
一阶文法 (first-order grammar) 的数据结构

表达式是带元数的非终结符作用于子表达式，或者产生式体中的形参 x1..xm
"""

from dataclasses import dataclass, field
from typing import Dict, Set, Tuple, Union


@dataclass(frozen=True)
class FogVar:
    """产生式体中的形参"""
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class FogApply:
    """非终结符作用于参数"""
    head: str
    args: Tuple["FogExpr", ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.head
        parts = []
        for arg in self.args:
            text = str(arg)
            if isinstance(arg, FogApply) and arg.args:
                text = f"({text})"
            parts.append(text)
        return f"{self.head} {' '.join(parts)}"


FogExpr = Union[FogVar, FogApply]


def formals(arity: int) -> Tuple[str, ...]:
    """元数为 m 的非终结符的形参名 x1..xm"""
    return tuple(f"x{i}" for i in range(1, arity + 1))


@dataclass
class Fog:
    """确定性一阶文法"""
    arity: Dict[str, int] = field(default_factory=dict)
    productions: Dict[Tuple[str, str], FogExpr] = field(default_factory=dict)
    initial: FogExpr = None

    @property
    def nonterminals(self) -> Set[str]:
        return set(self.arity)

    @property
    def terminals(self) -> Set[str]:
        return {terminal for _, terminal in self.productions}

    @property
    def variables(self) -> Set[str]:
        found: Set[str] = set()
        for head in self.arity:
            found.update(formals(self.arity[head]))
        return found

    def rules_of(self, head: str) -> Dict[str, FogExpr]:
        return {terminal: body for (lhs, terminal), body in self.productions.items() if lhs == head}
