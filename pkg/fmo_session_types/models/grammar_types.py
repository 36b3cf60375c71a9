"""
简单文法与有限自动机的数据结构
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple, Union

from models.labels import Label
from models.types import Type

NonTerm = str
Word = Tuple[NonTerm, ...]

# 没有任何产生式的非终结符 ⊥
BOT: NonTerm = "BOT"
EPSILON: Word = ()


@dataclass
class SimpleGrammar:
    """Greibach 范式的简单文法：每个 (非终结符, 标签) 至多一条产生式"""
    start: Word = EPSILON
    productions: Dict[NonTerm, Dict[Label, Word]] = field(default_factory=dict)

    def declare(self, nonterminal: NonTerm) -> None:
        self.productions.setdefault(nonterminal, {})

    def add_production(self, lhs: NonTerm, label: Label, rhs: Word) -> None:
        """
        添加产生式

        Raises:
            ValueError: 同一 (lhs, label) 已有不同的右部，文法不再简单
        """
        if lhs == BOT:
            raise ValueError("BOT has no productions")
        rules = self.productions.setdefault(lhs, {})
        existing = rules.get(label)
        if existing is not None and existing != rhs:
            raise ValueError(f"grammar is not simple at {lhs} {label}")
        rules[label] = tuple(rhs)

    @property
    def nonterminals(self) -> Set[NonTerm]:
        found = set(self.productions)
        found.add(BOT)
        for rules in self.productions.values():
            for rhs in rules.values():
                found.update(rhs)
        found.update(self.start)
        return found

    @property
    def terminals(self) -> Set[Label]:
        return {label for rules in self.productions.values() for label in rules}

    def rules_of(self, nonterminal: NonTerm) -> Dict[Label, Word]:
        return self.productions.get(nonterminal, {})

    def production_count(self) -> int:
        return sum(len(rules) for rules in self.productions.values())

    def transitions(self, word: Word) -> Dict[Label, Word]:
        """Xδ —a→ γδ 对每条 X —a→ γ"""
        if not word:
            return {}
        head, rest = word[0], word[1:]
        return {label: rhs + rest for label, rhs in self.rules_of(head).items()}

    def __eq__(self, other) -> bool:
        if not isinstance(other, SimpleGrammar):
            return NotImplemented
        mine = {lhs: rules for lhs, rules in self.productions.items() if rules}
        theirs = {lhs: rules for lhs, rules in other.productions.items() if rules}
        return self.start == other.start and mine == theirs


@dataclass(frozen=True)
class Finite:
    """有限范数"""
    n: int


@dataclass(frozen=True)
class Unnormed:
    """无法到达空字"""


NormValue = Union[Finite, Unnormed]

UNNORMED = Unnormed()


@dataclass
class Fsa:
    """确定性自动机：状态是重命名后的类型，edges[s][a] 为 s —a→ 的目标状态"""
    initial: int = 0
    states: List[Type] = field(default_factory=list)
    edges: Dict[int, Dict[Label, int]] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def delta(self) -> Dict[Tuple[int, Label], int]:
        return {(source, label): target
                for source, out in self.edges.items() for label, target in out.items()}

    def outgoing(self, state: int) -> Dict[Label, int]:
        return self.edges.get(state, {})

    def step(self, state: int, label: Label) -> Optional[int]:
        return self.outgoing(state).get(label)
