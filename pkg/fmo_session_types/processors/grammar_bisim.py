"""
简单文法的互模拟判定

展开树算法：节点是若干待证明的字对，宽度优先地交替做
展开（匹配两侧的迁移）与化简（去掉自反对、去掉祖先对同余闭包中的对、
按范数拆分前缀产生兄弟分支）。某个分支到达空节点即互模拟成立。
否定结论一律由直接的成对宽度优先搜索给出，迹因此总是可以重放的。
"""

import math
from collections import deque
from dataclasses import dataclass
from typing import Deque, Dict, FrozenSet, List, Optional, Set, Tuple

from config.base_config import EquivalenceConfig
from models.grammar_types import BOT, Finite, NonTerm, NormValue, SimpleGrammar, UNNORMED, Word
from models.labels import Bisimilar, Label, NotBisimilar, Unknown, Verdict
from processors.type_lts import label_sort_key
from utils.log_utils import get_logger

logger = get_logger(__name__)

DEFAULT_NODE_CAP = EquivalenceConfig.get("node_cap", 100_000)
DEFAULT_DEPTH_CAP = EquivalenceConfig.get("depth_cap", 1000)

# 同余闭包检查的改写搜索规模
_REWRITE_LIMIT = 256
_REWRITE_SLACK = 4

Pair = Tuple[Word, Word]


def _raw_norms(grammar: SimpleGrammar) -> Dict[NonTerm, float]:
    values: Dict[NonTerm, float] = {name: math.inf for name in grammar.nonterminals}
    changed = True
    while changed:
        changed = False
        for lhs, rules in grammar.productions.items():
            for rhs in rules.values():
                candidate = 1 + sum(values.get(symbol, math.inf) for symbol in rhs)
                if candidate < values[lhs]:
                    values[lhs] = candidate
                    changed = True
    return values


def norms(grammar: SimpleGrammar) -> Dict[NonTerm, NormValue]:
    """
    每个非终结符的范数（最少几步到达空字）

    Returns:
        非终结符到 Finite(n) 或 UNNORMED 的映射，⊥ 总是 UNNORMED
    """
    return {name: UNNORMED if value == math.inf else Finite(int(value))
            for name, value in _raw_norms(grammar).items()}


def grammar_transitions(grammar: SimpleGrammar, word: Word) -> Dict[Label, Word]:
    """文法 LTS：Xδ —a→ γδ"""
    return grammar.transitions(word)


def check_simple(grammar: SimpleGrammar) -> None:
    """
    检查文法的结构约束

    Raises:
        ValueError: ⊥ 带有产生式，或右部引用了未声明的非终结符
    """
    if grammar.rules_of(BOT):
        raise ValueError("BOT must not have productions")
    declared = set(grammar.productions) | {BOT}
    for lhs, rules in grammar.productions.items():
        for label, rhs in rules.items():
            missing = [symbol for symbol in rhs if symbol not in declared]
            if missing:
                raise ValueError(f"production {lhs} {label} refers to undeclared {missing}")
    undeclared = [symbol for symbol in grammar.start if symbol not in declared]
    if undeclared:
        raise ValueError(f"start word refers to undeclared {undeclared}")


class _Checker:
    """一次判定使用的文法、范数与改写缓存"""

    def __init__(self, grammar: SimpleGrammar):
        self.grammar = grammar
        self.norm = _raw_norms(grammar)

    def prune(self, word: Word) -> Word:
        """无范数符号之后的部分永远不会被执行"""
        for position, symbol in enumerate(word):
            if self.norm.get(symbol, math.inf) == math.inf:
                return word[:position + 1]
        return word

    def moves(self, word: Word) -> Dict[Label, Word]:
        return {label: self.prune(target) for label, target in self.grammar.transitions(word).items()}

    def word_norm(self, word: Word) -> float:
        return sum(self.norm.get(symbol, math.inf) for symbol in word)

    def min_path(self, symbol: NonTerm) -> List[Label]:
        """沿范数递减的产生式到达空字的标签序列"""
        path: List[Label] = []
        word: Word = (symbol,)
        while word:
            head, rest = word[0], word[1:]
            target = self.norm[head] - 1
            for label in sorted(self.grammar.rules_of(head), key=label_sort_key):
                rhs = self.grammar.rules_of(head)[label]
                if self.word_norm(rhs) == target:
                    path.append(label)
                    word = rhs + rest
                    break
            else:
                break
        return path

    def run(self, word: Word, path: List[Label]) -> Optional[Word]:
        for label in path:
            moves = self.grammar.transitions(word)
            if label not in moves:
                return None
            word = moves[label]
        return word

    def split(self, pair: Pair) -> Optional[Tuple[Pair, Pair]]:
        """
        前缀拆分：Xα ≈ Yβ 且 norm(X) ≤ norm(Y) 时，取 X 的最短终止路径 w，
        Y —w→ θ，则原对可由 (α, θβ) 与 (Xθ, Y) 代替
        """
        left, right = pair
        if not left or not right or left[0] == right[0]:
            return None
        x, y = left[0], right[0]
        if self.norm[x] == math.inf or self.norm[y] == math.inf:
            return None
        if self.norm[x] <= self.norm[y]:
            theta = self.run((y,), self.min_path(x))
            if theta is None:
                return None
            return ((self.prune(left[1:]), self.prune(theta + right[1:])),
                    (self.prune((x,) + theta), (y,)))
        theta = self.run((x,), self.min_path(y))
        if theta is None:
            return None
        return ((self.prune(theta + left[1:]), self.prune(right[1:])),
                ((x,), self.prune((y,) + theta)))

    def congruent(self, pair: Pair, rules: FrozenSet[Pair]) -> bool:
        """有界改写搜索：pair 是否在 rules 生成的同余中"""
        left, right = pair
        if left == right:
            return True
        if pair in rules or (right, left) in rules:
            return True
        usable = [(a, b) for a, b in rules if a and b]
        if not usable:
            return False
        bound = max(len(left), len(right)) + _REWRITE_SLACK
        seen: Set[Word] = {left}
        queue: Deque[Word] = deque([left])
        while queue and len(seen) < _REWRITE_LIMIT:
            current = queue.popleft()
            for a, b in usable:
                for source, target in ((a, b), (b, a)):
                    for rewritten in _rewrite(current, source, target):
                        if rewritten == right:
                            return True
                        if len(rewritten) <= bound and rewritten not in seen:
                            seen.add(rewritten)
                            queue.append(rewritten)
        return False


def _rewrite(word: Word, source: Word, target: Word):
    size = len(source)
    for position in range(len(word) - size + 1):
        if word[position:position + size] == source:
            yield word[:position] + target + word[position + size:]


@dataclass(frozen=True)
class _Node:
    pairs: FrozenSet[Pair]
    ancestors: FrozenSet[Pair]
    depth: int
    may_split: bool


def _expand(checker: _Checker, node: _Node) -> Optional[FrozenSet[Pair]]:
    """匹配每一对的迁移，标签集合不同则该分支被否定"""
    children: Set[Pair] = set()
    for left, right in node.pairs:
        left_moves = checker.moves(left)
        right_moves = checker.moves(right)
        if set(left_moves) != set(right_moves):
            return None
        for label in left_moves:
            children.add((left_moves[label], right_moves[label]))
    return frozenset(children)


def _simplify(checker: _Checker, pairs: FrozenSet[Pair], ancestors: FrozenSet[Pair]) -> FrozenSet[Pair]:
    kept = set()
    for left, right in pairs:
        if left == right:
            continue
        if (right, left) in kept or checker.congruent((left, right), ancestors):
            continue
        kept.add((left, right))
    return frozenset(kept)


def _split_all(checker: _Checker, pairs: FrozenSet[Pair]) -> Optional[FrozenSet[Pair]]:
    result: Set[Pair] = set()
    changed = False
    for pair in sorted(pairs):
        parts = checker.split(pair)
        if parts is None:
            result.add(pair)
            continue
        changed = True
        result.update(part for part in parts if part[0] != part[1])
    return frozenset(result) if changed else None


def refute(grammar: SimpleGrammar, left: Word, right: Word,
           node_cap: int = DEFAULT_NODE_CAP) -> Optional[Tuple[Label, ...]]:
    """
    直接的成对宽度优先搜索，寻找最短区分迹

    Returns:
        区分迹；在 node_cap 个状态对内找不到时返回 None
    """
    checker = _Checker(grammar)
    start = (checker.prune(left), checker.prune(right))
    seen: Set[Pair] = {start}
    queue: Deque[Tuple[Pair, Tuple[Label, ...]]] = deque([(start, ())])
    while queue:
        (current_left, current_right), path = queue.popleft()
        if current_left == current_right:
            continue
        left_moves = checker.moves(current_left)
        right_moves = checker.moves(current_right)
        only = sorted(set(left_moves) ^ set(right_moves), key=label_sort_key)
        if only:
            left_only = [label for label in only if label in left_moves]
            return path + ((left_only or only)[0],)
        for label in sorted(left_moves, key=label_sort_key):
            successor = (left_moves[label], right_moves[label])
            if successor in seen or len(seen) >= node_cap:
                continue
            seen.add(successor)
            queue.append((successor, path + (label,)))
    return None


def grammar_bisim(grammar: SimpleGrammar, left: Word, right: Word,
                  node_cap: int = DEFAULT_NODE_CAP, depth_cap: int = DEFAULT_DEPTH_CAP) -> Verdict:
    """
    判定两个字在文法 LTS 中是否互模拟

    Args:
        grammar: 简单文法
        left, right: 待比较的两个字
        node_cap: 展开树节点上限
        depth_cap: 展开树深度上限

    Returns:
        Bisimilar("grammar:<节点数>")、NotBisimilar(迹) 或 Unknown("grammar:node-cap" / "grammar:depth-cap")
    """
    checker = _Checker(grammar)
    root_pairs = _simplify(checker, frozenset({(checker.prune(left), checker.prune(right))}), frozenset())
    queue: Deque[_Node] = deque([_Node(root_pairs, frozenset(), 0, True)])
    created = 1
    capped = False
    deep = False

    while queue:
        node = queue.popleft()
        if not node.pairs:
            logger.debug(f"✅ 展开树在深度 {node.depth} 闭合，共 {created} 个节点")
            return Bisimilar(f"grammar:{created}")
        if node.depth >= depth_cap:
            deep = True
            continue
        expanded = _expand(checker, node)
        if expanded is None:
            continue
        ancestors = node.ancestors | node.pairs
        simplified = _simplify(checker, expanded, ancestors)
        children = []
        if node.may_split:
            split = _split_all(checker, simplified)
            if split is not None:
                children.append(_Node(_simplify(checker, split, ancestors), ancestors, node.depth + 1, True))
                children.append(_Node(simplified, ancestors, node.depth + 1, False))
            else:
                children.append(_Node(simplified, ancestors, node.depth + 1, True))
        else:
            children.append(_Node(simplified, ancestors, node.depth + 1, False))
        for child in children:
            if created >= node_cap:
                capped = True
                break
            created += 1
            queue.append(child)

    trace = refute(grammar, left, right, node_cap)
    if trace is not None:
        return NotBisimilar(trace)
    if capped:
        return Unknown("grammar:node-cap")
    if deep:
        return Unknown("grammar:depth-cap")
    logger.warning("⚠️ 展开树全部分支被否定但找不到区分迹")
    return Unknown("grammar:node-cap")
