"""
有限自动机快速路径

对类型 LTS 做可达状态闭包；状态数在上限内闭合即得到确定性自动机，
两个自动机的互模拟用 Hopcroft–Karp 并查集判定。
"""

from collections import deque
from typing import Deque, Dict, Hashable, Optional, Tuple

from config.base_config import EquivalenceConfig
from core.renaming import renamed
from models.grammar_types import Fsa
from models.labels import Bisimilar, Label, NotBisimilar, Verdict
from models.types import Type, subterms
from processors.type_lts import label_sort_key, transitions
from utils.log_utils import get_logger

logger = get_logger(__name__)

DEFAULT_FSA_CAP = EquivalenceConfig.get("fsa_cap", 4096)

# 后继规模超过 初始规模 × 4 + 64 时视为顺序组合的栈无界增长
_GROWTH_FACTOR = 4
_GROWTH_SLACK = 64


def type_size(t: Type) -> int:
    return sum(1 for _ in subterms(t))


def build_fsa(delta, t: Type, cap: int = DEFAULT_FSA_CAP, fuel: Optional[int] = None) -> Optional[Fsa]:
    """
    构造 t 的有限自动机

    Args:
        delta: 种类上下文
        t: 已通过种类检查的类型
        cap: 最大状态数
        fuel: 单次规范化的步数上限

    Returns:
        可达状态在 cap 内闭合且规模没有持续增长时返回自动机，否则返回 None
    """
    start = renamed(t)
    size_limit = type_size(start) * _GROWTH_FACTOR + _GROWTH_SLACK
    automaton = Fsa(initial=0, states=[start])
    index: Dict[Type, int] = {start: 0}
    queue: Deque[int] = deque([0])
    while queue:
        source = queue.popleft()
        out: Dict[Label, int] = {}
        for label, target in transitions(delta, automaton.states[source], fuel).items():
            if target not in index:
                if len(automaton.states) >= cap:
                    logger.debug(f"🚧 FSA 状态数超过上限 {cap}")
                    return None
                if type_size(target) > size_limit:
                    logger.debug(f"🚧 FSA 状态规模超过 {size_limit}，放弃构造")
                    return None
                index[target] = len(automaton.states)
                automaton.states.append(target)
                queue.append(index[target])
            out[label] = index[target]
        automaton.edges[source] = out
    return automaton


class _UnionFind:
    def __init__(self):
        self.parent: Dict[Hashable, Hashable] = {}

    def find(self, item: Hashable) -> Hashable:
        root = self.parent.setdefault(item, item)
        while root != self.parent[root]:
            root = self.parent[root]
        while item != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, left: Hashable, right: Hashable) -> bool:
        """合并两个类，已在同一类时返回 False"""
        left_root, right_root = self.find(left), self.find(right)
        if left_root == right_root:
            return False
        self.parent[left_root] = right_root
        return True


def fsa_bisim(left: Fsa, right: Fsa) -> Verdict:
    """
    Hopcroft–Karp 互模拟判定

    Returns:
        Bisimilar("fsa:<左状态数>+<右状态数>") 或带区分迹的 NotBisimilar，不会返回 Unknown
    """
    classes = _UnionFind()
    start = (("A", left.initial), ("B", right.initial))
    classes.union(*start)
    queue: Deque[Tuple[Tuple[int, int], Tuple[Label, ...]]] = deque([((left.initial, right.initial), ())])
    while queue:
        (p, q), path = queue.popleft()
        left_out, right_out = left.outgoing(p), right.outgoing(q)
        only_left = sorted(set(left_out) - set(right_out), key=label_sort_key)
        only_right = sorted(set(right_out) - set(left_out), key=label_sort_key)
        if only_left or only_right:
            return NotBisimilar(path + ((only_left or only_right)[0],))
        for label in sorted(left_out, key=label_sort_key):
            p_next, q_next = left_out[label], right_out[label]
            if classes.union(("A", p_next), ("B", q_next)):
                queue.append(((p_next, q_next), path + (label,)))
    return Bisimilar(f"fsa:{left.size}+{right.size}")
