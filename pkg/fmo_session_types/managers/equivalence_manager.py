"""
等价判定管理器

按 FSA → 文法 → 有界互模拟的顺序调度各个后端，并提供保持输入顺序的批量判定
"""

import asyncio
import threading
from enum import Enum
from typing import List, Mapping, Optional, Sequence, Tuple

from config.fmo_config import Backend, FmoConfig
from core.kinding import higher_kind_recursion, kind_of, pre_kind
from managers.grammar_builder import build_joint_grammar
from models.errors import DivergenceError, KindError, KindErrorReason, NormalizationLimit
from models.labels import Unknown, Verdict
from models.types import Type
from processors.fsa import build_fsa, fsa_bisim
from processors.grammar_bisim import grammar_bisim
from processors.type_lts import bounded_bisim
from utils.log_utils import get_logger

logger = get_logger(__name__)


class Fragment(Enum):
    """类型所属的片段"""
    MU_STAR_SEMI = "MuStarSemi"   # 所有 μ 都在恰当种类上
    FULL_MU = "FullMu"


def classify(t: Type) -> Fragment:
    """所有 MuC 的种类标注都是恰当种类时属于 MuStarSemi"""
    if higher_kind_recursion(t) is None:
        return Fragment.MU_STAR_SEMI
    return Fragment.FULL_MU


def _check_kinded(delta, t: Type, fragment: Fragment) -> None:
    """MuStarSemi 做完整的种类检查；FullMu 只能做预种类检查"""
    if fragment is Fragment.MU_STAR_SEMI:
        kind_of(delta, t)
    elif pre_kind(delta, t) is None:
        raise KindError(KindErrorReason.NOT_PRE_KINDED, t)


def _grammar_stage(delta, t: Type, u: Type, config: FmoConfig) -> Verdict:
    grammar, left, right = build_joint_grammar(delta, t, u, config.norm_fuel)
    logger.debug(f"📐 联合文法: {len(grammar.productions)} 个非终结符, {grammar.production_count()} 条产生式")
    return grammar_bisim(grammar, left, right, node_cap=config.node_cap, depth_cap=config.depth_cap)


def _oracle_stage(delta, t: Type, u: Type, config: FmoConfig) -> Verdict:
    return bounded_bisim(delta, t, u, depth=config.oracle_depth, node_cap=config.node_cap,
                         fuel=config.norm_fuel)


def _fsa_stage(delta, t: Type, u: Type, config: FmoConfig) -> Optional[Verdict]:
    try:
        left = build_fsa(delta, t, config.fsa_cap, config.norm_fuel)
        right = build_fsa(delta, u, config.fsa_cap, config.norm_fuel) if left is not None else None
    except NormalizationLimit:
        return None
    if left is None or right is None:
        return None
    return fsa_bisim(left, right)


def _explicit(delta, t: Type, u: Type, config: FmoConfig) -> Verdict:
    if config.backend is Backend.GRAMMAR:
        return _grammar_stage(delta, t, u, config)
    if config.backend is Backend.FSA:
        verdict = _fsa_stage(delta, t, u, config)
        return verdict if verdict is not None else Unknown("fsa:state-cap")
    return _oracle_stage(delta, t, u, config)


def equivalent(delta: Mapping, t: Type, u: Type, config: Optional[FmoConfig] = None) -> Verdict:
    """
    类型等价判定

    Args:
        delta: 种类上下文 Δ
        t, u: 待比较的类型
        config: 后端与各阶段上限，默认取配置文件

    Returns:
        Bisimilar / NotBisimilar / Unknown，Unknown 的原因带有放弃判定的阶段名

    Raises:
        KindError: 任一侧类型不合法
    """
    config = config or FmoConfig()
    fragments = (classify(t), classify(u))
    _check_kinded(delta, t, fragments[0])
    _check_kinded(delta, u, fragments[1])

    try:
        if config.backend is not Backend.AUTO:
            return _explicit(delta, t, u, config)

        verdict = _fsa_stage(delta, t, u, config)
        if verdict is not None:
            return verdict
        if fragments == (Fragment.MU_STAR_SEMI, Fragment.MU_STAR_SEMI):
            verdict = _grammar_stage(delta, t, u, config)
            if not isinstance(verdict, Unknown):
                return verdict
            logger.info(f"↪️ 文法阶段放弃 ({verdict.reason})，改用有界互模拟")
            fallback = _oracle_stage(delta, t, u, config)
            if isinstance(fallback, Unknown):
                return verdict
            return fallback

        return _oracle_stage(delta, t, u, config)
    except NormalizationLimit:
        return Unknown("norm:fuel")
    except DivergenceError as exc:
        # 种类检查已排除发散，这里只可能来自 FullMu 的高阶展开
        logger.warning(f"⚠️ 规范化发散: {exc.witness}")
        return Unknown("norm:divergence")


class EquivalenceManager:
    """批量等价判定：独立的查询并行执行，结果顺序与输入一致"""

    def __init__(self, delta: Mapping, config: Optional[FmoConfig] = None):
        self.delta = delta
        self.config = config or FmoConfig()
        self.decided: int = 0
        self.unknown: int = 0
        self._lock = threading.Lock()

    def check(self, t: Type, u: Type) -> Verdict:
        verdict = equivalent(self.delta, t, u, self.config)
        with self._lock:
            if isinstance(verdict, Unknown):
                self.unknown += 1
            else:
                self.decided += 1
        return verdict

    async def _check_all(self, pairs: Sequence[Tuple[Type, Type]]) -> List[Verdict]:
        semaphore = asyncio.Semaphore(self.config.workers)

        async def _one(t: Type, u: Type) -> Verdict:
            async with semaphore:
                return await asyncio.to_thread(self.check, t, u)

        return list(await asyncio.gather(*(_one(t, u) for t, u in pairs)))

    def check_batch(self, pairs: Sequence[Tuple[Type, Type]]) -> List[Verdict]:
        """
        批量判定

        Returns:
            与 pairs 一一对应的判定结果
        """
        if not pairs:
            return []
        verdicts = asyncio.run(self._check_all(pairs))
        logger.info(f"📊 批量判定完成: {self.decided} 个确定, {self.unknown} 个未知")
        return verdicts
