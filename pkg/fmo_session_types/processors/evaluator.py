"""
项与进程的求值器

按值调用的项归约、进程的通信归约和运行时错误检测。
进程在求值前被规范为“通道限制前缀 + 线程多重集”的形式（Configuration），
结构同余因此不需要搜索；所有可行的归约按固定顺序列出，由带种子的调度器挑选一个。
"""

import random
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from core.term_ops import is_const, is_value, subject, subst, subst_type
from models.errors import RunError
from models.terms import (
    AppTerm, CaseTerm, GlobalRef, LamTerm, LetRecordTerm, LetTerm, MatchTerm, Nu,
    Par, Process, Program, RecordTerm, RecTerm, RuntimeErrorKind, RuntimeErrorOutcome,
    StuckOutcome, Term, TermConstKind, Thread, TypeAppTerm, TypeLamTerm, UNIT_TERM, ValueOutcome,
    VariantTerm, VarTerm, FuelExhausted, Outcome, pair_term,
)
from models.types import Type
from utils.log_utils import get_logger
from utils.term_printer import format_term

logger = get_logger(__name__)

Definitions = Mapping[str, Term]


# ---------------------------------------------------------------- evaluation contexts

@dataclass(frozen=True)
class AppFun:
    arg: Term

    def plug(self, t: Term) -> Term:
        return AppTerm(t, self.arg)


@dataclass(frozen=True)
class AppArg:
    fun: Term

    def plug(self, t: Term) -> Term:
        return AppTerm(self.fun, t)


@dataclass(frozen=True)
class TypeAppFun:
    type_arg: Type

    def plug(self, t: Term) -> Term:
        return TypeAppTerm(t, self.type_arg)


@dataclass(frozen=True)
class RecordField:
    before: Tuple[Tuple[str, Term], ...]
    label: str
    after: Tuple[Tuple[str, Term], ...]

    def plug(self, t: Term) -> Term:
        return RecordTerm(self.before + ((self.label, t),) + self.after)


@dataclass(frozen=True)
class LetRecordBound:
    binders: Tuple[Tuple[str, str], ...]
    body: Term

    def plug(self, t: Term) -> Term:
        return LetRecordTerm(self.binders, t, self.body)


@dataclass(frozen=True)
class LetBound:
    name: str
    body: Term

    def plug(self, t: Term) -> Term:
        return LetTerm(self.name, t, self.body)


@dataclass(frozen=True)
class VariantPayload:
    label: str
    variant_type: Type

    def plug(self, t: Term) -> Term:
        return VariantTerm(self.label, t, self.variant_type)


@dataclass(frozen=True)
class CaseScrutinee:
    handlers: Tuple[Tuple[str, Term], ...]

    def plug(self, t: Term) -> Term:
        return CaseTerm(t, self.handlers)


@dataclass(frozen=True)
class MatchScrutinee:
    handlers: Tuple[Tuple[str, Term], ...]

    def plug(self, t: Term) -> Term:
        return MatchTerm(t, self.handlers)


# 从外到内的帧序列，空元组是空上下文
EvalCtx = Tuple[object, ...]


def plug(ctx: EvalCtx, t: Term) -> Term:
    """E[t]"""
    for frame in reversed(ctx):
        t = frame.plug(t)
    return t


def _inner(t: Term):
    """t 在求值位置上的第一个非值子项，连同包住它的帧"""
    if isinstance(t, AppTerm):
        if not is_value(t.fun):
            return AppFun(t.arg), t.fun
        if not is_value(t.arg):
            return AppArg(t.fun), t.arg
        return None
    if isinstance(t, TypeAppTerm):
        if not is_value(t.fun):
            return TypeAppFun(t.type_arg), t.fun
        return None
    if isinstance(t, RecordTerm):
        for index, (label, value) in enumerate(t.fields):
            if not is_value(value):
                return RecordField(t.fields[:index], label, t.fields[index + 1:]), value
        return None
    if isinstance(t, LetRecordTerm) and not is_value(t.bound):
        return LetRecordBound(t.binders, t.body), t.bound
    if isinstance(t, LetTerm) and not is_value(t.bound):
        return LetBound(t.name, t.body), t.bound
    if isinstance(t, VariantTerm) and not is_value(t.payload):
        return VariantPayload(t.label, t.variant_type), t.payload
    if isinstance(t, CaseTerm) and not is_value(t.scrutinee):
        return CaseScrutinee(t.handlers), t.scrutinee
    if isinstance(t, MatchTerm) and not is_value(t.scrutinee):
        return MatchScrutinee(t.handlers), t.scrutinee
    return None


def decompose(t: Term) -> Tuple[EvalCtx, Term]:
    """
    把非值项唯一地分解为 E[r]

    Args:
        t: 不是值的项

    Returns:
        (E, r)；r 在求值位置上的子项都已是值
    """
    frames: List[object] = []
    while True:
        found = _inner(t)
        if found is None:
            return tuple(frames), t
        frame, t = found
        frames.append(frame)


# ---------------------------------------------------------------- term reduction

def _exact_record(t: Term, labels) -> bool:
    return isinstance(t, RecordTerm) and tuple(label for label, _ in t.fields) == tuple(labels)


def _reduce(r: Term, definitions: Definitions) -> Optional[Term]:
    """单步项归约；r 不是项归约的可约式时返回 None"""
    if isinstance(r, AppTerm):
        fun = r.fun
        if isinstance(fun, LamTerm):
            return subst(fun.body, r.arg, fun.param)
        if isinstance(fun, RecTerm):
            return AppTerm(subst(fun.value, fun, fun.name), r.arg)
        return None
    if isinstance(r, TypeAppTerm):
        fun = r.fun
        if isinstance(fun, TypeLamTerm):
            return subst_type(fun.body, r.type_arg, fun.binder)
        if isinstance(fun, RecTerm):
            return TypeAppTerm(subst(fun.value, fun, fun.name), r.type_arg)
        return None
    if isinstance(r, LetRecordTerm):
        labels = sorted(label for label, _ in r.binders)
        if not _exact_record(r.bound, labels):
            return None
        values = r.bound.field_map()
        body = r.body
        for label, name in r.binders:
            body = subst(body, values[label], name)
        return body
    if isinstance(r, LetTerm):
        return subst(r.body, r.bound, r.name)
    if isinstance(r, CaseTerm):
        scrutinee = r.scrutinee
        handlers = dict(r.handlers)
        if isinstance(scrutinee, VariantTerm) and scrutinee.label in handlers:
            return AppTerm(handlers[scrutinee.label], scrutinee.payload)
        return None
    if isinstance(r, GlobalRef):
        return definitions.get(r.name)
    return None


class ProgressForm(Enum):
    """封闭项的形态：值、可归约，或停在某个会话操作上"""
    VALUE = "value"
    REDUCES = "reduces"
    FORK = "fork"
    NEW = "new"
    RECEIVE = "receive"
    SEND = "send"
    MATCH = "match"
    SELECT = "select"
    CLOSE = "close"
    ERROR = "error"


_COMMUNICATION = {ProgressForm.RECEIVE, ProgressForm.SEND, ProgressForm.MATCH,
                  ProgressForm.SELECT, ProgressForm.CLOSE}


def _session_form(r: Term) -> Optional[ProgressForm]:
    if isinstance(r, AppTerm) and is_const(r.fun, TermConstKind.FORK):
        return ProgressForm.FORK
    if isinstance(r, TypeAppTerm) and is_const(r.fun, TermConstKind.NEW):
        return ProgressForm.NEW
    if isinstance(r, MatchTerm):
        return ProgressForm.MATCH
    if subject(r) is None:
        return None
    fun = r.fun
    if is_const(fun, TermConstKind.CLOSE):
        return ProgressForm.CLOSE
    if is_const(fun, TermConstKind.SELECT):
        return ProgressForm.SELECT
    if isinstance(fun.fun, TypeAppTerm):
        return ProgressForm.RECEIVE
    return ProgressForm.SEND


def progress_form(t: Term, definitions: Optional[Definitions] = None) -> ProgressForm:
    """
    封闭项的分类：值、可以归约，或停在 fork/new/通信操作上；其余情形为 ERROR
    """
    if is_value(t):
        return ProgressForm.VALUE
    _, r = decompose(t)
    if _reduce(r, definitions or {}) is not None:
        return ProgressForm.REDUCES
    return _session_form(r) or ProgressForm.ERROR


def term_step(t: Term, definitions: Optional[Definitions] = None) -> Optional[Term]:
    """单步按值调用归约；t 是值或停在会话操作上时返回 None"""
    if is_value(t):
        return None
    ctx, r = decompose(t)
    reduced = _reduce(r, definitions or {})
    if reduced is None:
        return None
    return plug(ctx, reduced)


# ---------------------------------------------------------------- configurations

@dataclass(frozen=True)
class Focus:
    """一个非值线程在求值位置上的情况"""
    ctx: EvalCtx
    redex: Term
    reduced: Optional[Term]
    form: Optional[ProgressForm]

    @property
    def endpoint(self) -> Optional[str]:
        """通信操作的主体变量名；不是通信操作或主体不是变量时为 None"""
        if self.form not in _COMMUNICATION:
            return None
        target = subject(self.redex)
        return target.name if isinstance(target, VarTerm) else None


@dataclass(frozen=True)
class Candidate:
    """一个可行的归约：term/fork/new 作用于单个线程，comm 作用于通道两端的两个线程"""
    kind: str
    threads: Tuple[int, ...]
    channel: Optional[int] = None

    @property
    def label(self) -> str:
        return f"{self.kind}:{','.join(str(index) for index in self.threads)}"


_FRESH = re.compile(r"#(\d+)$")


@dataclass
class Configuration:
    """
    进程的规范形式 (ν x₁y₁)…(ν xₙyₙ)(t₀ | t₁ | …)

    线程 0 是主线程；端点名形如 c#1 / d#1，用户程序无法写出
    """
    channels: List[Tuple[str, str]] = field(default_factory=list)
    threads: List[Term] = field(default_factory=list)
    fresh: int = 0

    @classmethod
    def from_process(cls, p: Process) -> "Configuration":
        config = cls()
        pending = [p]
        while pending:
            current = pending.pop()
            if isinstance(current, Nu):
                config.channels.append((current.x, current.y))
                pending.append(current.body)
            elif isinstance(current, Par):
                pending.append(current.right)
                pending.append(current.left)
            elif isinstance(current, Thread):
                config.threads.append(current.term)
            else:
                raise TypeError(f"not a process: {current!r}")
        for x, y in config.channels:
            for name in (x, y):
                match = _FRESH.search(name)
                if match:
                    config.fresh = max(config.fresh, int(match.group(1)))
        return config

    def to_process(self) -> Process:
        process: Process = Thread(self.threads[-1])
        for term in reversed(self.threads[:-1]):
            process = Par(Thread(term), process)
        for x, y in reversed(self.channels):
            process = Nu(x, y, process)
        return process

    def endpoints(self) -> Dict[str, Tuple[int, int]]:
        """端点名 → (通道下标, 0 或 1)"""
        table = {}
        for index, (x, y) in enumerate(self.channels):
            table[x] = (index, 0)
            table[y] = (index, 1)
        return table

    def focus(self, definitions: Definitions) -> List[Optional[Focus]]:
        result: List[Optional[Focus]] = []
        for term in self.threads:
            if is_value(term):
                result.append(None)
                continue
            ctx, r = decompose(term)
            reduced = _reduce(r, definitions)
            form = ProgressForm.REDUCES if reduced is not None else _session_form(r)
            result.append(Focus(ctx, r, reduced, form))
        return result

    def all_values(self) -> bool:
        return all(is_value(term) for term in self.threads)

    def candidates(self, definitions: Definitions) -> List[Candidate]:
        """按固定顺序列出全部可行归约：逐线程的 term/fork/new，然后逐通道的通信"""
        foci = self.focus(definitions)
        found: List[Candidate] = []
        for index, focus in enumerate(foci):
            if focus is None:
                continue
            if focus.form is ProgressForm.REDUCES:
                found.append(Candidate("term", (index,)))
            elif focus.form is ProgressForm.FORK:
                found.append(Candidate("fork", (index,)))
            elif focus.form is ProgressForm.NEW:
                found.append(Candidate("new", (index,)))
        by_endpoint = _threads_by_endpoint(foci)
        for channel, (x, y) in enumerate(self.channels):
            for i in by_endpoint.get(x, []):
                for j in by_endpoint.get(y, []):
                    if i != j and agree(foci[i].redex, foci[j].redex):
                        found.append(Candidate("comm", (i, j), channel))
        return found

    def apply(self, candidate: Candidate, definitions: Definitions) -> None:
        """执行一个归约，原地修改格局"""
        foci = self.focus(definitions)
        if candidate.kind == "term":
            index = candidate.threads[0]
            focus = foci[index]
            self.threads[index] = plug(focus.ctx, focus.reduced)
        elif candidate.kind == "fork":
            index = candidate.threads[0]
            focus = foci[index]
            self.threads[index] = plug(focus.ctx, UNIT_TERM)
            self.threads.append(AppTerm(focus.redex.arg, UNIT_TERM))
        elif candidate.kind == "new":
            index = candidate.threads[0]
            focus = foci[index]
            self.fresh += 1
            x, y = f"c#{self.fresh}", f"d#{self.fresh}"
            self.channels.append((x, y))
            self.threads[index] = plug(focus.ctx, pair_term(VarTerm(x), VarTerm(y)))
        elif candidate.kind == "comm":
            self._communicate(candidate, foci)
        else:
            raise ValueError(f"unknown step kind {candidate.kind}")

    def _communicate(self, candidate: Candidate, foci: Sequence[Optional[Focus]]) -> None:
        i, j = candidate.threads
        x, y = self.channels[candidate.channel]
        left, right = foci[i], foci[j]
        if left.form is ProgressForm.CLOSE:
            self.threads[i] = plug(left.ctx, UNIT_TERM)
            self.threads[j] = plug(right.ctx, UNIT_TERM)
            del self.channels[candidate.channel]
            return
        results = {i: (left, x), j: (right, y)}
        for index, (focus, own) in results.items():
            other = right if index == i else left
            if focus.form is ProgressForm.RECEIVE:
                # 接收方得到 (值, 继续使用的端点)
                self.threads[index] = plug(focus.ctx, pair_term(_sent_value(other.redex), VarTerm(own)))
            elif focus.form is ProgressForm.MATCH:
                handler = dict(focus.redex.handlers)[other.redex.fun.label]
                self.threads[index] = plug(focus.ctx, AppTerm(handler, VarTerm(own)))
            else:
                self.threads[index] = plug(focus.ctx, VarTerm(own))


def _sent_value(r: Term) -> Term:
    # send [T] v [U] x
    return r.fun.fun.arg


def _threads_by_endpoint(foci: Sequence[Optional[Focus]]) -> Dict[str, List[int]]:
    table: Dict[str, List[int]] = {}
    for index, focus in enumerate(foci):
        if focus is not None and focus.endpoint is not None:
            table.setdefault(focus.endpoint, []).append(index)
    return table


def agree(r1: Term, r2: Term) -> bool:
    """两个通信操作在同一通道的两端能否配对"""
    f1, f2 = _session_form(r1), _session_form(r2)
    pairs = {(ProgressForm.RECEIVE, ProgressForm.SEND), (ProgressForm.SEND, ProgressForm.RECEIVE),
             (ProgressForm.CLOSE, ProgressForm.CLOSE)}
    if (f1, f2) in pairs:
        return True
    if (f1, f2) == (ProgressForm.MATCH, ProgressForm.SELECT):
        return r2.fun.label in dict(r1.handlers)
    if (f1, f2) == (ProgressForm.SELECT, ProgressForm.MATCH):
        return r1.fun.label in dict(r2.handlers)
    return False


# ---------------------------------------------------------------- runtime errors

def _location(index: int, focus: Focus) -> str:
    return f"thread {index}: {format_term(focus.redex)}"


def _local_error(focus: Focus, endpoints: Mapping[str, Tuple[int, int]]) -> Optional[RuntimeErrorKind]:
    r = focus.redex
    if focus.form is ProgressForm.REDUCES or focus.form in (ProgressForm.FORK, ProgressForm.NEW):
        return None
    if focus.form in _COMMUNICATION:
        if focus.endpoint is None or focus.endpoint not in endpoints:
            return RuntimeErrorKind.SESSION_NON_ENDPOINT
        return None
    if isinstance(r, AppTerm):
        return RuntimeErrorKind.APP_NON_FUNCTION
    if isinstance(r, TypeAppTerm):
        return RuntimeErrorKind.TAPP_NON_ABSTRACTION
    if isinstance(r, LetRecordTerm):
        return RuntimeErrorKind.LET_NON_RECORD
    if isinstance(r, CaseTerm):
        return RuntimeErrorKind.CASE_MISMATCH
    # 公理引用：停住，但不是运行时错误
    return None


def find_error(config: Configuration,
               definitions: Optional[Definitions] = None) -> Optional[Tuple[RuntimeErrorKind, str]]:
    """
    检查格局是否为运行时错误

    Returns:
        (错误种类, 位置描述)；没有错误时返回 None
    """
    definitions = definitions or {}
    foci = config.focus(definitions)
    endpoints = config.endpoints()
    for index, focus in enumerate(foci):
        if focus is None:
            continue
        kind = _local_error(focus, endpoints)
        if kind is not None:
            return kind, _location(index, focus)

    by_endpoint = _threads_by_endpoint(foci)
    for name in sorted(by_endpoint):
        indices = by_endpoint[name]
        if len(indices) > 1:
            return RuntimeErrorKind.SAME_SUBJECT, f"threads {indices[0]} and {indices[1]} on {name}"

    for x, y in config.channels:
        if x in by_endpoint and y in by_endpoint:
            i, j = by_endpoint[x][0], by_endpoint[y][0]
            if not agree(foci[i].redex, foci[j].redex):
                return RuntimeErrorKind.CHANNEL_DISAGREE, f"threads {i} and {j} on {x}/{y}"
    return None


def detect_error(p: Process, definitions: Optional[Definitions] = None) -> Optional[RuntimeErrorKind]:
    """封闭进程是否为运行时错误，返回错误种类或 None"""
    found = find_error(Configuration.from_process(p), definitions)
    return None if found is None else found[0]


# ---------------------------------------------------------------- scheduling

class Scheduler:
    """带种子的调度器：相同的种子和相同的候选序列给出相同的选择"""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.rng = random.Random(seed)

    def choose(self, candidates: Sequence[Candidate]) -> Candidate:
        choice = candidates[0] if len(candidates) == 1 else self.rng.choice(list(candidates))
        logger.debug(f"🎲 调度 {choice.label} (候选 {len(candidates)} 个)")
        return choice


def proc_step(p: Process, scheduler: Optional[Scheduler] = None,
              definitions: Optional[Definitions] = None) -> Optional[Process]:
    """
    进程单步归约

    Args:
        p: 封闭进程
        scheduler: 多个归约可行时用来选择，默认使用种子 0
        definitions: 顶层定义，用于展开 GlobalRef

    Returns:
        归约后的进程；没有可行归约时返回 None
    """
    definitions = definitions or {}
    config = Configuration.from_process(p)
    candidates = config.candidates(definitions)
    if not candidates:
        return None
    choice = (scheduler or Scheduler()).choose(candidates)
    config.apply(choice, definitions)
    return config.to_process()


@dataclass(frozen=True)
class RunResult:
    outcome: Outcome
    trace: Tuple[str, ...]


def run(program: Program, seed: int = 0, fuel: int = 100_000, entry: str = "main") -> RunResult:
    """
    从 Thread(main) 开始反复归约，每一步前后检测运行时错误

    Args:
        program: 已解析（通常已通过类型检查）的程序
        seed: 调度器种子
        fuel: 最大归约步数
        entry: 入口绑定名

    Returns:
        RunResult：结果与每一步的调度记录

    Raises:
        RunError: 入口不存在或只是公理
    """
    binding = program.binding(entry)
    if binding is None:
        raise RunError(f"program has no {entry} binding")
    if binding.is_axiom:
        raise RunError(f"{entry} is an axiom and cannot run")

    definitions = program.definitions()
    scheduler = Scheduler(seed)
    config = Configuration(threads=[binding.body])
    trace: List[str] = []
    steps = 0
    while True:
        error = find_error(config, definitions)
        if error is not None:
            kind, location = error
            logger.warning(f"💥 运行时错误 {kind.value} @ {location} (第 {steps} 步)")
            return RunResult(RuntimeErrorOutcome(kind, location, steps), tuple(trace))
        candidates = config.candidates(definitions)
        if not candidates:
            if config.all_values():
                logger.info(f"✅ 运行结束: {steps} 步, 线程 {len(config.threads)} 个")
                return RunResult(ValueOutcome(config.threads[0], steps), tuple(trace))
            logger.info(f"⏸️ 进程停住: {steps} 步")
            return RunResult(StuckOutcome(config.to_process(), steps), tuple(trace))
        if steps >= fuel:
            logger.info(f"⛽ 步数耗尽: {fuel}")
            return RunResult(FuelExhausted(steps), tuple(trace))
        choice = scheduler.choose(candidates)
        config.apply(choice, definitions)
        trace.append(choice.label)
        steps += 1
