"""
结果报告器

把各子命令的结果渲染为文本或 JSON，并负责判定结果到退出码的映射。
JSON 输出都带 schema_version；输出里不含时间戳，相同输入给出相同的字节。
"""

import json
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from config.fmo_config import FmoConfig, OutputFormat
from models.labels import Bisimilar, Label, NotBisimilar, Unknown, Verdict
from models.terms import (
    FuelExhausted, Outcome, RuntimeErrorOutcome, StuckOutcome, ValueOutcome,
)
from models.types import Kind, Type
from processors.type_lts import format_label
from utils.log_utils import get_logger
from utils.term_printer import format_process, format_term
from utils.type_printer import format_kind, format_type

logger = get_logger(__name__)

SCHEMA_VERSION = 1

EXIT_BISIMILAR = 0
EXIT_NOT_BISIMILAR = 1
EXIT_UNKNOWN = 2
EXIT_ERROR = 3


def exit_code(verdict: Verdict) -> int:
    """退出码只取决于判定结果"""
    if isinstance(verdict, Bisimilar):
        return EXIT_BISIMILAR
    if isinstance(verdict, NotBisimilar):
        return EXIT_NOT_BISIMILAR
    return EXIT_UNKNOWN


def outcome_exit_code(outcome: Outcome) -> int:
    return 0 if isinstance(outcome, ValueOutcome) else 1


def format_trace(trace: Sequence[Label]) -> str:
    return " ".join(format_label(label) for label in trace)


def verdict_payload(verdict: Verdict) -> Dict[str, Any]:
    payload: Dict[str, Any] = {"verdict": verdict.name}
    if isinstance(verdict, Bisimilar):
        payload["evidence"] = verdict.evidence
    elif isinstance(verdict, NotBisimilar):
        payload["trace"] = [format_label(label) for label in verdict.trace]
    elif isinstance(verdict, Unknown):
        payload["reason"] = verdict.reason
    return payload


def _verdict_lines(verdict: Verdict, explain: bool) -> List[str]:
    lines = [verdict.name]
    if isinstance(verdict, NotBisimilar):
        lines.append(f"trace: {format_trace(verdict.trace)}")
    elif isinstance(verdict, Unknown):
        lines.append(f"reason: {verdict.reason}")
    elif explain:
        lines.append(f"evidence: {verdict.evidence}")
    return lines


def outcome_payload(outcome: Outcome) -> Dict[str, Any]:
    if isinstance(outcome, ValueOutcome):
        return {"outcome": "Value", "term": format_term(outcome.term), "steps": outcome.steps}
    if isinstance(outcome, StuckOutcome):
        return {"outcome": "Stuck", "process": format_process(outcome.process), "steps": outcome.steps}
    if isinstance(outcome, FuelExhausted):
        return {"outcome": "FuelExhausted", "steps": outcome.steps}
    if isinstance(outcome, RuntimeErrorOutcome):
        return {"outcome": "RuntimeError", "kind": outcome.kind.value,
                "location": outcome.location, "steps": outcome.steps}
    raise TypeError(f"not an outcome: {outcome!r}")


class VerdictReporter:
    """结果报告器 - 按配置的输出格式渲染结果并统计判定分布"""

    def __init__(self, config: FmoConfig):
        self.config = config
        self.verdicts: Dict[str, int] = {"Bisimilar": 0, "NotBisimilar": 0, "Unknown": 0}

    @property
    def as_json(self) -> bool:
        return self.config.format is OutputFormat.JSON

    def render(self, payload: Dict[str, Any], lines: Sequence[str]) -> str:
        if self.as_json:
            document = {"schema_version": SCHEMA_VERSION}
            document.update(payload)
            return json.dumps(document, ensure_ascii=False, sort_keys=True)
        return "\n".join(lines)

    def verdict(self, verdict: Verdict, explanation: Sequence[str] = ()) -> str:
        """单个等价判定；explanation 是 --explain 时附加的说明行"""
        self.verdicts[verdict.name] += 1
        payload = verdict_payload(verdict)
        lines = _verdict_lines(verdict, self.config.explain)
        if self.config.explain and explanation:
            payload["explanation"] = list(explanation)
            lines.extend(explanation)
        return self.render(payload, lines)

    def batch(self, pairs: Sequence[Tuple[str, str]], verdicts: Sequence[Verdict]) -> str:
        """批量判定，输出顺序与输入一致"""
        results = []
        lines = []
        for (left, right), verdict in zip(pairs, verdicts):
            self.verdicts[verdict.name] += 1
            entry = {"left": left, "right": right}
            entry.update(verdict_payload(verdict))
            results.append(entry)
            detail = ""
            if isinstance(verdict, NotBisimilar):
                detail = f"\ttrace: {format_trace(verdict.trace)}"
            elif isinstance(verdict, Unknown):
                detail = f"\treason: {verdict.reason}"
            elif self.config.explain:
                detail = f"\tevidence: {verdict.evidence}"
            lines.append(f"{verdict.name}{detail}")
        return self.render({"results": results}, lines)

    def kind(self, t: Type, kind: Kind) -> str:
        return self.render({"type": format_type(t), "kind": format_kind(kind)}, [format_kind(kind)])

    def normal_form(self, t: Type, normal: Type) -> str:
        return self.render({"type": format_type(t), "whnf": format_type(normal)}, [format_type(normal)])

    def signatures(self, entries: Sequence[Tuple[str, Type, bool]]) -> str:
        """check 的结果：每个绑定一行，公理加标记"""
        payload = {"bindings": [{"name": name, "type": format_type(t), "axiom": axiom}
                                for name, t, axiom in entries]}
        lines = [f"{name} : {format_type(t)}{' (axiom)' if axiom else ''}" for name, t, axiom in entries]
        return self.render(payload, lines)

    def outcome(self, outcome: Outcome, seed: int) -> str:
        payload = outcome_payload(outcome)
        payload["seed"] = seed
        if isinstance(outcome, ValueOutcome):
            head = f"Value: {payload['term']}"
        elif isinstance(outcome, StuckOutcome):
            head = f"Stuck: {payload['process']}"
        elif isinstance(outcome, FuelExhausted):
            head = "FuelExhausted"
        else:
            head = f"RuntimeError: {payload['kind']} at {payload['location']}"
        return self.render(payload, [head, f"steps: {outcome.steps}"])

    def graph(self, states: Sequence[Type], edges: Sequence[Tuple[int, Label, int]]) -> str:
        """lts 的结果：先列状态，再列 `i --label--> j` 迁移"""
        payload = {
            "states": [format_type(state) for state in states],
            "edges": [{"source": s, "label": format_label(label), "target": t} for s, label, t in edges],
        }
        lines = [f"[{index}] {format_type(state)}" for index, state in enumerate(states)]
        lines.extend(f"{s} --{format_label(label)}--> {t}" for s, label, t in edges)
        return self.render(payload, lines)

    def fog(self, encoded: Type, comparison: Optional[Mapping[str, Any]] = None) -> str:
        payload: Dict[str, Any] = {"type": format_type(encoded)}
        lines = [format_type(encoded)]
        if comparison is not None:
            payload["traces"] = dict(comparison)
            verdict = "agree" if comparison["equal"] else "differ"
            lines.append(f"traces to depth {comparison['depth']}: {comparison['count']} ({verdict})")
        return self.render(payload, lines)

    def error(self, exc: Exception) -> str:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        return self.render(payload, [f"error: {type(exc).__name__}: {exc}"])

    def log_summary(self) -> None:
        if any(self.verdicts.values()):
            logger.info(
                f"📊 判定统计 | "
                f"互模拟: {self.verdicts['Bisimilar']} | "
                f"不互模拟: {self.verdicts['NotBisimilar']} | "
                f"未知: {self.verdicts['Unknown']}"
            )
