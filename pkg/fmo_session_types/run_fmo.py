#!/usr/bin/env python3
"""
F^μω 会话类型工具 - 命令行入口

子命令：kind norm eq grammar fog check run lts
退出码：0 互模拟 / 成功，1 不互模拟 / 运行未得到值，2 未知，3 解析、种类或类型错误
"""

import argparse
import os
import sys
import time
from typing import Callable, Dict, List, Optional, Tuple

# 将当前目录添加到Python路径中
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from config.fmo_config import Backend, FmoConfig, OutputFormat
from core.kinding import kind_of
from core.program_parser import parse_program
from core.reduction import normalize
from core.startup_logger import StartupLogger
from core.type_parser import parse_type
from managers.equivalence_manager import EquivalenceManager, equivalent
from managers.grammar_builder import build_grammar
from models.errors import FmoError
from models.labels import NotBisimilar, Verdict
from processors.evaluator import run
from processors.fog_bridge import encode_expr, fog_traces, parse_fog, type_traces
from processors.type_lts import reachable_graph, replay
from processors.typechecker import typecheck_program
from reports.grammar_reporter import format_grammar, grammar_to_json
from reports.verdict_reporter import (
    EXIT_ERROR, VerdictReporter, exit_code, outcome_exit_code,
)
from utils.log_utils import format_elapsed, get_logger
from utils.type_printer import format_type

logger = get_logger(__name__)

DEFAULT_LTS_DEPTH = 8


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """参数错误使用退出码 3，避免与“未知”的退出码 2 混淆"""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def read_input(text: str) -> str:
    """`@path` 读取文件内容，其余按字面使用"""
    if text.startswith("@"):
        with open(text[1:], "r", encoding="utf-8") as f:
            return f.read().strip()
    return text


def read_file(path: str) -> str:
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """解析命令行参数"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--backend", choices=[b.value for b in Backend], help="等价判定后端")
    common.add_argument("--oracle-depth", type=int, help="有界互模拟的最大深度")
    common.add_argument("--node-cap", type=int, help="状态对 / 展开树节点上限")
    common.add_argument("--fsa-cap", type=int, help="FSA 状态数上限")
    common.add_argument("--norm-fuel", type=int, help="单次规范化的最大归约步数")
    common.add_argument("--seed", type=int, help="调度器种子")
    common.add_argument("--fuel", type=int, help="最大归约步数")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], help="输出格式")
    common.add_argument("--explain", action="store_true", help="附加区分迹或证书规模")

    parser = _Parser(prog="fmo", description="F^μω 会话类型：种类、等价、文法、类型检查与求值")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, help_text in (("kind", "计算类型的种类"), ("norm", "弱头范式"),
                            ("grammar", "输出类型对应的简单文法")):
        sub = commands.add_parser(name, parents=[common], help=help_text)
        sub.add_argument("type", help="类型，或 @文件")

    eq = commands.add_parser("eq", parents=[common], help="判定两个类型是否互模拟")
    eq.add_argument("left", nargs="?", help="类型，或 @文件")
    eq.add_argument("right", nargs="?", help="类型，或 @文件")
    eq.add_argument("--batch", help="每行一对 `T<TAB>U` 的文件")

    lts = commands.add_parser("lts", parents=[common], help="输出可达的带标签迁移图")
    lts.add_argument("type", help="类型，或 @文件")
    lts.add_argument("--depth", type=int, default=DEFAULT_LTS_DEPTH, help="展开深度")

    fog = commands.add_parser("fog", parents=[common], help="一阶文法的类型编码")
    fog.add_argument("file", help="一阶文法文件")
    fog.add_argument("--depth", type=int, help="比较文法与编码类型的迹集合到该深度")

    check = commands.add_parser("check", parents=[common], help="类型检查程序")
    check.add_argument("file", help="程序文件")

    run_cmd = commands.add_parser("run", parents=[common], help="运行程序的 main")
    run_cmd.add_argument("file", help="程序文件")
    run_cmd.add_argument("--unsafe", action="store_true", help="跳过类型检查")

    return parser.parse_args(argv)


class Command:
    """一次子命令调用"""

    def __init__(self, args: argparse.Namespace, config: FmoConfig):
        self.args = args
        self.config = config
        self.delta = config.default_kind_context()
        self.reporter = VerdictReporter(config)

    def execute(self) -> Tuple[str, int]:
        handler: Callable[[], Tuple[str, int]] = getattr(self, f"cmd_{self.args.command}")
        return handler()

    def cmd_kind(self) -> Tuple[str, int]:
        t = parse_type(read_input(self.args.type))
        return self.reporter.kind(t, kind_of(self.delta, t)), 0

    def cmd_norm(self) -> Tuple[str, int]:
        t = parse_type(read_input(self.args.type))
        kind_of(self.delta, t)
        return self.reporter.normal_form(t, normalize(self.delta, t, self.config.norm_fuel)), 0

    def cmd_eq(self) -> Tuple[str, int]:
        if self.args.batch:
            return self._eq_batch(self.args.batch)
        if self.args.left is None or self.args.right is None:
            raise UsageError("eq needs two types or --batch FILE")
        t = parse_type(read_input(self.args.left))
        u = parse_type(read_input(self.args.right))
        verdict = equivalent(self.delta, t, u, self.config)
        return self.reporter.verdict(verdict, self._explain(t, u, verdict)), exit_code(verdict)

    def _explain(self, t, u, verdict: Verdict) -> List[str]:
        """不互模拟时给出两侧在最后一步之前到达的状态"""
        if not isinstance(verdict, NotBisimilar):
            return []
        prefix = verdict.trace[:-1]
        fuel = self.config.norm_fuel
        left, right = replay(self.delta, t, prefix, fuel), replay(self.delta, u, prefix, fuel)
        return [f"left: {format_type(left) if left is not None else '-'}",
                f"right: {format_type(right) if right is not None else '-'}"]

    def _eq_batch(self, path: str) -> Tuple[str, int]:
        texts: List[Tuple[str, str]] = []
        for number, line in enumerate(read_file(path).splitlines(), start=1):
            if not line.strip():
                continue
            left, tab, right = line.partition("\t")
            if not tab:
                raise UsageError(f"{path}:{number}: expected `T<TAB>U`")
            texts.append((left.strip(), right.strip()))
        pairs = [(parse_type(left), parse_type(right)) for left, right in texts]
        verdicts = EquivalenceManager(self.delta, self.config).check_batch(pairs)
        code = max((exit_code(verdict) for verdict in verdicts), default=0)
        return self.reporter.batch(texts, verdicts), code

    def cmd_grammar(self) -> Tuple[str, int]:
        t = parse_type(read_input(self.args.type))
        kind_of(self.delta, t)
        grammar = build_grammar(self.delta, t, self.config.norm_fuel)
        if self.reporter.as_json:
            return self.reporter.render(grammar_to_json(grammar), []), 0
        return format_grammar(grammar), 0

    def cmd_lts(self) -> Tuple[str, int]:
        t = parse_type(read_input(self.args.type))
        kind_of(self.delta, t)
        states, edges = reachable_graph(self.delta, t, depth=self.args.depth, node_cap=self.config.node_cap,
                                        fuel=self.config.norm_fuel)
        return self.reporter.graph(states, edges), 0

    def cmd_fog(self) -> Tuple[str, int]:
        fog = parse_fog(read_file(self.args.file))
        encoded = encode_expr(fog)
        comparison = None
        if self.args.depth is not None:
            expected = fog_traces(fog, depth=self.args.depth)
            found = type_traces({}, encoded, depth=self.args.depth)
            comparison = {"depth": self.args.depth, "count": len(expected), "equal": expected == found}
        code = 0 if comparison is None or comparison["equal"] else 1
        return self.reporter.fog(encoded, comparison), code

    def cmd_check(self) -> Tuple[str, int]:
        program = parse_program(read_file(self.args.file))
        signatures = typecheck_program(program, self.delta, self.config)
        entries = [(entry.name, signatures[entry.name], entry.is_axiom) for entry in program.bindings]
        return self.reporter.signatures(entries), 0

    def cmd_run(self) -> Tuple[str, int]:
        program = parse_program(read_file(self.args.file))
        if not self.args.unsafe:
            typecheck_program(program, self.delta, self.config)
        result = run(program, seed=self.config.seed, fuel=self.config.fuel)
        return self.reporter.outcome(result.outcome, self.config.seed), outcome_exit_code(result.outcome)


def main(argv: Optional[List[str]] = None) -> int:
    """主函数 - 执行一个子命令并返回退出码"""
    try:
        args = parse_arguments(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    try:
        config = FmoConfig.from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    StartupLogger(config, args.command).log_startup_info()
    command = Command(args, config)
    started = time.perf_counter()
    try:
        output, code = command.execute()
    except (FmoError, UsageError, ValueError, OSError) as exc:
        logger.debug(f"❌ {args.command} 失败: {exc}", exc_info=True)
        print(command.reporter.error(exc), file=sys.stderr)
        return EXIT_ERROR

    print(output)
    command.reporter.log_summary()
    logger.info(f"⏱️ {args.command} 完成，退出码 {code}，耗时 {format_elapsed(time.perf_counter() - started)}")
    return code


if __name__ == '__main__':
    sys.exit(main())
