"""
确定性一阶文法与其类型编码

每个元数为 m 的非终结符编码为 λx1:T…λxm:T.{a: E_a, …}；
调用图中处在环上的非终结符引入高阶 μ，其余的在使用处直接展开。
编码后类型的一步记录迁移 {…}_j 对应文法的一个终结符。
"""

import re
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Set, Tuple

from lark import Lark, Transformer, v_args

from core.renaming import renamed
from core.type_parser import run_parser
from models.errors import FogError
from models.fog_types import Fog, FogApply, FogExpr, FogVar, formals
from models.labels import ConstHead, Label
from models.types import T_KIND, Abs, Const, MuC, RecordC, Type, UserVar, Var, app, arrow_kind, record
from processors.type_lts import transitions
from utils.log_utils import get_logger

logger = get_logger(__name__)

FOG_GRAMMAR = r"""
fog: _NL* (statement _NL+)* statement?

?statement: "arity" NAME INT          -> arity_decl
          | NAME NAME "->" expr       -> production
          | "start" expr              -> start_decl

?expr: NAME atom+                     -> apply
     | atom

?atom: NAME                           -> leaf
     | "(" expr ")"

NAME: /[A-Za-z_][A-Za-z0-9_']*/
COMMENT: /#[^\n]*/
_NL: /(\r?\n[\t ]*(#[^\n]*)?)+/

%import common.INT
%import common.WS_INLINE
%ignore WS_INLINE
%ignore COMMENT
"""

_FORMAL = re.compile(r"x[1-9][0-9]*")


@v_args(inline=True)
class FogTransformer(Transformer):
    """语法树转换为声明列表，检查放在 parse_fog 中统一做"""

    def fog(self, *statements):
        return list(statements)

    def arity_decl(self, name, count):
        return ("arity", str(name), int(count), name.line)

    def production(self, head, terminal, body):
        return ("production", str(head), str(terminal), body, head.line)

    def start_decl(self, expr):
        return ("start", expr)

    def apply(self, head, *args):
        if _FORMAL.fullmatch(str(head)):
            raise FogError(f"formal {head} cannot be applied (line {head.line})")
        return FogApply(str(head), tuple(args))

    def leaf(self, name):
        if _FORMAL.fullmatch(str(name)):
            return FogVar(str(name))
        return FogApply(str(name))


@lru_cache(maxsize=1)
def _fog_parser() -> Lark:
    return Lark(FOG_GRAMMAR, start="fog", parser="lalr")


def _heads(expr: FogExpr) -> Set[str]:
    if isinstance(expr, FogVar):
        return set()
    found = {expr.head}
    for arg in expr.args:
        found |= _heads(arg)
    return found


def _check_expr(fog: Fog, expr: FogExpr, allowed: Tuple[str, ...], where: str) -> None:
    if isinstance(expr, FogVar):
        if expr.name not in allowed:
            raise FogError(f"{where}: unknown formal {expr.name}")
        return
    expected = fog.arity.get(expr.head, 0)
    if len(expr.args) != expected:
        raise FogError(f"{where}: {expr.head} expects {expected} arguments, got {len(expr.args)}")
    for arg in expr.args:
        _check_expr(fog, arg, allowed, where)


def validate_fog(fog: Fog) -> Fog:
    """
    检查元数一致、形参合法、初始表达式封闭

    Raises:
        FogError: 任一检查失败
    """
    for (head, terminal), body in fog.productions.items():
        _check_expr(fog, body, formals(fog.arity[head]), f"{head} {terminal}")
    if fog.initial is None:
        raise FogError("missing start expression")
    _check_expr(fog, fog.initial, (), "start")
    return fog


def parse_fog(text: str) -> Fog:
    """
    解析一阶文法文本

    Args:
        text: 由 arity / 产生式 / start 行组成的文本，# 开始注释

    Returns:
        已检查的确定性一阶文法；没有 arity 行的非终结符元数为 0

    Raises:
        ParseError: 语法错误
        FogError: 不确定、元数不一致或形参非法
    """
    statements = run_parser(_fog_parser(), text, "fog", FogTransformer())
    fog = Fog()
    for statement in statements:
        if statement[0] == "arity":
            _, name, count, line = statement
            if name in fog.arity and fog.arity[name] != count:
                raise FogError(f"conflicting arity for {name} (line {line})")
            fog.arity[name] = count
    for statement in statements:
        if statement[0] == "production":
            _, head, terminal, body, line = statement
            fog.arity.setdefault(head, 0)
            if (head, terminal) in fog.productions:
                raise FogError(f"non-deterministic: second production {head} {terminal} (line {line})")
            fog.productions[(head, terminal)] = body
            for name in _heads(body):
                fog.arity.setdefault(name, 0)
        elif statement[0] == "start":
            if fog.initial is not None:
                raise FogError("more than one start expression")
            fog.initial = statement[1]
            for name in _heads(fog.initial):
                fog.arity.setdefault(name, 0)
    return validate_fog(fog)


def _substitute(expr: FogExpr, binding: Mapping[str, FogExpr]) -> FogExpr:
    if isinstance(expr, FogVar):
        return binding[expr.name]
    return FogApply(expr.head, tuple(_substitute(arg, binding) for arg in expr.args))


def fog_step(fog: Fog, expr: FogExpr, terminal: str) -> Optional[FogExpr]:
    """
    X E1 … Em —a→ E[E1/x1, …, Em/xm]

    Returns:
        后继表达式；没有对应产生式时返回 None
    """
    if not isinstance(expr, FogApply):
        raise FogError(f"fog_step needs a closed expression, got {expr}")
    body = fog.productions.get((expr.head, terminal))
    if body is None:
        return None
    return _substitute(body, dict(zip(formals(len(expr.args)), expr.args)))


# ---------------------------------------------------------------- encoding

def _call_graph(fog: Fog) -> Dict[str, Set[str]]:
    graph: Dict[str, Set[str]] = {name: set() for name in fog.arity}
    for (head, _), body in fog.productions.items():
        graph[head] |= _heads(body)
    return graph


def recursive_nonterminals(fog: Fog) -> Set[str]:
    """Tarjan 强连通分量：大小超过 1 或带自环的分量中的非终结符"""
    graph = _call_graph(fog)
    index: Dict[str, int] = {}
    lowlink: Dict[str, int] = {}
    stack: List[str] = []
    on_stack: Set[str] = set()
    recursive: Set[str] = set()
    counter = [0]

    def visit(node: str) -> None:
        index[node] = lowlink[node] = counter[0]
        counter[0] += 1
        stack.append(node)
        on_stack.add(node)
        for successor in sorted(graph[node]):
            if successor not in index:
                visit(successor)
                lowlink[node] = min(lowlink[node], lowlink[successor])
            elif successor in on_stack:
                lowlink[node] = min(lowlink[node], index[successor])
        if lowlink[node] == index[node]:
            component = []
            while True:
                member = stack.pop()
                on_stack.discard(member)
                component.append(member)
                if member == node:
                    break
            if len(component) > 1 or node in graph[node]:
                recursive.update(component)

    for node in sorted(graph):
        if node not in index:
            visit(node)
    return recursive


class _Encoder:
    def __init__(self, fog: Fog):
        self.fog = fog
        self.recursive = recursive_nonterminals(fog)

    def mu_name(self, head: str) -> UserVar:
        return UserVar(f"mu_{head}")

    def rule_body(self, head: str, binding: Mapping[str, Type], stack: Tuple[str, ...]) -> Type:
        """{a: E_a, …}，形参按 binding 替换"""
        rules = self.fog.rules_of(head)
        return record({terminal: self.expr(body, binding, stack) for terminal, body in rules.items()})

    def closed(self, head: str, stack: Tuple[str, ...]) -> Type:
        """非终结符的封闭编码：λx1…λxm.{…}，在环上时外面再包一层 μ"""
        arity = self.fog.arity[head]
        names = formals(arity)
        binding = {name: Var(UserVar(name)) for name in names}
        inner_stack = stack + (head,) if head in self.recursive else stack
        body: Type = self.rule_body(head, binding, inner_stack)
        for name in reversed(names):
            body = Abs(UserVar(name), T_KIND, body)
        if head not in self.recursive:
            return body
        kind = arrow_kind(*([T_KIND] * (arity + 1)))
        return app(Const(MuC(kind)), Abs(self.mu_name(head), kind, body))

    def expr(self, expr: FogExpr, binding: Mapping[str, Type], stack: Tuple[str, ...]) -> Type:
        if isinstance(expr, FogVar):
            return binding[expr.name]
        args = [self.expr(arg, binding, stack) for arg in expr.args]
        if expr.head in self.recursive:
            head = Var(self.mu_name(expr.head)) if expr.head in stack else self.closed(expr.head, stack)
            return app(head, *args)
        # 不在环上的非终结符直接把实参代入产生式体
        return self.rule_body(expr.head, dict(zip(formals(len(args)), args)), stack)


def encode_fog(fog: Fog) -> Dict[str, Type]:
    """每个非终结符的封闭类型编码（已重命名）"""
    encoder = _Encoder(fog)
    encoded = {head: renamed(encoder.closed(head, ())) for head in sorted(fog.arity)}
    logger.debug(f"🧬 一阶文法编码: {len(encoded)} 个非终结符, 递归的有 {sorted(encoder.recursive)}")
    return encoded


def encode_expr(fog: Fog, expr: Optional[FogExpr] = None) -> Type:
    """
    封闭表达式的类型编码，默认编码初始表达式

    Raises:
        FogError: 表达式不封闭
    """
    expr = fog.initial if expr is None else expr
    _check_expr(fog, expr, (), "expression")
    return renamed(_Encoder(fog).expr(expr, {}, ()))


# ---------------------------------------------------------------- traces

def fog_traces(fog: Fog, expr: Optional[FogExpr] = None, depth: int = 10) -> Set[Tuple[str, ...]]:
    """长度不超过 depth 的全部终结符迹（前缀封闭，含空迹）"""
    expr = fog.initial if expr is None else expr
    traces: Set[Tuple[str, ...]] = set()

    def explore(current: FogExpr, prefix: Tuple[str, ...]) -> None:
        traces.add(prefix)
        if len(prefix) >= depth:
            return
        for terminal in sorted(fog.rules_of(current.head)):
            explore(fog_step(fog, current, terminal), prefix + (terminal,))

    explore(expr, ())
    return traces


def record_terminal(label: Label) -> Optional[str]:
    """{a1,…,an}_j 对应终结符 a_j；其余标签（如 {}_0）不对应终结符"""
    if isinstance(label, ConstHead) and isinstance(label.const, RecordC) and label.index >= 1:
        return label.const.labels[label.index - 1]
    return None


def type_traces(delta, t: Type, depth: int = 10) -> Set[Tuple[str, ...]]:
    """编码类型的迹，记录迁移映射回终结符，只有映射到终结符的步骤计入深度"""
    traces: Set[Tuple[str, ...]] = set()

    def explore(current: Type, prefix: Tuple[str, ...]) -> None:
        traces.add(prefix)
        for label, successor in transitions(delta, current).items():
            terminal = record_terminal(label)
            if terminal is None:
                explore(successor, prefix)
            elif len(prefix) < depth:
                explore(successor, prefix + (terminal,))

    explore(t, ())
    return traces
