"""
线性双向类型检查

synth(Δ, Γ, t) 推导 t 的类型并返回未用完的上下文；check 在 synth 之后用 equivalent 比较类型。
上下文在子项之间按顺序传递，线性绑定只能被消耗一次，
match/case 的各分支必须留下相同的剩余上下文。
"""

from typing import Callable, Dict, FrozenSet, Mapping, Optional, Set, Tuple

from config.fmo_config import FmoConfig
from core.kinding import extend, kind_of, pre_kind
from core.reduction import normalize
from core.renaming import instantiate, renamed
from managers.equivalence_manager import equivalent
from models.errors import (
    EquivalenceUnknown, LabelMismatch, LinearityViolation, TypeMismatch,
    TypingError, UnboundVariable,
)
from models.labels import Bisimilar, NotBisimilar
from models.terms import (
    AppTerm, CaseTerm, ConstTerm, GlobalRef, IntTerm, LamTerm, LetRecordTerm, LetTerm,
    MatchTerm, Program, RecordTerm, RecTerm, Term, TermConstKind, TypeAppTerm,
    TypeLamTerm, VariantTerm, VarTerm,
)
from models.typing_context import TypingContext
from models.types import (
    END, S_KIND, T_KIND, UNIT, Abs, ArrowK, Kind, Polarity, Type, UserVar, View, Var, app,
    arrow, as_arrow, as_choice, as_forall, as_record, as_seq, as_variant, dual, forall,
    is_proper, msg, pair, record, seq, spine,
)
from processors.type_lts import format_label
from utils.log_utils import get_logger
from utils.type_printer import format_type

logger = get_logger(__name__)

INT_TYPE = Var(UserVar("Int"))


def const_type(kind: TermConstKind) -> Type:
    """
    项常量的类型

        receive : ∀α:T.∀β:S. ?α;β → (α, β)
        send    : ∀α:T. α → ∀β:S. !α;β → β
        close   : End → {}
        fork    : ({} → {}) → {}
        new     : ∀α:S. (α, Dual α)

    select 的类型依赖标注，见 TypeChecker.select_type
    """
    a, b = Var(UserVar("a")), Var(UserVar("b"))
    if kind is TermConstKind.RECEIVE:
        return forall("a", T_KIND, forall("b", S_KIND, arrow(seq(msg(Polarity.IN, a), b), pair(a, b))))
    if kind is TermConstKind.SEND:
        return forall("a", T_KIND, arrow(a, forall("b", S_KIND, arrow(seq(msg(Polarity.OUT, a), b), b))))
    if kind is TermConstKind.CLOSE:
        return arrow(END, UNIT)
    if kind is TermConstKind.FORK:
        return arrow(arrow(UNIT, UNIT), UNIT)
    if kind is TermConstKind.NEW:
        return forall("a", S_KIND, pair(a, dual(a)))
    raise ValueError(f"{kind} has no closed type")


class TypeChecker:
    """
    一次类型检查会话：顶层签名与等价判定配置

    Args:
        globals_: 顶层名字到签名的映射（非受限）
        config: 等价判定使用的配置
    """

    def __init__(self, globals_: Optional[Mapping[str, Type]] = None,
                 config: Optional[FmoConfig] = None):
        self.globals = dict(globals_ or {})
        self.config = config or FmoConfig()
        self.base_types = frozenset(name for name, kind in self.config.type_context.items() if str(kind) == "T")
        self.equivalence_calls = 0
        self._verdicts: Dict[Tuple[Type, Type], bool] = {}
        # 被类型抽象遮蔽的基本类型名
        self._opaque: Set[str] = set()
        # 已被消耗的线性变量名，用于区分重复使用与未绑定
        self._spent: Set[str] = set()

    # ------------------------------------------------------------ types

    def whnf(self, delta, t: Type) -> Type:
        return normalize(delta, t, self.config.norm_fuel)

    def proper(self, delta, t: Type, where: str) -> None:
        """标注必须是恰当种类的合法类型"""
        kind = kind_of(delta, t)
        if not is_proper(kind):
            raise TypeMismatch(f"{where}: {format_type(t)} has kind {kind}, expected S or T")

    def unrestricted(self, delta, t: Type, seen: FrozenSet[Type] = frozenset()) -> bool:
        """
        值可以被丢弃与复制的类型：函数、∀、种类 T 的变量头类型，以及字段都非受限的记录和变体。
        会话类型总是线性的。函数类型的值只有在没有捕获线性资源时才真的可以复制，
        这一点由 _bind 与 _synth_AppTerm 在值进入绑定之前检查。
        """
        current = self.whnf(delta, t)
        if current in seen:
            return True
        if as_arrow(current) is not None or as_forall(current) is not None:
            return True
        head, _ = spine(current)
        if isinstance(head, Var):
            return pre_kind(delta, current) == T_KIND
        fields = as_record(current) or as_variant(current)
        if fields is not None:
            return all(self.unrestricted(delta, field, seen | {current}) for field in fields[1].values())
        return False

    def pure_data(self, delta, t: Type, seen: FrozenSet[Type] = frozenset()) -> bool:
        """不可能携带线性资源的类型：基本类型，以及字段都是纯数据的记录和变体"""
        current = self.whnf(delta, t)
        if current in seen:
            return True
        if isinstance(current, Var):
            return str(current.name) in self.base_types and str(current.name) not in self._opaque
        fields = as_record(current) or as_variant(current)
        if fields is not None:
            return all(self.pure_data(delta, field, seen | {current}) for field in fields[1].values())
        return False

    def shareable(self, delta, t: Type, captures: bool) -> bool:
        """类型为 t 的值能否进入非受限绑定；captures 表示求值这个值消耗了线性绑定"""
        if not self.unrestricted(delta, t):
            return False
        return not captures or self.pure_data(delta, t)

    def same(self, delta, found: Type, expected: Type, where: str) -> None:
        """规则 T-Eq：要求 found 与 expected 互模拟"""
        if renamed(found) == renamed(expected):
            return
        key = (renamed(found), renamed(expected))
        if self._verdicts.get(key):
            return
        self.equivalence_calls += 1
        verdict = equivalent(delta, found, expected, self.config)
        if isinstance(verdict, Bisimilar):
            self._verdicts[key] = True
            return
        if isinstance(verdict, NotBisimilar):
            trace = " ".join(format_label(label) for label in verdict.trace)
            raise TypeMismatch(f"{where}: expected {format_type(expected)}, found {format_type(found)} "
                               f"(distinguished by {trace})")
        raise EquivalenceUnknown(f"{where}: cannot decide {format_type(found)} = {format_type(expected)} "
                                 f"({verdict.reason})")

    def session_front(self, delta, t: Type) -> Tuple[Type, Optional[Type]]:
        """会话类型的首个动作与剩余部分：T;R 返回 (whnf(T), R)，否则返回 (whnf(t), None)"""
        current = self.whnf(delta, t)
        parts = as_seq(current)
        if parts is None:
            return current, None
        return self.whnf(delta, parts[0]), parts[1]

    def choice_fields(self, delta, t: Type, view: View, where: str) -> Dict[str, Type]:
        """&{…} 或 +{…}（可带 ;R）的各分支延续，已经接上 R"""
        front, rest = self.session_front(delta, t)
        selected = as_choice(front)
        if selected is None or selected[0].view is not view:
            raise TypeMismatch(f"{where}: expected a {view.value}-choice, found {format_type(t)}")
        fields = selected[1]
        if rest is None:
            return dict(fields)
        return {label: seq(body, rest) for label, body in fields.items()}

    def select_type(self, delta, const: ConstTerm) -> Type:
        """select l [T] : T → T_l，T 是内选择（可带顺序延续）"""
        if const.annotation is None:
            raise TypeMismatch(f"select {const.label} needs a choice type annotation")
        self.proper(delta, const.annotation, f"select {const.label}")
        fields = self.choice_fields(delta, const.annotation, View.INTERNAL, f"select {const.label}")
        if const.label not in fields:
            raise LabelMismatch(f"select {const.label}: label not in {sorted(fields)}")
        return arrow(const.annotation, fields[const.label])

    # ------------------------------------------------------------ terms

    def synth(self, delta, context: TypingContext, t: Term) -> Tuple[Type, TypingContext]:
        method: Callable = getattr(self, f"_synth_{type(t).__name__}", None)
        if method is None:
            raise TypingError(f"cannot type {type(t).__name__}")
        return method(delta, context, t)

    def check(self, delta, context: TypingContext, t: Term, expected: Type) -> TypingContext:
        """检查模式：省略标注的 λ 从期望类型取参数类型，其余情形 synth 后比较"""
        if isinstance(t, LamTerm) and t.param_type is None:
            parts = as_arrow(self.whnf(delta, expected))
            if parts is None:
                raise TypeMismatch(f"fun {t.param}: expected {format_type(expected)}, found a function")
            result, remaining = self._lambda(delta, context, t.param, parts[0], t.body)
            self.same(delta, result, parts[1], f"fun {t.param}")
            return remaining
        found, remaining = self.synth(delta, context, t)
        self.same(delta, found, expected, _describe(t))
        return remaining

    def _synth_ConstTerm(self, delta, context, t: ConstTerm):
        if t.kind is TermConstKind.SELECT:
            return self.select_type(delta, t), context
        return const_type(t.kind), context

    def _synth_VarTerm(self, delta, context, t: VarTerm):
        binding = context.lookup(t.name)
        if binding is None:
            if t.name in self._spent:
                raise LinearityViolation(f"linear variable {t.name} is used more than once")
            raise UnboundVariable(f"unbound variable {t.name}")
        if binding.linear:
            self._spent.add(t.name)
            return binding.type, context.remove(t.name)
        return binding.type, context

    def _synth_GlobalRef(self, delta, context, t: GlobalRef):
        if t.name not in self.globals:
            raise UnboundVariable(f"unknown top-level name {t.name}")
        return self.globals[t.name], context

    def _synth_IntTerm(self, delta, context, t: IntTerm):
        return INT_TYPE, context

    def _bind(self, delta, context: TypingContext, name: str, t: Type, captures: bool = False) -> TypingContext:
        return context.extend(name, t, linear=not self.shareable(delta, t, captures))

    def _release(self, context: TypingContext, remaining: TypingContext, names, where: str) -> TypingContext:
        """作用域结束：线性绑定必须已被消耗，然后恢复被遮蔽的外层绑定"""
        for name in names:
            binding = remaining.lookup(name)
            if binding is not None and binding.linear:
                raise LinearityViolation(f"{where}: linear variable {name} is never used")
            remaining = remaining.restore(name, context.lookup(name))
        return remaining

    def _lambda(self, delta, context, param: str, param_type: Type, body: Term, captures: bool = False):
        self.proper(delta, param_type, f"fun {param}")
        inner = self._bind(delta, context, param, param_type, captures)
        result, remaining = self.synth(delta, inner, body)
        return result, self._release(context, remaining, [param], f"fun {param}")

    def _synth_LamTerm(self, delta, context, t: LamTerm):
        if t.param_type is None:
            raise TypingError(f"fun {t.param}: parameter type required here")
        result, remaining = self._lambda(delta, context, t.param, t.param_type, t.body)
        return arrow(t.param_type, result), remaining

    def _synth_RecTerm(self, delta, context, t: RecTerm):
        self.proper(delta, t.rec_type, f"rec {t.name}")
        if as_arrow(self.whnf(delta, t.rec_type)) is None:
            raise TypeMismatch(f"rec {t.name}: expected a function type, found {format_type(t.rec_type)}")
        inner = context.extend(t.name, t.rec_type, linear=False)
        remaining = self.check(delta, inner, t.value, t.rec_type)
        remaining = remaining.restore(t.name, context.lookup(t.name))
        if not remaining.same_linear(context):
            consumed = sorted(set(context.linear()) - set(remaining.linear()))
            raise LinearityViolation(f"rec {t.name}: recursive value captures linear {consumed}")
        return t.rec_type, remaining

    def _synth_TypeLamTerm(self, delta, context, t: TypeLamTerm):
        inner = extend(delta, UserVar(t.binder), t.kind)
        shadowed = t.binder in self.base_types and t.binder not in self._opaque
        if shadowed:
            self._opaque.add(t.binder)
        try:
            result, remaining = self.synth(inner, context, t.body)
        finally:
            if shadowed:
                self._opaque.discard(t.binder)
        return forall(t.binder, t.kind, result), remaining

    def _synth_AppTerm(self, delta, context, t: AppTerm):
        if isinstance(t.fun, LamTerm) and t.fun.param_type is None:
            # case 归约后的 handler v：参数类型取自实参
            arg_type, remaining = self.synth(delta, context, t.arg)
            return self._lambda(delta, remaining, t.fun.param, arg_type, t.fun.body,
                                _captures(context, remaining))
        fun_type, remaining = self.synth(delta, context, t.fun)
        parts = as_arrow(self.whnf(delta, fun_type))
        if parts is None:
            raise TypeMismatch(f"{_describe(t.fun)} is applied but has type {format_type(fun_type)}")
        domain, codomain = parts
        before = remaining
        remaining = self.check(delta, remaining, t.arg, domain)
        # fork 只调用一次它的参数，其余函数的形参可能被复制
        if not _is_const(t.fun, TermConstKind.FORK):
            self._require_shareable(delta, before, remaining, domain, f"argument of {_describe(t.fun)}")
        return codomain, remaining

    def _require_shareable(self, delta, before: TypingContext, after: TypingContext, t: Type, where: str) -> None:
        """值将进入可复制的绑定：若它消耗了线性绑定且类型不是纯数据，拒绝"""
        if not self.unrestricted(delta, t) or self.shareable(delta, t, _captures(before, after)):
            return
        consumed = sorted(set(before.linear()) - set(after.linear()))
        raise LinearityViolation(f"{where}: value of type {format_type(t)} captures linear {consumed} "
                                 f"but may be duplicated")

    def _synth_TypeAppTerm(self, delta, context, t: TypeAppTerm):
        fun_type, remaining = self.synth(delta, context, t.fun)
        quantified = as_forall(self.whnf(delta, fun_type))
        if quantified is None:
            raise TypeMismatch(f"{_describe(t.fun)} is applied to a type but has type {format_type(fun_type)}")
        kind, body = quantified
        argument_kind = kind_of(delta, t.type_arg)
        if not _kind_fits(kind, argument_kind):
            raise TypeMismatch(f"type argument {format_type(t.type_arg)} has kind {argument_kind}, expected {kind}")
        if isinstance(body, Abs):
            return instantiate(body.body, t.type_arg, body.binder), remaining
        return self.whnf(delta, app(body, t.type_arg)), remaining

    def _synth_RecordTerm(self, delta, context, t: RecordTerm):
        fields = {}
        remaining = context
        for label, field in t.fields:
            fields[label], remaining = self.synth(delta, remaining, field)
        return record(fields), remaining

    def _synth_LetRecordTerm(self, delta, context, t: LetRecordTerm):
        bound_type, remaining = self.synth(delta, context, t.bound)
        shape = as_record(self.whnf(delta, bound_type))
        if shape is None:
            raise TypeMismatch(f"let-record on {format_type(bound_type)}")
        fields = shape[1]
        labels = sorted(label for label, _ in t.binders)
        if labels != sorted(fields):
            raise LabelMismatch(f"let-record pattern {labels} against record labels {sorted(fields)}")
        captures = _captures(context, remaining)
        # receive 的载荷来自发送方，发送时已要求它可以复制
        received = _is_receive(t.bound)
        inner = remaining
        for label, name in t.binders:
            field_captures = captures and not (received and label == "Fst")
            inner = self._bind(delta, inner, name, fields[label], field_captures)
        result, after = self.synth(delta, inner, t.body)
        names = [name for _, name in t.binders]
        return result, self._release(remaining, after, names, f"let {{{', '.join(names)}}}")

    def _synth_LetTerm(self, delta, context, t: LetTerm):
        bound_type, remaining = self.synth(delta, context, t.bound)
        inner = self._bind(delta, remaining, t.name, bound_type, _captures(context, remaining))
        result, after = self.synth(delta, inner, t.body)
        return result, self._release(remaining, after, [t.name], f"let {t.name}")

    def _synth_VariantTerm(self, delta, context, t: VariantTerm):
        self.proper(delta, t.variant_type, f"tag {t.label}")
        shape = as_variant(self.whnf(delta, t.variant_type))
        if shape is None:
            raise TypeMismatch(f"tag {t.label}: {format_type(t.variant_type)} is not a variant type")
        if t.label not in shape[1]:
            raise LabelMismatch(f"tag {t.label}: label not in {sorted(shape[1])}")
        remaining = self.check(delta, context, t.payload, shape[1][t.label])
        return t.variant_type, remaining

    def _branches(self, delta, context, handlers, domains: Mapping[str, Type], where: str,
                  captures: bool = False):
        labels = sorted(label for label, _ in handlers)
        if labels != sorted(domains):
            raise LabelMismatch(f"{where}: handlers {labels} against labels {sorted(domains)}")
        result: Optional[Type] = None
        remaining: Optional[TypingContext] = None
        for label, handler in handlers:
            branch_type, after = self._handler(delta, context, handler, domains[label],
                                               f"{where} {label}", captures)
            if result is None:
                result, remaining = branch_type, after
                continue
            if not after.same_linear(remaining):
                left, right = set(remaining.linear()), set(after.linear())
                raise LinearityViolation(f"{where} {label}: branches leave different linear variables "
                                         f"{sorted(left ^ right)}")
            self.same(delta, branch_type, result, f"{where} {label}")
        return result, remaining

    def _handler(self, delta, context, handler: Term, domain: Type, where: str, captures: bool = False):
        if isinstance(handler, LamTerm) and handler.param_type is None:
            return self._lambda(delta, context, handler.param, domain, handler.body, captures)
        if captures and self.unrestricted(delta, domain) and not self.pure_data(delta, domain):
            raise LinearityViolation(f"{where}: payload of type {format_type(domain)} captures linear "
                                     f"resources but the handler may duplicate it")
        handler_type, remaining = self.synth(delta, context, handler)
        parts = as_arrow(self.whnf(delta, handler_type))
        if parts is None:
            raise TypeMismatch(f"{where}: handler has type {format_type(handler_type)}")
        self.same(delta, domain, parts[0], where)
        return parts[1], remaining

    def _synth_CaseTerm(self, delta, context, t: CaseTerm):
        scrutinee_type, remaining = self.synth(delta, context, t.scrutinee)
        shape = as_variant(self.whnf(delta, scrutinee_type))
        if shape is None:
            raise TypeMismatch(f"case on {format_type(scrutinee_type)}")
        return self._branches(delta, remaining, t.handlers, shape[1], "case", _captures(context, remaining))

    def _synth_MatchTerm(self, delta, context, t: MatchTerm):
        scrutinee_type, remaining = self.synth(delta, context, t.scrutinee)
        domains = self.choice_fields(delta, scrutinee_type, View.EXTERNAL, "match")
        return self._branches(delta, remaining, t.handlers, domains, "match", _captures(context, remaining))


def _captures(before: TypingContext, after: TypingContext) -> bool:
    """求值期间是否消耗了线性绑定"""
    return not after.same_linear(before)


def _is_const(t: Term, kind: TermConstKind) -> bool:
    return isinstance(t, ConstTerm) and t.kind is kind


def _is_receive(t: Term) -> bool:
    """receive [T] [U] e 的完整应用"""
    if not isinstance(t, AppTerm):
        return False
    head = t.fun
    while isinstance(head, (AppTerm, TypeAppTerm)):
        head = head.fun
    return _is_const(head, TermConstKind.RECEIVE)


def _kind_fits(expected: Kind, actual: Kind) -> bool:
    if expected == actual:
        return True
    if isinstance(expected, ArrowK) and isinstance(actual, ArrowK):
        return _kind_fits(expected.domain, actual.domain) and _kind_fits(expected.codomain, actual.codomain)
    return False


def _describe(t: Term) -> str:
    if isinstance(t, (VarTerm, GlobalRef)):
        return t.name
    if isinstance(t, ConstTerm):
        return t.kind.value
    return type(t).__name__.replace("Term", "").lower() or "term"


def synth(delta: Mapping, context: TypingContext, t: Term,
          globals_: Optional[Mapping[str, Type]] = None,
          config: Optional[FmoConfig] = None) -> Tuple[Type, TypingContext]:
    """
    类型推导

    Args:
        delta: 种类上下文
        context: 输入的项变量上下文
        t: 项
        globals_: 顶层签名
        config: 等价判定配置

    Returns:
        (类型, 未使用的剩余上下文)

    Raises:
        UnboundVariable / LinearityViolation / TypeMismatch / LabelMismatch /
        EquivalenceUnknown / KindError
    """
    return TypeChecker(globals_, config).synth(delta, context, t)


def check(delta: Mapping, context: TypingContext, t: Term, expected: Type,
          globals_: Optional[Mapping[str, Type]] = None,
          config: Optional[FmoConfig] = None) -> TypingContext:
    """检查模式：synth 后要求类型与 expected 互模拟"""
    return TypeChecker(globals_, config).check(delta, context, t, expected)


def synth_closed(delta: Mapping, context: TypingContext, t: Term,
                 globals_: Optional[Mapping[str, Type]] = None,
                 config: Optional[FmoConfig] = None) -> Type:
    """推导类型并要求所有线性绑定都已被消耗"""
    result, remaining = synth(delta, context, t, globals_, config)
    leftover = sorted(remaining.linear())
    if leftover:
        raise LinearityViolation(f"linear variables never used: {leftover}")
    return result


def typecheck_program(program: Program, delta: Optional[Mapping] = None,
                      config: Optional[FmoConfig] = None) -> Dict[str, Type]:
    """
    检查整个程序

    每个签名必须是恰当种类的合法类型；每个定义按检查模式对照签名；
    只有签名的绑定作为非受限的公理。

    Returns:
        名字到签名的映射

    Raises:
        TypingError: 附带出错的绑定名
        KindError: 签名或标注不合法
    """
    config = config or FmoConfig()
    delta = dict(config.default_kind_context() if delta is None else delta)
    signatures = {entry.name: entry.signature for entry in program.bindings}
    checker = TypeChecker(signatures, config)

    for entry in program.bindings:
        try:
            checker.proper(delta, entry.signature, f"signature of {entry.name}")
        except TypingError as exc:
            raise exc.with_binding(entry.name)
        if entry.is_axiom:
            logger.debug(f"📌 公理 {entry.name} : {format_type(entry.signature)}")
            continue
        checker._spent.clear()
        try:
            remaining = checker.check(delta, TypingContext(), entry.body, entry.signature)
        except TypingError as exc:
            raise exc.with_binding(entry.name)
        if remaining.linear():
            raise LinearityViolation(f"unused {sorted(remaining.linear())}").with_binding(entry.name)
        logger.debug(f"✅ {entry.name} : {format_type(entry.signature)}")

    logger.info(f"✅ 类型检查通过: {len(signatures)} 个绑定, {checker.equivalence_calls} 次等价判定")
    return signatures
