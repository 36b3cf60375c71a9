"""
类型到简单文法的翻译

每个类型被映射为一个非终结符串：弱头范式按头部形状直接给出产生式，
非弱头范式分配新的非终结符并复制其范式对应首符号的产生式。
记忆表以重命名后的类型为键，保证递归类型只生成有限个非终结符。
"""

from typing import Dict, List, Mapping, Optional, Tuple

from core.kinding import higher_kind_recursion
from core.reduction import is_whnf, normalize
from core.renaming import renamed
from models.errors import FragmentError
from models.grammar_types import BOT, EPSILON, NonTerm, SimpleGrammar, Word
from models.labels import AbsLabel, ConstHead, Label, VarHead
from models.types import (
    SKIP, Abs, ArrowC, ChoiceC, Const, DualC, EndC, ForallC, MsgC, RecordC,
    SemiC, Type, Var, VariantC, as_seq, is_dual_of_var, spine,
)
from processors.grammar_bisim import check_simple
from utils.log_utils import get_logger

logger = get_logger(__name__)

_INDEXED_CONSTS = (ArrowC, ForallC, ChoiceC, RecordC, VariantC)


class GrammarBuilder:
    """
    逐步构建一个简单文法

    同一个 builder 可以翻译多个类型，它们共享记忆表与非终结符，
    等价判定时两侧类型必须用同一个 builder 翻译。
    """

    def __init__(self, delta: Optional[Mapping] = None, fuel: Optional[int] = None):
        self.delta = delta or {}
        self.fuel = fuel
        self.grammar = SimpleGrammar()
        self.memo: Dict[Type, Word] = {}
        self._counter = 0
        # (Y, Z, δ)：Y 复制 Z 的全部产生式并在右部追加 δ
        self._aliases: List[Tuple[NonTerm, NonTerm, Word]] = []

    def fresh(self) -> NonTerm:
        name = f"X{self._counter}"
        self._counter += 1
        self.grammar.declare(name)
        return name

    def word(self, t: Type) -> Word:
        """
        翻译类型为非终结符串

        Raises:
            FragmentError: 类型含有高阶种类的 μ
            DivergenceError: 类型不可规范化
        """
        if higher_kind_recursion(t) is not None:
            raise FragmentError("word() only handles recursion at proper kinds")
        result = self._word(renamed(t))
        self._resolve_aliases()
        return result

    def _word(self, t: Type) -> Word:
        if t in self.memo:
            return self.memo[t]
        if is_whnf(t):
            return self._word_whnf(t)
        normal = normalize(self.delta, t, self.fuel)
        if normal == SKIP:
            self.memo[t] = EPSILON
            return EPSILON
        fresh = self.fresh()
        self.memo[t] = (fresh,)
        target = self._word(normal)
        self._aliases.append((fresh, target[0], target[1:]))
        return (fresh,)

    def _produce(self, t: Type, rules: List[Tuple[Label, object]]) -> Word:
        """为弱头范式 t 分配新的非终结符；rules 中的右部可以是类型（延迟翻译）或现成的串"""
        fresh = self.fresh()
        self.memo[t] = (fresh,)
        for label, rhs in rules:
            if isinstance(rhs, tuple):
                body = rhs
            else:
                body = self._word(renamed(rhs[0])) + rhs[1]
            self.grammar.add_production(fresh, label, body)
        return (fresh,)

    def _word_whnf(self, t: Type) -> Word:
        if t == SKIP:
            return EPSILON
        if isinstance(t, Var):
            return self._produce(t, [(VarHead(t.name, 0), EPSILON)])
        if isinstance(t, Const):
            if isinstance(t.const, EndC):
                return self._produce(t, [(ConstHead(t.const, 0), (BOT,))])
            return self._produce(t, [(ConstHead(t.const, 0), EPSILON)])
        if isinstance(t, Abs):
            return self._produce(t, [(AbsLabel(t.binder, t.kind), [t.body, EPSILON])])

        head, args = spine(t)
        if isinstance(head, Var):
            rules = [(VarHead(head.name, 0), EPSILON)]
            rules += [(VarHead(head.name, j), [arg, (BOT,)]) for j, arg in enumerate(args, start=1)]
            return self._produce(t, rules)
        const = head.const
        if isinstance(const, _INDEXED_CONSTS):
            rules = [(ConstHead(const, j), [arg, EPSILON]) for j, arg in enumerate(args, start=1)]
            return self._produce(t, rules)
        if isinstance(const, MsgC):
            return self._produce(t, [(ConstHead(const, 1), [args[0], (BOT,)]),
                                     (ConstHead(const, 2), EPSILON)])
        if isinstance(const, SemiC):
            if len(args) == 1:
                return self._produce(t, [(ConstHead(const, 1), [args[0], EPSILON])])
            first, rest = as_seq(t)
            result = self._word(renamed(first)) + self._word(renamed(rest))
            self.memo[t] = result
            return result
        if isinstance(const, DualC) and is_dual_of_var(t):
            # 与 α T̄ 的情形一致，⊥ 阻止后续的 ;U 在 Dual1 分支中继续
            return self._produce(t, [(ConstHead(const, 1), [args[0], (BOT,)]),
                                     (ConstHead(const, 2), EPSILON)])
        raise FragmentError(f"no grammar translation for {t}")

    def _resolve_aliases(self) -> None:
        """把延迟的产生式复制补齐到不动点"""
        changed = True
        while changed:
            changed = False
            for fresh, target, suffix in self._aliases:
                for label, rhs in list(self.grammar.rules_of(target).items()):
                    if label not in self.grammar.rules_of(fresh):
                        self.grammar.add_production(fresh, label, rhs + suffix)
                        changed = True


def build_grammar(delta, t: Type, fuel: Optional[int] = None) -> SimpleGrammar:
    """翻译单个类型，开始串即 word(T)"""
    builder = GrammarBuilder(delta, fuel)
    builder.grammar.start = builder.word(t)
    check_simple(builder.grammar)
    logger.debug(f"📐 文法规模: {builder.grammar.production_count()} 条产生式")
    return builder.grammar


def build_joint_grammar(delta, t: Type, u: Type,
                        fuel: Optional[int] = None) -> Tuple[SimpleGrammar, Word, Word]:
    """在同一个文法中翻译两个类型"""
    builder = GrammarBuilder(delta, fuel)
    left = builder.word(t)
    right = builder.word(u)
    builder.grammar.start = left
    check_simple(builder.grammar)
    return builder.grammar, left, right
