"""
随机生成封闭且类型正确的函数式项

类型只取 Int、单位、二值变体、二元组与函数。项按期望类型构造，
混入 β、let、二元组解构、case、rec 展开与类型应用等可约式；
rec 的函数体不调用自身，保证求值终止。
"""

import random
from typing import Dict, List, Tuple

from models.terms import (
    AppTerm, CaseTerm, IntTerm, LamTerm, LetRecordTerm, LetTerm, RecTerm, Term,
    TypeAppTerm, TypeLamTerm, UNIT_TERM, VariantTerm, VarTerm, pair_term,
)
from models.types import T_KIND, UNIT, Type, arrow, as_arrow, as_record, pair, var, variant

INT = var("Int")
BOOL = variant({"False": UNIT, "True": UNIT})
BASE = (INT, UNIT, BOOL)


def random_type(rng: random.Random, depth: int = 2) -> Type:
    if depth <= 0 or rng.random() < 0.4:
        return rng.choice(BASE)
    if rng.random() < 0.5:
        return pair(random_type(rng, depth - 1), random_type(rng, depth - 1))
    return arrow(random_type(rng, depth - 1), random_type(rng, depth - 1))


class TermGenerator:
    """按类型生成项；环境只记录非受限的函数式变量"""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.counter = 0

    def fresh(self) -> str:
        self.counter += 1
        return f"v{self.counter}"

    def closed(self, depth: int = 3) -> Tuple[Term, Type]:
        t = random_type(self.rng)
        return self.term(t, {}, depth), t

    def term(self, t: Type, env: Dict[str, Type], depth: int) -> Term:
        if depth <= 0 or self.rng.random() < 0.2:
            return self.leaf(t, env)
        builders: List = [self.intro, self.beta, self.let, self.let_pair, self.case,
                          self.rec, self.type_app, self.apply_variable]
        return self.rng.choice(builders)(t, env, depth)

    def leaf(self, t: Type, env: Dict[str, Type]) -> Term:
        names = sorted(name for name, bound in env.items() if bound == t)
        if names and self.rng.random() < 0.7:
            return VarTerm(self.rng.choice(names))
        return self.intro(t, env, 0)

    def intro(self, t: Type, env: Dict[str, Type], depth: int) -> Term:
        """t 的构造形式"""
        if t == INT:
            return IntTerm(self.rng.randrange(10))
        if t == UNIT:
            return UNIT_TERM
        if t == BOOL:
            return VariantTerm(self.rng.choice(("False", "True")), UNIT_TERM, BOOL)
        parts = as_arrow(t)
        if parts is not None:
            domain, codomain = parts
            name = self.fresh()
            return LamTerm(name, domain, self.term(codomain, {**env, name: domain}, depth - 1))
        fields = as_record(t)[1]
        return pair_term(self.term(fields["Fst"], env, depth - 1), self.term(fields["Snd"], env, depth - 1))

    def beta(self, t: Type, env: Dict[str, Type], depth: int) -> Term:
        domain = random_type(self.rng, 1)
        name = self.fresh()
        body = self.term(t, {**env, name: domain}, depth - 1)
        return AppTerm(LamTerm(name, domain, body), self.term(domain, env, depth - 1))

    def let(self, t: Type, env: Dict[str, Type], depth: int) -> Term:
        bound_type = random_type(self.rng, 1)
        name = self.fresh()
        bound = self.term(bound_type, env, depth - 1)
        return LetTerm(name, bound, self.term(t, {**env, name: bound_type}, depth - 1))

    def let_pair(self, t: Type, env: Dict[str, Type], depth: int) -> Term:
        first_type, second_type = random_type(self.rng, 1), random_type(self.rng, 1)
        first, second = self.fresh(), self.fresh()
        bound = self.term(pair(first_type, second_type), env, depth - 1)
        body = self.term(t, {**env, first: first_type, second: second_type}, depth - 1)
        return LetRecordTerm((("Fst", first), ("Snd", second)), bound, body)

    def case(self, t: Type, env: Dict[str, Type], depth: int) -> Term:
        handlers = []
        for label in ("False", "True"):
            name = self.fresh()
            handlers.append((label, LamTerm(name, None, self.term(t, {**env, name: UNIT}, depth - 1))))
        return CaseTerm(self.term(BOOL, env, depth - 1), tuple(handlers))

    def rec(self, t: Type, env: Dict[str, Type], depth: int) -> Term:
        name, param = self.fresh(), self.fresh()
        value = LamTerm(param, INT, self.term(t, {**env, param: INT}, depth - 1))
        return AppTerm(RecTerm(name, arrow(INT, t), value), self.term(INT, env, depth - 1))

    def type_app(self, t: Type, env: Dict[str, Type], depth: int) -> Term:
        """(Λa:T. λx:a. x) [t] e"""
        name = self.fresh()
        identity = TypeLamTerm("a", T_KIND, LamTerm(name, var("a"), VarTerm(name)))
        return AppTerm(TypeAppTerm(identity, t), self.term(t, env, depth - 1))

    def apply_variable(self, t: Type, env: Dict[str, Type], depth: int) -> Term:
        functions = sorted(name for name, bound in env.items()
                           if as_arrow(bound) is not None and as_arrow(bound)[1] == t)
        if not functions:
            return self.intro(t, env, depth)
        name = self.rng.choice(functions)
        domain = as_arrow(env[name])[0]
        return AppTerm(VarTerm(name), self.term(domain, env, depth - 1))
