"""
类型 LTS 测试：迁移、标签渲染、有界互模拟与等价公理
"""

import pytest

from conftest import STREAM
from core.reduction import normalize
from core.renaming import renamed, substitute
from core.type_parser import parse_type
from models.labels import AbsLabel, Bisimilar, ConstHead, NotBisimilar, Unknown, VarHead
from models.types import (
    END, SKIP, T_KIND, Abs, CanonicalVar, ChoiceC, Const, EndC, MsgC, Polarity, UserVar, Var, View,
    as_arrow, as_choice, as_forall, as_msg, as_record, as_seq, as_variant, choice, is_dual_of_var,
    is_var_headed, seq, spine,
)
from processors.type_lts import (
    bounded_bisim, format_label, parse_label, reachable_graph, replay, transitions,
)
from type_generators import session, session_pair

C1 = CanonicalVar(1)


def bisimilar(delta, t, u, depth=24):
    return isinstance(bounded_bisim(delta, t, u, depth=depth), Bisimilar)


class TestTransitions:

    def test_abstraction(self, delta):
        moves = transitions(delta, parse_type(r"\a:T. ?a ; End"))
        assert list(moves) == [AbsLabel(C1, T_KIND)]
        assert moves[AbsLabel(C1, T_KIND)] == renamed(parse_type("?$1 ; End"))

    def test_skip_has_no_transitions(self, delta):
        assert transitions(delta, SKIP) == {}

    def test_end_and_end_sequence_share_label(self, delta):
        end = ConstHead(EndC(), 0)
        assert transitions(delta, END) == {end: SKIP}
        assert transitions(delta, parse_type("End ; ?Int")) == {end: SKIP}

    def test_message_in_sequence(self, delta):
        moves = transitions(delta, parse_type("!Int ; End"))
        out = MsgC(Polarity.OUT)
        assert moves == {ConstHead(out, 1): Var(UserVar("Int")), ConstHead(out, 2): END}

    def test_dual_stream_unfolds(self, delta):
        t = parse_type(f"Dual (({STREAM}) Int)")
        moves = transitions(delta, t)
        internal = ChoiceC(View.INTERNAL, ("Done", "More"))
        assert set(moves) == {ConstHead(internal, 1), ConstHead(internal, 2)}
        assert bisimilar(delta, moves[ConstHead(internal, 1)], SKIP)
        more = transitions(delta, moves[ConstHead(internal, 2)])
        assert set(more) == {ConstHead(MsgC(Polarity.OUT), 1), ConstHead(MsgC(Polarity.OUT), 2)}

    def test_var_headed(self, delta):
        moves = transitions(delta, parse_type("a !Int ; End"))
        assert moves[VarHead(UserVar("a"), 0)] == END
        assert moves[VarHead(UserVar("a"), 1)] == parse_type("!Int")

    def test_choice_distributes_continuation(self, delta):
        t = parse_type("+{A: ?Int, B: Skip} ; End")
        internal = ChoiceC(View.INTERNAL, ("A", "B"))
        moves = transitions(delta, t)
        assert moves[ConstHead(internal, 1)] == renamed(seq(parse_type("?Int"), END))
        assert moves[ConstHead(internal, 2)] == renamed(seq(SKIP, END))

    def test_deterministic_on_random_types(self, delta, rng):
        for _ in range(100):
            t = session(rng, 5)
            moves = transitions(delta, t)
            assert transitions(delta, t) == moves
            assert len(set(moves)) == len(moves)


class TestLabels:

    @pytest.mark.parametrize("text", [
        "End", "?_1", "!_2", "&{Leaf,Node}_2", "+{Done,More}_1", "a_0", "a_3",
        "lambda $1:T", "lambda $2:S=>S", "{Fst,Snd}_1", "<False,True>_2", "$1_0", "->_1",
        "forall S_1", "mu T", "{}",
    ])
    def test_round_trip(self, text):
        assert format_label(parse_label(text)) == text

    def test_choice_labels_embed_label_set(self):
        assert parse_label("&{A,B}_1") != parse_label("&{A,C}_1")

    def test_malformed(self):
        with pytest.raises(ValueError):
            parse_label("")


class TestBoundedBisim:

    def test_neutral_element(self, delta):
        verdict = bounded_bisim(delta, parse_type("Skip;End"), END)
        assert isinstance(verdict, Bisimilar)
        assert verdict.evidence.startswith("closure:")

    def test_root_difference(self, delta):
        verdict = bounded_bisim(delta, parse_type("?Int;End"), parse_type("!Int;End"), depth=1)
        assert isinstance(verdict, NotBisimilar)
        assert len(verdict.trace) == 1
        assert format_label(verdict.trace[0]) in ("?_1", "?_2", "!_1", "!_2")

    def test_var_applied_to_message(self, delta):
        assert bisimilar(delta, parse_type("a (!Int)"), parse_type("(a (!Int)) ; Skip"), depth=2)

    def test_shortest_trace_is_replayable(self, delta):
        t = parse_type("?Int ; !Bool ; End")
        u = parse_type("?Int ; !Int ; End")
        verdict = bounded_bisim(delta, t, u)
        assert isinstance(verdict, NotBisimilar)
        prefix = verdict.trace[:-1]
        left, right = replay(delta, t, prefix), replay(delta, u, prefix)
        assert left is not None and right is not None
        last = verdict.trace[-1]
        assert (last in transitions(delta, left)) != (last in transitions(delta, right))

    def test_depth_exhausted(self, delta):
        t = parse_type("mu s:S. ?Int ; s")
        u = parse_type("?Int ; ?Int ; mu s:S. ?Int ; ?Int ; s")
        verdict = bounded_bisim(delta, t, u, depth=1)
        assert isinstance(verdict, Unknown)
        assert verdict.reason == "oracle:depth-exhausted"

    def test_recursive_closure(self, delta):
        t = parse_type("mu s:S. ?Int ; s")
        u = parse_type("mu s:S. ?Int ; ?Int ; s")
        assert bisimilar(delta, t, u)

    def test_normalization_invariance(self, delta, rng):
        for _ in range(50):
            t = session(rng, 5)
            assert bisimilar(delta, t, normalize(delta, t))


class TestAxioms:
    """顺序组合与选择的等价公理"""

    def test_axioms_on_random_types(self, delta, rng):
        for _ in range(100):
            t, u, v = session(rng, 3), session(rng, 3), session(rng, 3)
            assert bisimilar(delta, seq(SKIP, t), t)
            assert bisimilar(delta, seq(END, t), END)
            assert bisimilar(delta, seq(seq(t, u), v), seq(t, seq(u, v)))
            for view in View:
                left = seq(choice(view, {"A": t, "B": u}), v)
                right = choice(view, {"A": seq(t, v), "B": seq(u, v)})
                assert bisimilar(delta, left, right)

    def test_end_absorbs(self, delta):
        assert bisimilar(delta, parse_type("End ; ?Int ; !Bool"), END)

    def test_not_end(self, delta):
        assert not bisimilar(delta, parse_type("?Int ; End"), END)


class TestReachableGraph:

    def test_stream_graph_closes(self, delta):
        states, edges = reachable_graph(delta, parse_type(f"({STREAM}) Int"), depth=8)
        assert states[0] == renamed(parse_type(f"({STREAM}) Int"))
        assert len(states) == 5
        assert {format_label(label) for _, label, _ in edges} == {
            "&{Done,More}_1", "&{Done,More}_2", "?_1", "?_2", "Int_0",
        }

    def test_depth_zero(self, delta):
        states, edges = reachable_graph(delta, END, depth=0)
        assert states == [END]
        assert edges == []


def _split(t):
    """把 T;V 拆成 (T, V)，其余形状返回 (t, None)"""
    parts = as_seq(t)
    return parts if parts is not None else (t, None)


def _same_head(delta, t, u) -> bool:
    """α T̄ 与 α Ū 同头且参数逐个等价"""
    (t_head, t_args), (u_head, u_args) = spine(t), spine(u)
    return (isinstance(t_head, Var) and t_head == u_head and len(t_args) == len(u_args)
            and all(bisimilar(delta, a, b) for a, b in zip(t_args, u_args)))


def _same_fields(delta, t_shape, u_shape) -> bool:
    return (t_shape is not None and t_shape[0] == u_shape[0]
            and all(bisimilar(delta, t_shape[1][label], field) for label, field in u_shape[1].items()))


def _same_bodies(delta, t: Abs, u: Abs) -> bool:
    fresh = UserVar("zz")
    inner = {**delta, fresh: u.kind}
    return bisimilar(inner, substitute(t.body, Var(fresh), t.binder), substitute(u.body, Var(fresh), u.binder))


def derived_rule(delta, t, u):
    """
    按 U 规范形的形状选择推导规则，只看 T 的规范形判定 T ~ U

    Returns:
        (规则编号, 是否等价)；U 的形状不在规则中时返回 None
    """
    nt, nu = normalize(delta, t), normalize(delta, u)
    t_first, t_rest = _split(nt)
    first, rest = _split(nu)

    def skip_like(v) -> bool:
        return v is None or bisimilar(delta, v, SKIP)

    def rest_matches(v) -> bool:
        return bisimilar(delta, rest, SKIP if v is None else v)

    if rest is None:
        if isinstance(nu, Var):
            return 1, _same_head(delta, t_first, nu) and skip_like(t_rest)
        if isinstance(nu, Abs):
            return 2, isinstance(nt, Abs) and nt.kind == nu.kind and _same_bodies(delta, nt, nu)
        if nu == END:
            return 3, t_first == END
        if as_arrow(nu) is not None:
            parts = as_arrow(nt)
            return 6, parts is not None and all(
                bisimilar(delta, mine, theirs) for mine, theirs in zip(parts, as_arrow(nu)))
        if as_forall(nu) is not None:
            shape = as_forall(nt)
            return 7, shape is not None and shape[0] == as_forall(nu)[0] \
                and bisimilar(delta, shape[1], as_forall(nu)[1])
        if as_record(nu) is not None:
            return 8, _same_fields(delta, as_record(nt), as_record(nu))
        if as_variant(nu) is not None:
            return 8, _same_fields(delta, as_variant(nt), as_variant(nu))
        if isinstance(nu, Const):
            return 4, nt == nu
        if is_var_headed(nu):
            return 5, _same_head(delta, t_first, nu) and skip_like(t_rest)
        if as_msg(nu) is not None:
            shape = as_msg(t_first)
            return 9, shape is not None and shape[0] == as_msg(nu)[0] \
                and bisimilar(delta, shape[1], as_msg(nu)[1]) and skip_like(t_rest)
        if as_choice(nu) is not None:
            const, fields = as_choice(nu)
            shape = as_choice(t_first)
            return 10, shape is not None and shape[0] == const and all(
                bisimilar(delta, field, shape[1][label] if t_rest is None else seq(shape[1][label], t_rest))
                for label, field in fields.items())
        if is_dual_of_var(nu):
            return 14, is_dual_of_var(t_first) and _same_head(delta, t_first.arg, nu.arg) and skip_like(t_rest)
        return None
    if first == END:
        return 11, t_first == END
    if as_msg(first) is not None:
        shape = as_msg(t_first)
        return 12, shape is not None and shape[0] == as_msg(first)[0] \
            and bisimilar(delta, shape[1], as_msg(first)[1]) and rest_matches(t_rest)
    if as_choice(first) is not None:
        const, fields = as_choice(first)
        shape = as_choice(t_first)
        return 13, shape is not None and shape[0] == const and all(
            bisimilar(delta, seq(field, rest),
                      shape[1][label] if t_rest is None else seq(shape[1][label], t_rest))
            for label, field in fields.items())
    if is_dual_of_var(first):
        return 15, is_dual_of_var(t_first) and _same_head(delta, t_first.arg, first.arg) and rest_matches(t_rest)
    if is_var_headed(first):
        return 5, _same_head(delta, t_first, first) and rest_matches(t_rest)
    return None


# 每条推导规则的正反实例：(T, U, 是否等价)，规则由 U 的形状决定
RULE_INSTANCES = [
    ("Skip ; x", "x", True),
    ("Dual x", "x", False),
    (r"\a:T. Skip ; ?a", r"\a:T. ?a", True),
    (r"\a:T. !a", r"\a:T. ?a", False),
    ("End ; ?Int", "End", True),
    ("?Int ; End", "End", False),
    ("Skip ; Skip", "Skip", True),
    ("End", "Skip", False),
    ("(a (!Int)) ; Skip", "a (!Int)", True),
    ("a (?Int)", "a (!Int)", False),
    ("Int -> ?Int ; Skip", "Int -> ?Int", True),
    ("Int -> !Int", "Int -> ?Int", False),
    ("forall b:S. b ; Skip", "forall b:S. b", True),
    ("forall b:S. b ; End", "forall b:S. b", False),
    ("{A: Skip ; End, B: Int}", "{A: End, B: Int}", True),
    ("{A: End, B: Bool}", "{A: End, B: Int}", False),
    ("?Int ; Skip", "?Int", True),
    ("?Int ; End", "?Int", False),
    ("+{A: ?Int, B: End} ; Skip", "+{A: ?Int, B: End}", True),
    ("+{A: ?Int, B: End} ; !Bool", "+{A: ?Int ; !Bool, B: End ; !Bool}", True),
    ("&{A: ?Int, B: End}", "+{A: ?Int, B: End}", False),
    ("End ; !Int", "End ; ?Bool", True),
    ("!Int ; End", "End ; ?Bool", False),
    ("?Int ; Skip ; End", "?Int ; End", True),
    ("?Int ; !Int", "?Int ; End", False),
    ("&{A: Skip} ; ?Int ; End", "&{A: ?Int} ; End", True),
    ("&{A: !Int} ; End", "&{A: ?Int} ; End", False),
    ("Dual x ; Skip", "Dual x", True),
    ("x", "Dual x", False),
    ("Dual x ; (Skip ; End)", "Dual x ; End", True),
    ("Dual x ; Skip", "Dual x ; End", False),
]

DISTINCT = [
    ("End", "Skip"),
    ("?Int", "?Int ; End"),
    ("Dual x", "x"),
    ("a (!Int)", "a (?Int)"),
    ("{A: End, B: Int}", "{A: End, B: Bool}"),
]


def rule_corpus(delta, rng, extra: int = 9):
    """手写的规则实例加上随机会话类型对，共 40 个"""
    corpus = [(parse_type(left), parse_type(right)) for left, right, _ in RULE_INSTANCES]
    while len(corpus) < len(RULE_INSTANCES) + extra:
        t, u = session_pair(rng, 3)
        if not isinstance(bounded_bisim(delta, t, u), Unknown):
            corpus.append((t, u))
    return corpus


class TestDerivedRules:

    @pytest.mark.parametrize("left, right, expected", RULE_INSTANCES)
    def test_rule_instance(self, delta, left, right, expected):
        t, u = parse_type(left), parse_type(right)
        assert bisimilar(delta, t, u) == expected
        assert bisimilar(delta, u, t) == expected

    def test_every_rule_is_exercised(self, delta):
        rules = {derived_rule(delta, parse_type(left), parse_type(right))[0] for left, right, _ in RULE_INSTANCES}
        assert rules == set(range(1, 16))

    def test_rules_agree_with_bisimulation(self, delta, rng):
        corpus = rule_corpus(delta, rng)
        assert len(corpus) == 40
        for t, u in corpus:
            for left, right in ((t, u), (u, t)):
                found = derived_rule(delta, left, right)
                assert found is not None, (left, right)
                rule, verdict = found
                assert verdict == bisimilar(delta, left, right), (rule, left, right)

    @pytest.mark.parametrize("left, right", DISTINCT)
    def test_shape_mismatch(self, delta, left, right):
        t, u = parse_type(left), parse_type(right)
        assert isinstance(bounded_bisim(delta, t, u), NotBisimilar)
        assert isinstance(bounded_bisim(delta, u, t), NotBisimilar)
