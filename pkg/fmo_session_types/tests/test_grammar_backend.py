"""
文法后端测试：word() 翻译、范数、文法互模拟、FSA 快速路径与判定管线
"""

import pytest

from config.fmo_config import Backend
from conftest import STREAM, TREE_C
from core.type_parser import parse_type
from managers.equivalence_manager import EquivalenceManager, Fragment, classify, equivalent
from managers.grammar_builder import build_grammar, build_joint_grammar
from models.errors import KindError
from models.grammar_types import BOT, Finite, SimpleGrammar, UNNORMED
from models.labels import Bisimilar, NotBisimilar, Unknown
from models.types import END, SKIP, View, choice, seq
from processors.fsa import build_fsa, fsa_bisim
from processors.grammar_bisim import check_simple, grammar_bisim, grammar_transitions, norms
from processors.type_lts import bounded_bisim, format_label, parse_label, transitions
from reports.grammar_reporter import (
    dumps_grammar, format_grammar, grammar_from_json, loads_grammar, parse_grammar_dump,
)
from type_generators import session, session_pair

# 二叉树通道类型的十条产生式
TREE_GRAMMAR = """
start: X0
X0 lambda $1:T -> X1
X1 &{Leaf,Node}_1 ->
X1 &{Leaf,Node}_2 -> X3
X2 &{Leaf,Node}_1 ->
X2 &{Leaf,Node}_2 -> X3
X3 &{Leaf,Node}_1 -> X4 X1
X3 &{Leaf,Node}_2 -> X3 X4 X1
X4 ?_1 -> X5 BOT
X4 ?_2 ->
X5 $1_0 ->
"""

TREE_UNFOLDED = r"\a:T. &{Leaf: Skip, Node: (mu t:S. &{Leaf: Skip, Node: t;?a;t}) ; ?a ; (mu t:S. &{Leaf: Skip, Node: t;?a;t})}"


def isomorphic(left: SimpleGrammar, right: SimpleGrammar) -> bool:
    """从开始串出发同步展开，检查两个文法在非终结符改名下相同"""
    if len(left.start) != len(right.start):
        return False
    mapping = {BOT: BOT}
    pending = list(zip(left.start, right.start))
    while pending:
        a, b = pending.pop()
        if a in mapping:
            if mapping[a] != b:
                return False
            continue
        if b in mapping.values():
            return False
        mapping[a] = b
        rules_a, rules_b = left.rules_of(a), right.rules_of(b)
        if set(rules_a) != set(rules_b):
            return False
        for label, rhs in rules_a.items():
            if len(rhs) != len(rules_b[label]):
                return False
            pending.extend(zip(rhs, rules_b[label]))
    return True


@pytest.fixture
def tree_grammar():
    return parse_grammar_dump(TREE_GRAMMAR)


class TestWord:

    def test_tree_channel_grammar(self, delta, tree_grammar):
        grammar = build_grammar(delta, parse_type(TREE_C))
        assert grammar.production_count() == 10
        assert isomorphic(grammar, tree_grammar)
        assert isomorphic(tree_grammar, grammar)

    def test_skip_is_empty_word(self, delta):
        grammar = build_grammar(delta, parse_type("Skip ; Skip"))
        assert grammar.start == ()

    def test_end_blocks_continuation(self, delta):
        grammar = build_grammar(delta, parse_type("End ; !Int"))
        (head,) = grammar.start[:1]
        assert list(grammar.rules_of(head).values()) == [(BOT,)]

    def test_grammar_is_simple(self, delta, rng):
        for _ in range(50):
            check_simple(build_grammar(delta, session(rng, 5)))

    def test_label_sets_match_type_lts(self, delta, rng):
        for _ in range(500):
            t = session(rng, 5)
            grammar = build_grammar(delta, t)
            pending = [(t, grammar.start, 0)]
            while pending:
                current, word, depth = pending.pop()
                moves = transitions(delta, current)
                steps = grammar_transitions(grammar, word)
                assert set(moves) == set(steps), current
                if depth < 6:
                    pending.extend((moves[label], steps[label], depth + 1) for label in moves)

    def test_check_simple_rejects_undeclared(self):
        grammar = SimpleGrammar(start=("X0",))
        grammar.add_production("X0", parse_label("End"), ("X7",))
        with pytest.raises(ValueError):
            check_simple(grammar)

    def test_bot_has_no_productions(self):
        with pytest.raises(ValueError):
            SimpleGrammar().add_production(BOT, parse_label("End"), ())


class TestNorms:

    def test_tree_grammar_norms(self, tree_grammar):
        values = norms(tree_grammar)
        assert values["X5"] == Finite(1)
        assert values["X4"] == Finite(1)
        assert values["X3"] == Finite(3)
        assert values["X0"] == Finite(2)
        assert values[BOT] == UNNORMED

    def test_unnormed_loop(self):
        grammar = SimpleGrammar(start=("X0",))
        grammar.add_production("X0", parse_label("?_2"), ("X0",))
        assert norms(grammar)["X0"] == UNNORMED


class TestGrammarBisim:

    def test_tree_against_unfolding(self, delta):
        grammar, left, right = build_joint_grammar(delta, parse_type(TREE_C), parse_type(TREE_UNFOLDED))
        verdict = grammar_bisim(grammar, left, right)
        assert isinstance(verdict, Bisimilar)
        assert verdict.evidence.startswith("grammar:")

    def test_tree_against_wrong_direction(self, delta):
        other = r"\a:T. mu t:S. &{Leaf: Skip, Node: t ; !a ; t}"
        grammar, left, right = build_joint_grammar(delta, parse_type(TREE_C), parse_type(other))
        verdict = grammar_bisim(grammar, left, right)
        assert isinstance(verdict, NotBisimilar)

    def test_neutral_element(self, delta):
        grammar, left, right = build_joint_grammar(delta, parse_type("Skip;End"), END)
        assert isinstance(grammar_bisim(grammar, left, right), Bisimilar)

    def test_agrees_with_oracle(self, delta, rng):
        for _ in range(500):
            t, u = session_pair(rng, 4)
            oracle = bounded_bisim(delta, t, u, depth=12)
            if isinstance(oracle, Unknown):
                continue
            grammar, left, right = build_joint_grammar(delta, t, u)
            verdict = grammar_bisim(grammar, left, right)
            if not isinstance(verdict, Unknown):
                assert verdict.name == oracle.name, (t, u)


class TestFsa:

    def test_end_has_two_states(self, delta):
        automaton = build_fsa(delta, END, cap=16)
        assert automaton is not None
        assert automaton.size == 2

    def test_stream_closes(self, delta):
        automaton = build_fsa(delta, parse_type(f"({STREAM}) Int"), cap=64)
        assert automaton is not None
        assert automaton.size == 5

    def test_tree_does_not_close(self, delta):
        assert build_fsa(delta, parse_type(f"({TREE_C}) Int"), cap=1000) is None

    def test_state_cap(self, delta):
        assert build_fsa(delta, parse_type("?Int ; ?Int ; ?Int ; End"), cap=2) is None

    def test_fsa_agrees_with_grammar(self, delta, rng):
        closing = 0
        while closing < 200:
            t, u = session_pair(rng, 4)
            left, right = build_fsa(delta, t), build_fsa(delta, u)
            if left is None or right is None:
                continue
            closing += 1
            grammar, start_t, start_u = build_joint_grammar(delta, t, u)
            expected = grammar_bisim(grammar, start_t, start_u)
            if not isinstance(expected, Unknown):
                assert fsa_bisim(left, right).name == expected.name, (t, u)

    def test_fsa_trace(self, delta):
        left = build_fsa(delta, parse_type("?Int ; End"))
        right = build_fsa(delta, parse_type("?Int ; Skip"))
        verdict = fsa_bisim(left, right)
        assert isinstance(verdict, NotBisimilar)
        assert [format_label(label) for label in verdict.trace] == ["?_2", "End"]


class TestDispatcher:

    def test_classify(self):
        assert classify(parse_type(TREE_C)) is Fragment.MU_STAR_SEMI
        assert classify(parse_type(r"mu f:(T=>S). \a:T. ?a ; f a")) is Fragment.FULL_MU

    def test_fsa_first(self, delta, config):
        verdict = equivalent(delta, parse_type("Skip;End"), END, config)
        assert isinstance(verdict, Bisimilar)
        assert verdict.evidence.startswith("fsa:")

    def test_grammar_for_tree(self, delta, config):
        t = parse_type(f"({TREE_C}) Int")
        u = parse_type(f"({TREE_UNFOLDED}) Int")
        verdict = equivalent(delta, t, u, config)
        assert isinstance(verdict, Bisimilar)
        assert verdict.evidence.startswith("grammar:")

    def test_explicit_backends(self, delta, config):
        t, u = parse_type("?Int ; End"), parse_type("!Int ; End")
        for backend in Backend:
            verdict = equivalent(delta, t, u, config.with_overrides(backend=backend))
            assert isinstance(verdict, NotBisimilar)

    def test_oracle_unknown(self, delta, config):
        t = parse_type(f"({TREE_C}) Int")
        u = parse_type(f"({TREE_C}) Int ; Skip")
        verdict = equivalent(delta, t, u, config.with_overrides(backend="oracle", oracle_depth=3))
        assert isinstance(verdict, Unknown)
        assert verdict.reason.startswith("oracle:")

    def test_norm_fuel_reaches_every_backend(self, delta, config):
        t = parse_type("Skip ; Skip ; Skip ; End")
        assert isinstance(equivalent(delta, t, END, config), Bisimilar)
        starved = config.with_overrides(norm_fuel=2)
        assert equivalent(delta, t, END, starved) == Unknown("norm:fuel")
        oracle = equivalent(delta, t, END, starved.with_overrides(backend="oracle"))
        assert oracle == Unknown("oracle:norm-fuel")

    def test_axioms_through_grammar_backend(self, delta, config, rng):
        grammar_only = config.with_overrides(backend="grammar")
        for _ in range(100):
            t, u, v = session(rng, 3), session(rng, 3), session(rng, 3)
            instances = [
                (seq(SKIP, t), t),
                (seq(END, t), END),
                (seq(seq(t, u), v), seq(t, seq(u, v))),
                (seq(choice(View.EXTERNAL, {"A": t, "B": u}), v),
                 choice(View.EXTERNAL, {"A": seq(t, v), "B": seq(u, v)})),
            ]
            for left, right in instances:
                assert isinstance(equivalent(delta, left, right, grammar_only), Bisimilar), (left, right)

    def test_kind_error(self, delta, config):
        with pytest.raises(KindError):
            equivalent(delta, parse_type("mu a:S. a"), END, config)

    def test_batch_keeps_order(self, delta, config):
        pairs = [
            (parse_type("Skip;End"), END),
            (parse_type("?Int;End"), parse_type("!Int;End")),
            (parse_type(f"({STREAM}) Int"), parse_type(f"({STREAM}) Int ; Skip")),
        ]
        manager = EquivalenceManager(delta, config)
        verdicts = manager.check_batch(pairs)
        assert [verdict.name for verdict in verdicts] == ["Bisimilar", "NotBisimilar", "Bisimilar"]
        assert manager.decided == 3
        assert manager.check_batch([]) == []


class TestGrammarReports:

    def test_dump_round_trip(self, delta):
        grammar = build_grammar(delta, parse_type(TREE_C))
        text = format_grammar(grammar)
        assert text.splitlines()[0] == "start: X0"
        assert parse_grammar_dump(text) == grammar
        assert format_grammar(grammar) == text

    def test_json_round_trip(self, delta):
        grammar = build_grammar(delta, parse_type(f"({STREAM}) Int ; End"))
        assert loads_grammar(dumps_grammar(grammar)) == grammar

    def test_json_rejects_unknown_version(self):
        with pytest.raises(ValueError):
            grammar_from_json({"schema_version": 99, "start": [], "productions": []})
