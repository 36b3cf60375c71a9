"""
一阶文法测试：解析、单步、递归非终结符、类型编码与迹的对应
"""

import pytest

from conftest import read_corpus
from core.kinding import pre_kind
from managers.equivalence_manager import equivalent
from models.errors import FogError, ParseError
from models.fog_types import FogApply, FogVar
from models.labels import ConstHead, NotBisimilar
from models.types import T_KIND, RecordC
from processors.fog_bridge import (
    encode_expr, encode_fog, fog_step, fog_traces, parse_fog, record_terminal,
    recursive_nonterminals, type_traces,
)
from processors.type_lts import replay, transitions

A, B = FogApply("A"), FogApply("B")


@pytest.fixture
def l3():
    return parse_fog(read_corpus("l3.fog"))


class TestParse:

    def test_corpus_file(self, l3):
        assert l3.arity == {"X": 2, "R": 1, "A": 0, "B": 0, "Bot": 0}
        assert l3.initial == FogApply("X", (A, B))
        assert l3.terminals == {"l", "a", "b", "r"}
        assert l3.productions[("X", "a")] == FogVar("x1")

    def test_nested_arguments(self, l3):
        body = l3.productions[("X", "l")]
        assert body == FogApply("X", (FogApply("R", (FogVar("x1"),)), FogApply("R", (FogVar("x2"),))))
        assert str(body) == "X (R x1) (R x2)"

    def test_non_deterministic(self):
        with pytest.raises(FogError):
            parse_fog("A a -> A\nA a -> B\nstart A\n")

    def test_wrong_arity(self):
        with pytest.raises(FogError):
            parse_fog("arity X 1\nX a -> X\nstart X X\n")

    def test_unknown_formal(self):
        with pytest.raises(FogError):
            parse_fog("arity X 1\nX a -> x2\nstart X X\n")

    def test_start_must_be_closed(self):
        with pytest.raises(FogError):
            parse_fog("arity X 1\nX a -> x1\nstart X x1\n")

    def test_missing_start(self):
        with pytest.raises(FogError):
            parse_fog("A a -> A\n")

    def test_syntax_error(self):
        with pytest.raises(ParseError):
            parse_fog("A a -> ->\nstart A\n")


class TestStep:

    def test_substitutes_arguments(self, l3):
        start = l3.initial
        assert fog_step(l3, start, "l") == FogApply("X", (FogApply("R", (A,)), FogApply("R", (B,))))
        assert fog_step(l3, start, "a") == A
        assert fog_step(l3, start, "b") == B
        assert fog_step(l3, start, "r") is None

    def test_bot_is_stuck(self, l3):
        assert fog_step(l3, fog_step(l3, A, "a"), "a") is None

    def test_recursive_nonterminals(self, l3):
        assert recursive_nonterminals(l3) == {"X"}

    def test_mutual_recursion(self):
        fog = parse_fog("P a -> Q\nQ b -> P\nS c -> P\nstart S\n")
        assert recursive_nonterminals(fog) == {"P", "Q"}


class TestEncoding:

    def test_encodings_are_pre_kinded(self, l3):
        for head, encoded in encode_fog(l3).items():
            assert pre_kind({}, encoded) is not None, head
        assert pre_kind({}, encode_expr(l3)) == T_KIND

    def test_traces_agree(self, l3):
        expected = fog_traces(l3, depth=10)
        assert ("l", "l", "a", "r", "r", "a") in expected
        assert ("l", "a", "r", "b") not in expected
        assert type_traces({}, encode_expr(l3), depth=10) == expected

    def test_swapped_start_not_equivalent(self, l3, config):
        start, swapped = encode_expr(l3), encode_expr(l3, FogApply("X", (B, A)))
        verdict = equivalent({}, start, swapped, config)
        assert isinstance(verdict, NotBisimilar)
        left, right = replay({}, start, verdict.trace[:-1]), replay({}, swapped, verdict.trace[:-1])
        last = verdict.trace[-1]
        assert (last in transitions({}, left)) != (last in transitions({}, right))

    def test_open_expression_rejected(self, l3):
        with pytest.raises(FogError):
            encode_expr(l3, FogApply("R", (FogVar("x1"),)))

    def test_record_terminal(self):
        labels = RecordC(("a", "b", "l"))
        assert record_terminal(ConstHead(labels, 3)) == "l"
        assert record_terminal(ConstHead(RecordC(()), 0)) is None
