"""
类型核心测试：解析、重命名、替换、归约、弱头范式与种类检查
"""

import pytest

from conftest import STREAM, TREE_C
from core.kinding import is_kinded, kind_of, pre_kind
from core.reduction import is_whnf, normalize, normalize_bd, reduction_paths, step
from core.renaming import first_avail, free_vars, is_renamed, rename, renamed, substitute
from core.type_parser import parse_kind, parse_type
from models.errors import DivergenceError, KindError, KindErrorReason, ParseError
from models.types import (
    END, S_KIND, SEMI, SKIP, T_KIND, Abs, App, ArrowK, CanonicalVar, ChoiceC, Const, MuC,
    Polarity, UserVar, Var, View, arrow, as_choice, as_seq, dual, msg, seq, var,
)
from type_generators import session
from utils.type_printer import format_type

C1, C2 = CanonicalVar(1), CanonicalVar(2)


def uv(name):
    return UserVar(name)


class TestParser:

    def test_external_choice_sorts_labels(self):
        t = parse_type("&{Node: b;?a;b, Leaf: Skip}")
        const, fields = as_choice(t)
        assert const == ChoiceC(View.EXTERNAL, ("Leaf", "Node"))
        assert fields["Leaf"] == SKIP
        assert fields["Node"] == seq(var("b"), seq(msg(Polarity.IN, var("a")), var("b")))

    def test_mu_sugar(self):
        t = parse_type("mu a:S . ?Int;a")
        assert isinstance(t, App)
        assert t.fun == Const(MuC(S_KIND))
        assert t.arg == Abs(uv("a"), S_KIND, seq(msg(Polarity.IN, var("Int")), var("a")))

    def test_sequence_is_right_associative(self):
        assert parse_type("x;y;End") == seq(var("x"), seq(var("y"), END))

    def test_application_binds_tighter_than_sequence(self):
        t = parse_type("a !Int ; End")
        assert as_seq(t) == (App(var("a"), msg(Polarity.OUT, var("Int"))), END)

    def test_binder_after_semicolon(self):
        t = parse_type("?Int ; mu s:S. ?Int ; s")
        first, rest = as_seq(t)
        assert first == msg(Polarity.IN, var("Int"))
        assert rest == parse_type("mu s:S. ?Int ; s")

    def test_binder_after_arrow(self):
        t = parse_type("Int -> forall a:T. a -> a")
        assert t == arrow(var("Int"), parse_type("forall a:T. a -> a"))

    def test_binder_body_extends_right(self):
        assert parse_type(r"Int -> \a:S. a ; End") == arrow(var("Int"), Abs(uv("a"), S_KIND, seq(var("a"), END)))

    def test_kind_arrow_is_right_associative(self):
        assert parse_kind("S=>S=>S") == ArrowK(S_KIND, ArrowK(S_KIND, S_KIND))

    def test_canonical_binder(self):
        assert parse_type(r"\$1:T. $1") == Abs(C1, T_KIND, Var(C1))

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ParseError):
            parse_type("+{A: Skip, A: End}")

    def test_syntax_error_has_position(self):
        with pytest.raises(ParseError) as info:
            parse_type("?Int ;")
        assert "unexpected" in info.value.message

    def test_printer_round_trip(self):
        t = parse_type(TREE_C)
        assert parse_type(format_type(t)) == t


class TestRenaming:

    def test_free_vars(self):
        assert free_vars(var("a")) == {uv("a")}
        assert free_vars(Abs(uv("a"), T_KIND, var("a"))) == frozenset()
        assert free_vars(App(var("a"), Abs(uv("b"), T_KIND, var("b")))) == {uv("a")}

    def test_first_avail(self):
        identity = Abs(uv("a"), T_KIND, var("a"))
        assert first_avail(set(), identity) == C1
        assert first_avail({C1}, identity) == C2
        assert first_avail(set(), Abs(uv("a"), T_KIND, App(Var(C1), var("a")))) == C2

    def test_rename_reuses_least_name(self):
        t = parse_type(r"\a:T. \b:S. b")
        assert renamed(t) == Abs(C1, T_KIND, Abs(C1, S_KIND, Var(C1)))

    def test_rename_under_free_head(self):
        t = App(var("a"), Abs(uv("b"), T_KIND, var("b")))
        assert renamed(t) == App(var("a"), Abs(C1, T_KIND, Var(C1)))

    def test_rename_fixed_point(self):
        t = Abs(C1, T_KIND, Var(C1))
        assert renamed(t) == t
        assert is_renamed(t)

    def test_rename_avoids_given_set(self):
        t = Abs(uv("a"), T_KIND, var("a"))
        assert rename({C1}, t) == Abs(C2, T_KIND, Var(C2))

    def test_rename_idempotent_on_random_types(self, rng):
        for _ in range(100):
            t = session(rng, 6)
            assert renamed(renamed(t)) == renamed(t)

    def test_substitute_descends_into_other_binder(self):
        body = App(Var(C1), Var(C2))
        t = Abs(C2, S_KIND, body)
        assert substitute(t, END, C1) == Abs(C2, S_KIND, App(END, Var(C2)))

    def test_substitute_stops_at_rebinding(self):
        t = Abs(C1, S_KIND, Var(C1))
        assert substitute(t, END, C1) == t

    def test_substitute_variable(self):
        assert substitute(Var(C1), END, C1) == END


class TestReduction:

    def test_skip_is_neutral(self):
        assert step(parse_type("Skip;End")) == END

    def test_dual_flips_message(self):
        assert step(dual(msg(Polarity.IN, var("Int")))) == msg(Polarity.OUT, var("Int"))

    def test_mu_unfolds_once(self):
        t = renamed(parse_type("mu s:S. ?Int;s"))
        assert step(t) == renamed(App(t.arg, t))

    def test_assoc(self):
        t = renamed(parse_type("(x;y);End"))
        assert step(t) == seq(var("x"), seq(var("y"), END))

    def test_whnf_examples(self):
        assert is_whnf(renamed(parse_type(r"\a:T. a")))
        assert is_whnf(renamed(parse_type("+{Done: End, More: !Int} ; Dual (mu s:S. !Int;s)")))
        assert not is_whnf(parse_type("Skip;End"))
        assert not is_whnf(parse_type("Dual End"))
        assert is_whnf(parse_type("Dual x"))

    def test_whnf_iff_irreducible(self, rng):
        for _ in range(200):
            t = renamed(session(rng, 5))
            current = t
            for _ in range(20):
                assert is_whnf(current) == (step(current) is None)
                following = step(current)
                if following is None:
                    break
                assert is_renamed(following)
                current = following

    def test_normalize_stream_dual(self, delta):
        t = parse_type("mu s:S. +{Done: End, More: !Int} ; Dual s")
        expected = seq(parse_type("+{Done: End, More: !Int}"), dual(t))
        assert normalize(delta, t) == renamed(expected)

    def test_normalize_whnf_is_fixed(self, delta):
        assert normalize(delta, END) == END

    @pytest.mark.parametrize("source", [
        "mu a:S. Skip;a",
        "mu a:S. a",
        "mu a:S. Dual a",
        "mu a:T. a",
    ])
    def test_normalize_detects_divergence(self, delta, source):
        with pytest.raises(DivergenceError):
            normalize(delta, parse_type(source))

    def test_normalize_bd(self):
        assert normalize_bd(parse_type(r"(\a:S. a) End")) == END
        assert normalize_bd(parse_type("Skip;End")) == END
        loop = renamed(parse_type("mu a:S. a"))
        assert normalize_bd(loop) == loop

    def test_all_reduction_paths_agree(self, delta, rng):
        for _ in range(30):
            t = session(rng, 4)
            assert reduction_paths(t) == {normalize(delta, t)}


class TestKinding:

    def test_pre_kind(self):
        assert pre_kind({}, parse_type("mu a:S. a")) == S_KIND
        assert pre_kind({uv("a"): S_KIND}, var("a")) == S_KIND
        assert pre_kind({}, App(END, END)) is None

    def test_tree_channel_kind(self):
        assert kind_of({}, parse_type(TREE_C)) == ArrowK(T_KIND, S_KIND)
        assert kind_of({}, parse_type(STREAM)) == ArrowK(T_KIND, S_KIND)

    def test_semicolon_constant_kind(self):
        assert kind_of({}, SEMI) == parse_kind("S=>S=>S")

    def test_message_payload_may_be_session(self):
        assert kind_of({}, parse_type("?End ; Skip")) == S_KIND

    @pytest.mark.parametrize("source", [
        "mu a:T. a",
        "mu a:S. Skip;a",
        "mu a:S. Dual a",
    ])
    def test_non_normalising_rejected(self, source):
        with pytest.raises(KindError) as info:
            kind_of({}, parse_type(source))
        assert info.value.reason is KindErrorReason.NON_NORMALISING

    def test_not_pre_kinded(self):
        with pytest.raises(KindError) as info:
            kind_of({}, parse_type("End End"))
        assert info.value.reason is KindErrorReason.NOT_PRE_KINDED

    def test_unbound_variable_not_pre_kinded(self):
        assert not is_kinded({}, parse_type("?q ; End"))

    def test_higher_kind_recursion(self):
        t = parse_type(r"mu f:(T=>S). \a:T. ?a ; f a")
        with pytest.raises(KindError) as info:
            kind_of({}, t)
        assert info.value.reason is KindErrorReason.HIGHER_KIND_RECURSION

    def test_pre_kind_bounds_kind(self, delta, rng):
        for _ in range(100):
            t = session(rng, 5)
            assert kind_of(delta, t) == pre_kind(delta, t) == S_KIND

    def test_reduction_preserves_kind(self, delta, rng):
        for _ in range(50):
            current = renamed(session(rng, 5))
            while current is not None:
                assert kind_of(delta, current) == S_KIND
                current = step(current)
