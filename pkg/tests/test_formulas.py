from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ptss.formulas import And, Dia, LayerError, Meet, Not, Prob, Top, fragment_of, parse_formula
from ptss.lexer import SpecSyntaxError

TT = Top()


def dia(a, body, combined=False):
    return Dia(a, body, combined)


B_TT = dia("b", Prob(TT, Fraction(0)))
C_TT = dia("c", Prob(TT, Fraction(0)))


class TestParse:
    def test_shorthand(self):
        assert parse_formula("<b>tt") == B_TT
        assert parse_formula("<b>[tt]_0") == B_TT

    def test_meet(self):
        phi = parse_formula("<a>([<b>tt]_1/2 /\\ [<c>tt]_1/2)")
        assert phi == dia("a", Meet((Prob(B_TT, Fraction(1, 2)), Prob(C_TT, Fraction(1, 2)))))

    def test_combined(self):
        assert parse_formula("<a>_c[<b>tt]_0").combined

    def test_negation_and_conjunction(self):
        assert parse_formula("~<a>tt /\\ tt") == And((Not(dia("a", Prob(TT, Fraction(0)))), TT))

    def test_decimal_bound(self):
        assert parse_formula("<a>[tt]_0.5").body.bound == Fraction(1, 2)

    def test_distribution_formula_at_state_layer(self):
        with pytest.raises(LayerError):
            parse_formula("[tt]_0")

    def test_garbage(self):
        with pytest.raises(SpecSyntaxError):
            parse_formula("<a>")


class TestFragments:
    @pytest.mark.parametrize("text, expected", [
        ("tt", "bcao"),
        ("<a>([<b>tt]_1/2 /\\ [<c>tt]_1/2)", "b"),
        ("<a>_c([<b>_c tt]_1/2 /\\ [<c>_c tt]_1/2)", "bc"),
        ("<a>_c([<b>tt]_1/2 /\\ [<c>tt]_1/2)", "b"),
        ("<a>([<b>tt]_0 /\\ [<c>tt]_0)", "ba"),
        ("<a>[<b>tt]_0", "bao"),
        ("<a>_c[<b>_c tt]_0", "bc"),
    ])
    def test_fragment_of(self, text, expected):
        assert fragment_of(parse_formula(text)) == set(expected)


actions = st.sampled_from("abc")
bounds = st.fractions(min_value=0, max_value=Fraction(7, 8), max_denominator=8)


def formulas():
    def extend(inner):
        probs = st.builds(Prob, inner, bounds)
        bodies = st.one_of(probs, st.lists(probs, min_size=2, max_size=3).map(lambda xs: Meet(tuple(xs))))
        return st.one_of(
            st.builds(Not, inner),
            st.lists(inner, min_size=2, max_size=3).map(lambda xs: And(tuple(xs))),
            st.builds(Dia, actions, bodies, st.booleans()),
        )
    return st.recursive(st.just(TT), extend, max_leaves=6)


class TestPrintParse:
    @given(formulas())
    def test_round_trip(self, phi):
        assert parse_formula(str(phi)) == phi

    @given(formulas())
    def test_layers_nest(self, phi):
        # b contains every other fragment; o is inside a
        frag = fragment_of(phi)
        assert "b" in frag
        assert "o" not in frag or "a" in frag

