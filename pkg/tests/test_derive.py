from fractions import Fraction

import pytest

from ptss.derive import (
    IncompleteModel, NoSuchAction, build_pts, combined_feasible, derive_pts, instantiate, is_complete, match,
    stable_model,
)
from ptss.lang import load_spec, parse_term
from ptss.terms import App, DVar, Dirac, FiniteDistribution, SVar, eval_dist

from conftest import NAMED, spec_path

ZERO = App("0")
B0, C0 = App("b.", (Dirac(ZERO),)), App("c.", (Dirac(ZERO),))


def fires(spec_name, term_name):
    spec = load_spec(spec_path(spec_name))
    f_t = App("f", (spec.term(term_name),))
    pts = derive_pts(spec, [f_t])
    return bool(pts.out(f_t, "a"))


class TestBaseAlgebra:
    def test_t5_single_step(self, base):
        table = stable_model(base, ["t5"])
        steps = table.certain(base.term("t5"))
        assert len(steps) == 1
        assert eval_dist(steps[0][2]) == FiniteDistribution({B0: Fraction(1, 2), C0: Fraction(1, 2)})

    def test_stop_has_no_steps(self, base):
        assert derive_pts(base, ["0"]).out(ZERO) == []

    def test_sum_collects_both_sides(self, base, base_pts):
        assert len(base_pts.out(base.term("t2"), "a")) == 3
        assert len(base_pts.out(base.term("t1"), "a")) == 2

    def test_complete_quickly(self, base):
        table = stable_model(base, list(NAMED))
        assert is_complete(table)
        assert table.ct == table.pt
        assert table.iterations <= len(table.explored)

    def test_fuel_exhaustion(self, base):
        table = stable_model(base, ["t2"], fuel=1)
        assert table.budget_exhausted and not is_complete(table)
        with pytest.raises(IncompleteModel):
            build_pts(table)

    def test_bad_fuel(self, base):
        with pytest.raises(ValueError):
            stable_model(base, ["t1"], fuel=0)


class TestNegativeCycle:
    def test_possible_but_not_certain(self):
        spec = load_spec(spec_path("negcycle"))
        table = stable_model(spec, ["r"])
        r = spec.term("r")
        assert table.certain(r) == []
        assert [x[1] for x in table.possible(r)] == ["a"]
        assert table.ct != table.pt and not is_complete(table)


class TestQuantitativeRules:
    @pytest.mark.parametrize("spec, fired", [
        ("eq1", {"t2", "t3", "t5"}),
        ("convex_f", {"t1", "t2", "t3", "t5", "t6"}),
        ("eq5", {"t2", "t3", "t4", "t5"}),
        ("eq7", {"t2", "t3", "t4", "t5"}),
    ])
    def test_which_terms_fire(self, spec, fired):
        assert {t for t in NAMED if fires(spec, t)} == fired

    def test_relay_target(self):
        spec = load_spec(spec_path("eq2"))
        f_t5 = App("f", (spec.term("t5"),))
        (step,) = derive_pts(spec, [f_t5]).out(f_t5, "a")
        assert step == FiniteDistribution.dirac(spec.term("t5"))


class TestMatching:
    def test_match_binds(self, base):
        pattern = App("+", (SVar("x"), SVar("y")))
        env = match(pattern, base.term("t1"), {})
        assert env["x"] == parse_term("a.dirac(b.0)", base)

    def test_match_fails_on_operator(self, base):
        assert match(App("+", (SVar("x"), SVar("y"))), base.term("t3"), {}) is None

    def test_match_respects_existing_binding(self, base):
        assert match(DVar("mu"), Dirac(ZERO), {"mu": Dirac(B0)}) is None

    def test_instantiate_prefix(self, base):
        rule = next(r for r in base.expanded_rules() if r.name.startswith("prefix") and r.conclusion.action == "a")
        (inst,) = instantiate(rule, base.term("t3"))
        assert inst.action == "a" and inst.source == base.term("t3")


class TestCombined:
    def test_half_half_from_pure_steps(self, base, base_pts):
        lam = combined_feasible(base_pts, base.term("t1"), "a", [({B0}, ">=", Fraction(1, 2)), ({C0}, ">=", Fraction(1, 2))])
        assert lam == (Fraction(1, 2), Fraction(1, 2))

    def test_single_step(self, base, base_pts):
        lam = combined_feasible(base_pts, base.term("t6"), "a", [({B0}, ">=", 1)])
        assert sorted(lam) == [0, 1]

    def test_no_such_action(self, base, base_pts):
        with pytest.raises(NoSuchAction):
            combined_feasible(base_pts, B0, "a", [])
