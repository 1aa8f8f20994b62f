from fractions import Fraction
import random

import pytest
from hypothesis import given, settings, strategies as st

from ptss.bisim import (
    KINDS, Partition, TooLarge, block_vector, combined_match, dist_match, equivalent, extreme_points, hull_gap,
    in_hull, lts_quotient, naive_fixpoint, quotient, random_pts, refine_once, support_match,
)
from ptss.pts import UnknownState, build_oblit_lts, parse_pts
from ptss.terms import FiniteDistribution

MATRIX = {
    "strong": (False, False, False),
    "convex": (True, False, False),
    "abstracted": (False, True, False),
    "obliterated": (True, True, True),
}
PAIRS = (("t1", "t2"), ("t3", "t4"), ("t5", "t6"))
seeds = st.integers(0, 2 ** 32 - 1)


class TestGoldenMatrix:
    @pytest.mark.parametrize("kind", KINDS)
    def test_row(self, kind, base_pts, named):
        got = tuple(equivalent(base_pts, named[l], named[r], kind) for l, r in PAIRS)
        assert got == MATRIX[kind]

    def test_unknown_state(self, base_pts):
        with pytest.raises(UnknownState):
            equivalent(base_pts, "nowhere", "nowhere", "strong")


class TestMatching:
    P = Partition((frozenset({"x", "y"}), frozenset({"z"})))

    def test_block_vector(self):
        d = FiniteDistribution({"x": Fraction(1, 4), "y": Fraction(1, 4), "z": Fraction(1, 2)})
        assert block_vector(d, self.P) == (Fraction(1, 2), Fraction(1, 2))

    def test_dist_match(self):
        d1 = FiniteDistribution({"x": 1})
        d2 = FiniteDistribution({"y": 1})
        d3 = FiniteDistribution({"y": Fraction(1, 2), "z": Fraction(1, 2)})
        assert dist_match(d1, d2, self.P, "strong")
        assert not dist_match(d1, d3, self.P, "abstracted")

    def test_support_match_forms(self):
        d1, d2 = FiniteDistribution({"x": 1}), FiniteDistribution({"y": 1})
        assert support_match(d1, d2, self.P)
        assert support_match(d1, d2, {("x", "y")})
        assert not support_match(d1, d2, lambda s, t: False)

    def test_combined_match(self, base, base_pts, named):
        part = quotient(base_pts, "convex")
        mixed = base_pts.out(named["t3"], "a")[0]
        assert combined_match(base_pts, named["t1"], "a", mixed, part)
        assert not combined_match(base_pts, named["t4"], "a", mixed, part)

    def test_hull(self):
        pts = [(Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))]
        half = (Fraction(1, 2), Fraction(1, 2))
        assert in_hull(half, pts) == (Fraction(1, 2), Fraction(1, 2))
        assert extreme_points(pts + [half]) == frozenset(pts)
        assert hull_gap(half, pts) == 0
        assert hull_gap((Fraction(1), Fraction(1)), pts) > 0


class TestPartition:
    def test_overlapping_blocks(self):
        with pytest.raises(ValueError):
            Partition((frozenset({1}), frozenset({1, 2})))

    def test_refines(self):
        fine = Partition((frozenset({1}), frozenset({2}), frozenset({3})))
        coarse = Partition((frozenset({1, 2}), frozenset({3})))
        assert fine.refines(coarse) and not coarse.refines(fine)

    def test_lts_quotient(self):
        lts = build_oblit_lts(parse_pts("s --a--> {t: 1}\nu --a--> {t: 1/2, v: 1/2}\nt\nv"))
        assert lts_quotient(lts).same("s", "u")


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(seeds)
    def test_lattice(self, seed):
        pts = random_pts(random.Random(seed))
        q = {k: quotient(pts, k) for k in KINDS}
        assert q["strong"].refines(q["convex"]) and q["strong"].refines(q["abstracted"])
        assert q["convex"].refines(q["obliterated"]) and q["abstracted"].refines(q["obliterated"])

    @settings(max_examples=60, deadline=None)
    @given(seeds, st.sampled_from(KINDS))
    def test_quotient_is_fixpoint(self, seed, kind):
        pts = random_pts(random.Random(seed))
        q = quotient(pts, kind)
        assert refine_once(pts, q, kind).blocks == q.blocks

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.sampled_from(KINDS))
    def test_matches_naive_oracle(self, seed, kind):
        pts = random_pts(random.Random(seed), max_states=6)
        assert quotient(pts, kind).relation() == naive_fixpoint(pts, kind)

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_obliterated_is_lts_bisimulation(self, seed):
        pts = random_pts(random.Random(seed))
        assert quotient(pts, "obliterated").relation() == lts_quotient(build_oblit_lts(pts)).relation()

    def test_oracle_size_limit(self):
        pts = random_pts(random.Random(1), max_states=8)
        with pytest.raises(TooLarge):
            naive_fixpoint(pts, "strong", limit=0)
