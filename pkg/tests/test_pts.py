from fractions import Fraction
import random

import pytest
from hypothesis import given, strategies as st

from ptss.bisim import random_pts
from ptss.pts import Pts, UnknownState, build_oblit_lts, parse_pts
from ptss.terms import FiniteDistribution, PtssError

TEXT = """
# two states
s --a--> {t: 1/2, u: 1/2}
s --b--> {s: 1}
t
"""


class TestPts:
    def test_parse(self):
        pts = parse_pts(TEXT)
        assert set(pts.states) == {"s", "t", "u"}
        assert pts.out("s", "a") == [FiniteDistribution({"t": Fraction(1, 2), "u": Fraction(1, 2)})]
        assert pts.enabled("s") == {"a", "b"} and pts.enabled("t") == set()
        assert pts.actions == ("a", "b")

    def test_unknown_state(self):
        with pytest.raises(UnknownState):
            parse_pts(TEXT).out("nowhere")

    def test_malformed(self):
        with pytest.raises(PtssError):
            parse_pts("s --a--> t")

    def test_mass_checked(self):
        with pytest.raises(PtssError):
            parse_pts("s --a--> {t: 1/2}")

    def test_duplicate_steps_merge(self):
        d = FiniteDistribution.dirac("t")
        assert len(Pts(("s",), (("s", "a", d), ("s", "a", d))).steps) == 1

    def test_oblit_lts(self):
        lts = build_oblit_lts(parse_pts(TEXT))
        assert lts.succ("s") == {("a", "t"), ("a", "u"), ("b", "s")}


class TestRoundTrip:
    @given(st.integers(0, 10 ** 6))
    def test_text_round_trip(self, seed):
        pts = random_pts(random.Random(seed))
        back = parse_pts(pts.to_text(), state=int)
        assert set(back.states) == set(pts.states)
        assert set(back.steps) == set(pts.steps)
