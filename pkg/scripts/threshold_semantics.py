"""Evaluate the named threshold formulas under a strict and a non-strict probability test.

The checker uses the strict test. This script recomputes the relevant masses by
hand to show which named claims depend on the choice.
"""

from fractions import Fraction
from pathlib import Path

from ptss.derive import derive_pts
from ptss.formulas import parse_formula
from ptss.lang import load_spec
from ptss.logic import Checker
from ptss.terms import measure

SPECS = Path(__file__).resolve().parent.parent / "specs"


def main():
    spec = load_spec(SPECS / "base_pa.ptss")
    names = [f"t{i}" for i in range(1, 7)]
    pts = derive_pts(spec, names)
    ck = Checker(pts)
    has_b = ck.sat_set(parse_formula("<b>tt"))
    has_c = ck.sat_set(parse_formula("<c>tt"))
    half = Fraction(1, 2)
    for name in ("t1", "t2", "t3", "t4"):
        t = spec.term(name)
        for test, cmp in (("strict", lambda m: m > half), ("non-strict", lambda m: m >= half)):
            meet = any(cmp(measure(d, has_b)) and cmp(measure(d, has_c)) for d in pts.out(t, "a"))
            only_b = any(cmp(measure(d, has_b)) for d in pts.out(t, "a"))
            print(f"{name} {test:<10} <a>([<b>tt]_1/2 meet [<c>tt]_1/2)={meet!s:<5} <a>[<b>tt]_1/2={only_b}")


if __name__ == "__main__":
    main()
