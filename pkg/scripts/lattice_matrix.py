"""Print the equivalence matrix for the named base-algebra pairs and lattice stats on random systems."""

import argparse
import random
import time
from pathlib import Path

from ptss.bisim import KINDS, equivalent, quotient, random_pts
from ptss.derive import derive_pts
from ptss.lang import load_spec

SPECS = Path(__file__).resolve().parent.parent / "specs"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--systems", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    spec = load_spec(SPECS / "base_pa.ptss")
    names = [f"t{i}" for i in range(1, 7)]
    pts = derive_pts(spec, names)
    pairs = [("t1", "t2"), ("t3", "t4"), ("t5", "t6")]
    print(f"{'':<12}" + "".join(f"{l}/{r:<6}" for l, r in pairs))
    for kind in KINDS:
        cells = ["T" if equivalent(pts, spec.term(l), spec.term(r), kind) else "F" for l, r in pairs]
        print(f"{kind:<12}" + "".join(f"{c:<9}" for c in cells))

    start = time.perf_counter()
    sizes = {k: 0 for k in KINDS}
    proper = {"strong<convex": 0, "strong<abstracted": 0, "convex<obliterated": 0, "abstracted<obliterated": 0}
    for i in range(args.systems):
        p = random_pts(random.Random(args.seed + i))
        q = {k: quotient(p, k) for k in KINDS}
        for k in KINDS:
            sizes[k] += len(q[k])
        for key in proper:
            fine, coarse = key.split("<")
            assert q[fine].refines(q[coarse])
            proper[key] += len(q[fine]) > len(q[coarse])
    print(f"\n{args.systems} random systems in {time.perf_counter() - start:.1f}s")
    for k in KINDS:
        print(f"  mean classes {k:<12} {sizes[k] / args.systems:.2f}")
    for key, n in proper.items():
        print(f"  strictly finer {key:<24} {n}")


if __name__ == "__main__":
    main()
