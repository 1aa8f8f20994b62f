"""Cross-check format verdicts against the congruence probe for every spec in specs/."""

import argparse
from pathlib import Path

from ptss.formats import check_spec
from ptss.lang import load_spec
from ptss.probe import congruence_probe

SPECS = Path(__file__).resolve().parent.parent / "specs"
FORMAT_KIND = {"ntmufxtheta": "strong", "convex": "convex", "abstracted": "abstracted", "obliterated": "obliterated"}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    for path in sorted(SPECS.glob("*.ptss")):
        spec = load_spec(path, strict=False)
        report = check_spec(spec)
        for fmt, kind in FORMAT_KIND.items():
            conforms = report.conforms(fmt)
            probe = congruence_probe(spec, kind, args.trials, args.seed)
            if probe.found:
                v = probe.violations[0]
                outcome = f"violation {v.context} on {v.left}/{v.right}"
            else:
                outcome = f"none in {probe.trials} trials"
            if conforms and probe.found:
                status = "CONTRADICTION"
            elif not conforms and not probe.found:
                status = "unconfirmed (inconclusive)"
            else:
                status = "consistent"
            verdict = "conforms" if conforms else "violates"
            print(f"{path.stem:<10} {fmt:<12} {verdict:<9} {outcome:<34} {status}")


if __name__ == "__main__":
    main()
