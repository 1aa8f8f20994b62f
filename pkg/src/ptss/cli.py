"""``ptss`` command-line front end.

Exit codes: 0 for success or a true verdict, 1 for a negative analysis result
(violation, false verdict), 2 for usage, parse or model errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .bisim import KINDS, equivalent
from .derive import DEFAULT_FUEL, build_pts, is_complete, stable_model
from .formats import FORMATS, check_spec
from .formulas import fragment_of, parse_formula
from .lang import load_spec
from .logic import LOGIC_KIND, NoDistinguisher, distinguishing_formula, sat_state
from .probe import congruence_probe
from .terms import PtssError, eval_dist

EXIT_OK, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2
KIND_TO_LOGIC = {v: k for k, v in LOGIC_KIND.items()}


class UsageError(Exception):
    pass


class _Out:
    """Collects text lines or one machine document, whichever was requested."""

    def __init__(self, mode: str, stream=None):
        self.mode = mode
        self.stream = stream or sys.stdout
        self.color = os.environ.get("PTSS_COLOR", "").lower() in ("1", "true", "yes", "always")
        self.doc: dict = {}

    def line(self, text: str = ""):
        if self.mode == "text":
            print(text, file=self.stream)

    def verdict(self, ok: bool, yes="true", no="false") -> str:
        word = yes if ok else no
        if self.color:
            return f"\x1b[{32 if ok else 31}m{word}\x1b[0m"
        return word

    def finish(self):
        if self.mode == "machine":
            print(json.dumps(self.doc, indent=2, sort_keys=True, default=str), file=self.stream)


def _model(spec, roots, fuel):
    table = stable_model(spec, roots, fuel)
    if not is_complete(table):
        why = "budget exhausted" if table.budget_exhausted else "CT differs from PT"
        raise PtssError(f"model incomplete ({why})")
    return build_pts(table)


def cmd_check(args, out: _Out) -> int:
    spec = load_spec(args.spec, strict=False)
    formats = FORMATS if args.format == "all" else (args.format,)
    report = check_spec(spec, formats)
    ok = all(report.conforms(f) for f in formats)
    out.doc = report.to_dict() | {"conforms": ok}
    out.line(report.to_text())
    out.line(f"verdict: {out.verdict(ok, 'conforms', 'violates')}")
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_derive(args, out: _Out) -> int:
    spec = load_spec(args.spec)
    if not args.term:
        raise UsageError("derive needs --term")
    term = spec.term(args.term)
    table = stable_model(spec, [term], args.fuel)
    complete = is_complete(table)
    rows = []
    for s, a, theta in sorted(table.ct, key=lambda x: (str(x[0]), x[1], str(x[2]))):
        if s == term:
            rows.append({"source": str(s), "action": a, "target": str(theta), "dist": repr(eval_dist(theta))})
    for r in rows:
        out.line(f"{r['source']} --{r['action']}--> {r['dist']}")
    if not rows:
        out.line(f"{term} has no certain transitions")
    warnings = []
    if table.budget_exhausted:
        warnings.append(f"budget of {args.fuel} states exhausted")
    if table.ct != table.pt:
        warnings.append("model incomplete: CT differs from PT")
    for w in warnings:
        out.line(f"warning: {w}")
    out.doc = {
        "term": str(term), "transitions": rows, "complete": complete, "warnings": warnings,
        "iterations": table.iterations, "explored": len(table.explored),
    }
    if args.require_complete and not complete:
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_bisim(args, out: _Out) -> int:
    spec = load_spec(args.spec)
    t1, t2 = spec.term(args.t1), spec.term(args.t2)
    pts = _model(spec, [t1, t2], args.fuel)
    same = equivalent(pts, t1, t2, args.rel)
    out.doc = {"relation": args.rel, "left": str(t1), "right": str(t2), "verdict": same}
    out.line(out.verdict(same))
    if args.explain and not same:
        chi = KIND_TO_LOGIC[args.rel]
        try:
            phi = distinguishing_formula(pts, t1, t2, chi)
            holds = sat_state(pts, t1, phi)
            out.doc["formula"] = str(phi)
            out.doc["holds_at"] = "left" if holds else "right"
            out.line(f"distinguishing formula (L_{chi}, true at {args.t1 if holds else args.t2}): {phi}")
        except NoDistinguisher as exc:
            out.doc["formula"] = None
            out.line(f"no formula of L_{chi} separates them: {exc}")
    return EXIT_OK if same else EXIT_NEGATIVE


def cmd_mc(args, out: _Out) -> int:
    spec = load_spec(args.spec)
    if not args.term or not args.formula:
        raise UsageError("mc needs --term and --formula")
    phi = parse_formula(args.formula)
    frag = fragment_of(phi)
    if args.logic and args.logic not in frag:
        raise UsageError(f"{phi} is not a formula of L_{args.logic} (fragments: {''.join(sorted(frag)) or 'none'})")
    term = spec.term(args.term)
    pts = _model(spec, [term], args.fuel)
    ok = sat_state(pts, term, phi)
    out.doc = {"term": str(term), "formula": str(phi), "logic": args.logic, "verdict": ok}
    out.line(f"{term} {'|=' if ok else '|/='} {phi}  ({out.verdict(ok)})")
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_distinguish(args, out: _Out) -> int:
    spec = load_spec(args.spec)
    t1, t2 = spec.term(args.t1), spec.term(args.t2)
    pts = _model(spec, [t1, t2], args.fuel)
    out.doc = {"logic": args.logic, "left": str(t1), "right": str(t2)}
    try:
        phi = distinguishing_formula(pts, t1, t2, args.logic)
    except NoDistinguisher as exc:
        out.doc["formula"] = None
        out.doc["reason"] = str(exc)
        out.line(str(exc))
        return EXIT_NEGATIVE
    if phi is None:
        out.doc["formula"] = None
        out.line(f"{t1} and {t2} are {LOGIC_KIND[args.logic]} bisimilar; no formula separates them")
        return EXIT_NEGATIVE
    out.doc["formula"] = str(phi)
    out.doc["holds_at"] = "left" if sat_state(pts, t1, phi) else "right"
    out.line(str(phi))
    return EXIT_OK


def cmd_probe(args, out: _Out) -> int:
    spec = load_spec(args.spec)
    report = congruence_probe(spec, args.rel, args.trials, args.seed, args.fuel)
    out.doc = report.to_dict()
    out.line(report.to_text())
    return EXIT_NEGATIVE if report.found else EXIT_OK


COMMANDS = {
    "check": cmd_check, "derive": cmd_derive, "bisim": cmd_bisim,
    "mc": cmd_mc, "distinguish": cmd_distinguish, "probe": cmd_probe,
}


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def _nonnegative(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=("text", "machine"), default="text")
    common.add_argument("--fuel", type=_positive, default=DEFAULT_FUEL, help="state budget for derivation")
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="ptss", description="Probabilistic transition system specification workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="check rule formats")
    p.add_argument("spec")
    p.add_argument("--format", choices=FORMATS + ("all",), default="all")

    p = sub.add_parser("derive", parents=[common], help="list the transitions of a term")
    p.add_argument("spec")
    p.add_argument("--term")
    p.add_argument("--require-complete", action="store_true")

    p = sub.add_parser("bisim", parents=[common], help="decide an equivalence between two terms")
    p.add_argument("spec")
    p.add_argument("t1")
    p.add_argument("t2")
    p.add_argument("--rel", choices=KINDS, default="strong")
    p.add_argument("--explain", action="store_true")

    p = sub.add_parser("mc", parents=[common], help="model-check a formula")
    p.add_argument("spec")
    p.add_argument("--term")
    p.add_argument("--formula")
    p.add_argument("--logic", choices=tuple(LOGIC_KIND))

    p = sub.add_parser("distinguish", parents=[common], help="find a separating formula")
    p.add_argument("spec")
    p.add_argument("t1")
    p.add_argument("t2")
    p.add_argument("--logic", choices=tuple(LOGIC_KIND), default="b")

    p = sub.add_parser("probe", parents=[common], help="search for congruence violations")
    p.add_argument("spec")
    p.add_argument("--rel", choices=KINDS, default="strong")
    p.add_argument("--trials", type=_nonnegative, default=200)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    out = _Out(args.output)
    try:
        code = COMMANDS[args.command](args, out)
    except (UsageError, PtssError, OSError) as exc:
        out.doc = {"error": type(exc).__name__, "message": str(exc)}
        if args.output == "text":
            print(f"error: {exc}", file=sys.stderr)
        code = EXIT_ERROR
    out.finish()
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
