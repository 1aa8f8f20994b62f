"""Static rule-format analysis.

Every check returns violations as ``(condition, message, witness)`` triples.
Conditions are the numbered format conditions plus a few named side
conditions: ``shape`` (rule form), ``comparator`` (only > and >= allowed),
``zero-bound`` (abstracted format) and ``distinct`` (obliterated binders).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .lang import Combine, ForAll, Measure, Negative, Rule, SpecAst, Transition, binder_problem
from .terms import App, DVar, Dirac, Lift, Mix, Signature, Sort, SVar, Sum, is_closed, variables

FORMATS = ("ntmufxtheta", "convex", "abstracted", "obliterated")
_NAMED_ORDER = {"shape": 100, "comparator": 101, "zero-bound": 102, "distinct": 103}


def condition_order(cond: str):
    return (int(cond), cond) if cond.isdigit() else (_NAMED_ORDER.get(cond, 200), cond)


@dataclass(frozen=True)
class FormatRow:
    rule: str
    format: str
    verdict: str  # "conforms" | "violates"
    condition: str = ""
    witness: str = ""
    violations: tuple = ()


@dataclass
class FormatReport:
    spec: str
    rows: list = field(default_factory=list)
    well_founded: dict = field(default_factory=dict)  # rule -> (bool, cycle)

    def conforms(self, fmt: str) -> bool:
        return all(r.verdict == "conforms" for r in self.rows if r.format == fmt)

    def row(self, rule: str, fmt: str) -> FormatRow:
        return next(r for r in self.rows if r.rule == rule and r.format == fmt)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec,
            "rows": [
                {k: v for k, v in asdict(r).items() if k != "violations"}
                | {"all": [list(v) for v in r.violations]}
                for r in self.rows
            ],
            "well_founded": {k: {"verdict": ok, "cycle": list(c)} for k, (ok, c) in self.well_founded.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = []
        for r in self.rows:
            tail = f"  condition {r.condition}: {r.witness}" if r.verdict == "violates" else ""
            lines.append(f"{r.rule:<16} {r.format:<12} {r.verdict}{tail}")
        for name, (ok, cycle) in self.well_founded.items():
            tail = "" if ok else "  cycle " + " -> ".join(cycle)
            lines.append(f"{name:<16} {'wellfounded':<12} {'yes' if ok else 'no'}{tail}")
        return "\n".join(lines)


# ---------------------------------------------------------------- helpers


def _all_premises(rule: Rule):
    """Premises with forall templates unwrapped."""
    for p in rule.premises:
        yield p.premise if isinstance(p, ForAll) else p


def _premise_targets(rule: Rule) -> list:
    return [p.target.name for p in _all_premises(rule) if isinstance(p, Transition) and isinstance(p.target, DVar)]


def _dvars(term) -> set:
    return {v.name for v in variables(term) if isinstance(v, (DVar, Mix))}


def _svars(term) -> set:
    return {v.name for v in variables(term) if isinstance(v, SVar)}


def check_linear(theta, V) -> tuple:
    """``(True, None)`` if ``theta`` is linear for the distribution variables ``V``, else ``(False, var)``."""
    V = set(V)
    if isinstance(theta, (SVar, DVar, Mix)) or is_closed(theta):
        return True, None
    if isinstance(theta, Dirac):
        if isinstance(theta.arg, SVar):
            return True, None
        return _linear_args(theta.arg.args, V) if isinstance(theta.arg, App) else (True, None)
    if isinstance(theta, Sum):
        for _, t in theta.parts:
            ok, w = check_linear(t, V)
            if not ok:
                return ok, w
        return True, None
    if isinstance(theta, Lift):
        return _linear_args(theta.args, V)
    if isinstance(theta, App):
        return _linear_args(theta.args, V)
    return True, None


def _linear_args(args, V):
    seen: set = set()
    for a in args:
        ok, w = check_linear(a, V)
        if not ok:
            return ok, w
        mine = _dvars(a) & V
        clash = sorted(mine & seen)
        if clash:
            return False, clash[0]
        seen |= mine
    return True, None


def dist_positions(term, sig: Signature) -> set:
    """Distribution variables occurring in a distribution-sorted argument position."""
    out: set = set()

    def walk(t):
        if isinstance(t, App):
            sorts = sig.arity(t.op)
            for a, s in zip(t.args, sorts):
                if Sort(s) is Sort.DIST:
                    out.update(_dvars(a))
                walk(a)
        elif isinstance(t, Lift):
            for a, s in zip(t.args, t.sorts):
                if Sort(s) is Sort.DIST:
                    out.update(_dvars(a))
                walk(a)
        elif isinstance(t, Dirac):
            walk(t.arg)
        elif isinstance(t, Sum):
            for _, x in t.parts:
                walk(x)

    walk(term)
    return out


def dependency_graph(rule: Rule) -> dict:
    """Edges from premise-source variables to premise targets and from measured terms to set elements."""
    graph: dict = {}

    def edge(u, v):
        graph.setdefault(u, set()).add(v)
        graph.setdefault(v, set())

    links = {c.name: c.link for c in rule.combines() if c.link}
    for p in rule.premises:
        prem = p.premise if isinstance(p, ForAll) else p
        if isinstance(prem, Transition):
            for v in _svars(prem.source) | _dvars(prem.source):
                for w in _dvars(prem.target) | _svars(prem.target):
                    edge(v, w)
        if isinstance(p, Measure):
            srcs = {links.get(n, n) for n in _dvars(p.term)} | _svars(p.term)
            if p.setvar is not None:
                elems = {q.var for q in rule.foralls() if q.setvar == p.setvar}
            else:
                elems = set().union(*(_svars(s) for s in p.states)) if p.states else set()
            for u in srcs:
                for e in elems:
                    edge(u, e)
    return graph


def check_well_founded(rule: Rule) -> tuple:
    """``(True, ())`` when the dependency graph is acyclic, else ``(False, cycle)``."""
    graph = dependency_graph(rule)
    color = {v: 0 for v in graph}
    stack: list = []

    def dfs(v):
        color[v] = 1
        stack.append(v)
        for w in sorted(graph[v]):
            if color[w] == 1:
                return stack[stack.index(w):] + [w]
            if color[w] == 0:
                found = dfs(w)
                if found:
                    return found
        stack.pop()
        color[v] = 2
        return None

    for v in sorted(graph):
        if color[v] == 0:
            cycle = dfs(v)
            if cycle:
                return False, tuple(cycle)
    return True, ()


# ---------------------------------------------------------------- formats


def ntmufxtheta_violations(rule: Rule) -> list:
    out = []
    src = rule.conclusion.source
    if not (isinstance(src, SVar) or (isinstance(src, App) and all(isinstance(a, (SVar, DVar)) for a in src.args))):
        out.append(("shape", "conclusion source must be f(distinct variables) or a variable", str(src)))
    problem = binder_problem(rule)
    if problem and problem[0] != "8":
        out.append(problem[:2] + (str(problem[2]),))
    for m in rule.measures():
        if m.cmp not in (">", ">="):
            out.append(("comparator", f"comparator {m.cmp!r} not allowed", str(m)))
        if m.states is not None and not _degenerate_singleton(m):
            out.append(("1", "explicit finite measured set can count elements", str(m)))
    return out


def _degenerate_singleton(m: Measure) -> bool:
    return len(m.states) == 1 and isinstance(m.states[0], SVar) and m.cmp == ">" and m.bound == 0


def convex_violations(rule: Rule, sig: Signature) -> list:
    out = ntmufxtheta_violations(rule)
    targets = _premise_targets(rule)
    tset = set(targets)
    for m in rule.measures():
        if not isinstance(m.term, Mix):
            out.append(("7", "quantitative premise must measure a combination block", str(m)))
    names = []
    positives = {p.target.name for p in rule.positives() if isinstance(p.target, DVar)}
    for c in rule.combines():
        names.append(c.name)
        if c.link is None or c.link not in positives:
            out.append(("8", "combination block not linked to exactly one positive premise", str(c)))
    dup = next((n for n in names if names.count(n) > 1), None)
    if dup:
        out.append(("8", "combination blocks overlap", dup))
    links = [c.link for c in rule.combines() if c.link]
    dup = next((n for n in links if links.count(n) > 1), None)
    if dup:
        out.append(("8", "two blocks share one positive premise", dup))
    for p in _all_premises(rule):
        if isinstance(p, (Transition, Negative)):
            bad = sorted(_dvars(p.source) & tset)
            if bad:
                out.append(("9", "premise target used in a premise source", bad[0]))
    bad = sorted(dist_positions(rule.conclusion.target, sig) & tset)
    if bad:
        out.append(("9", "premise target in a distribution-sorted position of the conclusion", bad[0]))
    ok, w = check_linear(rule.conclusion.target, tset)
    if not ok:
        out.append(("10", "conclusion target not linear for premise targets", w))
    return out


def abstracted_violations(rule: Rule) -> list:
    out = ntmufxtheta_violations(rule)
    for m in rule.measures():
        if m.bound != 0:
            out.append(("zero-bound", f"quantitative premise tested against {m.bound}", str(m)))
    return out


def obliterated_violations(rule: Rule, sig: Signature) -> list:
    out = ntmufxtheta_violations(rule)
    for p in rule.premises:
        if isinstance(p, (ForAll, Combine)):
            out.append(("shape", "set-quantified and combination blocks are not allowed", str(p)))
        if isinstance(p, Measure) and not (p.states is not None and len(p.states) == 1
                                           and isinstance(p.states[0], SVar) and p.cmp == ">" and p.bound == 0):
            out.append(("shape", "quantitative premises must have the form theta({y}) > 0", str(p)))
    tset = set(_premise_targets(rule))
    elems = [m.states[0].name for m in rule.measures() if m.states and isinstance(m.states[0], SVar)]
    dup = next((y for y in elems if elems.count(y) > 1), None)
    if dup:
        out.append(("distinct", "measured element used twice", dup))
    for p in _all_premises(rule):
        if isinstance(p, (Transition, Negative)):
            bad = sorted(_dvars(p.source) & tset)
            if bad:
                out.append(("1", "premise target used in a premise source", bad[0]))
    seen: set = set()
    for m in rule.measures():
        ok, w = check_linear(m.term, tset)
        if not ok:
            out.append(("2", "quantitative term not linear for premise targets", w))
        mine = _dvars(m.term) & tset
        clash = sorted(mine & seen)
        if clash:
            out.append(("2", "premise target measured in two quantitative premises", clash[0]))
        seen |= mine
    target = rule.conclusion.target
    ok, w = check_linear(target, tset)
    if not ok:
        out.append(("3", "conclusion target not linear for premise targets", w))
    clash = sorted(_dvars(target) & seen)
    if clash:
        out.append(("3", "premise target both measured and used in the conclusion target", clash[0]))
    bad = sorted(dist_positions(target, sig) & tset)
    if bad:
        out.append(("3", "premise target in a distribution-sorted position of the conclusion", bad[0]))
    return out


def _row(rule: Rule, fmt: str, violations: list) -> FormatRow:
    if not violations:
        return FormatRow(rule.name, fmt, "conforms")
    violations = sorted(dict.fromkeys(violations), key=lambda v: condition_order(v[0]))
    cond, _, witness = violations[0]
    return FormatRow(rule.name, fmt, "violates", cond, str(witness), tuple(violations))


def _sig(spec: SpecAst, rule: Rule) -> Signature:
    extra = (rule.action_var,) if rule.action_var else ()
    return Signature(spec.ops, tuple(spec.actions) + extra)


def check_rule(spec: SpecAst, rule: Rule, fmt: str) -> FormatRow:
    if fmt == "ntmufxtheta":
        return _row(rule, fmt, ntmufxtheta_violations(rule))
    if fmt == "convex":
        return _row(rule, fmt, convex_violations(rule, _sig(spec, rule)))
    if fmt == "abstracted":
        return _row(rule, fmt, abstracted_violations(rule))
    if fmt == "obliterated":
        return _row(rule, fmt, obliterated_violations(rule, _sig(spec, rule)))
    raise ValueError(f"unknown format {fmt!r}")


def check_ntmufxtheta(rule: Rule) -> FormatRow:
    return _row(rule, "ntmufxtheta", ntmufxtheta_violations(rule))


def check_spec(spec: SpecAst, formats=FORMATS) -> FormatReport:
    if isinstance(formats, str):
        formats = FORMATS if formats == "all" else (formats,)
    report = FormatReport(spec.name)
    for fmt in formats:
        for rule in spec.rules:
            report.rows.append(check_rule(spec, rule, fmt))
    for rule in spec.rules:
        report.well_founded[rule.name] = check_well_founded(rule)
    return report


def check_convex_format(spec: SpecAst) -> FormatReport:
    return check_spec(spec, ("convex",))


def check_abstracted_format(spec: SpecAst) -> FormatReport:
    return check_spec(spec, ("abstracted",))


def check_obliterated_format(spec: SpecAst) -> FormatReport:
    return check_spec(spec, ("obliterated",))


__all__ = [
    "FORMATS", "Fraction", "FormatReport", "FormatRow", "check_abstracted_format", "check_convex_format",
    "check_linear", "check_ntmufxtheta", "check_obliterated_format", "check_rule", "check_spec",
    "check_well_founded", "condition_order", "dependency_graph", "dist_positions",
]
