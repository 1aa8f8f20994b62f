"""Ground derivation: rule instantiation and the 3-valued stable model.

The model is computed on the fragment of closed terms reachable from a set
of roots.  ``CT`` (certain) and ``PT`` (possible) transitions are built by
the alternating iteration: CT_a uses negative literals checked against
PT_{a-1}, PT_a checks them against CT_{a-1}, starting from CT_0 = {} and
PT_0 = everything.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .lang import Combine, ForAll, Measure, Negative, Rule, SpecAst, Transition
from .lp import LpProblem, lp_feasible
from .pts import Pts, build_oblit_lts  # noqa: F401  (re-exported)
from .terms import (
    App, DVar, Dirac, FiniteDistribution, Lift, Mix, PtssError, SVar, Sum, apply_subst,
    eval_dist, is_closed, measure, term_key, variables,
)

DEFAULT_FUEL = 10000


class IncompleteModel(PtssError):
    pass


class NoSuchAction(PtssError):
    pass


class BudgetExceeded(PtssError):
    pass


@dataclass(frozen=True)
class Instance:
    """A closed rule instance: its conclusion and the substitution that produced it."""

    rule: str
    source: object
    action: str
    target: object
    binding: tuple = ()


@dataclass(frozen=True)
class TransitionTable:
    ct: frozenset  # (state, action, dist term)
    pt: frozenset
    explored: tuple
    budget_exhausted: bool = False
    iterations: int = 0
    history: tuple = field(default=(), compare=False, repr=False)

    def certain(self, t, a=None):
        return sorted((x for x in self.ct if x[0] == t and (a is None or x[1] == a)), key=_triple_key)

    def possible(self, t, a=None):
        return sorted((x for x in self.pt if x[0] == t and (a is None or x[1] == a)), key=_triple_key)


def _triple_key(tr):
    return (term_key(tr[0]), tr[1], term_key(tr[2]))


# ---------------------------------------------------------------- matching


def match(pattern, term, env: dict) -> Optional[dict]:
    """Extend ``env`` so that ``pattern`` instantiates to ``term``, or ``None``."""
    if isinstance(pattern, (SVar, DVar)):
        bound = env.get(pattern.name)
        if bound is None:
            out = dict(env)
            out[pattern.name] = term
            return out
        return env if bound == term else None
    if is_closed(pattern):
        return env if pattern == term else None
    if isinstance(pattern, App):
        if not isinstance(term, App) or term.op != pattern.op or len(term.args) != len(pattern.args):
            return None
        return _match_seq(pattern.args, term.args, env)
    if isinstance(pattern, Lift):
        if not isinstance(term, Lift) or term.op != pattern.op or len(term.args) != len(pattern.args):
            return None
        return _match_seq(pattern.args, term.args, env)
    if isinstance(pattern, Dirac):
        if not isinstance(term, Dirac):
            return None
        return match(pattern.arg, term.arg, env)
    if isinstance(pattern, Sum):
        if not isinstance(term, Sum) or len(term.parts) != len(pattern.parts):
            return None
        if any(w != v for (w, _), (v, _) in zip(pattern.parts, term.parts)):
            return None
        return _match_seq([t for _, t in pattern.parts], [t for _, t in term.parts], env)
    return None


def _match_seq(pats, terms, env):
    for p, t in zip(pats, terms):
        env = match(p, t, env)
        if env is None:
            return None
    return env


# ---------------------------------------------------------------- instantiation


class _View:
    """Positive lookups go to ``rel``; negative literals to ``enabled``.

    ``enabled`` is ``None`` when every negative literal fails (reference set
    is PT_0) and ``"none"`` when every one holds (reference set is CT_0).
    """

    def __init__(self, rel, enabled, request):
        self.rel = rel
        self.enabled = enabled
        self.request = request

    def pos(self, t, a):
        return tuple(self.rel.get(t, {}).get(a, ()))

    def neg(self, t, a) -> bool:
        if self.enabled is None:
            return False
        if self.enabled == "none":
            return True
        return (t, a) not in self.enabled


def _names(term) -> set:
    return {v.name for v in variables(term) if not isinstance(v, Mix)}


def _mixes(term) -> set:
    return {v.name for v in variables(term) if isinstance(v, Mix)}


@dataclass
class _State:
    env: dict
    sets: dict
    fams: dict
    lps: dict


def _ready(p, st: _State, rule: Rule) -> bool:
    bound = st.env
    if isinstance(p, (Transition, Negative)):
        return not _mixes(p.source) and _names(p.source) <= bound.keys()
    if isinstance(p, Combine):
        return p.link is not None and p.link in bound
    if isinstance(p, Measure):
        if not (_names(p.term) <= bound.keys() and _mixes(p.term) <= st.fams.keys()):
            return False
        if p.setvar is None:
            return True
        for q in rule.premises:
            if isinstance(q, Measure) and q.setvar == p.setvar:
                if not (_names(q.term) <= bound.keys() and _mixes(q.term) <= st.fams.keys()):
                    return False
            if isinstance(q, ForAll) and q.setvar == p.setvar:
                tmpl = q.premise
                if not (_names(tmpl.source) - {q.var}) <= bound.keys():
                    return False
        return True
    if isinstance(p, ForAll):
        # governed blocks are checked while computing their set; ungoverned ones are vacuous
        governed = any(isinstance(q, Measure) and q.setvar == p.setvar for q in rule.premises)
        return not governed or p.setvar in st.sets
    return False


def _measured(term, st: _State):
    """Either ``("dist", pi)`` or ``("mix", name, [pi_i])`` for a ready measured term."""
    if isinstance(term, Mix):
        return ("mix", term.name, [eval_dist(d) for d in st.fams[term.name]])
    return ("dist", eval_dist(apply_subst(st.env, term)))


def _candidates(m) -> list:
    if m[0] == "dist":
        return list(m[1].support)
    seen = {}
    for d in m[2]:
        for s in d.support:
            seen.setdefault(s, None)
    return list(seen)


def _holds(cmp, lhs, rhs) -> bool:
    return {">=": lhs >= rhs, ">": lhs > rhs, "<=": lhs <= rhs, "<": lhs < rhs, "=": lhs == rhs}[cmp]


def _solve(rule: Rule, pending: tuple, st: _State, view: _View):
    if not pending:
        yield st
        return
    idx = next((i for i, p in enumerate(pending) if _ready(p, st, rule)), None)
    if idx is None:
        return
    p = pending[idx]
    rest = pending[:idx] + pending[idx + 1:]
    env = st.env
    if isinstance(p, Transition):
        src = apply_subst(env, p.source)
        view.request(src)
        for theta in view.pos(src, p.action):
            env2 = match(p.target, theta, env)
            if env2 is not None:
                yield from _solve(rule, rest, _State(env2, st.sets, st.fams, st.lps), view)
    elif isinstance(p, Negative):
        src = apply_subst(env, p.source)
        view.request(src)
        if view.neg(src, p.action):
            yield from _solve(rule, rest, st, view)
    elif isinstance(p, ForAll):
        yield from _solve(rule, rest, st, view)
    elif isinstance(p, Combine):
        link = next(q for q in rule.premises if isinstance(q, Transition) and q.target == DVar(p.link))
        src = apply_subst(env, link.source)
        fam = view.pos(src, link.action)
        if fam:
            fams = dict(st.fams)
            fams[p.name] = fam
            yield from _solve(rule, rest, _State(env, st.sets, fams, st.lps), view)
    elif isinstance(p, Measure):
        if p.setvar is not None:
            yield from _solve_set_measure(rule, p, rest, st, view)
        else:
            yield from _solve_explicit_measure(rule, p, rest, st, view)


def _solve_set_measure(rule, p, rest, st, view):
    sets = st.sets
    if p.setvar not in sets:
        measures = [q for q in rule.premises if isinstance(q, Measure) and q.setvar == p.setvar]
        cands = None
        for q in measures:
            c = _candidates(_measured(q.term, st))
            cands = c if cands is None else [x for x in cands if x in c]
        blocks = [q for q in rule.premises if isinstance(q, ForAll) and q.setvar == p.setvar]
        members = frozenset(e for e in cands if all(_element_ok(q, e, st.env, view) for q in blocks))
        sets = dict(sets)
        sets[p.setvar] = members
    ys = sets[p.setvar]
    m = _measured(p.term, st)
    if m[0] == "dist":
        if _holds(p.cmp, measure(m[1], ys), p.bound):
            yield from _solve(rule, rest, _State(st.env, sets, st.fams, st.lps), view)
        return
    lps = dict(st.lps)
    lps[m[1]] = lps.get(m[1], ()) + (([measure(d, ys) for d in m[2]], p.cmp, p.bound),)
    yield from _solve(rule, rest, _State(st.env, sets, st.fams, lps), view)


def _element_ok(block: ForAll, e, env, view) -> bool:
    env2 = dict(env)
    env2[block.var] = e
    tmpl = block.premise
    src = apply_subst(env2, tmpl.source)
    view.request(src)
    if isinstance(tmpl, Negative):
        return view.neg(src, tmpl.action)
    return any(match(tmpl.target, th, env2) is not None for th in view.pos(src, tmpl.action))


def _solve_explicit_measure(rule, p, rest, st, view):
    m = _measured(p.term, st)
    cands = _candidates(m)

    def assignments(i, env):
        if i == len(p.states):
            yield env
            return
        pat = apply_subst(env, p.states[i])
        if is_closed(pat):
            yield from assignments(i + 1, env)
            return
        for c in cands:
            env2 = match(pat, c, env)
            if env2 is not None:
                yield from assignments(i + 1, env2)

    for env in assignments(0, st.env):
        elems = {apply_subst(env, s) for s in p.states}
        nxt = _State(env, st.sets, st.fams, st.lps)
        if m[0] == "dist":
            # proper substitution: every listed element carries positive mass
            if all(m[1][t] > 0 for t in elems) and _holds(p.cmp, measure(m[1], elems), p.bound):
                yield from _solve(rule, rest, nxt, view)
            continue
        rows = tuple(([d[t] for d in m[2]], ">", 0) for t in elems)
        rows += (([measure(d, elems) for d in m[2]], p.cmp, p.bound),)
        lps = dict(st.lps)
        lps[m[1]] = lps.get(m[1], ()) + rows
        nxt.lps = lps
        yield from _solve(rule, rest, nxt, view)


def _resolve_mixes(st: _State) -> Optional[dict]:
    out = {}
    for name, fam in st.fams.items():
        prob = LpProblem(len(fam))
        for coeffs, cmp, rhs in st.lps.get(name, ()):
            prob.add(coeffs, cmp, rhs)
        lam = lp_feasible(prob)
        if lam is None:
            return None
        parts = tuple((w, d) for w, d in zip(lam, fam) if w > 0)
        out[name] = parts[0][1] if len(parts) == 1 else Sum(parts)
    return out


def _instances(rule: Rule, goal, view: _View):
    env = match(rule.conclusion.source, goal, {})
    if env is None:
        return
    seen = set()
    for st in _solve(rule, tuple(rule.premises), _State(env, {}, {}, {}), view):
        mixes = _resolve_mixes(st)
        if mixes is None:
            continue
        subst = dict(st.env)
        subst.update(mixes)
        target = apply_subst(subst, rule.conclusion.target)
        if not is_closed(target):
            continue
        binding = tuple(sorted(((k, v) for k, v in subst.items()), key=lambda kv: kv[0]))
        inst = Instance(rule.name, goal, rule.conclusion.action, target, binding)
        if inst not in seen:
            seen.add(inst)
            yield inst


def instantiate(rule: Rule, goal, table: Optional[TransitionTable] = None) -> list:
    """Closed instances of ``rule`` with conclusion source ``goal``.

    Positive premises are looked up in the table's CT, negative literals are
    checked against its PT.  Without a table, no transitions are known.
    """
    rel: dict = {}
    enabled: object = "none"
    if table is not None:
        for t, a, th in sorted(table.ct, key=_triple_key):
            rel.setdefault(t, {}).setdefault(a, []).append(th)
        enabled = {(t, a) for t, a, _ in table.pt}
    view = _View(rel, enabled, lambda t: None)
    return list(_instances(rule, goal, view))


# ---------------------------------------------------------------- fixpoint


class _Universe:
    def __init__(self, roots, fuel):
        self.items = list(dict.fromkeys(roots))
        self.known = set(self.items)
        self.fuel = fuel
        self.exhausted = len(self.items) > fuel
        if self.exhausted:
            self.items = self.items[:fuel]
            self.known = set(self.items)
        self.growing = False

    def request(self, t):
        if not self.growing or t in self.known or not is_closed(t):
            return
        if len(self.items) >= self.fuel:
            self.exhausted = True
            return
        self.known.add(t)
        self.items.append(t)


def _index_rules(rules):
    by_op: dict = {}
    generic = []
    for r in rules:
        src = r.conclusion.source
        if isinstance(src, App):
            by_op.setdefault(src.op, []).append(r)
        else:
            generic.append(r)
    return by_op, generic


def _closure(index, universe: _Universe, enabled, grow: bool) -> frozenset:
    by_op, generic = index
    rel: dict = {}
    triples: set = set()
    universe.growing = grow
    view = _View(rel, enabled, universe.request)
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(universe.items):
            t = universe.items[i]
            i += 1
            rules = by_op.get(t.op, []) + generic if isinstance(t, App) else generic
            for rule in rules:
                for inst in _instances(rule, t, view):
                    key = (t, inst.action, inst.target)
                    if key in triples:
                        continue
                    triples.add(key)
                    rel.setdefault(t, {}).setdefault(inst.action, []).append(inst.target)
                    changed = True
                    if grow:
                        for s in eval_dist(inst.target).support:
                            universe.request(s)
    universe.growing = False
    return frozenset(triples)


def _enabled(triples) -> set:
    return {(t, a) for t, a, _ in triples}


def stable_model(spec: SpecAst, roots, fuel: int = DEFAULT_FUEL, max_iter: int = 10000) -> TransitionTable:
    """Least 3-valued stable model restricted to the terms reachable from ``roots``."""
    if fuel < 1:
        raise ValueError("fuel must be at least 1")
    roots = [spec.term(r) for r in roots]
    index = _index_rules(spec.expanded_rules())
    universe = _Universe(roots, fuel)
    # PT_1 grants every negative literal (CT_0 is empty); it fixes the fragment
    pt = _closure(index, universe, "none", grow=True)
    ct = _closure(index, universe, None, grow=False)
    history = [(ct, pt)]
    for _ in range(max_iter):
        ct_next = _closure(index, universe, _enabled(pt), grow=False)
        pt_next = _closure(index, universe, _enabled(ct), grow=False)
        if ct_next == ct and pt_next == pt:
            break
        ct, pt = ct_next, pt_next
        history.append((ct, pt))
    else:  # pragma: no cover
        raise BudgetExceeded("stable-model iteration did not converge")
    return TransitionTable(ct, pt, tuple(universe.items), universe.exhausted, len(history), tuple(history))


def is_complete(table: TransitionTable) -> bool:
    return table.ct == table.pt and not table.budget_exhausted


def build_pts(table: TransitionTable) -> Pts:
    if not is_complete(table):
        why = "budget exhausted" if table.budget_exhausted else "CT differs from PT"
        raise IncompleteModel(f"model incomplete ({why})")
    steps = [(t, a, eval_dist(th)) for t, a, th in sorted(table.ct, key=_triple_key)]
    return Pts(tuple(table.explored), tuple(steps))


def derive_pts(spec: SpecAst, roots, fuel: int = DEFAULT_FUEL) -> Pts:
    return build_pts(stable_model(spec, roots, fuel))


def combined_feasible(pts: Pts, t, a, constraints) -> Optional[tuple]:
    """Weights over ``t``'s a-steps whose combination meets every ``(states, cmp, bound)``."""
    steps = pts.out(t, a)
    if not steps:
        raise NoSuchAction(f"{t} has no {a}-transition")
    prob = LpProblem(len(steps))
    for states, cmp, bound in constraints:
        states = set(states)
        prob.add([measure(d, states) for d in steps], cmp, Fraction(bound))
    return lp_feasible(prob)


__all__ = [
    "BudgetExceeded", "FiniteDistribution", "IncompleteModel", "Instance", "NoSuchAction",
    "TransitionTable", "build_oblit_lts", "build_pts", "combined_feasible", "derive_pts",
    "instantiate", "is_complete", "match", "stable_model",
]
