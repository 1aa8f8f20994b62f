"""Four bisimulation equivalences on finite PTSs.

``quotient`` refines the one-block partition with a per-kind signature until
stable.  R-closed sets of an equivalence are unions of its blocks, so
comparing block masses (strong), block-mass convex hulls (convex), positive
block sets (abstracted) or reachable blocks (obliterated) is enough.

``naive_fixpoint`` is the independent oracle: it works on an explicit
relation and enumerates every R-closed set.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .lp import LpProblem, lp_feasible, simplex_max
from .pts import ObliteratedLts, Pts, UnknownState, build_oblit_lts
from .terms import FiniteDistribution, PtssError, measure, term_key

KINDS = ("strong", "convex", "abstracted", "obliterated")


class TooLarge(PtssError):
    pass


@dataclass(frozen=True)
class Partition:
    blocks: tuple  # tuple of frozensets, in deterministic order
    kind: str = ""

    def __post_init__(self):
        index = {}
        for i, b in enumerate(self.blocks):
            if not b:
                raise ValueError("empty block")
            for s in b:
                if s in index:
                    raise ValueError(f"{s} occurs in two blocks")
                index[s] = i
        object.__setattr__(self, "_index", index)

    def block_of(self, s) -> int:
        try:
            return self._index[s]
        except KeyError:
            raise UnknownState(f"{s} is not covered by the partition") from None

    def same(self, s, t) -> bool:
        return self.block_of(s) == self.block_of(t)

    def refines(self, other: "Partition") -> bool:
        """Every block of ``self`` lies inside one block of ``other``."""
        return all(len({other.block_of(s) for s in b}) == 1 for b in self.blocks)

    def relation(self) -> frozenset:
        return frozenset((s, t) for b in self.blocks for s in b for t in b)

    def __len__(self):
        return len(self.blocks)


def _order(states):
    return sorted(states, key=term_key)


def _from_labels(states, label, kind) -> Partition:
    groups: dict = {}
    for s in _order(states):
        groups.setdefault(label[s], []).append(s)
    return Partition(tuple(frozenset(g) for g in groups.values()), kind)


# ---------------------------------------------------------------- distribution matching


def block_vector(pi: FiniteDistribution, partition: Partition) -> tuple:
    vec = [Fraction(0)] * len(partition)
    for s, p in pi.items():
        vec[partition.block_of(s)] += p
    return tuple(vec)


def dist_match(pi1, pi2, partition: Partition, kind: str) -> bool:
    v1, v2 = block_vector(pi1, partition), block_vector(pi2, partition)
    if kind == "strong":
        return v1 == v2
    if kind == "abstracted":
        return [p > 0 for p in v1] == [p > 0 for p in v2]
    raise ValueError(f"dist_match supports strong and abstracted, not {kind!r}")


def support_match(pi1, pi2, rel) -> bool:
    """Abstract weight function exists iff both supports are covered through ``rel``.

    ``rel`` is a Partition, a set of pairs, or a binary predicate.
    """
    if isinstance(rel, Partition):
        related = rel.same
    elif callable(rel):
        related = rel
    else:
        pairs = set(rel)
        related = lambda s, t: (s, t) in pairs  # noqa: E731
    left = all(any(related(s, t) for t in pi2.support) for s in pi1.support)
    right = all(any(related(s, t) for s in pi1.support) for t in pi2.support)
    return left and right


def combined_match(pts: Pts, t2, a, pi1, partition: Partition) -> bool:
    """Is some convex combination of ``t2``'s a-steps block-equal to ``pi1``?"""
    steps = pts.out(t2, a)
    if not steps:
        return False
    target = block_vector(pi1, partition)
    vecs = [block_vector(d, partition) for d in steps]
    prob = LpProblem(len(steps))
    for j in range(len(partition)):
        prob.add([v[j] for v in vecs], "=", target[j])
    return lp_feasible(prob) is not None


def in_hull(point, points) -> Optional[tuple]:
    """Weights expressing ``point`` as a convex combination of ``points``."""
    if not points:
        return None
    prob = LpProblem(len(points))
    for j in range(len(point)):
        prob.add([p[j] for p in points], "=", point[j])
    return lp_feasible(prob)


def extreme_points(points) -> frozenset:
    pts = list(dict.fromkeys(points))
    out = []
    for i, p in enumerate(pts):
        others = pts[:i] + pts[i + 1:]
        if in_hull(p, others) is None:
            out.append(p)
    return frozenset(out)


def hull_gap(point, points) -> Fraction:
    """min over w in hull(points) of max_j (point_j - w_j); positive iff point is outside."""
    k, m = len(points), len(point)
    # variables: lambda (k), d, slack s_j (m); maximize -d
    n = k + 1 + m
    rows, b = [], []
    rows.append([Fraction(1)] * k + [Fraction(0)] * (1 + m))
    b.append(Fraction(1))
    for j in range(m):
        row = [points[i][j] for i in range(k)] + [Fraction(1)] + [Fraction(0)] * m
        row[k + 1 + j] = Fraction(-1)
        rows.append(row)
        b.append(point[j])
    c = [Fraction(0)] * n
    c[k] = Fraction(-1)
    value, _ = simplex_max(c, rows, b)
    return -value


# ---------------------------------------------------------------- refinement


def _signature(pts: Pts, s, partition: Partition, kind: str):
    if kind == "strong":
        return frozenset((a, block_vector(d, partition)) for a, d in pts.out(s))
    if kind == "abstracted":
        return frozenset(
            (a, frozenset(i for i, p in enumerate(block_vector(d, partition)) if p > 0)) for a, d in pts.out(s)
        )
    if kind == "obliterated":
        return frozenset((a, partition.block_of(t)) for a, d in pts.out(s) for t in d.support)
    if kind == "convex":
        by_action: dict = {}
        for a, d in pts.out(s):
            by_action.setdefault(a, []).append(block_vector(d, partition))
        return frozenset((a, extreme_points(v)) for a, v in by_action.items())
    if kind == "la":
        # what [phi]_0 meets can observe: the maximal positive-block patterns
        pats: dict = {}
        for a, d in pts.out(s):
            pats.setdefault(a, set()).add(frozenset(i for i, p in enumerate(block_vector(d, partition)) if p > 0))
        return frozenset((a, frozenset(p for p in ps if not any(p < q for q in ps))) for a, ps in pats.items())
    raise ValueError(f"unknown kind {kind!r}")


def refine_once(pts: Pts, partition: Partition, kind: str) -> Partition:
    label = {s: (partition.block_of(s), _signature(pts, s, partition, kind)) for s in pts.states}
    return _from_labels(pts.states, label, kind)


def refinement_history(pts: Pts, kind: str) -> list:
    """Partitions P_0 (one block) .. P_k (stable)."""
    if not pts.states:
        return [Partition((), kind)]
    part = Partition((frozenset(pts.states),), kind)
    history = [part]
    while True:
        nxt = refine_once(pts, part, kind)
        if len(nxt) == len(part):
            return history
        history.append(nxt)
        part = nxt


def quotient(pts: Pts, kind: str) -> Partition:
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    return refinement_history(pts, kind)[-1]


def equivalent(pts: Pts, t1, t2, kind: str) -> bool:
    for t in (t1, t2):
        if t not in pts:
            raise UnknownState(f"{t} is not a state of this system")
    return quotient(pts, kind).same(t1, t2)


def lts_quotient(lts: ObliteratedLts) -> Partition:
    """Classic strong bisimulation on a labelled transition system."""
    part = Partition((frozenset(lts.states),), "lts") if lts.states else Partition((), "lts")
    succ = {s: [] for s in lts.states}
    for s, a, t in lts.edges:
        succ[s].append((a, t))
    while True:
        label = {s: (part.block_of(s), frozenset((a, part.block_of(t)) for a, t in succ[s])) for s in lts.states}
        nxt = _from_labels(lts.states, label, "lts")
        if len(nxt) == len(part):
            return part
        part = nxt


# ---------------------------------------------------------------- literal oracle


def _closed_sets(states, rel) -> list:
    n = len(states)
    out = []
    for mask in range(1 << n):
        q = frozenset(states[i] for i in range(n) if mask >> i & 1)
        if all(t in q for (s, t) in rel if s in q):
            out.append(q)
    return out


def _independent_rows(rows) -> list:
    """A linearly independent subset of ``rows`` spanning the same space (exact elimination)."""
    basis, kept = [], []
    for r in rows:
        v = list(r)
        for piv, b in basis:
            if v[piv]:
                f = v[piv] / b[piv]
                v = [x - f * y for x, y in zip(v, b)]
        piv = next((i for i, x in enumerate(v) if x), None)
        if piv is not None:
            basis.append((piv, v))
            kept.append(r)
    return kept


def _transfer(pts, kind, s, t, rel, masses, lts) -> bool:
    if kind == "obliterated":
        return all(
            any((s2, t2) in rel for (b2, t2) in lts[t] if b2 == a) for (a, s2) in lts[s]
        )
    for a, pi in pts.out(s):
        cands = pts.out(t, a)
        mine = masses(pi)
        if kind == "strong":
            ok = any(masses(pi2) == mine for pi2 in cands)
        elif kind == "abstracted":
            pos = tuple(m > 0 for m in mine)
            ok = any(tuple(m > 0 for m in masses(pi2)) == pos for pi2 in cands)
        elif any(masses(pi2) == mine for pi2 in cands):
            ok = True
        elif len(cands) < 2:
            ok = False
        else:
            # one equality per closed set, augmented with the right-hand side
            cols = [masses(d) for d in cands]
            rows = _independent_rows([tuple(c[j] for c in cols) + (mine[j],) for j in range(len(mine))])
            prob = LpProblem(len(cands))
            for r in rows:
                prob.add(r[:-1], "=", r[-1])
            ok = lp_feasible(prob) is not None
        if not ok:
            return False
    return True


def naive_fixpoint(pts: Pts, kind: str, limit: int = 10) -> frozenset:
    """Greatest relation satisfying the literal transfer property of ``kind``."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    states = _order(pts.states)
    if len(states) > limit:
        raise TooLarge(f"{len(states)} states exceed the oracle limit of {limit}")
    lts = {s: set() for s in states}
    for s, a, d in pts.steps:
        for t in d.support:
            lts[s].add((a, t))
    rel = {(s, t) for s in states for t in states}
    while True:
        closed = _closed_sets(states, rel) if kind != "obliterated" else []
        cache: dict = {}

        def masses(d):
            if d not in cache:
                cache[d] = tuple(measure(d, q) for q in closed)
            return cache[d]

        keep = {
            (s, t) for (s, t) in rel
            if _transfer(pts, kind, s, t, rel, masses, lts) and _transfer(pts, kind, t, s, rel, masses, lts)
        }
        if keep == rel:
            return frozenset(rel)
        rel = keep


# ---------------------------------------------------------------- random systems


def random_distribution(rng: random.Random, states, max_den: int = 8) -> FiniteDistribution:
    den = rng.randint(1, max_den)
    k = rng.randint(1, min(3, den, len(states)))
    support = rng.sample(list(states), k)
    cuts = sorted(rng.sample(range(1, den), k - 1)) if k > 1 else []
    bounds = [0] + cuts + [den]
    return FiniteDistribution({s: Fraction(bounds[i + 1] - bounds[i], den) for i, s in enumerate(support)})


def random_pts(rng: random.Random, max_states: int = 8, max_actions: int = 3, max_den: int = 8,
               max_out: int = 3) -> Pts:
    n = rng.randint(1, max_states)
    actions = "abc"[: rng.randint(1, max_actions)]
    states = list(range(n))
    steps = []
    for s in states:
        for _ in range(rng.randint(0, max_out)):
            steps.append((s, rng.choice(actions), random_distribution(rng, states, max_den)))
    return Pts(tuple(states), tuple(steps))


__all__ = [
    "KINDS", "Partition", "TooLarge", "UnknownState", "block_vector", "build_oblit_lts", "combined_match",
    "dist_match", "equivalent", "extreme_points", "hull_gap", "in_hull", "lts_quotient", "naive_fixpoint",
    "quotient", "random_distribution", "random_pts", "refine_once", "refinement_history", "support_match",
]
