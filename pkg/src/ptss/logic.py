"""Model checking for the logics L_b, L_c, L_a, L_o and distinguishing formulas."""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .bisim import block_vector, equivalent, hull_gap, in_hull, refinement_history
from .formulas import And, Dia, Meet, Not, Prob, Top, conj, fragment_of, meet
from .lp import LpProblem, lp_feasible
from .pts import Pts, UnknownState
from .terms import PtssError, measure

LOGIC_KIND = {"b": "strong", "c": "convex", "a": "abstracted", "o": "obliterated"}
# refinement whose classes coincide with logical equivalence in each fragment
LOGIC_REFINEMENT = {"b": "strong", "c": "convex", "a": "la", "o": "obliterated"}


class FragmentMismatch(PtssError):
    pass


class NoDistinguisher(PtssError):
    """The states differ behaviourally but agree on every formula of the fragment."""


class Checker:
    """Memoizing evaluator bound to one PTS."""

    def __init__(self, pts: Pts):
        self.pts = pts
        self._memo: dict = {}

    def sat_set(self, phi) -> frozenset:
        return frozenset(s for s in self.pts.states if self.state(s, phi))

    def state(self, t, phi) -> bool:
        key = (t, phi)
        if key in self._memo:
            return self._memo[key]
        if t not in self.pts:
            raise UnknownState(f"{t} is not a state of this system")
        if isinstance(phi, Top):
            val = True
        elif isinstance(phi, Not):
            val = not self.state(t, phi.arg)
        elif isinstance(phi, And):
            val = all(self.state(t, a) for a in phi.args)
        elif isinstance(phi, Dia):
            steps = self.pts.out(t, phi.action)
            if phi.combined:
                val = self._combined(steps, phi.body)
            else:
                val = any(self.dist(d, phi.body) for d in steps)
        else:
            raise TypeError(f"not a state formula: {phi!r}")
        self._memo[key] = val
        return val

    def dist(self, pi, psi) -> bool:
        if isinstance(psi, Prob):
            return measure(pi, self.sat_set(psi.arg)) > psi.bound
        if isinstance(psi, Meet):
            return all(self.dist(pi, p) for p in psi.args)
        raise TypeError(f"not a distribution formula: {psi!r}")

    def _combined(self, steps, psi) -> bool:
        if not steps:
            return False
        prob = LpProblem(len(steps))
        for atom in _atoms(psi):
            sat = self.sat_set(atom.arg)
            prob.add([measure(d, sat) for d in steps], ">", atom.bound)
        return lp_feasible(prob) is not None


def _atoms(psi) -> list:
    if isinstance(psi, Prob):
        return [psi]
    out = []
    for p in psi.args:
        out.extend(_atoms(p))
    return out


def sat_state(pts: Pts, t, phi, checker: Optional[Checker] = None) -> bool:
    return (checker or Checker(pts)).state(t, phi)


def sat_dist(pts: Pts, pi, psi, checker: Optional[Checker] = None) -> bool:
    return (checker or Checker(pts)).dist(pi, psi)


def check_fragment(phi, chi: str) -> None:
    if chi not in fragment_of(phi):
        raise FragmentMismatch(f"{phi} is not a formula of L_{chi}")


# ---------------------------------------------------------------- distinguishing formulas


class _Builder:
    """Characteristic formulas for the blocks of each refinement level."""

    def __init__(self, pts: Pts, chi: str):
        self.pts = pts
        self.chi = chi
        self.history = refinement_history(pts, LOGIC_REFINEMENT[chi])
        self._char: dict = {}

    def level_split(self, s, t) -> Optional[int]:
        for i, part in enumerate(self.history):
            if not part.same(s, t):
                return i
        return None

    def char(self, level: int, block: int):
        """Formula true exactly on block ``block`` of partition ``level``."""
        key = (level, block)
        if key in self._char:
            return self._char[key]
        if level == 0:
            phi = Top()
        else:
            part, prev = self.history[level], self.history[level - 1]
            rep = min(part.blocks[block], key=str)
            parent = prev.block_of(rep)
            parts = [self.char(level - 1, parent)]
            for j, other in enumerate(part.blocks):
                orep = min(other, key=str)
                if j != block and prev.block_of(orep) == parent:
                    parts.append(self.separate(level, rep, orep))
            phi = conj(*parts)
        self._char[key] = phi
        return phi

    def separate(self, level: int, s, t):
        """Formula true at ``s`` and false at ``t``; they split at ``level``."""
        prev = self.history[level - 1]
        acts = sorted({a for a, _ in self.pts.out(s)} | {a for a, _ in self.pts.out(t)})
        for a in acts:
            phi = self._separate_action(level, prev, a, s, t)
            if phi is not None:
                return phi
            phi = self._separate_action(level, prev, a, t, s)
            if phi is not None:
                return Not(phi)
        raise AssertionError("states split without a separating action")  # pragma: no cover

    def _blocks_formula(self, level, blocks, bounds=None):
        parts = []
        for j in sorted(blocks):
            q = Fraction(0) if bounds is None else bounds[j]
            parts.append(Prob(self.char(level - 1, j), q))
        return parts

    def _separate_action(self, level, prev, a, s, t):
        """Formula about ``a`` that ``s`` satisfies and ``t`` does not, or None."""
        mine = [block_vector(d, prev) for d in self.pts.out(s, a)]
        theirs = [block_vector(d, prev) for d in self.pts.out(t, a)]
        if not mine:
            return None
        if not theirs:
            return Dia(a, Prob(Top(), Fraction(0)), combined=self.chi == "c")
        chi = self.chi
        if chi == "b":
            for v in mine:
                if v in theirs:
                    continue
                bounds = {}
                for j in range(len(v)):
                    lower = [u[j] for u in theirs if u[j] < v[j]]
                    if lower:
                        bounds[j] = max(lower)
                return Dia(a, meet(*self._blocks_formula(level, bounds, bounds)))
            return None
        if chi == "c":
            for v in mine:
                gap = hull_gap(v, theirs)
                if gap <= 0:
                    continue
                bounds = {j: v[j] - gap / 2 for j in range(len(v)) if v[j] - gap / 2 >= 0}
                return Dia(a, meet(*self._blocks_formula(level, bounds, bounds)), combined=True)
            return None
        if chi == "o":
            reach_t = {j for u in theirs for j, p in enumerate(u) if p > 0}
            for v in mine:
                for j, p in enumerate(v):
                    if p > 0 and j not in reach_t:
                        return Dia(a, Prob(self.char(level - 1, j), Fraction(0)))
            return None
        # chi == "a": a support pattern of s not contained in any pattern of t
        pats_t = [frozenset(j for j, p in enumerate(u) if p > 0) for u in theirs]
        for v in mine:
            pat = frozenset(j for j, p in enumerate(v) if p > 0)
            if not any(pat <= q for q in pats_t):
                return Dia(a, meet(*self._blocks_formula(level, pat)))
        return None


def _separates(checker, phi, t1, t2) -> bool:
    return checker.state(t1, phi) != checker.state(t2, phi)


def _minimize(checker, phi, t1, t2):
    """Greedily drop conjuncts and meet parts while the formula still separates."""
    changed = True
    while changed:
        changed = False
        for cand in _shrinks(phi):
            if _separates(checker, cand, t1, t2):
                phi, changed = cand, True
                break
    return phi


def _shrinks(phi):
    if isinstance(phi, And):
        for i in range(len(phi.args)):
            yield conj(*(phi.args[:i] + phi.args[i + 1:]))
        for i, a in enumerate(phi.args):
            for smaller in _shrinks(a):
                yield conj(*(phi.args[:i] + (smaller,) + phi.args[i + 1:]))
    elif isinstance(phi, Not):
        for smaller in _shrinks(phi.arg):
            yield Not(smaller)
    elif isinstance(phi, Dia):
        for smaller in _dshrinks(phi.body):
            yield Dia(phi.action, smaller, phi.combined)


def _dshrinks(psi):
    if isinstance(psi, Meet):
        for i in range(len(psi.args)):
            yield meet(*(psi.args[:i] + psi.args[i + 1:]))
        for i, a in enumerate(psi.args):
            for smaller in _dshrinks(a):
                yield meet(*(psi.args[:i] + (smaller,) + psi.args[i + 1:]))
    elif isinstance(psi, Prob):
        for smaller in _shrinks(psi.arg):
            yield Prob(smaller, psi.bound)


def logically_equivalent(pts: Pts, t1, t2, chi: str) -> bool:
    """Agreement on every formula of L_chi (finite conjunctions suffice on finite systems)."""
    return refinement_history(pts, LOGIC_REFINEMENT[chi])[-1].same(t1, t2)


def distinguishing_formula(pts: Pts, t1, t2, chi: str, minimize: bool = True):
    """A formula of L_chi separating ``t1`` from ``t2``, or None when they are chi-bisimilar.

    Raises ``NoDistinguisher`` when the states are not bisimilar but agree on
    every formula of the fragment.
    """
    if chi not in LOGIC_KIND:
        raise ValueError(f"unknown logic {chi!r}")
    if equivalent(pts, t1, t2, LOGIC_KIND[chi]):
        return None
    builder = _Builder(pts, chi)
    level = builder.level_split(t1, t2)
    if level is None:
        raise NoDistinguisher(
            f"{t1} and {t2} are not {LOGIC_KIND[chi]} bisimilar, yet no formula of L_{chi} separates them"
        )
    phi = builder.separate(level, t1, t2)
    checker = Checker(pts)
    if minimize:
        phi = _minimize(checker, phi, t1, t2)
    if not _separates(checker, phi, t1, t2) or chi not in fragment_of(phi):
        raise AssertionError(f"constructed formula {phi} does not separate")  # pragma: no cover
    return phi


__all__ = [
    "Checker", "FragmentMismatch", "LOGIC_KIND", "NoDistinguisher", "check_fragment", "distinguishing_formula",
    "fragment_of", "in_hull", "logically_equivalent", "sat_dist", "sat_state",
]
