"""Exact rational LP feasibility over the probability simplex.

Two-phase tableau simplex with Bland's rule on ``Fraction`` entries.
Problems here are tiny (one variable per outgoing transition), so dense
tableaux are fine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

CMPS = (">=", ">", "=", "<=", "<")


@dataclass
class LpProblem:
    """Find ``lam >= 0`` with ``sum(lam) == 1`` and every ``coeffs . lam CMP rhs``."""

    n: int
    constraints: list = field(default_factory=list)

    def add(self, coeffs: Sequence, cmp: str, rhs) -> "LpProblem":
        if cmp not in CMPS:
            raise ValueError(f"unknown comparator {cmp!r}")
        if len(coeffs) != self.n:
            raise ValueError("coefficient vector has wrong length")
        self.constraints.append((tuple(Fraction(c) for c in coeffs), cmp, Fraction(rhs)))
        return self


def _pivot(tab, basis, row, col):
    piv = tab[row][col]
    tab[row] = [v / piv for v in tab[row]]
    for r in range(len(tab)):
        if r != row and tab[r][col]:
            f = tab[r][col]
            src = tab[row]
            tab[r] = [a - f * b for a, b in zip(tab[r], src)]
    basis[row] = col


def _optimize(tab, basis, ncols, allowed):
    """Maximize the objective stored (negated) in the last row; Bland's rule."""
    obj = tab[-1]
    while True:
        col = next((j for j in range(ncols) if allowed[j] and obj[j] < 0), None)
        if col is None:
            return True
        best = None
        for r in range(len(tab) - 1):
            a = tab[r][col]
            if a > 0:
                ratio = tab[r][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[r] < basis[best[1]]):
                    best = (ratio, r)
        if best is None:
            return False  # unbounded
        _pivot(tab, basis, best[1], col)
        obj = tab[-1]


def simplex_max(c: Sequence, rows: Sequence, b: Sequence) -> Optional[tuple]:
    """Maximize ``c.x`` s.t. ``rows x = b``, ``x >= 0``.

    Returns ``(value, x)`` or ``None`` when infeasible.  Raises on unbounded.
    """
    m, n = len(rows), len(c)
    rows = [[Fraction(v) for v in r] for r in rows]
    b = [Fraction(v) for v in b]
    for i in range(m):
        if b[i] < 0:
            rows[i] = [-v for v in rows[i]]
            b[i] = -b[i]
    ncols = n + m
    tab = [rows[i] + [Fraction(int(i == k)) for k in range(m)] + [b[i]] for i in range(m)]
    basis = [n + i for i in range(m)]
    # phase 1: maximize -sum(artificials)
    obj = [Fraction(0)] * (ncols + 1)
    for i in range(m):
        for j in range(n):
            obj[j] -= tab[i][j]
        obj[-1] -= tab[i][-1]
    tab.append(obj)
    _optimize(tab, basis, ncols, [True] * ncols)
    if tab[-1][-1] != 0:
        return None
    # drive remaining artificials out of the basis
    for r in range(m):
        if basis[r] >= n:
            col = next((j for j in range(n) if tab[r][j] != 0), None)
            if col is not None:
                _pivot(tab, basis, r, col)
    allowed = [j < n for j in range(ncols)]
    obj = [Fraction(0)] * (ncols + 1)
    for j in range(n):
        obj[j] = -Fraction(c[j])
    for r in range(m):
        j = basis[r]
        if j < n and obj[j]:
            f = obj[j]
            obj = [a - f * v for a, v in zip(obj, tab[r])]
    tab[-1] = obj
    if not _optimize(tab, basis, ncols, allowed):
        raise ArithmeticError("unbounded LP")
    x = [Fraction(0)] * n
    for r in range(m):
        if basis[r] < n:
            x[basis[r]] = tab[r][-1]
    return tab[-1][-1], tuple(x)


def lp_feasible(problem: LpProblem) -> Optional[tuple]:
    """Exact feasibility; returns a witness weight vector or ``None``.

    Strict constraints share one slack ``t`` that is maximized (capped at 1);
    the system is feasible iff the optimum is positive.
    """
    n = problem.n
    if n == 0:
        return None
    strict = any(cmp in (">", "<") for _, cmp, _ in problem.constraints)
    slacks = [cmp for _, cmp, _ in problem.constraints if cmp != "="]
    nvars = n + (1 if strict else 0) + len(slacks) + (1 if strict else 0)
    t_col = n
    rows, b = [], []
    rows.append([Fraction(1)] * n + [Fraction(0)] * (nvars - n))
    b.append(Fraction(1))
    s = n + (1 if strict else 0)
    for coeffs, cmp, rhs in problem.constraints:
        row = list(coeffs) + [Fraction(0)] * (nvars - n)
        if cmp in (">=", ">"):
            row[s] = Fraction(-1)
            s += 1
            if cmp == ">":
                row[t_col] = Fraction(-1)
        elif cmp in ("<=", "<"):
            row[s] = Fraction(1)
            s += 1
            if cmp == "<":
                row[t_col] = Fraction(1)
        rows.append(row)
        b.append(rhs)
    if strict:
        row = [Fraction(0)] * nvars
        row[t_col] = Fraction(1)
        row[s] = Fraction(1)
        rows.append(row)
        b.append(Fraction(1))
    c = [Fraction(0)] * nvars
    if strict:
        c[t_col] = Fraction(1)
    res = simplex_max(c, rows, b)
    if res is None:
        return None
    value, x = res
    if strict and value <= 0:
        return None
    return x[:n]


def check_witness(problem: LpProblem, lam) -> bool:
    if len(lam) != problem.n or any(v < 0 for v in lam) or sum(lam) != 1:
        return False
    for coeffs, cmp, rhs in problem.constraints:
        lhs = sum((c * v for c, v in zip(coeffs, lam)), Fraction(0))
        ok = {">=": lhs >= rhs, ">": lhs > rhs, "=": lhs == rhs, "<=": lhs <= rhs, "<": lhs < rhs}[cmp]
        if not ok:
            return False
    return True
