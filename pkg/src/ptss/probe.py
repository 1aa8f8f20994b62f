"""Empirical congruence probing.

Pairs of closed terms that are equivalent under a bisimulation are placed in
one-hole contexts; a context that separates them witnesses a congruence
failure. Nothing here proves congruence, it only searches for
counterexamples.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .bisim import KINDS, equivalent
from .derive import DEFAULT_FUEL, is_complete, stable_model, build_pts
from .lang import SpecAst
from .terms import App, Dirac, PtssError, Sort, is_closed, oplus

HOLE = "[]"


@dataclass(frozen=True)
class Context:
    """A one-hole state context, ``fill(t)`` plugs ``t`` into the hole."""

    label: str
    fill: object = field(compare=False, repr=False)

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class Violation:
    context: str
    left: str
    right: str
    filled_left: str
    filled_right: str


@dataclass
class ProbeReport:
    kind: str
    trials: int
    violations: list = field(default_factory=list)
    inconclusive: int = 0
    pairs_tested: int = 0

    @property
    def found(self) -> bool:
        return bool(self.violations)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "trials": self.trials,
            "pairs_tested": self.pairs_tested,
            "inconclusive": self.inconclusive,
            "violations": [v.__dict__ for v in self.violations],
        }

    def to_text(self) -> str:
        if not self.violations:
            return f"no violations in {self.trials} trials ({self.inconclusive} inconclusive)"
        lines = [f"{len(self.violations)} violation(s) of {self.kind} congruence in {self.trials} trials"]
        for v in self.violations:
            lines.append(f"  context {v.context} on {v.left} / {v.right}: {v.filled_left} vs {v.filled_right}")
        return "\n".join(lines)


def _state_ops(spec: SpecAst):
    """Operators with only state-sorted arguments, sorted by name."""
    sig = spec.signature
    return sorted(
        (op, tuple(Sort(s) for s in sorts)) for op, sorts in sig.ops.items()
        if all(Sort(s) is Sort.STATE for s in sorts)
    )


def random_term(rng: random.Random, spec: SpecAst, depth: int = 2):
    """A random closed state term over the signature of ``spec``."""
    ops = _state_ops(spec)
    consts = [op for op, sorts in ops if not sorts]
    if depth <= 0 or not spec.actions:
        if consts:
            return App(rng.choice(consts))
        depth = 1
    roll = rng.random()
    if roll < 0.5 and spec.actions:
        a = rng.choice(spec.actions)
        left = random_term(rng, spec, depth - 1)
        if rng.random() < 0.5:
            return App(a + ".", (Dirac(left),))
        right = random_term(rng, spec, depth - 1)
        p = Fraction(rng.randint(1, 7), 8)
        return App(a + ".", (oplus(p, Dirac(left), Dirac(right)),))
    compound = [(op, sorts) for op, sorts in ops if sorts]
    if compound and roll < 0.8:
        op, sorts = rng.choice(compound)
        return App(op, tuple(random_term(rng, spec, depth - 1) for _ in sorts))
    return App(rng.choice(consts)) if consts else random_term(rng, spec, depth)


def contexts(spec: SpecAst, rng: random.Random, fillers) -> list:
    """Depth-one contexts: every operator position plus two prefix shapes."""
    out = []
    sig = spec.signature
    for op, sorts in sorted(sig.ops.items()):
        sorts = tuple(Sort(s) for s in sorts)
        for i, s in enumerate(sorts):
            others = [rng.choice(fillers) for _ in sorts]

            def fill(t, op=op, i=i, sorts=sorts, others=others):
                args = [Dirac(o) if s is Sort.DIST else o for o, s in zip(others, sorts)]
                args[i] = Dirac(t) if sorts[i] is Sort.DIST else t
                return App(op, tuple(args))

            shown = [HOLE if j == i else str(o) for j, o in enumerate(others)]
            label = f"{shown[0]} {op} {shown[1]}" if len(shown) == 2 and not op.isalnum() else f"{op}({', '.join(shown)})"
            out.append(Context(label, fill))
    for a in spec.actions:
        filler = rng.choice(fillers)
        p = Fraction(rng.randint(1, 7), 8)
        out.append(Context(f"{a}.dirac({HOLE})", lambda t, a=a: App(a + ".", (Dirac(t),))))
        out.append(Context(
            f"{a}.(dirac({HOLE}) (+) {p} dirac({filler}))",
            lambda t, a=a, p=p, f=filler: App(a + ".", (oplus(p, Dirac(t), Dirac(f)),)),
        ))
    return out


class _Equiv:
    """Caches derivations; answers None when the model is incomplete or too large."""

    def __init__(self, spec: SpecAst, kind: str, fuel: int):
        self.spec, self.kind, self.fuel = spec, kind, fuel
        self._memo: dict = {}

    def __call__(self, t, u):
        if (t, u) not in self._memo:
            self._memo[(t, u)] = self._decide(t, u)
        return self._memo[(t, u)]

    def _decide(self, t, u):
        try:
            table = stable_model(self.spec, [t, u], self.fuel)
        except PtssError:
            return None
        if not is_complete(table) or table.budget_exhausted:
            return None
        return equivalent(build_pts(table), t, u, self.kind)


def congruence_probe(spec: SpecAst, kind: str, trials: int = 200, seed: int = 0,
                     fuel: int = DEFAULT_FUEL, pool_size: int = 12, stop_at_first: bool = True,
                     max_rounds: int = 20) -> ProbeReport:
    """Search for a context that separates two ``kind``-equivalent closed terms.

    One trial is one (pair, context) comparison. Named terms are tried first,
    then random terms; the whole run is a function of ``seed``.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown equivalence {kind!r}")
    rng = random.Random(seed)
    named = [(n, t) for n, t in spec.defs.items() if is_closed(t) and not isinstance(t, (Dirac,))]
    pool: list = []
    seen: set = set()
    for label, t in named:
        if t not in seen:
            seen.add(t)
            pool.append((label, t))
    while len(pool) < len(named) + pool_size:
        t = random_term(rng, spec)
        if t not in seen:
            seen.add(t)
            pool.append((str(t), t))
        elif len(seen) > 10 * (pool_size + len(named)):  # pragma: no cover
            break
    pairs = list(combinations(range(len(pool)), 2))
    head = [p for p in pairs if p[1] < len(named)]
    tail = [p for p in pairs if p[1] >= len(named)]
    rng.shuffle(tail)
    fillers = [t for _, t in pool]

    report = ProbeReport(kind, 0)
    equiv = _Equiv(spec, kind, fuel)
    found = []
    for i, j in head + tail:
        if report.trials >= trials:
            break
        if equiv(pool[i][1], pool[j][1]) is True:
            found.append((pool[i], pool[j]))
            report.pairs_tested += 1
            if _run(report, equiv, contexts(spec, rng, fillers), pool[i], pool[j], trials, stop_at_first):
                return report
    # further rounds reuse the equivalent pairs with freshly drawn contexts
    for _ in range(max_rounds):
        if not found or report.trials >= trials:
            break
        for left, right in found:
            if _run(report, equiv, contexts(spec, rng, fillers), left, right, trials, stop_at_first):
                return report
    return report


def _run(report, equiv, ctxs, left, right, trials, stop_at_first) -> bool:
    (ln, t), (rn, u) = left, right
    for ctx in ctxs:
        if report.trials >= trials:
            return False
        report.trials += 1
        ct, cu = ctx.fill(t), ctx.fill(u)
        verdict = equiv(ct, cu)
        if verdict is None:
            report.inconclusive += 1
        elif not verdict:
            report.violations.append(Violation(str(ctx), ln, rn, str(ct), str(cu)))
            if stop_at_first:
                return True
    return False


__all__ = ["Context", "ProbeReport", "Violation", "congruence_probe", "contexts", "random_term"]
