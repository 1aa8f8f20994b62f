"""Two-sorted term algebra over a probabilistically lifted signature.

State terms denote processes; distribution terms denote finite-support
probability distributions over closed state terms.  All probabilities are
``fractions.Fraction``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union


class Sort(str, enum.Enum):
    STATE = "S"
    DIST = "D"


class PtssError(Exception):
    pass


class UnknownOperator(PtssError):
    pass


class ArityMismatch(PtssError):
    pass


class SortError(PtssError):
    pass


class SortMismatch(SortError):
    pass


class OpenTerm(PtssError):
    pass


class BadWeights(PtssError):
    pass


INFIX_OPS = ("+", "||", "|", ";", "*")


def is_prefix(op: str) -> bool:
    return op.endswith(".") and len(op) > 1


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class SVar:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class DVar:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Mix:
    """Symbolic convex combination of a family of premise targets.

    Only occurs inside rule schemas; the weights are left existential.
    """

    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App:
    op: str
    args: tuple = ()

    def __str__(self):
        if is_prefix(self.op):
            arg = self.args[0]
            if isinstance(arg, Dirac) and isinstance(arg.arg, App) and not arg.arg.args:
                return self.op + arg.arg.op
            return self.op + _atomic_dist(arg)
        if self.op in INFIX_OPS and len(self.args) == 2:
            left, right = self.args
            return f"{_infix_arg(left, False)} {self.op} {_infix_arg(right, True)}"
        if not self.args:
            return self.op
        return f"{self.op}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Dirac:
    arg: object

    def __str__(self):
        return f"dirac({self.arg})"


@dataclass(frozen=True)
class Sum:
    """Finite convex sum; ``parts`` is a tuple of (weight, dist term)."""

    parts: tuple

    def __post_init__(self):
        weights = [w for w, _ in self.parts]
        if not weights or any(not (0 < w <= 1) for w in weights) or sum(weights) != 1:
            raise BadWeights(f"weights {weights} must lie in (0,1] and sum to 1")

    def __str__(self):
        (w, head), rest = self.parts[0], self.parts[1:]
        if not rest:
            return f"({head})"
        tail = rest[0][1] if len(rest) == 1 else Sum(tuple((v / (1 - w), t) for v, t in rest))
        left = f"({head})" if isinstance(head, Sum) else str(head)
        return f"{left} (+) {w} {tail}"


@dataclass(frozen=True)
class Lift:
    """Probabilistic lifting of a state operator; ``sorts`` are the base op's argument sorts."""

    op: str
    args: tuple
    sorts: tuple = field(default=())

    def __str__(self):
        return f"${self.op}({', '.join(map(str, self.args))})"


StateTerm = Union[SVar, App]
DistTerm = Union[DVar, Mix, Dirac, Sum, Lift]
Term = Union[StateTerm, DistTerm]


def _atomic_dist(t) -> str:
    return f"({t})" if isinstance(t, Sum) else str(t)


def _infix_arg(t, right: bool) -> str:
    if isinstance(t, App) and t.op in INFIX_OPS and len(t.args) == 2 and right:
        return f"({t})"
    return str(t)


def oplus(p, left, right) -> Sum:
    """``left (+)p right``: weight ``p`` on the left operand."""
    p = Fraction(p)
    return Sum(((p, left), (1 - p, right)))


def sort_of(term) -> Sort:
    if isinstance(term, (SVar, App)):
        return Sort.STATE
    if isinstance(term, (DVar, Mix, Dirac, Sum, Lift)):
        return Sort.DIST
    raise TypeError(f"not a term: {term!r}")


def subterms(term):
    yield term
    if isinstance(term, (App, Lift)):
        for a in term.args:
            yield from subterms(a)
    elif isinstance(term, Dirac):
        yield from subterms(term.arg)
    elif isinstance(term, Sum):
        for _, t in term.parts:
            yield from subterms(t)


def variables(term) -> set:
    """State and distribution variables (and combination names) of ``term``."""
    return {t for t in subterms(term) if isinstance(t, (SVar, DVar, Mix))}


def var_names(term) -> set:
    return {v.name for v in variables(term)}


def is_closed(term) -> bool:
    return not variables(term)


# ---------------------------------------------------------------- signature


@dataclass(frozen=True)
class Signature:
    """State operators with argument sorts.  Prefix operators ``a.`` exist per action."""

    ops: Mapping[str, tuple]
    actions: tuple = ()

    def arity(self, op: str) -> tuple:
        if op in self.ops:
            return tuple(self.ops[op])
        if is_prefix(op) and op[:-1] in self.actions:
            return (Sort.DIST,)
        raise UnknownOperator(op)

    def has(self, op: str) -> bool:
        try:
            self.arity(op)
            return True
        except UnknownOperator:
            return False

    def all_ops(self) -> dict:
        out = {f"{a}.": (Sort.DIST,) for a in self.actions}
        out.update({k: tuple(v) for k, v in self.ops.items()})
        return out


def check_sort(term, sig: Signature) -> Sort:
    """Sort of ``term``; raises on unknown operators, arity or sort clashes."""
    if isinstance(term, SVar):
        return Sort.STATE
    if isinstance(term, (DVar, Mix)):
        return Sort.DIST
    if isinstance(term, App):
        sorts = sig.arity(term.op)
        _check_args(term.op, term.args, sorts, sig)
        return Sort.STATE
    if isinstance(term, Lift):
        sorts = sig.arity(term.op)
        if len(sorts) != len(term.args):
            raise ArityMismatch(f"${term.op} expects {len(sorts)} arguments, got {len(term.args)}")
        if term.sorts and tuple(term.sorts) != tuple(sorts):
            raise SortMismatch(f"${term.op} carries sorts {term.sorts}, signature says {sorts}")
        for a in term.args:
            if check_sort(a, sig) is not Sort.DIST:
                raise SortMismatch(f"argument {a} of ${term.op} must be a distribution term")
        return Sort.DIST
    if isinstance(term, Dirac):
        if check_sort(term.arg, sig) is not Sort.STATE:
            raise SortMismatch(f"dirac expects a state term, got {term.arg}")
        return Sort.DIST
    if isinstance(term, Sum):
        for _, t in term.parts:
            if check_sort(t, sig) is not Sort.DIST:
                raise SortMismatch(f"convex sum operand {t} must be a distribution term")
        return Sort.DIST
    raise TypeError(f"not a term: {term!r}")


def _check_args(op, args, sorts, sig):
    if len(sorts) != len(args):
        raise ArityMismatch(f"{op} expects {len(sorts)} arguments, got {len(args)}")
    for a, s in zip(args, sorts):
        got = check_sort(a, sig)
        if got is not Sort(s):
            raise SortMismatch(f"argument {a} of {op} has sort {got.value}, expected {Sort(s).value}")


def lift(op: str, args: Iterable, sig: Signature) -> Lift:
    return Lift(op, tuple(args), tuple(Sort(s) for s in sig.arity(op)))


# ---------------------------------------------------------------- substitution


def apply_subst(subst: Mapping, term):
    """Homomorphic replacement; keys are variable names or variable objects."""
    if not subst:
        return term
    if isinstance(term, (SVar, DVar, Mix)):
        if term in subst:
            return subst[term]
        return subst.get(term.name, term)
    if isinstance(term, App):
        return App(term.op, tuple(apply_subst(subst, a) for a in term.args))
    if isinstance(term, Lift):
        return Lift(term.op, tuple(apply_subst(subst, a) for a in term.args), term.sorts)
    if isinstance(term, Dirac):
        return Dirac(apply_subst(subst, term.arg))
    if isinstance(term, Sum):
        return Sum(tuple((w, apply_subst(subst, t)) for w, t in term.parts))
    raise TypeError(f"not a term: {term!r}")


def compose(outer: Mapping, inner: Mapping) -> dict:
    """Substitution equal to applying ``inner`` then ``outer``."""
    out = {k: apply_subst(outer, v) for k, v in inner.items()}
    for k, v in outer.items():
        out.setdefault(k, v)
    return out


# ---------------------------------------------------------------- distributions


def term_key(t):
    return str(t)


class FiniteDistribution(Mapping):
    """Finite-support probability distribution with exact rational masses.

    Stored canonically: support sorted by ``str`` of the element, zero masses
    dropped.  Elements may be closed state terms or any hashable state ids.
    """

    __slots__ = ("_items", "_map", "_hash")

    def __init__(self, masses, check: bool = True):
        pairs = masses.items() if isinstance(masses, Mapping) else masses
        acc: dict = {}
        for k, p in pairs:
            p = Fraction(p)
            if p < 0:
                raise BadWeights(f"negative mass {p} on {k}")
            acc[k] = acc.get(k, Fraction(0)) + p
        items = tuple(sorted(((k, p) for k, p in acc.items() if p), key=lambda kp: term_key(kp[0])))
        if check and sum(p for _, p in items) != 1:
            raise BadWeights(f"total mass {sum(p for _, p in items)} != 1")
        self._items = items
        self._map = dict(items)
        self._hash = hash(items)

    @classmethod
    def dirac(cls, t):
        return cls({t: Fraction(1)})

    def __getitem__(self, t):
        return self._map.get(t, Fraction(0))

    def __contains__(self, t):
        return t in self._map

    def __iter__(self):
        return (k for k, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __eq__(self, other):
        if isinstance(other, FiniteDistribution):
            return self._items == other._items
        return NotImplemented

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "{" + ", ".join(f"{k}: {p}" for k, p in self._items) + "}"

    __str__ = __repr__

    def items(self):
        return self._items

    @property
    def support(self) -> tuple:
        return tuple(k for k, _ in self._items)

    def measure(self, states) -> Fraction:
        return measure(self, states)


def measure(dist: FiniteDistribution, states) -> Fraction:
    """Total mass of the support elements in ``states``."""
    return sum((p for k, p in dist.items() if k in states), Fraction(0))


def convex_combine(weights, dists) -> FiniteDistribution:
    weights = [Fraction(w) for w in weights]
    dists = list(dists)
    if len(weights) != len(dists) or not weights:
        raise BadWeights("weights and distributions must be non-empty and of equal length")
    if any(w <= 0 for w in weights) or sum(weights) != 1:
        raise BadWeights(f"weights {weights} must be positive and sum to 1")
    acc: dict = {}
    for w, d in zip(weights, dists):
        for k, p in d.items():
            acc[k] = acc.get(k, Fraction(0)) + w * p
    return FiniteDistribution(acc)


def eval_dist(theta) -> FiniteDistribution:
    """Interpret a closed distribution term."""
    if isinstance(theta, (DVar, Mix)):
        raise OpenTerm(f"variable {theta} in distribution term")
    if isinstance(theta, Dirac):
        if not is_closed(theta.arg):
            raise OpenTerm(f"open state term {theta.arg}")
        return FiniteDistribution.dirac(theta.arg)
    if isinstance(theta, Sum):
        return convex_combine([w for w, _ in theta.parts], [eval_dist(t) for _, t in theta.parts])
    if isinstance(theta, Lift):
        if not theta.sorts or len(theta.sorts) != len(theta.args):
            raise SortError(f"lifted operator ${theta.op} lacks argument sorts")
        choices = []
        for arg, s in zip(theta.args, theta.sorts):
            if Sort(s) is Sort.STATE:
                choices.append(eval_dist(arg).items())
            else:
                if not is_closed(arg):
                    raise OpenTerm(f"open distribution argument {arg}")
                choices.append(((arg, Fraction(1)),))
        acc = {}
        for combo in itertools.product(*choices):
            p = Fraction(1)
            for _, q in combo:
                p *= q
            t = App(theta.op, tuple(x for x, _ in combo))
            acc[t] = acc.get(t, Fraction(0)) + p
        return FiniteDistribution(acc)
    raise TypeError(f"not a distribution term: {theta!r}")


def distributivity_check(op: str, position: int, others, thetas, weights, sig: Signature) -> bool:
    """Does ``$op`` distribute over a convex sum placed at ``position``?

    ``others`` gives the remaining arguments (``None`` at ``position``).
    """
    sorts = tuple(Sort(s) for s in sig.arity(op))
    args = list(others)
    mixed = Sum(tuple(zip(map(Fraction, weights), thetas))) if len(thetas) > 1 else None
    args[position] = mixed if mixed is not None else thetas[0]
    lhs = eval_dist(Lift(op, tuple(args), sorts))
    parts = []
    for w, th in zip(weights, thetas):
        a = list(args)
        a[position] = th
        parts.append((Fraction(w), Lift(op, tuple(a), sorts)))
    rhs = eval_dist(Sum(tuple(parts))) if len(parts) > 1 else eval_dist(parts[0][1])
    return lhs == rhs
