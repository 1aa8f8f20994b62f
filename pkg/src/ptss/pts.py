"""Finite probabilistic transition systems and their plain-text exchange format.

Text format, one transition per line::

    a.0 + b.0 --a--> {0: 1}
    0

A line without ``--`` declares a (deadlocked) state.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .terms import FiniteDistribution, PtssError, term_key


class UnknownState(PtssError):
    pass


@dataclass(frozen=True)
class Pts:
    states: tuple
    steps: tuple  # (state, action, FiniteDistribution)
    _out: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        states = list(dict.fromkeys(self.states))
        seen = set(states)
        steps = []
        for s, a, d in dict.fromkeys(self.steps):
            steps.append((s, a, d))
            for x in (s, *d.support):
                if x not in seen:
                    seen.add(x)
                    states.append(x)
        out: dict = {s: {} for s in states}
        for s, a, d in steps:
            out[s].setdefault(a, []).append(d)
        object.__setattr__(self, "states", tuple(states))
        object.__setattr__(self, "steps", tuple(steps))
        object.__setattr__(self, "_out", out)

    def out(self, s, a=None):
        if s not in self._out:
            raise UnknownState(f"{s} is not a state of this system")
        if a is None:
            return [(b, d) for b, ds in self._out[s].items() for d in ds]
        return list(self._out[s].get(a, ()))

    def enabled(self, s) -> set:
        return set(self._out[s])

    @property
    def actions(self) -> tuple:
        return tuple(sorted({a for _, a, _ in self.steps}))

    def __contains__(self, s):
        return s in self._out

    def to_text(self) -> str:
        lines = []
        for s in sorted(self.states, key=term_key):
            outs = self.out(s)
            if not outs:
                lines.append(str(s))
            for a, d in sorted(outs, key=lambda ad: (ad[0], repr(ad[1]))):
                lines.append(f"{s} --{a}--> {d!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ObliteratedLts:
    states: tuple
    edges: frozenset  # (state, action, state)

    def succ(self, s, a=None):
        return {(b, t) for (x, b, t) in self.edges if x == s and (a is None or b == a)}


def build_oblit_lts(pts: Pts) -> ObliteratedLts:
    edges = frozenset((s, a, t) for s, a, d in pts.steps for t in d.support)
    return ObliteratedLts(pts.states, edges)


_LINE = re.compile(r"^(?P<src>.*?)\s+--(?P<act>\S+?)-->\s+(?P<dist>\{.*\})\s*$")


def _split_top(text: str):
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        parts.append("".join(cur))
    return parts


def parse_pts(text: str, state=lambda s: s) -> Pts:
    """Read the text format; ``state`` converts state strings (identity by default)."""
    states, steps = [], []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _LINE.match(line)
        if not m:
            if "-->" in line:
                raise PtssError(f"line {n}: malformed transition {line!r}")
            states.append(state(line))
            continue
        src = state(m.group("src").strip())
        masses = {}
        for item in _split_top(m.group("dist").strip()[1:-1]):
            key, _, p = item.rpartition(":")
            if not key:
                raise PtssError(f"line {n}: malformed distribution entry {item!r}")
            masses[state(key.strip())] = Fraction(p.strip())
        states.append(src)
        steps.append((src, m.group("act"), FiniteDistribution(masses)))
    return Pts(tuple(states), tuple(steps))
