"""Two-level modal formulas: state formulas and distribution formulas.

Surface syntax::

    phi ::= tt | ~phi | phi /\\ phi | <a>psi | <a>_c psi | (phi)
    psi ::= [phi]_p | psi /\\ psi | (psi)

``<a>phi`` abbreviates ``<a>[phi]_0``.
``/\\`` is conjunction on the state layer and meet on the distribution layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .lexer import SpecSyntaxError, TokenStream, tokenize


class LayerError(SpecSyntaxError):
    pass


@dataclass(frozen=True)
class Top:
    def __str__(self):
        return "tt"


@dataclass(frozen=True)
class Not:
    arg: object

    def __str__(self):
        return f"~{_atom(self.arg)}"


@dataclass(frozen=True)
class And:
    args: tuple

    def __str__(self):
        if not self.args:
            return "tt"
        return " /\\ ".join(_atom(a) for a in self.args)


@dataclass(frozen=True)
class Dia:
    action: str
    body: object
    combined: bool = False

    def __str__(self):
        tag = "_c" if self.combined else ""
        if self.body == Prob(Top(), Fraction(0)):
            return f"<{self.action}>{tag}{' ' if tag else ''}tt"
        return f"<{self.action}>{tag}{_datom(self.body)}"


@dataclass(frozen=True)
class Prob:
    arg: object
    bound: Fraction

    def __str__(self):
        return f"[{self.arg}]_{self.bound}"


@dataclass(frozen=True)
class Meet:
    args: tuple

    def __str__(self):
        return " /\\ ".join(_datom(a) for a in self.args)


STATE_FORMULAS = (Top, Not, And, Dia)
DIST_FORMULAS = (Prob, Meet)


def _atom(phi) -> str:
    return f"({phi})" if isinstance(phi, And) and len(phi.args) > 1 else str(phi)


def _datom(psi) -> str:
    return f"({psi})" if isinstance(psi, Meet) else str(psi)


def conj(*args):
    flat = []
    for a in args:
        flat.extend(a.args if isinstance(a, And) else (a,))
    flat = [a for a in flat if not isinstance(a, Top)]
    if not flat:
        return Top()
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def meet(*args):
    flat = []
    for a in args:
        flat.extend(a.args if isinstance(a, Meet) else (a,))
    return flat[0] if len(flat) == 1 else Meet(tuple(flat))


# ---------------------------------------------------------------- parser


def parse_formula(text: str):
    ts = TokenStream(tokenize(text))
    phi = _state(ts)
    if not ts.at(kind="eof"):
        ts.error(f"unexpected {ts.cur.text!r} after formula")
    return phi


def _rational(ts) -> Fraction:
    tok = ts.expect(kind="num")
    if ts.accept("/"):
        den = ts.expect(kind="num")
        val = Fraction(int(tok.text), int(den.text))
    else:
        val = Fraction(tok.text)
    return val


def _state(ts):
    parts = [_state_unary(ts)]
    while ts.accept(kind="wedge"):
        parts.append(_state_unary(ts))
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def _state_unary(ts):
    tok = ts.cur
    if ts.accept("tt"):
        return Top()
    if ts.accept("~"):
        return Not(_state_unary(ts))
    if ts.at("<"):
        ts.next()
        act = ts.expect(kind="ident").text
        ts.expect(">")
        combined = False
        if ts.at("_"):
            ts.next()
            ts.expect("c")
            combined = True
        if ts.at("[") or (ts.at("(") and _looks_dist(ts)):
            return Dia(act, _dist_unary(ts), combined)
        # <a>phi abbreviates <a>[phi]_0
        return Dia(act, Prob(_state_unary(ts), Fraction(0)), combined)
    if ts.at("("):
        ts.next()
        if _looks_dist(ts):
            raise LayerError("distribution formula where a state formula is expected", tok.line, tok.col)
        phi = _state(ts)
        ts.expect(")")
        return phi
    if ts.at("["):
        raise LayerError("[phi]_p is a distribution formula; state formula expected", tok.line, tok.col)
    ts.error(f"expected a state formula, found {tok.text or tok.kind!r}")


def _looks_dist(ts) -> bool:
    j = ts.i
    while ts.toks[j].text == "(":
        j += 1
    return ts.toks[j].text == "["


def _dist(ts):
    parts = [_dist_unary(ts)]
    while ts.accept(kind="wedge"):
        parts.append(_dist_unary(ts))
    return parts[0] if len(parts) == 1 else Meet(tuple(parts))


def _dist_unary(ts):
    tok = ts.cur
    if ts.accept("["):
        phi = _state(ts)
        ts.expect("]")
        ts.expect("_")
        p = _rational(ts)
        if not 0 <= p <= 1:
            raise SpecSyntaxError(f"bound {p} outside [0,1]", tok.line, tok.col)
        return Prob(phi, p)
    if ts.accept("("):
        psi = _dist(ts)
        ts.expect(")")
        return psi
    raise LayerError(f"distribution formula expected, found {tok.text or tok.kind!r}", tok.line, tok.col)


def fragment_of(phi) -> set:
    """Logics the formula belongs to: subset of {'b','c','a','o'}."""
    has_dia = has_comb = has_meet = has_pos = False

    def walk(f):
        nonlocal has_dia, has_comb, has_meet, has_pos
        if isinstance(f, Dia):
            if f.combined:
                has_comb = True
            else:
                has_dia = True
            walk(f.body)
        elif isinstance(f, (And, Meet)):
            if isinstance(f, Meet):
                has_meet = True
            for a in f.args:
                walk(a)
        elif isinstance(f, Not):
            walk(f.arg)
        elif isinstance(f, Prob):
            if f.bound > 0:
                has_pos = True
            walk(f.arg)

    walk(phi)
    out = {"b"}
    if not has_dia:
        out.add("c")
    if not has_comb and not has_pos:
        out.add("a")
        if not has_meet:
            out.add("o")
    return out
