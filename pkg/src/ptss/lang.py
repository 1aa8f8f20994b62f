"""The ``.ptss`` specification language: rule schemas, parser, renderer.

Example::

    spec pa
    actions a, b, c
    op 0 : -> S
    op + : S S -> S
    rule prefix[act]: => act.mu -act-> mu
    rule plus_l[act]: x -act-> mu => x + y -act-> mu
    rule plus_r[act]: y -act-> mu => x + y -act-> mu
    def t1 = a.dirac(b.0) + a.dirac(c.0)
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .formulas import parse_formula  # noqa: F401  (re-exported)
from .lexer import SpecSyntaxError, TokenStream, tokenize
from .terms import (
    INFIX_OPS, App, ArityMismatch, BadWeights, DVar, Dirac, Lift, Mix, PtssError, Signature,
    Sort, SortError, SortMismatch, Sum, SVar, UnknownOperator, is_closed, is_prefix, var_names,
)

KEYWORDS = {"spec", "actions", "op", "rule", "def", "forall", "in", "combine", "as", "from", "dirac"}
COMPARATORS = (">=", ">", "<=", "<")


class UnresolvedName(SpecSyntaxError):
    pass


class RebindingError(SpecSyntaxError):
    pass


class SpecSortError(SpecSyntaxError, SortError):
    pass


# ---------------------------------------------------------------- rule schemas


@dataclass(frozen=True)
class Transition:
    source: object
    action: str
    target: object

    def __str__(self):
        return f"{self.source} -{self.action}-> {self.target}"


@dataclass(frozen=True)
class Negative:
    source: object
    action: str

    def __str__(self):
        return f"{self.source} -/{self.action}->"


@dataclass(frozen=True)
class Measure:
    """``term(set) cmp bound``; the set is explicit ``states`` or a set variable."""

    term: object
    states: Optional[tuple]
    setvar: Optional[str]
    cmp: str
    bound: Fraction

    def __str__(self):
        t = f"({self.term})" if isinstance(self.term, Sum) else str(self.term)
        s = self.setvar if self.setvar is not None else "{" + ", ".join(map(str, self.states)) + "}"
        return f"{t}({s}) {self.cmp} {self.bound}"


@dataclass(frozen=True)
class ForAll:
    """Per-element premise ``premise`` for every ``var`` in set variable ``setvar``."""

    var: str
    setvar: str
    premise: object

    def __str__(self):
        return f"forall {self.var} in {self.setvar}: {self.premise}"


@dataclass(frozen=True)
class Combine:
    """Family ``family`` of a-targets of ``link``'s source, combined as ``name``."""

    family: str
    name: str
    link: Optional[str] = None

    def __str__(self):
        tail = f" from {self.link}" if self.link else ""
        return f"combine {self.family} as {self.name}{tail}"


@dataclass(frozen=True)
class Rule:
    name: str
    premises: tuple
    conclusion: Transition
    action_var: Optional[str] = None

    def positives(self):
        return [p for p in self.premises if isinstance(p, Transition)]

    def negatives(self):
        return [p for p in self.premises if isinstance(p, Negative)]

    def measures(self):
        return [p for p in self.premises if isinstance(p, Measure)]

    def foralls(self):
        return [p for p in self.premises if isinstance(p, ForAll)]

    def combines(self):
        return [p for p in self.premises if isinstance(p, Combine)]

    def instantiate_action(self, action: str) -> "Rule":
        if self.action_var is None:
            return self
        v = self.action_var
        return Rule(
            f"{self.name}[{action}]",
            tuple(_rename_premise(p, v, action) for p in self.premises),
            _rename_premise(self.conclusion, v, action),
            None,
        )

    def __str__(self):
        head = f"rule {self.name}" + (f"[{self.action_var}]" if self.action_var else "") + ":"
        if not self.premises:
            return f"{head} => {self.conclusion}"
        body = ",\n  ".join(map(str, self.premises))
        return f"{head}\n  {body}\n  => {self.conclusion}"


def _rename_term(t, v, a):
    if isinstance(t, App):
        op = f"{a}." if t.op == f"{v}." else t.op
        return App(op, tuple(_rename_term(x, v, a) for x in t.args))
    if isinstance(t, Lift):
        op = f"{a}." if t.op == f"{v}." else t.op
        return Lift(op, tuple(_rename_term(x, v, a) for x in t.args), t.sorts)
    if isinstance(t, Dirac):
        return Dirac(_rename_term(t.arg, v, a))
    if isinstance(t, Sum):
        return Sum(tuple((w, _rename_term(x, v, a)) for w, x in t.parts))
    return t


def _rename_premise(p, v, a):
    act = lambda x: a if x == v else x  # noqa: E731
    if isinstance(p, Transition):
        return Transition(_rename_term(p.source, v, a), act(p.action), _rename_term(p.target, v, a))
    if isinstance(p, Negative):
        return Negative(_rename_term(p.source, v, a), act(p.action))
    if isinstance(p, Measure):
        states = None if p.states is None else tuple(_rename_term(s, v, a) for s in p.states)
        return replace(p, term=_rename_term(p.term, v, a), states=states)
    if isinstance(p, ForAll):
        return replace(p, premise=_rename_premise(p.premise, v, a))
    return p


@dataclass
class SpecAst:
    name: str
    actions: tuple
    ops: dict
    rules: tuple = ()
    defs: dict = field(default_factory=dict)

    @property
    def signature(self) -> Signature:
        return Signature(self.ops, self.actions)

    def expanded_rules(self) -> list:
        out = []
        for r in self.rules:
            if r.action_var is None:
                out.append(r)
            else:
                out.extend(r.instantiate_action(a) for a in self.actions)
        return out

    def term(self, text_or_name):
        if isinstance(text_or_name, str):
            if text_or_name in self.defs:
                return self.defs[text_or_name]
            return parse_term(text_or_name, self)
        return text_or_name

    def with_rules(self, extra) -> "SpecAst":
        return replace(self, rules=tuple(self.rules) + tuple(extra))

    def __eq__(self, other):
        if not isinstance(other, SpecAst):
            return NotImplemented
        return (
            self.name == other.name
            and tuple(self.actions) == tuple(other.actions)
            and {k: tuple(v) for k, v in self.ops.items()} == {k: tuple(v) for k, v in other.ops.items()}
            and tuple(self.rules) == tuple(other.rules)
            and list(self.defs.items()) == list(other.defs.items())
        )


# ---------------------------------------------------------------- raw expressions


@dataclass
class _Ctx:
    sig: Signature
    defs: dict
    vars: dict = field(default_factory=dict)
    mixes: set = field(default_factory=set)
    action_var: Optional[str] = None


class _Parser:
    def __init__(self, ts: TokenStream, sig_ops: dict, actions: tuple, defs: dict, action_var=None):
        self.ts = ts
        self.ops = sig_ops
        self.actions = actions
        self.defs = defs
        self.action_var = action_var

    def _is_action(self, name):
        return name in self.actions or name == self.action_var

    def expr(self):
        left = self.infix()
        if self.ts.at(kind="oplus"):
            tok = self.ts.next()
            p = rational(self.ts)
            right = self.expr()
            return ("oplus", left, p, right, tok)
        return left

    def infix(self):
        left = self.unary()
        while self.ts.cur.text in INFIX_OPS and self.ts.cur.kind == "sym" and self.ts.cur.text in self.ops:
            tok = self.ts.next()
            right = self.unary()
            left = ("call", tok.text, [left, right], tok)
        return left

    def unary(self):
        tok = self.ts.cur
        if tok.kind == "ident" and self._is_action(tok.text) and self.ts.peek().text == ".":
            self.ts.next()
            self.ts.next()
            inner = self.ts.cur
            arg = self.atom()
            bare = inner.kind in ("num", "ident") and arg[0] == "call" and not arg[2]
            return ("prefix", tok.text, arg, tok, bare)
        return self.atom()

    def atom(self):
        ts = self.ts
        tok = ts.cur
        if ts.accept("("):
            e = self.expr()
            ts.expect(")")
            return e
        if tok.text == "dirac" and tok.kind == "ident":
            ts.next()
            ts.expect("(")
            e = self.expr()
            ts.expect(")")
            return ("dirac", e, tok)
        if ts.accept("$"):
            name_tok = ts.next()
            name = name_tok.text
            if name_tok.kind == "ident" and self._is_action(name) and ts.at("."):
                ts.next()
                name += "."
            elif name_tok.kind not in ("ident", "num", "sym"):
                ts.error("operator name expected after $", name_tok)
            ts.expect("(")
            args = self.args()
            return ("lift", name, args, tok)
        if tok.kind in ("ident", "num"):
            ts.next()
            if tok.text in self.ops:
                if ts.at("("):
                    ts.next()
                    return ("call", tok.text, self.args(), tok)
                return ("call", tok.text, [], tok)
            if tok.kind == "num":
                raise UnresolvedName(f"unknown constant {tok.text!r}", tok.line, tok.col)
            if tok.text in KEYWORDS:
                ts.error(f"keyword {tok.text!r} cannot be used as a term", tok)
            return ("id", tok.text, tok)
        ts.error(f"term expected, found {tok.text or tok.kind!r}")

    def args(self):
        out = []
        if self.ts.accept(")"):
            return out
        out.append(self.expr())
        while self.ts.accept(","):
            out.append(self.expr())
        self.ts.expect(")")
        return out


def rational(ts) -> Fraction:
    tok = ts.expect(kind="num")
    if ts.accept("/"):
        den = ts.expect(kind="num")
        if int(den.text) == 0:
            ts.error("zero denominator", den)
        return Fraction(int(tok.text), int(den.text))
    return Fraction(tok.text)


def _tok(raw):
    return raw[-1] if raw[0] != "prefix" else raw[3]


def _sort_err(msg, raw):
    t = _tok(raw)
    return SpecSortError(msg, t.line, t.col)


def elaborate(raw, expected: Optional[Sort], ctx: _Ctx):
    kind = raw[0]
    if kind == "id":
        name = raw[1]
        if name in ctx.mixes:
            term, sort = Mix(name), Sort.DIST
        elif name in ctx.defs:
            term = ctx.defs[name]
            sort = Sort.STATE if isinstance(term, (SVar, App)) else Sort.DIST
        else:
            known = ctx.vars.get(name)
            sort = known or expected
            if sort is None:
                raise _sort_err(f"cannot infer the sort of variable {name!r}", raw)
            if known is not None and expected is not None and known is not expected:
                raise _sort_err(f"variable {name!r} used with both sorts", raw)
            ctx.vars[name] = sort
            term = SVar(name) if sort is Sort.STATE else DVar(name)
    elif kind == "call":
        _, op, args, tok = raw
        try:
            sorts = ctx.sig.arity(op)
        except UnknownOperator:
            raise UnresolvedName(f"unknown operator {op!r}", tok.line, tok.col)
        if len(sorts) != len(args):
            raise _sort_err(f"{op} expects {len(sorts)} arguments, got {len(args)}", raw)
        term = App(op, tuple(elaborate(a, Sort(s), ctx) for a, s in zip(args, sorts)))
        sort = Sort.STATE
    elif kind == "prefix":
        _, act, arg, tok, bare = raw
        if bare:
            inner = elaborate(arg, None, ctx)
            if isinstance(inner, (SVar, App)):
                inner = Dirac(inner)
        else:
            inner = elaborate(arg, Sort.DIST, ctx)
        term, sort = App(f"{act}.", (inner,)), Sort.STATE
    elif kind == "dirac":
        term, sort = Dirac(elaborate(raw[1], Sort.STATE, ctx)), Sort.DIST
    elif kind == "oplus":
        _, left, p, right, tok = raw
        if not 0 < p < 1:
            raise SpecSyntaxError(f"convex-sum weight {p} must lie strictly between 0 and 1", tok.line, tok.col)
        l_t = elaborate(left, Sort.DIST, ctx)
        r_t = elaborate(right, Sort.DIST, ctx)
        term, sort = Sum(((p, l_t), (1 - p, r_t))), Sort.DIST
    elif kind == "lift":
        _, op, args, tok = raw
        try:
            sorts = tuple(Sort(s) for s in ctx.sig.arity(op))
        except UnknownOperator:
            raise UnresolvedName(f"unknown operator {op!r}", tok.line, tok.col)
        if len(sorts) != len(args):
            raise _sort_err(f"${op} expects {len(sorts)} arguments, got {len(args)}", raw)
        term = Lift(op, tuple(elaborate(a, Sort.DIST, ctx) for a in args), sorts)
        sort = Sort.DIST
    else:  # pragma: no cover
        raise AssertionError(kind)
    if expected is not None and sort is not expected:
        raise _sort_err(f"{term} has sort {sort.value}, expected {expected.value}", raw)
    return term


# ---------------------------------------------------------------- spec parsing


def _parse_sort(ts) -> Sort:
    tok = ts.expect(kind="ident")
    if tok.text not in ("S", "D"):
        ts.error(f"sort must be S or D, found {tok.text!r}", tok)
    return Sort(tok.text)


def parse_spec(text: str, strict: bool = True) -> SpecAst:
    """Parse a ``.ptss`` document.

    With ``strict`` the binder-distinctness conditions on rules are enforced
    (raising ``RebindingError``); the format checker parses non-strictly so it
    can report them instead.
    """
    ts = TokenStream(tokenize(text))
    ts.expect("spec")
    name = ts.expect(kind="ident").text
    actions: list = []
    ops: dict = {}
    while ts.at("actions") or ts.at("op"):
        if ts.accept("actions"):
            actions.append(ts.expect(kind="ident").text)
            while ts.accept(","):
                actions.append(ts.expect(kind="ident").text)
        else:
            ts.next()
            op_tok = ts.next()
            if op_tok.kind not in ("ident", "num", "sym") or op_tok.text in KEYWORDS:
                ts.error("operator name expected", op_tok)
            ts.expect(":")
            sorts = []
            while ts.at(kind="ident"):
                sorts.append(_parse_sort(ts))
            ts.expect(kind="to")
            result = _parse_sort(ts)
            if result is not Sort.STATE:
                ts.error("declared operators must have result sort S", op_tok)
            if op_tok.text in ops:
                raise RebindingError(f"operator {op_tok.text!r} declared twice", op_tok.line, op_tok.col)
            if op_tok.text in INFIX_OPS and len(sorts) != 2:
                ts.error(f"infix operator {op_tok.text!r} must be binary", op_tok)
            ops[op_tok.text] = tuple(sorts)
    if len(set(actions)) != len(actions):
        ts.error("duplicate action")
    spec = SpecAst(name, tuple(actions), ops, (), {})
    rules = []
    while ts.at("rule"):
        rules.append(_parse_rule(ts, spec, strict))
    spec.rules = tuple(rules)
    while ts.at("def"):
        ts.next()
        dname = ts.expect(kind="ident")
        ts.expect("=")
        p = _Parser(ts, spec.signature.all_ops(), spec.actions, spec.defs)
        raw = p.expr()
        if ts.at("(") and raw[0] == "id":
            raise UnresolvedName(f"unknown operator {raw[1]!r}", raw[-1].line, raw[-1].col)
        ctx = _Ctx(spec.signature, spec.defs)
        term = elaborate(raw, None, ctx)
        if not is_closed(term):
            raise SpecSortError(f"definition {dname.text!r} is not closed", dname.line, dname.col)
        if dname.text in spec.defs:
            raise RebindingError(f"{dname.text!r} defined twice", dname.line, dname.col)
        spec.defs[dname.text] = term
    if not ts.at(kind="eof"):
        ts.error(f"unexpected {ts.cur.text!r}")
    if not spec.actions:
        raise SpecSyntaxError("a spec needs at least one action")
    return spec


def _parse_rule(ts, spec: SpecAst, strict: bool) -> Rule:
    ts.expect("rule")
    name_tok = ts.expect(kind="ident")
    action_var = None
    if ts.accept("["):
        action_var = ts.expect(kind="ident").text
        ts.expect("]")
    ts.expect(":")
    p = _Parser(ts, spec.signature.all_ops(), spec.actions, spec.defs, action_var)
    raw_prem = []
    while not ts.at(kind="implies"):
        raw_prem.append(_parse_premise(ts, p))
        ts.accept(",")
    ts.expect(kind="implies")
    src = p.expr()
    arrow = ts.expect(kind="arrow")
    tgt = p.expr()
    mixes = {rp[2] for rp in raw_prem if rp[0] == "combine"}
    sig = Signature(spec.ops, spec.actions + ((action_var,) if action_var else ()))
    ctx = _Ctx(sig, spec.defs, mixes=mixes, action_var=action_var)
    # conclusion source first, so its variables fix their sorts by position
    source = elaborate(src, Sort.STATE, ctx)
    premises = tuple(_elab_premise(rp, ctx, spec, action_var) for rp in raw_prem)
    _check_action(arrow, spec, action_var)
    concl = Transition(source, arrow.text, elaborate(tgt, Sort.DIST, ctx))
    rule = Rule(name_tok.text, premises, concl, action_var)
    if strict:
        problem = binder_problem(rule)
        if problem:
            raise RebindingError(f"rule {rule.name}: {problem[1]}", name_tok.line, name_tok.col)
    return rule


def _check_action(tok, spec, action_var):
    if tok.text not in spec.actions and tok.text != action_var:
        raise UnresolvedName(f"unknown action {tok.text!r}", tok.line, tok.col)


def _parse_premise(ts, p: _Parser):
    tok = ts.cur
    if ts.accept("forall"):
        var = ts.expect(kind="ident").text
        ts.expect("in")
        setvar = ts.expect(kind="ident").text
        ts.expect(":")
        inner = _parse_premise(ts, p)
        if inner[0] not in ("pos", "neg"):
            ts.error("forall blocks take a transition or negative premise", tok)
        return ("forall", var, setvar, inner, tok)
    if ts.accept("combine"):
        fam = ts.expect(kind="ident").text
        ts.expect("as")
        nm = ts.expect(kind="ident").text
        link = None
        if ts.accept("from"):
            link = ts.expect(kind="ident").text
        return ("combine", fam, nm, link, tok)
    e = p.expr()
    if ts.at(kind="arrow"):
        a = ts.next()
        return ("pos", e, a, p.expr(), tok)
    if ts.at(kind="negarrow"):
        a = ts.next()
        return ("neg", e, a, tok)
    if ts.at("("):
        ts.next()
        try:
            if ts.accept("{"):
                states = []
                if not ts.accept("}"):
                    states.append(p.expr())
                    while ts.accept(","):
                        states.append(p.expr())
                    ts.expect("}")
                setvar = None
            else:
                states = None
                setvar = ts.expect(kind="ident").text
            ts.expect(")")
            cmp_tok = ts.next()
            if cmp_tok.text not in COMPARATORS:
                ts.error(f"comparator expected, found {cmp_tok.text!r}", cmp_tok)
            bound = rational(ts)
        except SpecSyntaxError:
            if e[0] == "id":
                raise UnresolvedName(f"unknown operator {e[1]!r}", tok.line, tok.col)
            raise
        if not 0 <= bound <= 1:
            ts.error(f"bound {bound} outside [0,1]", cmp_tok)
        return ("measure", e, states, setvar, cmp_tok.text, bound, tok)
    ts.error(f"premise expected, found {ts.cur.text or ts.cur.kind!r}")


def _elab_premise(rp, ctx: _Ctx, spec, action_var):
    kind = rp[0]
    if kind == "pos":
        _, src, arrow, tgt, _ = rp
        _check_action(arrow, spec, action_var)
        return Transition(elaborate(src, Sort.STATE, ctx), arrow.text, elaborate(tgt, Sort.DIST, ctx))
    if kind == "neg":
        _, src, arrow, _ = rp
        _check_action(arrow, spec, action_var)
        return Negative(elaborate(src, Sort.STATE, ctx), arrow.text)
    if kind == "forall":
        _, var, setvar, inner, tok = rp
        if ctx.vars.get(var, Sort.STATE) is not Sort.STATE:
            raise SpecSortError(f"forall variable {var!r} must be state-sorted", tok.line, tok.col)
        ctx.vars[var] = Sort.STATE
        return ForAll(var, setvar, _elab_premise(inner, ctx, spec, action_var))
    if kind == "combine":
        _, fam, nm, link, tok = rp
        if link is not None and ctx.vars.get(link, Sort.DIST) is not Sort.DIST:
            raise SpecSortError(f"combine source {link!r} must be a distribution variable", tok.line, tok.col)
        return Combine(fam, nm, link)
    if kind == "measure":
        _, e, states, setvar, cmp, bound, _ = rp
        term = elaborate(e, Sort.DIST, ctx)
        st = None if states is None else tuple(elaborate(s, Sort.STATE, ctx) for s in states)
        return Measure(term, st, setvar, cmp, bound)
    raise AssertionError(kind)  # pragma: no cover


# ---------------------------------------------------------------- binder checks


def conclusion_binders(rule: Rule) -> list:
    src = rule.conclusion.source
    if isinstance(src, SVar):
        return [src.name]
    if isinstance(src, App):
        return [a.name for a in src.args if isinstance(a, (SVar, DVar))]
    return []


def target_binders(rule: Rule) -> list:
    out = []
    for p in rule.premises:
        prem = p.premise if isinstance(p, ForAll) else p
        if isinstance(prem, Transition) and isinstance(prem.target, DVar):
            out.append(prem.target.name)
    return out


def element_binders(rule: Rule) -> dict:
    """Element variable -> set of measured-set identities it ranges over."""
    out: dict = {}
    for p in rule.premises:
        if isinstance(p, ForAll):
            out.setdefault(p.var, set()).add(p.setvar)
        elif isinstance(p, Measure) and p.states is not None:
            for s in p.states:
                if isinstance(s, SVar):
                    out.setdefault(s.name, set()).add(f"{{{s.name}}}")
    return out


def binder_problem(rule: Rule):
    """First violated binder-distinctness condition as ``(condition, message, witness)``."""
    src = conclusion_binders(rule)
    dup = _first_dup(src)
    if dup:
        return ("2", f"conclusion source variable {dup!r} occurs twice", dup)
    targets = target_binders(rule)
    # per-element targets of the same forall block legitimately repeat across elements
    dup = _first_dup(targets)
    if dup:
        return ("3", f"premise target {dup!r} bound twice", dup)
    clash = next((t for t in targets if t in src), None)
    if clash:
        return ("3", f"premise target {clash!r} also occurs in the conclusion source", clash)
    elems = element_binders(rule)
    for v, sets in sorted(elems.items()):
        if v in src:
            return ("4", f"set element {v!r} also occurs in the conclusion source", v)
        if len({s for s in sets if not s.startswith("{")}) > 1:
            return ("4", f"element {v!r} ranges over several set variables", v)
        if v in targets:
            return ("4", f"set element {v!r} is also a premise target", v)
    names = [c.name for c in rule.combines()] + [c.family for c in rule.combines()]
    dup = _first_dup(names)
    if dup:
        return ("8", f"combination {dup!r} declared twice", dup)
    return None


def _first_dup(xs):
    seen = set()
    for x in xs:
        if x in seen:
            return x
        seen.add(x)
    return None


# ---------------------------------------------------------------- terms & rendering


def parse_term(text: str, spec: SpecAst):
    ts = TokenStream(tokenize(text))
    p = _Parser(ts, spec.signature.all_ops(), spec.actions, spec.defs)
    raw = p.expr()
    if ts.at("(") and raw[0] == "id":
        tok = raw[-1]
        raise UnresolvedName(f"unknown operator {raw[1]!r}", tok.line, tok.col)
    if not ts.at(kind="eof"):
        ts.error(f"unexpected {ts.cur.text!r} after term")
    ctx = _Ctx(spec.signature, spec.defs)
    return elaborate(raw, None, ctx)


def render(x) -> str:
    if isinstance(x, SpecAst):
        lines = [f"spec {x.name}", "actions " + ", ".join(x.actions)]
        for op, sorts in x.ops.items():
            lines.append(f"op {op} : {' '.join(Sort(s).value for s in sorts)} -> S".replace(":  ->", ": ->"))
        lines.extend(str(r) for r in x.rules)
        lines.extend(f"def {k} = {v}" for k, v in x.defs.items())
        return "\n".join(lines) + "\n"
    return str(x)


def load_spec(path, strict: bool = True) -> SpecAst:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read(), strict=strict)
