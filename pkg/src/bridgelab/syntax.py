"""Object language: terms, formulas, quotation contexts, parser and printer.

Concrete syntax (ASCII), lowest to highest precedence::

    forall x. A    exists x. A
    A <-> B        (left-assoc chain)
    A -> B         (right-assoc)
    A | B
    A & B
    ~A   Fut A   Simp A
    _|_   True(t)   P(t1, ..., tn)   P   (A)

An identifier in term position is a variable when an enclosing quantifier
binds it and a constant otherwise.  A bare identifier in formula position is
either a defined abbreviation (``define phi := ...``) or a nullary atom.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union


class FormulaError(Exception):
    """Base for all errors raised while reading formulas or context files."""


class ParseError(FormulaError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class UnboundNameError(FormulaError):
    pass


class UnboundVariableError(FormulaError):
    pass


# --------------------------------------------------------------------------
# Terms


@dataclass(frozen=True, slots=True)
class Const:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self):
        return self.name


Term = Union[Const, Var]


# --------------------------------------------------------------------------
# Formulas


class Formula:
    __slots__ = ()

    def __str__(self):
        return render(self)

    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)


@dataclass(frozen=True, slots=True)
class Atom(Formula):
    pred: str
    args: tuple = ()


@dataclass(frozen=True, slots=True)
class TruePred(Formula):
    arg: Term


@dataclass(frozen=True, slots=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Cond(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Bicond(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, slots=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, slots=True)
class Fut(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class Simp(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class Falsum(Formula):
    pass


FALSUM = Falsum()

BINARY = (And, Or, Cond, Bicond)
UNARY = (Not, Fut, Simp)
QUANTIFIERS = (Forall, Exists)

_BINARY_OPS = {And: "&", Or: "|", Cond: "->", Bicond: "<->"}
_UNARY_OPS = {Not: "~", Fut: "Fut ", Simp: "Simp "}
_QUANT_WORDS = {Forall: "forall", Exists: "exists"}

KEYWORDS = frozenset({"forall", "exists", "Fut", "Simp", "True"})


# --------------------------------------------------------------------------
# Quotation context


@dataclass(frozen=True)
class QuotationContext:
    """Sentence names (``b := Fut Pun(a)``) plus formula abbreviations.

    Names are constants that denote sentences; ``True(b)`` is transparent to
    the formula bound to ``b``.  Abbreviations are expanded at parse time and
    are never denoted by a term.
    """

    names: Mapping[str, Formula] = field(default_factory=dict)
    definitions: Mapping[str, Formula] = field(default_factory=dict)

    def referent(self, name: str) -> Formula:
        try:
            return self.names[name]
        except KeyError:
            raise UnboundNameError(f"unbound sentence name {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def with_names(self, **names: Formula) -> "QuotationContext":
        return QuotationContext({**self.names, **names}, self.definitions)

    def with_definitions(self, **defs: Formula) -> "QuotationContext":
        return QuotationContext(self.names, {**self.definitions, **defs})


EMPTY_CONTEXT = QuotationContext()


# --------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<falsum>_\|_)
  | (?P<iff><->)
  | (?P<imp>->)
  | (?P<op>[~&|(),.])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True, slots=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            toks.append(_Tok(value if kind in ("op", "iff", "imp", "falsum") else kind, value, pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


# --------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text: str, ctx: QuotationContext, require_names: bool):
        self.text = text
        self.ctx = ctx
        self.require_names = require_names
        self.toks = _tokenize(text)
        self.i = 0
        self.bound: list[str] = []
        self.binders: set[str] = set()
        self.free_terms: list[_Tok] = []

    # token helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _advance(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def _is_word(self, word: str) -> bool:
        return self.tok.kind == "ident" and self.tok.text == word

    def _expect(self, kind: str, what: str | None = None) -> _Tok:
        if self.tok.kind != kind:
            self._fail(f"expected {what or repr(kind)}")
        return self._advance()

    def _fail(self, message: str):
        tok = self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"{message}, found {found}", tok.pos, self.text)

    # grammar
    def parse(self) -> Formula:
        f = self.formula()
        if self.tok.kind != "eof":
            self._fail("expected end of input")
        for tok in self.free_terms:
            if tok.text in self.binders:
                # variables and constants live in disjoint namespaces
                raise UnboundVariableError(
                    f"variable {tok.text!r} used outside its binder at position {tok.pos}"
                )
        return f

    def formula(self) -> Formula:
        if self._is_word("forall") or self._is_word("exists"):
            return self.quant()
        return self.iff()

    def quant(self) -> Formula:
        word = self._advance().text
        var_tok = self._expect("ident", "a variable")
        var = var_tok.text
        if var in KEYWORDS:
            raise ParseError(f"keyword {var!r} cannot be a variable", var_tok.pos, self.text)
        if var in self.ctx.names:
            raise ParseError(f"variable {var!r} clashes with sentence name", var_tok.pos, self.text)
        self._expect(".", "'.'")
        self.binders.add(var)
        self.bound.append(var)
        try:
            body = self.formula()
        finally:
            self.bound.pop()
        return Forall(var, body) if word == "forall" else Exists(var, body)

    def iff(self) -> Formula:
        f = self.imp()
        while self.tok.kind == "<->":
            self._advance()
            f = Bicond(f, self.imp())
        return f

    def imp(self) -> Formula:
        f = self.disj()
        if self.tok.kind == "->":
            self._advance()
            return Cond(f, self.imp())
        return f

    def disj(self) -> Formula:
        f = self.conj()
        while self.tok.kind == "|":
            self._advance()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.tok.kind == "&":
            self._advance()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        if self.tok.kind == "~":
            self._advance()
            return Not(self.unary())
        if self._is_word("Fut"):
            self._advance()
            return Fut(self.unary())
        if self._is_word("Simp"):
            self._advance()
            return Simp(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        tok = self.tok
        if tok.kind == "_|_":
            self._advance()
            return FALSUM
        if tok.kind == "(":
            self._advance()
            f = self.formula()
            self._expect(")", "')'")
            return f
        if tok.kind != "ident":
            self._fail("expected a formula")
        if tok.text in ("forall", "exists"):
            self._fail("quantifier must be parenthesized here")
        if tok.text in KEYWORDS and tok.text != "True":
            self._fail("expected a formula")
        self._advance()
        if tok.text == "True":
            self._expect("(", "'(' after True")
            term_tok = self.tok
            term = self.term()
            self._expect(")", "')'")
            if isinstance(term, Const) and self.require_names and term.name not in self.ctx.names:
                raise UnboundNameError(
                    f"unbound sentence name {term.name!r} at position {term_tok.pos}"
                )
            return TruePred(term)
        if self.tok.kind == "(":
            self._advance()
            args = [self.term()]
            while self.tok.kind == ",":
                self._advance()
                args.append(self.term())
            self._expect(")", "')' or ','")
            return Atom(tok.text, tuple(args))
        if tok.text in self.ctx.definitions:
            return self.ctx.definitions[tok.text]
        return Atom(tok.text, ())

    def term(self) -> Term:
        tok = self._expect("ident", "a term")
        if tok.text in KEYWORDS:
            raise ParseError(f"keyword {tok.text!r} cannot be a term", tok.pos, self.text)
        if tok.text in self.bound:
            return Var(tok.text)
        self.free_terms.append(tok)
        return Const(tok.text)


def parse(text: str, ctx: QuotationContext = EMPTY_CONTEXT, *, require_names: bool = True) -> Formula:
    """Parse ``text`` into a formula.

    With ``require_names`` (the default) every constant under ``True(...)``
    must be a sentence name bound in ``ctx``.
    """
    return _Parser(text, ctx, require_names).parse()


# --------------------------------------------------------------------------
# Printer


def _wrap(f: Formula, abbrev) -> str:
    s = _render(f, abbrev)
    if isinstance(f, BINARY + QUANTIFIERS) and abbrev.get(f) is None:
        return f"({s})"
    return s


def _render(f: Formula, abbrev) -> str:
    short = abbrev.get(f)
    if short is not None:
        return short
    if isinstance(f, Falsum):
        return "_|_"
    if isinstance(f, Atom):
        if not f.args:
            return f.pred
        return f"{f.pred}({','.join(t.name for t in f.args)})"
    if isinstance(f, TruePred):
        return f"True({f.arg.name})"
    if isinstance(f, UNARY):
        return _UNARY_OPS[type(f)] + _wrap(f.sub, abbrev)
    if isinstance(f, BINARY):
        op = _BINARY_OPS[type(f)]
        return f"{_wrap(f.left, abbrev)} {op} {_wrap(f.right, abbrev)}"
    if isinstance(f, QUANTIFIERS):
        body = f.body
        inner = _render(body, abbrev)
        if isinstance(body, BINARY) and abbrev.get(body) is None:
            inner = f"({inner})"
        return f"{_QUANT_WORDS[type(f)]} {f.var}. {inner}"
    raise TypeError(f"not a formula: {f!r}")


def render(f: Formula, ctx: QuotationContext | None = None) -> str:
    """Canonical text for ``f``; binary operands are always parenthesized.

    When ``ctx`` is given, subformulas equal to a defined abbreviation are
    printed by name, so the output round-trips through ``parse`` with the
    same context.
    """
    abbrev = {}
    if ctx is not None:
        abbrev = {v: k for k, v in ctx.definitions.items()}
    return _render(f, abbrev)


# --------------------------------------------------------------------------
# Traversal and substitution


def instantiate(f: Formula, var: str, t: Term) -> Formula:
    """Replace the free occurrences of variable ``var`` in ``f`` by constant ``t``."""
    if not isinstance(t, Const):
        raise TypeError(f"only constants may be substituted, got {t!r}")
    return _subst(f, var, t)


def _subst_term(term: Term, var: str, t: Const) -> Term:
    return t if isinstance(term, Var) and term.name == var else term


def _subst(f: Formula, var: str, t: Const) -> Formula:
    if isinstance(f, Atom):
        if not f.args:
            return f
        return Atom(f.pred, tuple(_subst_term(a, var, t) for a in f.args))
    if isinstance(f, TruePred):
        return TruePred(_subst_term(f.arg, var, t))
    if isinstance(f, UNARY):
        return type(f)(_subst(f.sub, var, t))
    if isinstance(f, BINARY):
        return type(f)(_subst(f.left, var, t), _subst(f.right, var, t))
    if isinstance(f, QUANTIFIERS):
        if f.var == var:
            return f
        return type(f)(f.var, _subst(f.body, var, t))
    return f


def subformulas(f: Formula) -> Iterator[Formula]:
    """Pre-order walk over ``f`` and all its subformulas."""
    yield f
    if isinstance(f, UNARY):
        yield from subformulas(f.sub)
    elif isinstance(f, BINARY):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, QUANTIFIERS):
        yield from subformulas(f.body)


def _terms(f: Formula) -> Iterator[Term]:
    for g in subformulas(f):
        if isinstance(g, Atom):
            yield from g.args
        elif isinstance(g, TruePred):
            yield g.arg


def constants(f: Formula) -> set[str]:
    return {t.name for t in _terms(f) if isinstance(t, Const)}


def free_variables(f: Formula) -> set[str]:
    if isinstance(f, Atom):
        return {t.name for t in f.args if isinstance(t, Var)}
    if isinstance(f, TruePred):
        return {f.arg.name} if isinstance(f.arg, Var) else set()
    if isinstance(f, UNARY):
        return free_variables(f.sub)
    if isinstance(f, BINARY):
        return free_variables(f.left) | free_variables(f.right)
    if isinstance(f, QUANTIFIERS):
        return free_variables(f.body) - {f.var}
    return set()


def is_closed(f: Formula) -> bool:
    return not free_variables(f)


def ground(f: Formula, domain) -> Formula:
    """Expand quantifiers over a finite domain into conjunctions/disjunctions.

    Over an empty domain ``forall`` becomes ``~_|_`` and ``exists`` ``_|_``.
    """
    if isinstance(f, QUANTIFIERS):
        parts = [ground(instantiate(f.body, f.var, Const(c)), domain) for c in domain]
        if not parts:
            return Not(FALSUM) if isinstance(f, Forall) else FALSUM
        joined = parts[0]
        op = And if isinstance(f, Forall) else Or
        for p in parts[1:]:
            joined = op(joined, p)
        return joined
    if isinstance(f, UNARY):
        return type(f)(ground(f.sub, domain))
    if isinstance(f, BINARY):
        return type(f)(ground(f.left, domain), ground(f.right, domain))
    return f


def is_ground_atom(f: Formula) -> bool:
    """Atoms the valuation assigns directly: ``P(c..)``, ``True(c)``, ``Fut P(c..)``."""
    if isinstance(f, Fut):
        f = f.sub
        return isinstance(f, Atom) and all(isinstance(t, Const) for t in f.args)
    if isinstance(f, Atom):
        return all(isinstance(t, Const) for t in f.args)
    return isinstance(f, TruePred) and isinstance(f.arg, Const)


# --------------------------------------------------------------------------
# Context files

_DECL_RE = re.compile(r"^\s*(name|define)\s+([A-Za-z_][A-Za-z0-9_']*)\s*:=\s*(.+?)\s*$")


def parse_declaration(line: str, ctx: QuotationContext) -> QuotationContext | None:
    """Apply one ``name n := A`` / ``define d := A`` line; ``None`` if not a declaration."""
    m = _DECL_RE.match(line)
    if m is None:
        return None
    kind, ident, body = m.groups()
    if ident in KEYWORDS:
        raise FormulaError(f"keyword {ident!r} cannot be declared")
    if kind == "name":
        # self-reference (the Liar) needs the name bound while parsing its own body
        provisional = ctx.with_names(**{ident: FALSUM})
        f = parse(body, provisional, require_names=False)
        _check_closed(ident, f)
        return ctx.with_names(**{ident: f})
    f = parse(body, ctx, require_names=False)
    _check_closed(ident, f)
    return ctx.with_definitions(**{ident: f})


def _check_closed(ident: str, f: Formula):
    free = free_variables(f)
    if free:
        raise UnboundVariableError(f"declaration {ident!r} has free variables {sorted(free)}")


def parse_context(text: str, ctx: QuotationContext = EMPTY_CONTEXT) -> QuotationContext:
    """Read a context file: one declaration per line, ``#`` starts a comment."""
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        new = parse_declaration(line, ctx)
        if new is None:
            raise FormulaError(f"line {lineno}: expected 'name n := A' or 'define d := A'")
        ctx = new
    _check_names_total(ctx)
    return ctx


def _check_names_total(ctx: QuotationContext):
    for name, f in ctx.names.items():
        for g in subformulas(f):
            if isinstance(g, TruePred) and isinstance(g.arg, Const) and g.arg.name not in ctx.names:
                raise UnboundNameError(f"name {name!r} refers to unbound sentence name {g.arg.name!r}")
