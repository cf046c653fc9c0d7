"""Three-valued evaluation of closed formulas in finite models."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .syntax import (
    EMPTY_CONTEXT,
    And,
    Atom,
    Bicond,
    Cond,
    Const,
    Exists,
    Falsum,
    Forall,
    Formula,
    FormulaError,
    Fut,
    Not,
    Or,
    QuotationContext,
    Simp,
    TruePred,
    Var,
    constants,
    ground,
    instantiate,
    is_ground_atom,
    parse,
    parse_declaration,
    render,
    subformulas,
)


class SemanticError(Exception):
    pass


class TruthValue(enum.IntEnum):
    """0, 1/2, 1 stored as doubled integers so arithmetic stays exact."""

    FALSE = 0
    HALF = 1
    TRUE = 2

    @property
    def fraction(self) -> Fraction:
        return Fraction(int(self), 2)

    def to_json(self):
        return {0: 0, 1: 0.5, 2: 1}[int(self)]

    @classmethod
    def from_json(cls, x) -> "TruthValue":
        try:
            return {Fraction(0): cls.FALSE, Fraction(1, 2): cls.HALF, Fraction(1): cls.TRUE}[Fraction(x)]
        except (KeyError, ValueError, TypeError):
            raise ValueError(f"not a truth value: {x!r}") from None

    def __str__(self):
        return {0: "0", 1: "1/2", 2: "1"}[int(self)]

    @property
    def is_classical(self) -> bool:
        return self is not TruthValue.HALF


F, H, T = TruthValue.FALSE, TruthValue.HALF, TruthValue.TRUE
VALUES = (F, H, T)
CLASSICAL_VALUES = (F, T)


class ConnectiveFamily(enum.Enum):
    """Choice of conditional; negation, conjunction and disjunction are fixed."""

    STRONG_KLEENE = "strong-kleene"
    COOPER = "cooper"


def neg(v: TruthValue) -> TruthValue:
    return TruthValue(2 - v)


def conj(a: TruthValue, b: TruthValue) -> TruthValue:
    return min(a, b)


def disj(a: TruthValue, b: TruthValue) -> TruthValue:
    return max(a, b)


def cond(a: TruthValue, b: TruthValue, fam: ConnectiveFamily) -> TruthValue:
    if fam is ConnectiveFamily.STRONG_KLEENE:
        return max(neg(a), b)
    # Cooper: the consequent's value once the antecedent is at least 1/2
    return TruthValue(b) if a >= H else H


def bicond(a: TruthValue, b: TruthValue, fam: ConnectiveFamily) -> TruthValue:
    return min(cond(a, b, fam), cond(b, a, fam))


def bochvar_simp(v: TruthValue) -> TruthValue:
    return T if v == T else F


class Standard(enum.Enum):
    STRICT = "strict"
    TOLERANT = "tolerant"
    CLASSICAL_TRUE = "classical-true"


def designated(v: TruthValue, standard: Standard) -> bool:
    # classical-true coincides with strict; the classical restriction is a
    # property of the model class, enforced by enumeration
    if standard is Standard.TOLERANT:
        return v >= H
    return v == T


# --------------------------------------------------------------------------
# Models


@dataclass(frozen=True, eq=False)
class Model:
    """A finite model.

    ``atoms`` maps ground atoms (``P(c..)``, ``True(c)`` and, without a
    frame, ``Fut P(c..)``) to values.  With ``transparent`` set, a missing
    ``True(n)`` entry is read off the referent of ``n``; admissibility of the
    entries that are present is checked by :func:`check_transparency`.
    With a ``frame`` attached, ``Fut`` and atoms are evaluated at ``moment``.
    """

    domain: tuple = ()
    atoms: Mapping[Formula, TruthValue] = field(default_factory=dict)
    ctx: QuotationContext = EMPTY_CONTEXT
    transparent: bool = False
    frame: object = None
    moment: str | None = None

    def value_of(self, atom: Formula) -> TruthValue:
        try:
            return self.atoms[atom]
        except KeyError:
            raise SemanticError(f"no value for ground atom {render(atom)}") from None

    @property
    def is_classical(self) -> bool:
        return all(v.is_classical for v in self.atoms.values())

    def to_json(self) -> dict:
        out = {
            "domain": list(self.domain),
            "atoms": {render(a): v.to_json() for a, v in sorted_atoms(self.atoms)},
        }
        if self.ctx.names:
            out["names"] = {n: render(f) for n, f in sorted(self.ctx.names.items())}
        out["transparent"] = self.transparent
        return out


def sorted_atoms(atoms: Mapping[Formula, TruthValue]):
    return sorted(atoms.items(), key=lambda kv: render(kv[0]))


def model_from_json(data: Mapping, ctx: QuotationContext | None = None) -> Model:
    """Build a model from the JSON layout ``{domain, atoms, names, transparent}``."""
    ctx = ctx or EMPTY_CONTEXT
    for name, text in (data.get("names") or {}).items():
        ctx = parse_declaration(f"name {name} := {text}", ctx)
    for name, text in (data.get("definitions") or {}).items():
        ctx = parse_declaration(f"define {name} := {text}", ctx)
    atoms = {}
    for key, val in (data.get("atoms") or {}).items():
        atom = parse(key, ctx, require_names=False)
        if not is_ground_atom(atom):
            raise FormulaError(f"model atom {key!r} is not a ground atom")
        atoms[atom] = TruthValue.from_json(val)
    return Model(
        domain=tuple(data.get("domain") or ()),
        atoms=atoms,
        ctx=ctx,
        transparent=bool(data.get("transparent", False)),
    )


# --------------------------------------------------------------------------
# Evaluation


def evaluate(f: Formula, m: Model, fam: ConnectiveFamily = ConnectiveFamily.STRONG_KLEENE) -> TruthValue:
    """Value of the closed formula ``f`` in ``m``."""
    unknown = constants(f) - set(m.domain) - set(m.ctx.names)
    if unknown:
        raise SemanticError(f"unknown constant(s) {sorted(unknown)}")
    return _Evaluator(m, fam).eval(f)


class _Evaluator:
    def __init__(self, m: Model, fam: ConnectiveFamily):
        self.m = m
        self.fam = fam
        self.unfolding: list[str] = []

    def eval(self, f: Formula) -> TruthValue:
        m = self.m
        if isinstance(f, Falsum):
            return F
        if isinstance(f, Atom):
            _require_ground(f)
            if m.frame is not None:
                return m.frame.atom_value(f, m.moment)
            return m.value_of(f)
        if isinstance(f, TruePred):
            return self.truth(f)
        if isinstance(f, Not):
            return neg(self.eval(f.sub))
        if isinstance(f, And):
            return conj(self.eval(f.left), self.eval(f.right))
        if isinstance(f, Or):
            return disj(self.eval(f.left), self.eval(f.right))
        if isinstance(f, Cond):
            return cond(self.eval(f.left), self.eval(f.right), self.fam)
        if isinstance(f, Bicond):
            return bicond(self.eval(f.left), self.eval(f.right), self.fam)
        if isinstance(f, Simp):
            return bochvar_simp(self.eval(f.sub))
        if isinstance(f, Forall):
            return min((self.eval(instantiate(f.body, f.var, Const(c))) for c in m.domain), default=T)
        if isinstance(f, Exists):
            return max((self.eval(instantiate(f.body, f.var, Const(c))) for c in m.domain), default=F)
        if isinstance(f, Fut):
            if m.frame is not None:
                return m.frame.eval_fut(f.sub, m.moment, domain=m.domain)
            if not isinstance(f.sub, Atom):
                raise SemanticError(f"Fut over a compound needs a branching frame: {render(f)}")
            _require_ground(f.sub)
            return m.value_of(f)
        raise TypeError(f"not a formula: {f!r}")

    def truth(self, f: TruePred) -> TruthValue:
        m = self.m
        if isinstance(f.arg, Var):
            raise SemanticError(f"free variable {f.arg.name} in {render(f)}")
        name = f.arg.name
        if m.frame is None and f in m.atoms:
            return m.atoms[f]
        if not m.transparent:
            return m.value_of(f)
        if name in self.unfolding:
            raise SemanticError(f"circular unfolding of True({name}); give it an explicit value")
        referent = m.ctx.referent(name)
        self.unfolding.append(name)
        try:
            return self.eval(referent)
        finally:
            self.unfolding.pop()


def _require_ground(f: Atom):
    for t in f.args:
        if isinstance(t, Var):
            raise SemanticError(f"free variable {t.name} in {render(f)}")


# --------------------------------------------------------------------------
# Transparency


@dataclass(frozen=True)
class Violation:
    name: str
    kind: str  # "mismatch" | "no-classical-solution"
    lhs: TruthValue | None = None
    rhs: TruthValue | None = None

    def to_json(self) -> dict:
        out = {"name": self.name, "kind": self.kind}
        if self.lhs is not None:
            out["lhs"] = self.lhs.to_json()
            out["rhs"] = self.rhs.to_json()
        return out


def check_transparency(
    m: Model,
    fam: ConnectiveFamily = ConnectiveFamily.STRONG_KLEENE,
    classical: bool = False,
) -> list[Violation]:
    """Names ``n`` whose ``True(n)`` value differs from their referent's value.

    Only names with an explicit ``True(n)`` entry are constrained; for the
    others the evaluator already reads the referent.  With ``classical`` set,
    names whose constraint has no solution in 0/1 (the Liar) are also
    reported, independently of ``m``'s own values.
    """
    out = []
    for name in sorted(m.ctx.names):
        key = TruePred(Const(name))
        if key not in m.atoms:
            continue
        lhs = m.atoms[key]
        rhs = evaluate(m.ctx.names[name], m, fam)
        if lhs != rhs:
            out.append(Violation(name, "mismatch", lhs, rhs))
    if classical:
        out.extend(
            Violation(name, "no-classical-solution")
            for name in unsolvable_names(m.ctx, m.domain, fam, CLASSICAL_VALUES)
        )
    return out


def name_dependencies(ctx: QuotationContext, name: str, domain=()) -> list[Formula]:
    """Ground atoms that the transparency constraint for ``name`` mentions."""
    seen, atoms, todo = set(), set(), [name]
    while todo:
        n = todo.pop()
        if n in seen:
            continue
        seen.add(n)
        atoms.add(TruePred(Const(n)))
        for g in subformulas(ground(ctx.referent(n), domain)):
            if is_ground_atom(g):
                atoms.add(g)
                if isinstance(g, TruePred) and g.arg.name in ctx.names:
                    todo.append(g.arg.name)
    return sorted(atoms, key=render)


def unsolvable_names(ctx: QuotationContext, domain=(), fam=ConnectiveFamily.STRONG_KLEENE, values=VALUES) -> list[str]:
    """Names whose constraint ``True(n) = referent`` has no solution over ``values``."""
    bad = []
    domain = tuple(sorted(set(domain).union(*(constants(f) for f in ctx.names.values()))))
    for name in sorted(ctx.names):
        deps = name_dependencies(ctx, name, domain)
        key = TruePred(Const(name))
        for combo in itertools.product(values, repeat=len(deps)):
            m = Model(domain=tuple(domain), atoms=dict(zip(deps, combo)), ctx=ctx, transparent=True)
            if all(m.atoms[TruePred(Const(n))] == evaluate(ctx.names[n], m, fam)
                   for n in ctx.names if TruePred(Const(n)) in m.atoms) and key in m.atoms:
                break
        else:
            bad.append(name)
    return bad
