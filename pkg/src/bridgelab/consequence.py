"""Validity of sequents by exhaustive enumeration of finite models.

Two routes share one model order:

* :func:`enumerate_models` streams :class:`~bridgelab.semantics.Model`
  objects and is checked with the recursive evaluator;
* :func:`valid` and :func:`valid_local` evaluate every formula over blocks of
  models at once with numpy.

Both enumerate free atoms in rendered order with values 0 < 1/2 < 1, last
atom fastest, so the first countermodel is the same either way.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .semantics import (
    CLASSICAL_VALUES,
    VALUES,
    ConnectiveFamily,
    Model,
    SemanticError,
    Standard,
    TruthValue,
    check_transparency,
    designated,
    evaluate,
)
from .syntax import (
    EMPTY_CONTEXT,
    And,
    Atom,
    Bicond,
    Cond,
    Const,
    Falsum,
    Formula,
    Fut,
    Not,
    Or,
    QuotationContext,
    Simp,
    TruePred,
    constants,
    ground,
    is_ground_atom,
    render,
)

DEFAULT_CAP = 16
_BLOCK_ATOMS = 10


class CapExceeded(Exception):
    def __init__(self, n_atoms: int, cap: int):
        self.n_atoms, self.cap = n_atoms, cap
        super().__init__(f"{n_atoms} free ground atoms exceed the enumeration cap of {cap}")


class Relation(enum.Enum):
    CL = "cl"
    SS = "ss"
    TT = "tt"
    ST = "st"
    TS = "ts"

    @property
    def premise_standard(self) -> Standard:
        return _STANDARDS[self][0]

    @property
    def conclusion_standard(self) -> Standard:
        return _STANDARDS[self][1]

    @property
    def classical(self) -> bool:
        return self is Relation.CL


_STANDARDS = {
    Relation.CL: (Standard.CLASSICAL_TRUE, Standard.CLASSICAL_TRUE),
    Relation.SS: (Standard.STRICT, Standard.STRICT),
    Relation.TT: (Standard.TOLERANT, Standard.TOLERANT),
    Relation.ST: (Standard.STRICT, Standard.TOLERANT),
    Relation.TS: (Standard.TOLERANT, Standard.STRICT),
}


# --------------------------------------------------------------------------
# Signatures and sequents


@dataclass(frozen=True)
class Signature:
    domain: tuple
    atoms: tuple  # free ground atoms, enumerated
    fixed: Mapping = field(default_factory=dict)  # pinned atom values

    def to_json(self) -> dict:
        return {
            "domain": list(self.domain),
            "atoms": [render(a) for a in self.atoms],
            "fixed": {render(a): v.to_json() for a, v in sorted(self.fixed.items(), key=lambda kv: render(kv[0]))},
        }


def _ground_atoms(f: Formula, out: set):
    if isinstance(f, Fut):
        if not is_ground_atom(f):
            raise SemanticError(f"Fut over a compound needs a branching frame: {render(f)}")
        out.add(f)
    elif isinstance(f, (Atom, TruePred)):
        if not is_ground_atom(f):
            raise SemanticError(f"formula is not closed: {render(f)}")
        out.add(f)
    elif isinstance(f, (Not, Simp)):
        _ground_atoms(f.sub, out)
    elif isinstance(f, (And, Or, Cond, Bicond)):
        _ground_atoms(f.left, out)
        _ground_atoms(f.right, out)


def signature_for(
    formulas: Iterable[Formula],
    ctx: QuotationContext = EMPTY_CONTEXT,
    transparent: bool = False,
    domain: Sequence[str] | None = None,
    fixed: Mapping[Formula, TruthValue] | None = None,
) -> Signature:
    """Ground atoms needed to evaluate ``formulas`` (and, when transparent,
    the referents of the sentence names whose truth they mention)."""
    formulas = list(formulas)
    if domain is None:
        names, todo, consts = set(), list(formulas), set()
        while todo:
            f = todo.pop()
            for c in constants(f):
                consts.add(c)
                if transparent and c in ctx.names and c not in names:
                    names.add(c)
                    todo.append(ctx.names[c])
        domain = sorted(consts)
    domain = tuple(domain)
    atoms: set = set()
    for f in formulas:
        _ground_atoms(ground(f, domain), atoms)
    if transparent:
        done: set = set()
        while True:
            pending = [n for n in sorted(ctx.names) if n not in done and TruePred(Const(n)) in atoms]
            if not pending:
                break
            for n in pending:
                done.add(n)
                _ground_atoms(ground(ctx.names[n], domain), atoms)
    fixed = dict(fixed or {})
    free = tuple(sorted((a for a in atoms if a not in fixed), key=render))
    return Signature(domain, free, fixed)


@dataclass(frozen=True)
class Sequent:
    premises: tuple
    conclusion: Formula
    ctx: QuotationContext = EMPTY_CONTEXT
    transparent: bool = False
    domain: tuple | None = None
    fixed: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))

    def signature(self, extra: Iterable[Formula] = ()) -> Signature:
        return signature_for([*self.premises, self.conclusion, *extra], self.ctx, self.transparent, self.domain, self.fixed)

    def render(self) -> str:
        lhs = ", ".join(render(p, self.ctx) for p in self.premises)
        return f"{lhs} |- {render(self.conclusion, self.ctx)}".strip()


@dataclass
class Verdict:
    valid: bool
    countermodel: Model | None
    models_checked: int

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "countermodel": None if self.countermodel is None else self.countermodel.to_json(),
            "modelsChecked": self.models_checked,
        }


# --------------------------------------------------------------------------
# Streaming enumeration


def enumerate_models(
    sig: Signature,
    ctx: QuotationContext = EMPTY_CONTEXT,
    transparent: bool = False,
    classical: bool = False,
    cap: int = DEFAULT_CAP,
    fam: ConnectiveFamily = ConnectiveFamily.STRONG_KLEENE,
) -> Iterator[Model]:
    """All admissible models over ``sig`` in canonical order."""
    if len(sig.atoms) > cap:
        raise CapExceeded(len(sig.atoms), cap)
    values = CLASSICAL_VALUES if classical else VALUES
    for combo in itertools.product(values, repeat=len(sig.atoms)):
        atoms = dict(sig.fixed)
        atoms.update(zip(sig.atoms, combo))
        m = Model(domain=sig.domain, atoms=atoms, ctx=ctx, transparent=transparent)
        if transparent and check_transparency(m, fam):
            continue
        yield m


def count_models(sig, ctx=EMPTY_CONTEXT, transparent=False, classical=False, cap=DEFAULT_CAP, fam=ConnectiveFamily.STRONG_KLEENE) -> int:
    return sum(int(mask.sum()) for _, _, mask in _blocks(sig, ctx, transparent, classical, cap, fam))


# --------------------------------------------------------------------------
# Batch evaluation


class _Columns:
    def __init__(self, sig: Signature, rows: np.ndarray):
        self.n = rows.shape[0]
        self.index = {a: i for i, a in enumerate(sig.atoms)}
        self.rows = rows
        self.fixed = sig.fixed

    def __getitem__(self, atom: Formula) -> np.ndarray:
        i = self.index.get(atom)
        if i is not None:
            return self.rows[:, i]
        if atom in self.fixed:
            return np.full(self.n, int(self.fixed[atom]), dtype=np.int8)
        raise SemanticError(f"no value for ground atom {render(atom)}")


def _vec(f: Formula, cols: _Columns, fam: ConnectiveFamily, memo: dict) -> np.ndarray:
    hit = memo.get(f)
    if hit is not None:
        return hit
    if isinstance(f, Falsum):
        out = np.zeros(cols.n, dtype=np.int8)
    elif isinstance(f, (Atom, TruePred, Fut)):
        out = cols[f]
    elif isinstance(f, Not):
        out = 2 - _vec(f.sub, cols, fam, memo)
    elif isinstance(f, And):
        out = np.minimum(_vec(f.left, cols, fam, memo), _vec(f.right, cols, fam, memo))
    elif isinstance(f, Or):
        out = np.maximum(_vec(f.left, cols, fam, memo), _vec(f.right, cols, fam, memo))
    elif isinstance(f, Cond):
        out = _vcond(_vec(f.left, cols, fam, memo), _vec(f.right, cols, fam, memo), fam)
    elif isinstance(f, Bicond):
        a, b = _vec(f.left, cols, fam, memo), _vec(f.right, cols, fam, memo)
        out = np.minimum(_vcond(a, b, fam), _vcond(b, a, fam))
    elif isinstance(f, Simp):
        out = np.where(_vec(f.sub, cols, fam, memo) == 2, 2, 0).astype(np.int8)
    else:
        raise TypeError(f"cannot batch-evaluate {f!r}")
    memo[f] = out
    return out


def _vcond(a: np.ndarray, b: np.ndarray, fam: ConnectiveFamily) -> np.ndarray:
    if fam is ConnectiveFamily.STRONG_KLEENE:
        return np.maximum(2 - a, b)
    return np.where(a >= 1, b, 1).astype(np.int8)


def _designated(v: np.ndarray, standard: Standard) -> np.ndarray:
    return v >= 1 if standard is Standard.TOLERANT else v == 2


def _blocks(sig, ctx, transparent, classical, cap, fam):
    """Yield ``(offset, rows, admissible_mask)`` over the canonical model order."""
    k = len(sig.atoms)
    if k > cap:
        raise CapExceeded(k, cap)
    values = np.array([int(v) for v in (CLASSICAL_VALUES if classical else VALUES)], dtype=np.int8)
    inner = min(k, _BLOCK_ATOMS)
    outer = k - inner
    inner_grid = np.array(list(itertools.product(values, repeat=inner)), dtype=np.int8).reshape(len(values) ** inner, inner)
    names = [n for n in sorted(ctx.names) if transparent and (TruePred(Const(n)) in sig.atoms or TruePred(Const(n)) in sig.fixed)]
    referents = {n: ground(ctx.names[n], sig.domain) for n in names}
    offset = 0
    for head in itertools.product(values, repeat=outer):
        rows = np.empty((inner_grid.shape[0], k), dtype=np.int8)
        rows[:, :outer] = head
        rows[:, outer:] = inner_grid
        cols = _Columns(sig, rows)
        mask = np.ones(cols.n, dtype=bool)
        memo: dict = {}
        for n in names:
            mask &= cols[TruePred(Const(n))] == _vec(referents[n], cols, fam, memo)
        yield offset, cols, mask
        offset += cols.n


def _row_model(sig: Signature, rows: np.ndarray, i: int, ctx, transparent) -> Model:
    atoms = dict(sig.fixed)
    atoms.update((a, TruthValue(int(v))) for a, v in zip(sig.atoms, rows[i]))
    return Model(domain=sig.domain, atoms=atoms, ctx=ctx, transparent=transparent)


def valid_local(
    premise_sequents: Sequence[Sequent],
    conclusion: Sequent,
    relation: Relation,
    fam: ConnectiveFamily = ConnectiveFamily.STRONG_KLEENE,
    cap: int = DEFAULT_CAP,
) -> Verdict:
    """Local validity of the metainference ``premise_sequents / conclusion``.

    Holds when every admissible model that satisfies each premise sequent
    also satisfies the conclusion sequent.  A model satisfies ``G |- A``
    under ``relation`` when it fails to designate some member of ``G`` at
    the premise standard or designates ``A`` at the conclusion standard.
    With no premise sequents this is plain sequent validity.
    """
    extra = [f for s in premise_sequents for f in (*s.premises, s.conclusion)]
    sig = conclusion.signature(extra)
    ctx, transparent = conclusion.ctx, conclusion.transparent
    xs, ys = relation.premise_standard, relation.conclusion_standard
    grounded = {}

    def g(f):
        if f not in grounded:
            grounded[f] = ground(f, sig.domain)
        return grounded[f]

    def satisfied(seq: Sequent, cols, memo, mask):
        ok = mask.copy()
        for p in seq.premises:
            ok &= _designated(_vec(g(p), cols, fam, memo), xs)
        return ~ok | _designated(_vec(g(seq.conclusion), cols, fam, memo), ys)

    checked = 0
    for _, cols, mask in _blocks(sig, ctx, transparent, relation.classical, cap, fam):
        memo: dict = {}
        bad = mask.copy()
        for s in premise_sequents:
            bad &= satisfied(s, cols, memo, mask)
        bad &= ~satisfied(conclusion, cols, memo, mask)
        hits = np.flatnonzero(bad)
        if hits.size:
            first = int(hits[0])
            checked += int(mask[: first + 1].sum())
            return Verdict(False, _row_model(sig, cols.rows, first, ctx, transparent), checked)
        checked += int(mask.sum())
    return Verdict(True, None, checked)


def valid(
    s: Sequent,
    relation: Relation,
    fam: ConnectiveFamily = ConnectiveFamily.STRONG_KLEENE,
    cap: int = DEFAULT_CAP,
) -> Verdict:
    """Decide ``s`` under ``relation``; on failure return the first countermodel."""
    return valid_local((), s, relation, fam, cap)


def refutes(m: Model, s: Sequent, relation: Relation, fam: ConnectiveFamily) -> bool:
    """Check a countermodel with the recursive evaluator."""
    prem = all(designated(evaluate(p, m, fam), relation.premise_standard) for p in s.premises)
    concl = designated(evaluate(s.conclusion, m, fam), relation.conclusion_standard)
    return prem and not concl


# --------------------------------------------------------------------------
# ST / CL agreement over a generated propositional pool


_POOL_OPS = (And, Or, Cond, Bicond)


def formula_pool(n_atoms: int, depth: int) -> list[Formula]:
    """All formulas of depth at most ``depth`` over ``p0..`` plus ``_|_``."""
    base: list[Formula] = [Atom(f"p{i}") for i in range(n_atoms)] + [Falsum()]
    pool = list(base)
    seen = set(pool)
    for _ in range(depth):
        layer = list(pool)
        new = [Not(a) for a in layer]
        new += [op(a, b) for op in _POOL_OPS for a in layer for b in layer]
        for f in new:
            if f not in seen:
                seen.add(f)
                pool.append(f)
    return pool


@dataclass
class AgreementReport:
    n_atoms: int
    depth: int
    pool_size: int
    distinct_functions: int
    max_premises: int
    sequents: int
    valid_counts: dict
    violations: dict
    examples: dict

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    def to_json(self) -> dict:
        return {
            "atoms": self.n_atoms,
            "depth": self.depth,
            "poolSize": self.pool_size,
            "distinctFunctions": self.distinct_functions,
            "maxPremises": self.max_premises,
            "sequents": self.sequents,
            "validCounts": self.valid_counts,
            "violations": self.violations,
            "examples": self.examples,
            "empirical": True,
        }


@dataclass
class AgreementTables:
    """Per-relation verdicts for every (premise set, conclusion) pair."""

    pool_size: int
    functions: list  # one representative formula per distinct value vector
    premise_sets: list  # tuples of indices into ``functions``
    verdicts: dict  # Relation -> bool array [premise set, conclusion]

    def sequent(self, i: int, c: int) -> Sequent:
        return Sequent(tuple(self.functions[j] for j in self.premise_sets[i]), self.functions[c])


def agreement_tables(n_atoms: int = 2, depth: int = 2, max_premises: int = 2, cap: int = DEFAULT_CAP) -> AgreementTables:
    """Decide all five relations for every sequent over a formula pool.

    Formulas are identified by their strong Kleene value vector over all
    ``3**n_atoms`` valuations, which is all any of the five relations can
    see.  Sequents take 0..``max_premises`` distinct premises and any
    conclusion.  Designation sets are bitmasks over the valuations, so a
    sequent is valid when ``premises & ~conclusion & scope`` is empty.
    """
    if n_atoms > cap:
        raise CapExceeded(n_atoms, cap)
    if 3**n_atoms > 62:
        raise ValueError("agreement tables pack valuations into 64-bit masks; use at most 3 atoms")
    fam = ConnectiveFamily.STRONG_KLEENE
    pool = formula_pool(n_atoms, depth)
    sig = Signature((), tuple(Atom(f"p{i}") for i in range(n_atoms)), {})
    [(_, cols, _)] = list(_blocks(sig, EMPTY_CONTEXT, False, False, cap, fam))
    memo: dict = {}
    reps = {}
    for f in pool:
        reps.setdefault(_vec(f, cols, fam, memo).tobytes(), f)
    functions = list(reps.values())
    values = np.array([_vec(f, cols, fam, memo) for f in functions])  # function x valuation
    weights = 1 << np.arange(values.shape[1], dtype=np.int64)

    def bits(mask2d):
        return (mask2d.astype(np.int64) * weights).sum(axis=1)

    strict, tolerant = bits(values == 2), bits(values >= 1)
    everything = int(weights.sum())
    classical_scope = int(bits(np.all(cols.rows != 1, axis=1)[None, :])[0])

    premise_sets = [()]
    for k in range(1, max_premises + 1):
        premise_sets += list(itertools.combinations(range(len(functions)), k))

    def set_bits(table):
        out = np.full(len(premise_sets), everything, dtype=np.int64)
        for i, ps in enumerate(premise_sets):
            for j in ps:
                out[i] &= table[j]
        return out

    by_standard = {Standard.STRICT: strict, Standard.TOLERANT: tolerant, Standard.CLASSICAL_TRUE: strict}
    premise_bits = {std: set_bits(tab) for std, tab in by_standard.items()}
    verdicts = {}
    for r in Relation:
        scope = classical_scope if r.classical else everything
        bad = premise_bits[r.premise_standard][:, None] & ~by_standard[r.conclusion_standard][None, :] & scope
        verdicts[r] = bad == 0
    return AgreementTables(len(pool), functions, premise_sets, verdicts)


def classical_agreement(n_atoms: int = 2, depth: int = 2, max_premises: int = 2, cap: int = DEFAULT_CAP) -> AgreementReport:
    """ST against CL, plus the designation containments, on a formula pool.

    The comparison is empirical: it covers exactly the sequents generated by
    :func:`agreement_tables`.
    """
    tables = agreement_tables(n_atoms, depth, max_premises, cap)
    v = tables.verdicts

    def describe(mask):
        return [tables.sequent(int(i), int(c)).render() for i, c in np.argwhere(mask)[:5]]

    checks = {
        "SS-valid not ST-valid": v[Relation.SS] & ~v[Relation.ST],
        "TS-valid not SS-valid": v[Relation.TS] & ~v[Relation.SS],
        "TS-valid not TT-valid": v[Relation.TS] & ~v[Relation.TT],
        "ST-valid not CL-valid": v[Relation.ST] & ~v[Relation.CL],
        "CL-valid not ST-valid": v[Relation.CL] & ~v[Relation.ST],
    }
    return AgreementReport(
        n_atoms=n_atoms,
        depth=depth,
        pool_size=tables.pool_size,
        distinct_functions=len(tables.functions),
        max_premises=max_premises,
        sequents=int(v[Relation.CL].size),
        valid_counts={r.name: int(m.sum()) for r, m in v.items()},
        violations={k: int(m.sum()) for k, m in checks.items()},
        examples={k: describe(m) for k, m in checks.items() if m.any()},
    )
