"""Branching-time frames with a supervaluational future operator.

``Fut A`` at moment ``t`` is 1 when every history through ``t`` reaches a
later moment where ``A`` is true, 0 when every history reaches one where
``A`` is false, and 1/2 otherwise.  ``A`` must be free of ``Fut`` and
``True``; compounds above ``Fut`` use the strong Kleene tables.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

from .semantics import (
    CLASSICAL_VALUES,
    ConnectiveFamily,
    Model,
    SemanticError,
    TruthValue,
    evaluate,
)
from .syntax import (
    EMPTY_CONTEXT,
    Atom,
    Formula,
    Fut,
    QuotationContext,
    TruePred,
    constants,
    is_ground_atom,
    parse,
    render,
    subformulas,
)


class FrameError(ValueError):
    pass


class FutConflictError(SemanticError):
    def __init__(self, formula: Formula, moment: str, histories: list[str]):
        self.histories = histories
        super().__init__(
            f"Fut {render(formula)} at {moment} is both settled true and settled false; "
            f"histories {', '.join(histories)} each reach both values"
        )


@dataclass(frozen=True)
class History:
    label: str
    moments: tuple

    def __contains__(self, moment) -> bool:
        return moment in self.moments

    def after(self, moment: str) -> tuple:
        return self.moments[self.moments.index(moment) + 1:]


@dataclass(frozen=True, eq=False)
class BranchingFrame:
    """A finite forest of moments.

    ``valuation`` maps ``(history_label, moment)`` to classical atom values;
    a ``None`` history label makes the entry hold on every history through
    the moment.  Histories are maximal root-to-leaf paths, labelled ``h1``,
    ``h2``, ... in depth-first order unless ``history_names`` maps labels to
    leaves.
    """

    moments: tuple
    edges: tuple
    valuation: Mapping = field(default_factory=dict)
    history_names: Mapping = field(default_factory=dict)
    domain: tuple = ()

    def __post_init__(self):
        moments = set(self.moments)
        if len(moments) != len(self.moments):
            raise FrameError("duplicate moment")
        parents = {}
        for parent, child in self.edges:
            if parent not in moments or child not in moments:
                raise FrameError(f"edge {parent}->{child} mentions an unknown moment")
            if child in parents:
                raise FrameError(f"moment {child} has two parents; the past must be linear")
            parents[child] = parent
        for m in self.moments:
            seen = {m}
            while m in parents:
                m = parents[m]
                if m in seen:
                    raise FrameError("edges contain a cycle")
                seen.add(m)
        object.__setattr__(self, "_parents", parents)
        object.__setattr__(self, "_histories", self._build_histories())
        for (label, moment), vals in self.valuation.items():
            if moment not in moments:
                raise FrameError(f"valuation at unknown moment {moment}")
            if label is not None:
                hist = self.history(label)
                if moment not in hist:
                    raise FrameError(f"moment {moment} is not on history {label}")
            for atom, v in vals.items():
                if TruthValue(v) not in CLASSICAL_VALUES:
                    raise FrameError(f"{render(atom)} at {label}@{moment} must be classical")

    def children(self, moment: str) -> list[str]:
        return sorted(c for p, c in self.edges if p == moment)

    def _build_histories(self) -> list[History]:
        roots = sorted(m for m in self.moments if m not in self._parents)
        paths = []

        def walk(path):
            kids = self.children(path[-1])
            if not kids:
                paths.append(tuple(path))
            for k in kids:
                walk(path + [k])

        for r in roots:
            walk([r])
        by_leaf = {leaf: label for label, leaf in self.history_names.items()}
        for leaf in by_leaf:
            if leaf not in {p[-1] for p in paths}:
                raise FrameError(f"history name points at {leaf}, which is not a leaf")
        out = []
        for i, p in enumerate(paths, 1):
            out.append(History(by_leaf.get(p[-1], f"h{i}"), p))
        return out

    def precedes(self, earlier: str, later: str) -> bool:
        m = later
        while m in self._parents:
            m = self._parents[m]
            if m == earlier:
                return True
        return False

    def all_histories(self) -> list[History]:
        return list(self._histories)

    def history(self, label: str) -> History:
        for h in self._histories:
            if h.label == label:
                return h
        raise FrameError(f"no history labelled {label!r}")

    def histories(self, moment: str) -> list[History]:
        """Maximal chains through ``moment``, in canonical order."""
        if moment not in self.moments:
            raise FrameError(f"unknown moment {moment!r}")
        return [h for h in self._histories if moment in h]

    # -- valuation

    def point_value(self, atom: Formula, history: str | None, moment: str) -> TruthValue:
        for key in ((history, moment), (None, moment)):
            vals = self.valuation.get(key)
            if vals is not None and atom in vals:
                return TruthValue(vals[atom])
        where = f"{history}@{moment}" if history else moment
        raise SemanticError(f"no value for {render(atom)} at {where}")

    def atom_value(self, atom: Formula, moment: str) -> TruthValue:
        """History-independent value of an atom at ``moment``."""
        vals = {self.point_value(atom, h.label, moment) for h in self.histories(moment)}
        if len(vals) != 1:
            raise SemanticError(f"{render(atom)} at {moment} varies across histories")
        return vals.pop()

    def eval_fut(
        self,
        body: Formula,
        moment: str,
        domain=None,
        fam: ConnectiveFamily = ConnectiveFamily.STRONG_KLEENE,
    ) -> TruthValue:
        return eval_fut(body, self, moment, domain=domain, fam=fam)

    def restrict(self, label: str) -> "BranchingFrame":
        """The linear frame made of the single history ``label``."""
        h = self.history(label)
        valuation = {}
        for m in h.moments:
            merged = dict(self.valuation.get((None, m), {}))
            merged.update(self.valuation.get((label, m), {}))
            if merged:
                valuation[(None, m)] = merged
        edges = tuple(zip(h.moments, h.moments[1:]))
        return BranchingFrame(h.moments, edges, valuation, {label: h.moments[-1]}, self.domain)


class _PointAtoms(Mapping):
    """Read-only view of the atom values at one (history, moment) point."""

    def __init__(self, frame: BranchingFrame, history: str, moment: str):
        self.frame, self.history, self.moment = frame, history, moment

    def __getitem__(self, atom):
        return self.frame.point_value(atom, self.history, self.moment)

    def __iter__(self):
        keys = set()
        for key in ((self.history, self.moment), (None, self.moment)):
            keys.update(self.frame.valuation.get(key, {}))
        return iter(sorted(keys, key=render))

    def __len__(self):
        return sum(1 for _ in self)


def eval_fut(
    body: Formula,
    frame: BranchingFrame,
    moment: str,
    domain=None,
    fam: ConnectiveFamily = ConnectiveFamily.STRONG_KLEENE,
) -> TruthValue:
    """Value of ``Fut body`` at ``moment`` by the three history clauses."""
    for g in subformulas(body):
        if isinstance(g, Fut):
            raise SemanticError(f"nested Fut in {render(body)}")
        if isinstance(g, TruePred):
            raise SemanticError(f"True inside Fut in {render(body)}")
    if domain is None or not domain:
        domain = frame.domain or tuple(sorted(constants(body)))
    hists = frame.histories(moment)
    reaches_true, reaches_false = [], []
    for h in hists:
        seen = set()
        for later in h.after(moment):
            point = Model(domain=tuple(domain), atoms=_PointAtoms(frame, h.label, later))
            seen.add(evaluate(body, point, fam))
        if TruthValue.TRUE in seen:
            reaches_true.append(h.label)
        if TruthValue.FALSE in seen:
            reaches_false.append(h.label)
    settled_true = len(reaches_true) == len(hists)
    settled_false = len(reaches_false) == len(hists)
    if settled_true and settled_false:
        both = [lbl for lbl in reaches_true if lbl in reaches_false]
        raise FutConflictError(body, moment, both)
    if settled_true:
        return TruthValue.TRUE
    if settled_false:
        return TruthValue.FALSE
    return TruthValue.HALF


def evaluate_at(
    f: Formula,
    frame: BranchingFrame,
    moment: str,
    ctx: QuotationContext = EMPTY_CONTEXT,
    transparent: bool = True,
    fam: ConnectiveFamily = ConnectiveFamily.STRONG_KLEENE,
) -> TruthValue:
    """Evaluate ``f`` at ``moment``; ``True(n)`` reads its referent when transparent."""
    domain = frame.domain or tuple(sorted(constants(f).union(*(constants(g) for g in ctx.names.values()))))
    m = Model(domain=tuple(domain), ctx=ctx, transparent=transparent, frame=_FamilyFrame(frame, fam), moment=moment)
    return evaluate(f, m, fam)


class _FamilyFrame:
    # lets the evaluator call back into the frame with the active family
    def __init__(self, frame: BranchingFrame, fam: ConnectiveFamily):
        self.frame, self.fam = frame, fam

    def atom_value(self, atom, moment):
        return self.frame.atom_value(atom, moment)

    def eval_fut(self, body, moment, domain=None):
        return eval_fut(body, self.frame, moment, domain=domain, fam=self.fam)


def frame_from_json(data: Mapping, ctx: QuotationContext = EMPTY_CONTEXT) -> BranchingFrame:
    """Read ``{moments, edges, valuation, histories?, domain?}``.

    Valuation keys are ``"h1@t2"`` for one history or ``"t2"`` for all
    histories through ``t2``.
    """
    valuation = {}
    for key, vals in (data.get("valuation") or {}).items():
        label, _, moment = key.rpartition("@")
        atoms = {}
        for text, v in vals.items():
            atom = parse(text, ctx, require_names=False)
            if not is_ground_atom(atom) or not isinstance(atom, Atom):
                raise FrameError(f"frame valuation entry {text!r} must be a plain ground atom")
            atoms[atom] = TruthValue.from_json(v)
        valuation[(label or None, moment)] = atoms
    return BranchingFrame(
        moments=tuple(data["moments"]),
        edges=tuple(tuple(e) for e in data.get("edges", ())),
        valuation=valuation,
        history_names=dict(data.get("histories") or {}),
        domain=tuple(data.get("domain") or ()),
    )


def histories(frame: BranchingFrame, moment: str) -> list[History]:
    return frame.histories(moment)
