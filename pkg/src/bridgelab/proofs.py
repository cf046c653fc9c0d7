"""Natural-deduction proofs: scripts, rule checking and per-step verdicts.

A proof script holds header lines followed by one step per line::

    name b := Fut Pun(a)
    define phi := T & F
    transparent
    family tt cooper
    domain a, b

    s1: Premise phi
    h1: Hypothesis Fut Pun(a)
    s9: OrE [s0, s5, s8] [discharges h1, h2] Fut Pun(a) & ~Fut Pun(a)

Children must be defined before the steps that use them, so script order is
a post-order of the tree.  Indentation is ignored.  The root is the one step
no other step uses.  A hypothesis is labelled by its step id unless
``[label h]`` is given; two leaves may share a label when they carry the same
formula.

Each step is judged twice under a relation.  The *rule* verdict treats the
step as a local metainference: children whose hypotheses are discharged here
contribute premise sequents ``H |- C``, the other children contribute their
conclusions as premises of ``|- C``, and the metainference must hold model
by model.  The *sequent* verdict decides the projection ``open assumptions
|- conclusion`` as a plain sequent.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Sequence

from .consequence import (
    DEFAULT_CAP,
    Relation,
    Sequent,
    Verdict,
    valid,
    valid_local,
)
from .semantics import ConnectiveFamily
from .syntax import (
    EMPTY_CONTEXT,
    And,
    Bicond,
    Cond,
    Const,
    Falsum,
    Forall,
    Formula,
    FormulaError,
    Not,
    Or,
    QuotationContext,
    Simp,
    TruePred,
    constants,
    instantiate,
    parse,
    parse_declaration,
    render,
)


class ProofError(Exception):
    """A malformed proof script or rule application."""

    def __init__(self, message: str, step_id: str | None = None, line: int | None = None):
        self.step_id = step_id
        self.line = line
        where = f"step {step_id}: " if step_id else ""
        where = f"line {line}: {where}" if line else where
        super().__init__(where + message)


class Rule(enum.Enum):
    PREMISE = "Premise"
    HYPOTHESIS = "Hypothesis"
    AXIOM = "Axiom"
    AND_E = "AndE"
    AND_I = "AndI"
    OR_E = "OrE"
    COND_E = "CondE"
    COND_I = "CondI"
    FORALL_E = "ForallE"
    TR = "Tr"
    NEG_TR = "NegTr"
    BICOND_I = "BicondI"
    S_RULE = "SRule"
    EFQ = "EFQ"
    REDUCTIO = "Reductio"


ARITY = {
    Rule.PREMISE: 0,
    Rule.HYPOTHESIS: 0,
    Rule.AXIOM: 0,
    Rule.AND_E: 1,
    Rule.AND_I: 2,
    Rule.OR_E: 3,
    Rule.COND_E: 2,
    Rule.COND_I: 1,
    Rule.FORALL_E: 1,
    Rule.TR: 1,
    Rule.NEG_TR: 1,
    Rule.BICOND_I: 2,
    Rule.S_RULE: 1,
    Rule.EFQ: 1,
    Rule.REDUCTIO: 1,
}

DISCHARGES = {Rule.OR_E: 2, Rule.COND_I: 1, Rule.REDUCTIO: 1}


@dataclass(frozen=True)
class Step:
    id: str
    rule: Rule
    formula: Formula
    children: tuple = ()
    discharges: tuple = ()
    label: str | None = None
    line: int = field(default=0, compare=False)

    @property
    def hypothesis_label(self) -> str:
        return self.label or self.id


@dataclass(frozen=True, eq=False)
class Proof:
    name: str
    steps: tuple
    ctx: QuotationContext = EMPTY_CONTEXT
    transparent: bool = False
    domain: tuple = ()
    families: Mapping = field(default_factory=dict)  # Relation -> default family

    def __post_init__(self):
        index = {}
        used = set()
        for s in self.steps:
            if s.id in index:
                raise ProofError("duplicate step id", s.id, s.line)
            for c in s.children:
                if c not in index:
                    raise ProofError(f"child {c!r} is not defined before this step", s.id, s.line)
                if c in used:
                    raise ProofError(f"step {c!r} is used twice; repeat the leaf instead", s.id, s.line)
                used.add(c)
            index[s.id] = s
        roots = [s.id for s in self.steps if s.id not in used]
        if len(roots) != 1:
            raise ProofError(f"expected exactly one root, found {roots}")
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "root", roots[0])

    def step(self, step_id: str) -> Step:
        try:
            return self._index[step_id]
        except KeyError:
            raise ProofError(f"no step {step_id!r}") from None

    def children(self, step: Step) -> list[Step]:
        return [self._index[c] for c in step.children]

    @property
    def conclusion(self) -> Formula:
        return self.step(self.root).formula

    def family_for(self, relation: Relation) -> ConnectiveFamily:
        return self.families.get(relation, ConnectiveFamily.STRONG_KLEENE)

    # -- assumptions, recomputed from the tree on every call

    def open_hypotheses(self, step: Step) -> dict:
        """Undischarged hypothesis labels above ``step``, mapped to formulas."""
        if step.rule is Rule.HYPOTHESIS:
            return {step.hypothesis_label: step.formula}
        out: dict = {}
        for c in self.children(step):
            out.update(self.open_hypotheses(c))
        for label in step.discharges:
            out.pop(label, None)
        return out

    def premises(self, step: Step) -> list[Formula]:
        """Premise leaves above ``step``, deduplicated in tree order."""
        if step.rule is Rule.PREMISE:
            return [step.formula]
        out: list = []
        for c in self.children(step):
            out.extend(f for f in self.premises(c) if f not in out)
        return out

    def open_assumptions(self, step: Step) -> list[Formula]:
        out = self.premises(step)
        out.extend(f for f in self.open_hypotheses(step).values() if f not in out)
        return out

    def local_sequent(self, step: Step, transparent: bool | None = None) -> Sequent:
        return self._sequent(self.open_assumptions(step), step.formula, transparent)

    def _sequent(self, premises, conclusion, transparent=None) -> Sequent:
        t = self.transparent if transparent is None else transparent
        return Sequent(tuple(premises), conclusion, self.ctx, t, self.domain)

    def metainference(self, step: Step, transparent: bool | None = None) -> tuple[list[Sequent], Sequent]:
        """The step read as ``premise sequents / conclusion sequent``."""
        if step.rule is Rule.AXIOM:
            return [], self._sequent((), step.formula, transparent)
        if not step.children:
            return [], self._sequent((step.formula,), step.formula, transparent)
        closed = self._discharged_by_child(step)
        premise_seqs, side = [], []
        for child, labels in zip(self.children(step), closed):
            if labels:
                hyps = [self._hypothesis_formula(child, lbl) for lbl in labels]
                premise_seqs.append(self._sequent(hyps, child.formula, transparent))
            else:
                side.append(child.formula)
        return premise_seqs, self._sequent(side, step.formula, transparent)

    def _discharged_by_child(self, step: Step) -> list[list[str]]:
        kids = self.children(step)
        if step.rule is Rule.OR_E and len(step.discharges) == 2 and len(kids) == 3:
            return [[], [step.discharges[0]], [step.discharges[1]]]
        return [[lbl for lbl in step.discharges if lbl in self.open_hypotheses(k)] for k in kids]

    def _hypothesis_formula(self, step: Step, label: str) -> Formula:
        try:
            return self.open_hypotheses(step)[label]
        except KeyError:
            raise ProofError(f"hypothesis {label!r} is not open here", step.id, step.line) from None

    def render(self) -> str:
        return render_script(self)


# --------------------------------------------------------------------------
# Script format

_STEP_RE = re.compile(r"^(?P<id>[A-Za-z_][\w\-]*)\s*:\s*(?P<rule>[A-Za-z]+)\s*(?P<rest>.*)$")
_BRACKET_RE = re.compile(r"^\[(?P<body>[^\]]*)\]\s*")
_HEADER_WORDS = {"name", "define", "transparent", "family", "domain"}


def parse_script(text: str, name: str = "proof", ctx: QuotationContext = EMPTY_CONTEXT) -> Proof:
    transparent = False
    families: dict = {}
    domain: list[str] = []
    steps: list[Step] = []
    rules = {r.value.lower(): r for r in Rule}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word = line.split(None, 1)[0]
        if word in _HEADER_WORDS and not steps:
            try:
                ctx, transparent, domain = _header(line, word, ctx, transparent, families, domain)
            except FormulaError as e:
                raise ProofError(str(e), line=lineno) from e
            continue
        m = _STEP_RE.match(line)
        if m is None:
            raise ProofError("expected 'id: Rule [children] formula'", line=lineno)
        rule = rules.get(m["rule"].lower())
        if rule is None:
            raise ProofError(f"unknown rule {m['rule']!r}", m["id"], lineno)
        children, discharges, label = (), (), None
        rest = m["rest"]
        while True:
            b = _BRACKET_RE.match(rest)
            if b is None:
                break
            body = b["body"].strip()
            rest = rest[b.end():]
            head, _, tail = body.partition(" ")
            if head == "discharges":
                discharges = tuple(x.strip() for x in tail.split(",") if x.strip())
            elif head == "label":
                label = tail.strip()
            else:
                children = tuple(x.strip() for x in body.split(",") if x.strip())
        try:
            formula = parse(rest, ctx)
        except FormulaError as e:
            raise ProofError(str(e), m["id"], lineno) from e
        steps.append(Step(m["id"], rule, formula, children, discharges, label, lineno))
    if not steps:
        raise ProofError("proof has no steps")
    names = set(domain)
    for s in steps:
        names |= constants(s.formula)
    if transparent:
        todo = list(names)
        while todo:
            n = todo.pop()
            if n in ctx.names:
                new = constants(ctx.names[n]) - names
                names |= new
                todo.extend(new)
    return Proof(name, tuple(steps), ctx, transparent, tuple(sorted(names)), families)


def _header(line, word, ctx, transparent, families, domain):
    if word in ("name", "define"):
        return parse_declaration(line, ctx), transparent, domain
    parts = line.split()
    if word == "transparent":
        return ctx, True, domain
    if word == "domain":
        return ctx, transparent, domain + [x.strip() for x in line[len("domain"):].split(",") if x.strip()]
    if len(parts) != 3:
        raise FormulaError("expected 'family <relation> <family>'")
    try:
        families[Relation(parts[1].lower())] = ConnectiveFamily(parts[2].lower())
    except ValueError:
        raise FormulaError(f"bad family line {line!r}") from None
    return ctx, transparent, domain


def render_script(p: Proof) -> str:
    """Canonical script text; parses back to an equal proof."""
    lines = []
    for n, f in sorted(p.ctx.names.items()):
        lines.append(f"name {n} := {render(f)}")
    folded = QuotationContext(p.ctx.names, {})
    for d, f in p.ctx.definitions.items():
        lines.append(f"define {d} := {render(f, folded)}")
        folded = folded.with_definitions(**{d: f})
    if p.transparent:
        lines.append("transparent")
    for r, fam in sorted(p.families.items(), key=lambda kv: kv[0].value):
        lines.append(f"family {r.value} {fam.value}")
    if p.domain:
        lines.append("domain " + ", ".join(p.domain))
    lines.append("")
    for s in p.steps:
        parts = [f"{s.id}: {s.rule.value}"]
        if s.children:
            parts.append("[" + ", ".join(s.children) + "]")
        if s.discharges:
            parts.append("[discharges " + ", ".join(s.discharges) + "]")
        if s.label:
            parts.append(f"[label {s.label}]")
        parts.append(render(s.formula, p.ctx))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Rule side conditions


def _is_contradiction(f: Formula) -> bool:
    return isinstance(f, Falsum) or (isinstance(f, And) and f.right == Not(f.left))


def _strips_to(general: Formula, target: Formula, consts) -> bool:
    """Does removing one or more leading universals from ``general`` yield ``target``?"""
    if not isinstance(general, Forall):
        return False
    for c in consts:
        inst = instantiate(general.body, general.var, Const(c))
        if inst == target or _strips_to(inst, target, consts):
            return True
    return False


def _transparent_pair(p: Proof, plain: Formula, quoted: Formula) -> bool:
    return (
        isinstance(quoted, TruePred)
        and isinstance(quoted.arg, Const)
        and quoted.arg.name in p.ctx.names
        and p.ctx.names[quoted.arg.name] == plain
    )


def _rule_problem(p: Proof, s: Step) -> str | None:
    """``None`` when the step is a correct application of its rule."""
    kids = [k.formula for k in p.children(s)]
    if len(kids) != ARITY[s.rule]:
        return f"{s.rule.value} takes {ARITY[s.rule]} input(s), got {len(kids)}"
    want = DISCHARGES.get(s.rule, 0)
    if len(s.discharges) != want:
        return f"{s.rule.value} discharges {want} hypothesis label(s), got {len(s.discharges)}"
    if s.label and s.rule is not Rule.HYPOTHESIS:
        return "only hypotheses carry labels"
    c = s.formula
    r = s.rule
    if r in (Rule.PREMISE, Rule.HYPOTHESIS):
        return None
    if r is Rule.AXIOM:
        v = valid(p._sequent((), c, transparent=False), Relation.CL)
        return None if v.valid else "axiom is not a classical tautology"
    if r is Rule.AND_E:
        a = kids[0]
        if not isinstance(a, And) or c not in (a.left, a.right):
            return "AndE expects A & B and concludes A or B"
        return None
    if r is Rule.AND_I:
        return None if c == And(kids[0], kids[1]) else "AndI expects A, B and concludes A & B"
    if r is Rule.OR_E:
        major, left, right = kids
        if not isinstance(major, Or):
            return "OrE expects A | B as its first input"
        if left != c or right != c:
            return "OrE expects both case derivations to reach the conclusion"
        h1, h2 = s.discharges
        hyps1 = p.open_hypotheses(p.step(s.children[1]))
        hyps2 = p.open_hypotheses(p.step(s.children[2]))
        if hyps1.get(h1) != major.left:
            return f"OrE: hypothesis {h1} must be open in the second input as {render(major.left, p.ctx)}"
        if hyps2.get(h2) != major.right:
            return f"OrE: hypothesis {h2} must be open in the third input as {render(major.right, p.ctx)}"
        return None
    if r is Rule.COND_E:
        major, minor = kids
        if not isinstance(major, Cond) or major.left != minor or major.right != c:
            return "CondE expects A -> B and A, and concludes B"
        return None
    if r is Rule.COND_I:
        h = p.open_hypotheses(p.step(s.children[0])).get(s.discharges[0])
        if h is None:
            return f"CondI: hypothesis {s.discharges[0]} is not open in its input"
        return None if c == Cond(h, kids[0]) else "CondI discharges A above B and concludes A -> B"
    if r is Rule.REDUCTIO:
        h = p.open_hypotheses(p.step(s.children[0])).get(s.discharges[0])
        if h is None:
            return f"Reductio: hypothesis {s.discharges[0]} is not open in its input"
        if not isinstance(kids[0], Falsum) or c != Not(h):
            return "Reductio discharges A above _|_ and concludes ~A"
        return None
    if r is Rule.FORALL_E:
        consts = sorted(set(p.domain) | constants(c))
        return None if _strips_to(kids[0], c, consts) else "ForallE instantiates leading universals with constants"
    if r is Rule.TR:
        a = kids[0]
        if _transparent_pair(p, a, c) or _transparent_pair(p, c, a):
            return None
        return "Tr moves between A and True(n) where n names A"
    if r is Rule.NEG_TR:
        a = kids[0]
        if isinstance(a, Not) and isinstance(c, Not):
            if _transparent_pair(p, a.sub, c.sub) or _transparent_pair(p, c.sub, a.sub):
                return None
        return "NegTr moves between ~A and ~True(n) where n names A"
    if r is Rule.BICOND_I:
        x, y = kids
        if isinstance(x, Cond) and y == Cond(x.right, x.left) and c == Bicond(x.left, x.right):
            return None
        return "BicondI expects A -> B and B -> A, and concludes A <-> B"
    if r is Rule.S_RULE:
        a = kids[0]
        if isinstance(a, Bicond) and a.right == Not(a.left):
            if c == And(Not(Simp(a.left)), Not(Simp(Not(a.left)))):
                return None
        return "SRule expects A <-> ~A and concludes ~Simp A & ~Simp ~A"
    if r is Rule.EFQ:
        return None if _is_contradiction(kids[0]) else "EFQ expects _|_ or A & ~A"
    raise AssertionError(r)


@dataclass
class RelationCheck:
    family: ConnectiveFamily
    transparent: bool
    rule: Verdict
    sequent: Verdict

    @property
    def valid(self) -> bool:
        return self.rule.valid

    def to_json(self) -> dict:
        out = {"family": self.family.value, "transparent": self.transparent}
        out.update(self.rule.to_json())
        out["sequent"] = self.sequent.to_json()
        return out


@dataclass
class StepVerdict:
    step_id: str
    rule: Rule
    conclusion: Formula
    local_sequent: Sequent
    syntactic_ok: bool
    message: str | None = None
    per_relation: dict = field(default_factory=dict)  # Relation -> RelationCheck

    def to_json(self, ctx: QuotationContext | None = None) -> dict:
        out = {
            "id": self.step_id,
            "rule": self.rule.value,
            "conclusion": render(self.conclusion, ctx),
            "localSequent": self.local_sequent.render(),
            "syntacticOk": self.syntactic_ok,
        }
        if self.message:
            out["message"] = self.message
        if self.per_relation:
            out["relations"] = {r.name: chk.to_json() for r, chk in self.per_relation.items()}
        return out


def check_syntax(p: Proof) -> list[StepVerdict]:
    """Rule side conditions and discharge bookkeeping for every step."""
    out = []
    labels: dict = {}
    for s in p.steps:
        problem = _rule_problem(p, s)
        if problem is None and s.rule is Rule.HYPOTHESIS:
            prev = labels.setdefault(s.hypothesis_label, s.formula)
            if prev != s.formula:
                problem = f"label {s.hypothesis_label} already names {render(prev, p.ctx)}"
        if problem is None and s.id == p.root:
            left = p.open_hypotheses(s)
            if left:
                problem = f"undischarged hypotheses at the root: {', '.join(sorted(left))}"
        out.append(StepVerdict(s.id, s.rule, s.formula, p.local_sequent(s), problem is None, problem))
    return out


def check_proof(
    p: Proof,
    relation: Relation,
    fam: ConnectiveFamily | None = None,
    transparent: bool | None = None,
    cap: int = DEFAULT_CAP,
) -> list[StepVerdict]:
    """Per-step verdicts under ``relation``; raises :class:`ProofError` on a bad rule application."""
    return check_relations(p, [relation], {relation: fam} if fam else None, transparent, cap)


def check_relations(
    p: Proof,
    relations: Sequence[Relation],
    families: Mapping | None = None,
    transparent: bool | None = None,
    cap: int = DEFAULT_CAP,
) -> list[StepVerdict]:
    verdicts = check_syntax(p)
    for v in verdicts:
        if not v.syntactic_ok:
            raise ProofError(v.message, v.step_id, p.step(v.step_id).line)
    t = p.transparent if transparent is None else transparent
    for v in verdicts:
        s = p.step(v.step_id)
        premise_seqs, concl = p.metainference(s, t)
        projected = p.local_sequent(s, t)
        v.local_sequent = projected
        for r in relations:
            fam = (families or {}).get(r) or p.family_for(r)
            v.per_relation[r] = RelationCheck(
                fam, t,
                valid_local(premise_seqs, concl, r, fam, cap),
                valid(projected, r, fam, cap),
            )
    return verdicts


def first_failure(verdicts: Sequence[StepVerdict], relation: Relation) -> StepVerdict | None:
    for v in verdicts:
        if not v.per_relation[relation].valid:
            return v
    return None


def all_valid(verdicts: Sequence[StepVerdict], relation: Relation) -> bool:
    return first_failure(verdicts, relation) is None


def proof_report(p: Proof, verdicts: Sequence[StepVerdict], relations: Sequence[Relation]) -> dict:
    summary = {}
    for r in relations:
        bad = first_failure(verdicts, r)
        root_check = next(v for v in verdicts if v.step_id == p.root).per_relation[r]
        summary[r.name] = {
            "family": root_check.family.value,
            "allStepsValid": bad is None,
            "firstFailure": None if bad is None else bad.step_id,
            "rootSequentValid": root_check.sequent.valid,
        }
    root = p.step(p.root)
    return {
        "proof": p.name,
        "conclusion": render(p.conclusion, p.ctx),
        "openAssumptions": [render(f, p.ctx) for f in p.open_assumptions(root)],
        "transparent": next(iter(verdicts)).per_relation[relations[0]].transparent if relations else p.transparent,
        "summary": summary,
        "steps": [v.to_json(p.ctx) for v in verdicts],
    }


# --------------------------------------------------------------------------
# Built-in corpus

BUILTIN_PROOFS = ("bridge-future", "bridge-truth", "buridan-reductio", "jacquette", "lem-reductio", "church")


def builtin_script(name: str) -> str:
    if name not in BUILTIN_PROOFS:
        raise ProofError(f"unknown built-in proof {name!r}; choose from {', '.join(BUILTIN_PROOFS)}")
    return resources.files("bridgelab").joinpath("data", f"{name}.proof").read_text()


def builtin_proof(name: str) -> Proof:
    return parse_script(builtin_script(name), name)


def load_proof(path_or_builtin: str) -> Proof:
    if path_or_builtin.startswith("builtin:"):
        return builtin_proof(path_or_builtin[len("builtin:"):])
    with open(path_or_builtin) as fh:
        text = fh.read()
    stem = path_or_builtin.rsplit("/", 1)[-1].removesuffix(".proof")
    return parse_script(text, stem)
