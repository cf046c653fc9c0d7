"""Ready-to-run analyses of the Bridge: Buridan, Cervantes, Jacquette, and the Liar variant.

Every reported value is computed when the scenario runs; nothing in a report
is copied from a table of expected answers.  Reports are plain dicts whose
key order is fixed, so ``json.dumps`` output is byte-stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .consequence import (
    Relation,
    Sequent,
    count_models,
    enumerate_models,
    signature_for,
    valid,
)
from .proofs import all_valid, builtin_proof, check_proof, check_relations, first_failure, parse_script
from .semantics import (
    ConnectiveFamily,
    Model,
    TruthValue,
    check_transparency,
    evaluate,
    model_from_json,
)
from .syntax import Const, QuotationContext, TruePred, parse, parse_context, render
from .temporal import evaluate_at, frame_from_json

SCENARIOS = ("buridan", "cervantes", "jacquette", "liar-bridge")

SK = ConnectiveFamily.STRONG_KLEENE
COOPER = ConnectiveFamily.COOPER

# Buridan's background: Socrates (a) speaks b and nothing else is said;
# only Plato's future act and the truth of b are left open.
BURIDAN_FIXED = {
    "Says(a,a)": 0,
    "Says(a,b)": 1,
    "Says(b,a)": 0,
    "Says(b,b)": 0,
    "True(a)": 0,
    "Fut Pun(b)": 0,
}

# the two ways the decree can be broken
NOT_PHI_DISJUNCTS = {
    "true speaker punished": "exists x. exists y. (Says(x,y) & True(y) & Fut Pun(x))",
    "false speaker spared": "exists x. exists y. (Says(x,y) & ~True(y) & ~Fut Pun(x))",
}

# the decree restated with "true simpliciter"
STARRED_OATH = {
    "spare simpliciter": "forall x. forall y. (Says(x,y) -> (Simp True(y) -> ~Fut Pun(x)))",
    "punish simpliciter": "forall x. forall y. (Says(x,y) -> (Simp ~True(y) -> Fut Pun(x)))",
}

LIAR_SAYS = {"Says(a,a)": 0, "Says(a,l)": 1, "Says(l,a)": 0, "Says(l,l)": 0}


class UnknownScenario(KeyError):
    pass


@dataclass
class ScenarioReport:
    name: str
    data: dict
    summary: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"scenario": self.name, "summary": list(self.summary), **self.data}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"

    def text(self) -> str:
        return "\n".join([f"scenario {self.name}", *(f"  {line}" for line in self.summary)]) + "\n"


# --------------------------------------------------------------------------
# Data files


def data_text(filename: str) -> str:
    return resources.files("bridgelab").joinpath("data", filename).read_text()


def bridge_context() -> QuotationContext:
    return parse_context(data_text("bridge.ctx"))


def liar_context() -> QuotationContext:
    return parse_context(data_text("liar.ctx"))


def half_model() -> Model:
    """The model where Plato's future act, and so b, is 1/2."""
    return model_from_json(json.loads(data_text("cervantes.model.json")))


def bridge_frame(ctx: QuotationContext | None = None):
    return frame_from_json(json.loads(data_text("bridge.frame.json")), ctx or bridge_context())


def _atoms(table: dict, ctx: QuotationContext) -> dict:
    return {parse(k, ctx, require_names=False): TruthValue.from_json(v) for k, v in table.items()}


def _values(m: Model, texts, fam) -> dict:
    return {t: evaluate(parse(t, m.ctx), m, fam).to_json() for t in texts}


def _fmt(v) -> str:
    return {0: "0", 0.5: "1/2", 1: "1"}[v]


# --------------------------------------------------------------------------
# Buridan


def buridan_models(ctx: QuotationContext | None = None) -> tuple:
    """Classical transparent completions of Buridan's background."""
    ctx = ctx or bridge_context()
    phi = parse("phi", ctx)
    sig = signature_for([phi], ctx, transparent=True, domain=("a", "b"), fixed=_atoms(BURIDAN_FIXED, ctx))
    models = list(enumerate_models(sig, ctx, transparent=True, classical=True))
    return sig, models


def _buridan() -> ScenarioReport:
    ctx = bridge_context()
    sig, models = buridan_models(ctx)
    batch_count = count_models(sig, ctx, transparent=True, classical=True)
    completions = []
    for m in models:
        entry = {render(a): v.to_json() for a, v in sorted(m.atoms.items(), key=lambda kv: render(kv[0])) if a in sig.atoms}
        entry["phi"] = evaluate(parse("phi", ctx), m).to_json()
        entry["~phi"] = evaluate(parse("~phi", ctx), m).to_json()
        entry["disjuncts"] = {k: evaluate(parse(t, ctx), m).to_json() for k, t in NOT_PHI_DISJUNCTS.items()}
        completions.append(entry)
    all_not_phi = bool(models) and all(c["~phi"] == 1 for c in completions)
    witnessed = sorted({k for c in completions for k, v in c["disjuncts"].items() if v == 1})

    proof = builtin_proof("buridan-reductio")
    verdicts = check_proof(proof, Relation.CL)
    proof_ok = all_valid(verdicts, Relation.CL)
    root = proof.step(proof.root)

    data = {
        "signature": sig.to_json(),
        "names": {n: render(f) for n, f in sorted(ctx.names.items())},
        "classicalTransparentModels": len(models),
        "modelsCountedByBatch": batch_count,
        "completions": completions,
        "allModelsSatisfyNotPhi": all_not_phi,
        "disjunctsWitnessed": witnessed,
        "proof": {
            "name": proof.name,
            "relation": Relation.CL.name,
            "conclusion": render(proof.conclusion, proof.ctx),
            "openAssumptions": [render(f, proof.ctx) for f in proof.open_assumptions(root)],
            "allStepsValid": proof_ok,
        },
    }
    summary = [
        f"~phi holds in all {len(models)} classical transparent completions"
        if all_not_phi else f"~phi fails in some of the {len(models)} classical transparent completions",
        "completions: " + "; ".join(
            ", ".join(f"{k}={_fmt(v)}" for k, v in c.items() if k not in ("phi", "~phi", "disjuncts"))
            for c in completions
        ),
        "broken clause per completion: " + ", ".join(witnessed),
        f"buridan-reductio under CL: {'all steps valid' if proof_ok else 'some step invalid'}, concluding {data['proof']['conclusion']}",
    ]
    return ScenarioReport("buridan", data, summary)


# --------------------------------------------------------------------------
# Cervantes


def _cervantes() -> ScenarioReport:
    m = half_model()
    ctx = m.ctx
    violations = check_transparency(m, COOPER)
    b_value = evaluate(ctx.referent("b"), m, COOPER).to_json()
    values = _values(m, [
        "Says(a,b)",
        "Fut Pun(a)",
        "True(b)",
        "Says(a,b) -> (True(b) -> ~Fut Pun(a))",
        "Says(a,b) -> (~True(b) -> Fut Pun(a))",
        "spare",
        "punish",
        "phi",
        "Fut Pun(a) | ~Fut Pun(a)",
    ], COOPER)

    proof = builtin_proof("bridge-future")
    verdicts = check_proof(proof, Relation.TT, COOPER, transparent=True)
    steps = {v.step_id: v.per_relation[Relation.TT].valid for v in verdicts}
    proof_ok = all(steps.values())

    frame = bridge_frame(ctx)
    probes = ["Fut Pun(a)", "Fut Pun(a) | ~Fut Pun(a)", "True(b) | ~True(b)"]
    at_root = {t: evaluate_at(parse(t, ctx), frame, "t0", ctx).to_json() for t in probes}
    retrospective = {}
    for h in frame.histories("t0"):
        line = frame.restrict(h.label)
        retrospective[h.label] = {t: evaluate_at(parse(t, ctx), line, "t0", ctx).to_json() for t in probes}

    _, classical = buridan_models(bridge_context())
    phi = parse("phi", ctx)
    buridan_phi = sorted({evaluate(phi, cm).to_json() for cm in classical})
    buridan_says = sorted({evaluate(parse("Says(a,b)", ctx), cm).to_json() for cm in classical})
    diff = {
        "phi": {"buridan": buridan_phi, "cervantes": values["phi"]},
        "Says(a,b)": {"buridan": buridan_says, "cervantes": values["Says(a,b)"]},
    }
    disagree = sorted(k for k, d in diff.items() if d["buridan"] != [d["cervantes"]])
    agree = sorted(k for k in diff if k not in disagree)

    data = {
        "family": COOPER.value,
        "transparent": True,
        "model": m.to_json(),
        "transparencyViolations": [v.to_json() for v in violations],
        "sentenceB": b_value,
        "values": values,
        "proof": {
            "name": proof.name,
            "relation": Relation.TT.name,
            "family": COOPER.value,
            "allStepsValid": proof_ok,
            "steps": steps,
        },
        "frame": {
            "moment": "t0",
            "histories": [h.label for h in frame.histories("t0")],
            "values": at_root,
            "retrospective": retrospective,
        },
        "comparison": {"values": diff, "disagreeOn": disagree, "agreeOn": agree},
    }
    summary = [
        f"1/2 model (Cooper, transparent): b = {_fmt(b_value)}, True(b) = {_fmt(values['True(b)'])}, phi = {_fmt(values['phi'])}",
        "transparency: " + ("satisfied" if not violations else f"{len(violations)} violation(s)"),
        f"bridge-future under TT/Cooper: {'every step valid' if proof_ok else 'some step invalid'}",
        "branching frame at t0: " + ", ".join(f"{k} = {_fmt(v)}" for k, v in at_root.items()),
        "inside each history: " + "; ".join(
            f"{h}: " + ", ".join(f"{k} = {_fmt(v)}" for k, v in vals.items()) for h, vals in retrospective.items()
        ),
        f"against buridan: disagree on {', '.join(disagree) or 'nothing'}; agree on {', '.join(agree) or 'nothing'}",
    ]
    return ScenarioReport("cervantes", data, summary)


# --------------------------------------------------------------------------
# Jacquette


def s_rule_check(fam: ConnectiveFamily = SK):
    """``A <-> ~A |- ~Simp A & ~Simp ~A`` under TT for a bare atom ``A``."""
    seq = Sequent((parse("A <-> ~A"),), parse("~Simp A & ~Simp ~A"))
    return seq, valid(seq, Relation.TT, fam)


def _jacquette() -> ScenarioReport:
    m = half_model()
    ctx = m.ctx

    proof = builtin_proof("jacquette")
    verdicts = check_proof(proof, Relation.TT, COOPER, transparent=True)
    proof_ok = all_valid(verdicts, Relation.TT)

    simp = _values(m, ["Simp True(b)", "Simp ~True(b)", "~Simp True(b) & ~Simp ~True(b)"], COOPER)
    s_rule = {}
    for fam in (SK, COOPER):
        seq, v = s_rule_check(fam)
        s_rule[fam.value] = {"sequent": seq.render(), **v.to_json()}
    starred = {
        k: {
            "formula": t,
            SK.value: evaluate(parse(t, ctx), m, SK).to_json(),
            COOPER.value: evaluate(parse(t, ctx), m, COOPER).to_json(),
        }
        for k, t in STARRED_OATH.items()
    }

    lem = builtin_proof("lem-reductio")
    lem_verdicts = check_relations(lem, [Relation.SS, Relation.ST], transparent=True)
    by_relation = {}
    for r in (Relation.SS, Relation.ST):
        bad = first_failure(lem_verdicts, r)
        entry = {
            "family": lem_verdicts[0].per_relation[r].family.value,
            "allStepsValid": bad is None,
            "firstFailure": None,
            "validSteps": sum(v.per_relation[r].valid for v in lem_verdicts),
            "steps": len(lem_verdicts),
        }
        if bad is not None:
            chk = bad.per_relation[r]
            entry["firstFailure"] = {
                "id": bad.step_id,
                "rule": bad.rule.value,
                "isRoot": bad.step_id == lem.root,
                "countermodel": chk.rule.countermodel.to_json(),
            }
        by_relation[r.name] = entry
    root = lem.step(lem.root)
    root_seq = lem.local_sequent(root, True)
    root_verdicts = {r.name: valid(root_seq, r, SK).to_json() for r in (Relation.SS, Relation.ST)}

    data = {
        "proof": {
            "name": proof.name,
            "relation": Relation.TT.name,
            "family": COOPER.value,
            "conclusion": render(proof.conclusion, proof.ctx),
            "allStepsValid": proof_ok,
        },
        "simpValues": simp,
        "sRule": s_rule,
        "starredOath": starred,
        "lemReductio": {
            "conclusion": render(lem.conclusion, lem.ctx),
            "relations": by_relation,
            "rootSequent": {"sequent": root_seq.render(), "verdicts": root_verdicts},
        },
    }
    ss = by_relation["SS"]
    fail = ss["firstFailure"]
    summary = [
        f"jacquette under TT/Cooper: {'every step valid' if proof_ok else 'some step invalid'}, concluding {data['proof']['conclusion']}",
        f"in the 1/2 model: Simp True(b) = {_fmt(simp['Simp True(b)'])}, Simp ~True(b) = {_fmt(simp['Simp ~True(b)'])}",
        "S-rule under TT: " + ", ".join(f"{k} {'valid' if v['valid'] else 'invalid'}" for k, v in s_rule.items()),
        "starred oath in the 1/2 model (strong Kleene): " + ", ".join(f"{k} = {_fmt(v[SK.value])}" for k, v in starred.items()),
        "lem-reductio under SS: " + (
            "every step valid" if fail is None
            else f"{ss['validSteps']}/{ss['steps']} steps valid, first failure {fail['id']} ({fail['rule']})"
        ),
        "lem-reductio under ST: " + ("every step valid" if by_relation["ST"]["allStepsValid"] else "some step invalid"),
        "root sequent " + root_seq.render() + ": " + ", ".join(
            f"{k} {'valid' if v['valid'] else 'invalid'}" for k, v in root_verdicts.items()
        ),
    ]
    return ScenarioReport("jacquette", data, summary)


# --------------------------------------------------------------------------
# The Liar inside the Bridge


def _liar_bridge() -> ScenarioReport:
    ctx = liar_context()
    t_liar = TruePred(Const("l"))

    alone = signature_for([t_liar], ctx, transparent=True)
    alone_classical = count_models(alone, ctx, transparent=True, classical=True)
    alone_three = [m.atoms[t_liar].to_json() for m in enumerate_models(alone, ctx, transparent=True)]
    unsolvable = [v.to_json() for v in check_transparency(
        Model(domain=alone.domain, atoms={t_liar: TruthValue.HALF}, ctx=ctx, transparent=True), SK, classical=True)]

    phi = parse("phi", ctx)
    decree = signature_for([phi], ctx, transparent=True, domain=("a", "l"), fixed=_atoms(LIAR_SAYS, ctx))
    decree_classical = count_models(decree, ctx, transparent=True, classical=True)
    decree_models = list(enumerate_models(decree, ctx, transparent=True))
    liar_values = sorted({m.atoms[t_liar].to_json() for m in decree_models})
    phi_values = sorted({evaluate(phi, m, SK).to_json() for m in decree_models})

    half = Model(domain=alone.domain, atoms={t_liar: TruthValue.HALF}, ctx=ctx, transparent=True)
    simp = _values(half, ["Simp True(l)", "Simp ~True(l)"], SK)

    seq = Sequent((), parse("True(l) <-> ~True(l)", ctx), ctx, True)
    verdicts = {r.name: valid(seq, r, SK).to_json() for r in Relation}

    cut = parse_script(data_text("liar-cut.proof"), "liar-cut")
    cut_verdicts = check_proof(cut, Relation.ST)
    cut_root = cut.local_sequent(cut.step(cut.root))

    data = {
        "names": {n: render(f) for n, f in sorted(ctx.names.items())},
        "liarAlone": {
            "signature": alone.to_json(),
            "classicalTransparentModels": alone_classical,
            "threeValuedTransparentModels": len(alone_three),
            "admittedValues": alone_three,
            "classicalCheck": unsolvable,
        },
        "withDecree": {
            "signature": decree.to_json(),
            "classicalTransparentModels": decree_classical,
            "threeValuedTransparentModels": len(decree_models),
            "liarValues": liar_values,
            "decreeValues": phi_values,
        },
        "simpValues": simp,
        "sequent": {"sequent": seq.render(), "family": SK.value, "verdicts": verdicts},
        "cut": {
            "proof": cut.name,
            "relation": Relation.ST.name,
            "allStepsValid": all_valid(cut_verdicts, Relation.ST),
            "rootSequent": cut_root.render(),
            "rootSequentValid": valid(cut_root, Relation.ST).valid,
        },
    }
    admitted = "1/2 model admitted" if alone_three == [0.5] else f"admitted values {alone_three}"
    no_classical = alone_classical == 0 and decree_classical == 0
    summary = [
        ("no classical transparent model; " if no_classical else "a classical transparent model exists; ") + admitted,
        f"with the decree: {decree_classical} classical models, {len(decree_models)} three-valued models, True(l) in {{{', '.join(_fmt(v) for v in liar_values)}}}",
        f"decree values with the Liar: {{{', '.join(_fmt(v) for v in phi_values)}}}",
        f"Simp True(l) = {_fmt(simp['Simp True(l)'])}, Simp ~True(l) = {_fmt(simp['Simp ~True(l)'])}",
        seq.render() + ": " + ", ".join(
            f"{k} {'valid' if v['valid'] else 'invalid'}" + (" (no models)" if v["modelsChecked"] == 0 else "")
            for k, v in verdicts.items()
        ),
        f"liar-cut under ST: {'every step valid' if data['cut']['allStepsValid'] else 'some step invalid'}, "
        f"root {cut_root.render()} {'valid' if data['cut']['rootSequentValid'] else 'invalid'}",
    ]
    return ScenarioReport("liar-bridge", data, summary)


_RUNNERS = {
    "buridan": _buridan,
    "cervantes": _cervantes,
    "jacquette": _jacquette,
    "liar-bridge": _liar_bridge,
}


def run_scenario(name: str) -> ScenarioReport:
    try:
        runner = _RUNNERS[name]
    except KeyError:
        raise UnknownScenario(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}") from None
    return runner()


def golden_text(name: str) -> str:
    if name not in SCENARIOS:
        raise UnknownScenario(name)
    return data_text(f"golden/{name}.json")
