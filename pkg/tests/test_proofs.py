import json
from importlib import resources

import jsonschema
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bridgelab.consequence import Relation, Sequent, valid
from bridgelab.proofs import (
    BUILTIN_PROOFS, Proof, ProofError, Rule, Step, all_valid, builtin_proof, builtin_script,
    check_proof, check_relations, check_syntax, first_failure, load_proof, parse_script,
    proof_report, render_script,
)
from bridgelab.semantics import ConnectiveFamily
from bridgelab.syntax import And, Atom, Cond, Not, Or, parse, render

import oracle

DATA = resources.files("bridgelab").joinpath("data")
CL, SS, TT, ST, TS = Relation.CL, Relation.SS, Relation.TT, Relation.ST, Relation.TS


def liar_cut():
    return parse_script(DATA.joinpath("liar-cut.proof").read_text(), "liar-cut")


def schema(name):
    return json.loads(DATA.joinpath("schema", f"{name}.schema.json").read_text())


@pytest.mark.parametrize("name", BUILTIN_PROOFS)
def test_builtins_are_well_formed(name):
    p = builtin_proof(name)
    assert all(v.syntactic_ok for v in check_syntax(p)), [v.message for v in check_syntax(p) if v.message]


@pytest.mark.parametrize("name", BUILTIN_PROOFS)
def test_script_round_trip(name):
    p = builtin_proof(name)
    again = parse_script(render_script(p), name)
    assert again.steps == p.steps
    assert again.transparent == p.transparent and again.families == p.families


def test_bad_cond_e_shape():
    p = parse_script("s1: Premise A -> B\ns2: Premise B\ns3: CondE [s1, s2] A\n")
    with pytest.raises(ProofError) as err:
        check_proof(p, Relation.CL)
    assert err.value.step_id == "s3"
    assert err.value.line == 3


def test_structural_errors():
    with pytest.raises(ProofError, match="used twice"):
        parse_script("s1: Premise A\ns2: AndI [s1, s1] A & A\n")
    with pytest.raises(ProofError, match="not defined"):
        parse_script("s2: AndE [s1] A\ns1: Premise A & B\n")
    with pytest.raises(ProofError, match="one root"):
        parse_script("s1: Premise A\ns2: Premise B\n")
    p = parse_script("h: Hypothesis A\n")
    with pytest.raises(ProofError, match="undischarged"):
        check_proof(p, Relation.CL)


def test_bicond_intro():
    p = parse_script(
        "s1: Premise A -> B\ns2: Premise B -> A\ns3: BicondI [s1, s2] A <-> B\n"
    )
    vs = check_relations(p, list(Relation))
    assert all(v.syntactic_ok for v in vs)
    assert all_valid(vs, CL) and all_valid(vs, SS)


def test_conditional_intro_and_discharge():
    p = parse_script("h: Hypothesis A & B\ns1: AndE [h] A\ns2: CondI [s1] [discharges h] A & B -> A\n")
    vs = check_proof(p, Relation.TT)
    root = vs[-1]
    assert root.local_sequent.premises == ()
    assert all_valid(vs, TT)


def test_excluded_middle_reductio_splits_strict_and_tolerant():
    p = builtin_proof("lem-reductio")
    vs = check_relations(p, [SS, ST])
    bad = first_failure(vs, SS)
    assert bad.step_id == "s19" and bad.rule is Rule.REDUCTIO
    counter = bad.per_relation[SS].rule.countermodel.to_json()["atoms"]
    assert counter == {"Fut Pun(a)": 0.5, "True(b)": 0.5}
    assert sum(v.per_relation[SS].valid for v in vs) == len(vs) - 1
    assert all_valid(vs, ST)


def test_truth_bridge_tree_is_tolerant_valid_under_cooper():
    for name in ("bridge-future", "bridge-truth"):
        p = builtin_proof(name)
        vs = check_relations(p, [CL, TT, ST, TS])
        assert vs[-1].per_relation[TT].family is ConnectiveFamily.COOPER
        assert all_valid(vs, TT) and all_valid(vs, CL) and all_valid(vs, ST)
        assert first_failure(vs, TS).step_id == "s0"


def test_tolerant_strong_kleene_breaks_modus_ponens_in_the_bridge():
    p = builtin_proof("bridge-future")
    vs = check_proof(p, TT, ConnectiveFamily.STRONG_KLEENE)
    bad = first_failure(vs, TT)
    assert bad is not None and bad.rule is Rule.COND_E


def test_buridan_reductio():
    p = builtin_proof("buridan-reductio")
    assert [render(f, p.ctx) for f in p.open_assumptions(p.step(p.root))] == [
        "Fut Pun(a) | ~Fut Pun(a)", "Says(a,b)"]
    assert render(p.conclusion, p.ctx) == "~phi"
    vs = check_relations(p, [CL, SS, TT, ST])
    assert all_valid(vs, CL) and all_valid(vs, ST)
    assert first_failure(vs, SS).step_id == "s19"
    assert first_failure(vs, TT).step_id == "s18"


def test_church_tautology_by_truth_table():
    p = builtin_proof("church")
    assert render(p.conclusion) == "~S"
    vs = check_relations(p, [CL])
    assert all_valid(vs, CL)
    axiom = p.step("s1").formula
    ok, counter, seen = oracle.check([], axiom, "cl")
    assert ok and seen == 16


def test_jacquette_conditional_proof():
    p = builtin_proof("jacquette")
    vs = check_relations(p, [TT, SS])
    assert all_valid(vs, TT)
    bad = first_failure(vs, SS)
    assert bad.step_id == "s8" and bad.rule is Rule.COND_I
    assert render(p.conclusion, p.ctx) == "~Simp True(b) & ~Simp ~True(b)"


def test_truth_rules_need_transparency():
    p = builtin_proof("bridge-future")
    vs = check_relations(p, [CL], transparent=False)
    tr = [v for v in vs if v.rule in (Rule.TR, Rule.NEG_TR)]
    assert tr and all(not v.per_relation[CL].valid for v in tr)


def test_s_rule_step():
    p = parse_script("name l := ~True(l)\ntransparent\ns1: Premise True(l) <-> ~True(l)\n"
                     "s2: SRule [s1] ~Simp True(l) & ~Simp ~True(l)\n")
    vs = check_relations(p, [CL, SS, TT, ST])
    for r in (SS, TT, ST, CL):
        assert vs[-1].per_relation[r].valid


def test_unknown_builtin():
    with pytest.raises(ProofError, match="unknown built-in"):
        builtin_script("nope")
    with pytest.raises(ProofError):
        load_proof("builtin:nope")


def test_strict_tolerant_is_not_transitive():
    p = liar_cut()
    vs = check_relations(p, [ST])
    assert all_valid(vs, ST)
    root = vs[-1]
    assert render(root.conclusion) == "_|_" and root.local_sequent.premises == ()
    assert not root.per_relation[ST].sequent.valid


@pytest.mark.parametrize("name", BUILTIN_PROOFS)
def test_projection_soundness_on_builtins(name):
    p = builtin_proof(name)
    vs = check_relations(p, [CL, SS, TT])
    for r in (CL, SS, TT):
        if all_valid(vs, r):
            assert vs[-1].per_relation[r].sequent.valid


@pytest.mark.parametrize("name", BUILTIN_PROOFS)
def test_golden_proof_reports(name):
    p = builtin_proof(name)
    rels = list(Relation)
    report = proof_report(p, check_relations(p, rels), rels)
    jsonschema.validate(report, schema("proof"))
    golden = json.loads(DATA.joinpath("golden", f"proof-{name}.json").read_text())
    assert report == golden


# -- randomly built natural-deduction trees

HYPS = {"u": parse("A"), "v": parse("A -> B")}
SMALL = [parse(t) for t in ("A", "B", "~A", "A & B", "A | B", "A -> B")]


@st.composite
def trees(draw, depth=3):
    steps = []
    counter = iter(range(10_000))

    def new_id():
        return f"s{next(counter)}"

    def build(d):
        kinds = ["premise", "hyp"] + (["andi", "ande", "conde", "condi"] if d > 0 else [])
        kind = draw(st.sampled_from(kinds))
        if kind == "premise":
            s = Step(new_id(), Rule.PREMISE, draw(st.sampled_from(SMALL)))
        elif kind == "hyp":
            label = draw(st.sampled_from(sorted(HYPS)))
            s = Step(new_id(), Rule.HYPOTHESIS, HYPS[label], label=label)
        elif kind == "andi":
            a, b = build(d - 1), build(d - 1)
            s = Step(new_id(), Rule.AND_I, And(a.formula, b.formula), (a.id, b.id))
        elif kind == "ande":
            a = build(d - 1)
            if not isinstance(a.formula, And):
                return a
            s = Step(new_id(), Rule.AND_E, draw(st.sampled_from([a.formula.left, a.formula.right])), (a.id,))
        elif kind == "conde":
            minor = build(d - 1)
            target = draw(st.sampled_from(SMALL))
            major = Step(new_id(), Rule.PREMISE, Cond(minor.formula, target))
            steps.append(major)
            s = Step(new_id(), Rule.COND_E, target, (major.id, minor.id))
        else:
            a = build(d - 1)
            open_ = _open(steps, a)
            if not open_:
                return a
            label = draw(st.sampled_from(sorted(open_)))
            s = Step(new_id(), Rule.COND_I, Cond(HYPS[label], a.formula), (a.id,), (label,))
        steps.append(s)
        return s

    top = build(depth)
    for label in sorted(_open(steps, top)):
        top = Step(new_id(), Rule.COND_I, Cond(HYPS[label], top.formula), (top.id,), (label,))
        steps.append(top)
    return Proof("random", tuple(steps))


def _open(steps, s):
    index = {x.id: x for x in steps}
    if s.rule is Rule.HYPOTHESIS:
        return {s.label}
    out = set()
    for c in s.children:
        out |= _open(steps, index[c])
    return out - set(s.discharges)


@settings(max_examples=60, deadline=None)
@given(trees())
def test_projection_soundness_on_random_trees(p):
    assert all(v.syntactic_ok for v in check_syntax(p))
    vs = check_relations(p, [CL, SS, TT])
    # every rule used here is classically sound
    assert all_valid(vs, CL)
    for r in (CL, SS, TT):
        if all_valid(vs, r):
            assert vs[-1].per_relation[r].sequent.valid


@settings(max_examples=40, deadline=None)
@given(trees())
def test_projected_sequent_matches_reference(p):
    root = check_relations(p, [SS, TT])[-1]
    s = root.local_sequent
    for r in (SS, TT):
        ok, _, _ = oracle.check(s.premises, s.conclusion, r.value)
        assert root.per_relation[r].sequent.valid is ok
