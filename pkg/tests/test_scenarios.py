import json
from fractions import Fraction
from importlib import resources

import jsonschema
import pytest

from bridgelab.scenarios import (
    BURIDAN_FIXED, LIAR_SAYS, NOT_PHI_DISJUNCTS, SCENARIOS, ScenarioReport, UnknownScenario,
    bridge_context, golden_text, liar_context, run_scenario,
)
from bridgelab.syntax import Const, TruePred, parse

import oracle

SCHEMA = json.loads(resources.files("bridgelab").joinpath("data", "schema", "scenario.schema.json").read_text())
HALF = Fraction(1, 2)


def fixed(table, ctx):
    return {parse(k, ctx, require_names=False): Fraction(v) for k, v in table.items()}


@pytest.mark.parametrize("name", SCENARIOS)
def test_golden_and_schema(name):
    report = run_scenario(name)
    assert isinstance(report, ScenarioReport)
    assert report.dumps() == golden_text(name)
    jsonschema.validate(json.loads(report.dumps()), SCHEMA)
    assert report.summary and all(isinstance(line, str) for line in report.summary)


@pytest.mark.parametrize("name", SCENARIOS)
def test_deterministic(name):
    assert run_scenario(name).dumps() == run_scenario(name).dumps()


def test_unknown():
    with pytest.raises(UnknownScenario):
        run_scenario("nope")


def test_buridan_report():
    d = run_scenario("buridan").data
    assert d["classicalTransparentModels"] == d["modelsCountedByBatch"] == 2
    assert d["allModelsSatisfyNotPhi"] is True
    assert d["disjunctsWitnessed"] == sorted(NOT_PHI_DISJUNCTS)
    assert d["proof"]["allStepsValid"] is True and d["proof"]["conclusion"] == "~phi"


def test_buridan_against_reference():
    ctx = bridge_context()
    phi = parse("phi", ctx)
    found = list(oracle.models([phi], ("a", "b"), ctx, classical=True, fixed=fixed(BURIDAN_FIXED, ctx)))
    assert len(found) == 2
    assert all(oracle.value(parse("~phi", ctx), v, ("a", "b"), False, ctx) == 1 for v in found)
    witnessed = set()
    for v in found:
        for label, text in NOT_PHI_DISJUNCTS.items():
            if oracle.value(parse(text, ctx), v, ("a", "b"), False, ctx) == 1:
                witnessed.add(label)
    assert witnessed == set(NOT_PHI_DISJUNCTS)


def test_cervantes_report():
    d = run_scenario("cervantes").data
    assert d["sentenceB"] == 0.5
    assert d["values"]["True(b)"] == 0.5 and d["values"]["phi"] == 0.5
    assert d["transparencyViolations"] == []
    assert d["proof"]["allStepsValid"] is True and d["proof"]["family"] == "cooper"
    frame = d["frame"]
    assert frame["histories"] == ["h1", "h2"]
    assert set(frame["values"].values()) == {0.5}
    assert frame["retrospective"]["h1"]["Fut Pun(a)"] == 1
    assert frame["retrospective"]["h2"]["Fut Pun(a)"] == 0
    for vals in frame["retrospective"].values():
        assert vals["Fut Pun(a) | ~Fut Pun(a)"] == 1


def test_cervantes_values_against_reference():
    ctx = bridge_context()
    d = run_scenario("cervantes").data
    val = {parse(k, ctx, require_names=False): Fraction(v) for k, v in d["model"]["atoms"].items()}
    for text, got in d["values"].items():
        assert oracle.value(parse(text, ctx), val, ("a", "b"), True, ctx) == Fraction(got), text


def test_cross_scenario_diff():
    comp = run_scenario("cervantes").data["comparison"]
    assert "phi" in comp["disagreeOn"]
    assert "Says(a,b)" in comp["agreeOn"]


def test_jacquette_report():
    d = run_scenario("jacquette").data
    assert d["proof"]["allStepsValid"] is True
    assert d["simpValues"]["Simp True(b)"] == 0 and d["simpValues"]["Simp ~True(b)"] == 0
    assert d["sRule"]["strong-kleene"]["valid"] and d["sRule"]["cooper"]["valid"]
    for oath in d["starredOath"].values():
        assert oath["strong-kleene"] == 1 and oath["cooper"] == 0.5
    ss = d["lemReductio"]["relations"]["SS"]
    assert (ss["validSteps"], ss["steps"]) == (23, 24)
    assert ss["firstFailure"]["id"] == "s19" and ss["firstFailure"]["rule"] == "Reductio"
    assert d["lemReductio"]["relations"]["ST"]["allStepsValid"] is True


def test_liar_report():
    d = run_scenario("liar-bridge").data
    alone = d["liarAlone"]
    assert alone["classicalTransparentModels"] == 0
    assert alone["admittedValues"] == [0.5]
    dec = d["withDecree"]
    assert dec["classicalTransparentModels"] == 0
    assert dec["threeValuedTransparentModels"] == 27
    assert dec["liarValues"] == [0.5] and dec["decreeValues"] == [0.5]
    v = d["sequent"]["verdicts"]
    assert [v[r]["valid"] for r in ("CL", "SS", "TT", "ST", "TS")] == [True, False, True, True, False]
    assert d["cut"]["allStepsValid"] is True and d["cut"]["rootSequentValid"] is False


def test_liar_decree_against_reference():
    ctx = liar_context()
    phi = parse("phi", ctx)
    liar = TruePred(Const("l"))
    three = list(oracle.models([phi], ("a", "l"), ctx, fixed=fixed(LIAR_SAYS, ctx)))
    two = list(oracle.models([phi], ("a", "l"), ctx, classical=True, fixed=fixed(LIAR_SAYS, ctx)))
    assert len(three) == 27 and two == []
    assert {v[liar] for v in three} == {HALF}
    assert {oracle.value(phi, v, ("a", "l"), False, ctx) for v in three} == {HALF}
