import itertools

import pytest
from hypothesis import given, settings

from bridgelab.semantics import (
    CLASSICAL_VALUES, VALUES, F, H, T, ConnectiveFamily, Model, SemanticError, Standard, TruthValue,
    bochvar_simp, check_transparency, cond, designated, evaluate, model_from_json, unsolvable_names,
)
from bridgelab.syntax import Atom, Const, Simp, TruePred, parse, parse_context

import oracle
from strategies import propositional

SK = ConnectiveFamily.STRONG_KLEENE
COOPER = ConnectiveFamily.COOPER

CERVANTES = {
    "domain": ["a", "b"],
    "names": {"b": "Fut Pun(a)"},
    "definitions": {
        "spare": "forall x. forall y. (Says(x,y) -> (True(y) -> ~Fut Pun(x)))",
        "punish": "forall x. forall y. (Says(x,y) -> (~True(y) -> Fut Pun(x)))",
        "phi": "spare & punish",
    },
    "atoms": {
        "Says(a,a)": 0, "Says(a,b)": 1, "Says(b,a)": 0, "Says(b,b)": 0,
        "Fut Pun(a)": 0.5, "Fut Pun(b)": 0, "True(a)": 0,
    },
    "transparent": True,
}


def prop_model(**vals):
    return Model(atoms={Atom(k): v for k, v in vals.items()})


def test_truth_value_encoding():
    assert [int(v) for v in VALUES] == [0, 1, 2]
    assert [v.to_json() for v in VALUES] == [0, 0.5, 1]
    assert TruthValue.from_json(0.5) is H
    assert str(H) == "1/2"
    with pytest.raises(ValueError):
        TruthValue.from_json(0.25)


def test_cooper_conditional_clauses():
    assert cond(H, F, COOPER) is F
    assert cond(F, T, COOPER) is H
    assert cond(T, T, COOPER) is T


def test_excluded_middle_at_half():
    assert evaluate(parse("A | ~A"), prop_model(A=H)) is H


def test_cervantes_decree_is_half():
    m = model_from_json(CERVANTES)
    assert evaluate(parse("phi", m.ctx), m, COOPER) is H
    assert evaluate(parse("True(b)", m.ctx), m, COOPER) is H
    assert evaluate(parse("Says(a,b)", m.ctx), m, COOPER) is T
    assert evaluate(parse("Says(a,b) -> (True(b) -> ~Fut Pun(a))", m.ctx), m, COOPER) is H


def test_bochvar_simp_table():
    assert [bochvar_simp(v) for v in (T, H, F)] == [T, F, F]


def test_designation():
    assert designated(H, Standard.TOLERANT)
    assert not designated(H, Standard.STRICT)
    assert not designated(F, Standard.TOLERANT)
    assert designated(T, Standard.CLASSICAL_TRUE)


def test_cervantes_model_is_transparent():
    m = model_from_json(dict(CERVANTES, atoms=dict(CERVANTES["atoms"], **{"True(b)": 0.5})))
    assert check_transparency(m, COOPER) == []


def test_transparency_mismatch_reported():
    ctx = parse_context("name b := Fut Pun(a)")
    m = Model(domain=("a",), atoms={TruePred(Const("b")): T, parse("Fut Pun(a)"): F}, ctx=ctx, transparent=True)
    [v] = check_transparency(m)
    assert (v.name, v.kind, v.lhs, v.rhs) == ("b", "mismatch", T, F)


def test_liar_has_only_the_half_solution():
    ctx = parse_context("name l := ~True(l)")
    tl = TruePred(Const("l"))
    solutions = [v for v in VALUES
                 if not check_transparency(Model(atoms={tl: v}, ctx=ctx, transparent=True))]
    assert solutions == [H]
    assert unsolvable_names(ctx, values=CLASSICAL_VALUES) == ["l"]
    assert unsolvable_names(ctx, values=VALUES) == []
    m = Model(atoms={tl: H}, ctx=ctx, transparent=True)
    assert [v.kind for v in check_transparency(m, classical=True)] == ["no-classical-solution"]


def test_truth_reads_referent_when_transparent():
    ctx = parse_context("name b := Fut Pun(a)")
    m = Model(domain=("a",), atoms={parse("Fut Pun(a)"): H}, ctx=ctx, transparent=True)
    assert evaluate(parse("True(b)", ctx), m) is H
    opaque = Model(domain=("a",), atoms=m.atoms, ctx=ctx, transparent=False)
    with pytest.raises(SemanticError):
        evaluate(parse("True(b)", ctx), opaque)


def test_circular_truth_without_entry_is_an_error():
    ctx = parse_context("name l := ~True(l)")
    with pytest.raises(SemanticError):
        evaluate(parse("True(l)", ctx), Model(ctx=ctx, transparent=True))


def test_errors():
    with pytest.raises(SemanticError):
        evaluate(parse("Pun(c)"), Model(domain=("a",), atoms={parse("Pun(a)"): T}))
    with pytest.raises(SemanticError):
        evaluate(parse("Fut (Pun(a) & Pun(a))"), Model(domain=("a",), atoms={parse("Pun(a)"): T}))
    with pytest.raises(SemanticError):
        evaluate(parse("Fut Pun(a)"), Model(domain=("a",), atoms={parse("Pun(a)"): T}))


def test_quantifiers_are_min_and_max():
    m = Model(domain=("a", "b"), atoms={parse("Pun(a)"): T, parse("Pun(b)"): H})
    assert evaluate(parse("forall x. Pun(x)"), m) is H
    assert evaluate(parse("exists x. Pun(x)"), m) is T
    assert evaluate(parse("forall x. Pun(x)"), Model()) is T
    assert evaluate(parse("exists x. Pun(x)"), Model()) is F


def test_de_morgan_exhaustive():
    for a, b in itertools.product(VALUES, repeat=2):
        m = prop_model(A=a, B=b)
        assert evaluate(parse("~(A & B)"), m) == evaluate(parse("~A | ~B"), m)
        assert evaluate(parse("~(A | B)"), m) == evaluate(parse("~A & ~B"), m)


def test_cooper_conjunctive_sufficiency():
    assert evaluate(parse("A -> B"), prop_model(A=T, B=T), COOPER) is T


def test_classical_restrictions_of_the_conditionals():
    for a, b in itertools.product(CLASSICAL_VALUES, repeat=2):
        material = T if (a is F or b is T) else F
        assert cond(a, b, SK) is material
        assert cond(a, b, COOPER) is (material if a is not F else H)


def test_strong_kleene_monotone_under_refinement():
    # refining 1/2 atoms to classical values never unsettles a settled value
    formulas = [parse(t) for t in [
        "A -> B", "(A -> B) -> C", "~(A & B) | C", "A <-> ~B", "(A | B) & ~C", "A -> (B <-> C)",
    ]]
    names = ("A", "B", "C")
    for vals in itertools.product(VALUES, repeat=3):
        base = prop_model(**dict(zip(names, vals)))
        halves = [i for i, v in enumerate(vals) if v is H]
        for fill in itertools.product(CLASSICAL_VALUES, repeat=len(halves)):
            refined = list(vals)
            for i, v in zip(halves, fill):
                refined[i] = v
            finer = prop_model(**dict(zip(names, refined)))
            for f in formulas:
                before = evaluate(f, base)
                if before is not H:
                    assert evaluate(f, finer) is before


@settings(max_examples=200, deadline=None)
@given(propositional())
def test_simp_is_two_valued(f):
    for a, b, c in itertools.product(VALUES, repeat=3):
        assert evaluate(Simp(f), prop_model(A=a, B=b, C=c)) in (F, T)


@settings(max_examples=200, deadline=None)
@given(propositional())
def test_evaluator_agrees_with_reference(f):
    for vals in itertools.product(VALUES, repeat=3):
        m = prop_model(**dict(zip("ABC", vals)))
        ref = {Atom(k): oracle.THREE[int(v)] for k, v in zip("ABC", vals)}
        for fam, cooper in ((SK, False), (COOPER, True)):
            assert evaluate(f, m, fam).fraction == oracle.value(f, ref, cooper=cooper)
