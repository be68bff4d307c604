import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SMALL, load_benchmark, terms
from fcmverify.finder import SearchConfig, verify_safety
from fcmverify.logic import parse_formula
from fcmverify.model import (
    FiniteModel,
    ModelError,
    check_countermodel,
    describe_model,
    eval_term,
    parse_model,
    render_model,
    satisfies,
)
from fcmverify.terms import apply_substitution, parse_term
from fcmverify.translate import R1, R2, translate_problem
from reference import random_model, random_sentence, ref_holds


def parity_model() -> FiniteModel:
    # tables as published for the parity example; [0] = 0 is forced by R(0,s2) with [s2] = 0
    f = {
        "0": (0,), "false": (0,), "q0": (0,), "s1": (0,), "s2": (0,), "s0": (1,), "true": (1,),
        "even": (1, 0), "odd": (0, 1), "s": (1, 0), "square": (0, 1),
        "plus": (0, 1, 1, 0), "times": (0, 0, 0, 1),
    }
    arity = {k: (2 if k in ("plus", "times") else 1 if len(v) == 2 else 0) for k, v in f.items()}
    return FiniteModel(2, f, arity, {"R": frozenset({(0, 0), (1, 1)})}, {"R": 2})


def test_parity_model_evaluation():
    pf = load_benchmark("parity")
    m = parity_model()
    assert eval_term(m, parse_term("even(square(0))", pf.vocabulary)) == 1
    assert eval_term(m, parse_term("true", pf.vocabulary)) == 1


def test_parity_model_is_a_countermodel():
    pf = load_benchmark("parity")
    t = translate_problem(pf.to_problem())
    m = parity_model()
    assert not satisfies(m, t.goal)
    assert check_countermodel(m, t.theory, t.goal)
    empty = FiniteModel(2, m.functions, m.function_arity, {"R": frozenset()}, {"R": 2})
    assert not check_countermodel(empty, t.theory, t.goal)


def test_readers_writers_successor_table():
    pf = load_benchmark("readers_writers")
    m = FiniteModel(3, {"0": (0,), "s": (1, 2, 2), "state": (0,) * 9}, {"0": 0, "s": 1, "state": 2}, {"R": frozenset({(0,)})}, {"R": 1})
    assert eval_term(m, parse_term("s(s(s(0)))", pf.vocabulary)) == 2


def test_one_point_full_relation_is_transitive():
    m = FiniteModel(1, {}, {}, {"R": frozenset({(0, 0)})}, {"R": 2})
    assert satisfies(m, parse_formula("all x all y all z (R(x,y) & R(y,z) -> R(x,z))", None, [R2]))


def test_monadic_readers_writers_rule_holds_in_found_model():
    pf = load_benchmark("readers_writers")
    r = verify_safety(pf.to_problem(), SearchConfig(max_domain_size=3))
    rule = parse_formula("all x all y (R(state(x,s(y))) -> R(state(x,y)))", pf.vocabulary, [R1])
    assert satisfies(r.model, rule)


def test_missing_valuation_is_rejected():
    m = parity_model()
    with pytest.raises(ModelError):
        eval_term(m, parse_term("s(x)", load_benchmark("parity").vocabulary, ["x"]))


def test_undeclared_symbol_is_rejected():
    m = FiniteModel(1, {}, {}, {"R": frozenset()}, {"R": 2})
    with pytest.raises(ModelError):
        satisfies(m, parse_formula("R(c,c)", None, [R2]))


def test_render_parse_round_trip():
    m = parity_model()
    assert parse_model(render_model(m)) == m
    one = FiniteModel(1, {"a": (0,), "g": (0,)}, {"a": 0, "g": 1}, {"R": frozenset({(0, 0)})}, {"R": 2})
    assert parse_model(render_model(one)) == one
    assert "function(g(_), [0])" in render_model(one)


def test_describe_lists_tables():
    text = describe_model(parity_model())
    assert "[s0] = [true] = 1" in text and "[R] = {(0,0), (1,1)}" in text


def test_check_decomposes_over_sentences():
    pf = load_benchmark("parity")
    t = translate_problem(pf.to_problem())
    m = parity_model()
    assert check_countermodel(m, t.theory, t.goal)
    assert all(satisfies(m, s) for s in t.theory)


@given(terms(SMALL, ("x", "y"), 6), st.integers(0, 2**32 - 1))
def test_evaluation_commutes_with_substitution(u, seed):
    rng = random.Random(seed)
    m = random_model(rng, SMALL, [R2])
    sigma = {"x": parse_term("g(a)", SMALL), "y": parse_term("h(b,x)", SMALL, ["x"])}
    v = {"x": rng.randrange(m.size), "y": rng.randrange(m.size)}
    shifted = {k: eval_term(m, s, v) for k, s in sigma.items()}
    assert eval_term(m, apply_substitution(u, sigma), v) == eval_term(m, u, shifted)


@given(st.integers(0, 2**32 - 1))
def test_satisfies_matches_reference(seed):
    rng = random.Random(seed)
    m = random_model(rng, SMALL, [R2])
    s = random_sentence(rng, SMALL, [R2])
    assert satisfies(m, s) == ref_holds(m, s)
