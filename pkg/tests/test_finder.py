import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load_benchmark
from fcmverify.finder import (
    ExhaustedUpTo,
    FinderError,
    ModelFound,
    SearchConfig,
    Timeout,
    Unknown,
    Verified,
    default_timeout,
    find_model,
    verify_safety,
)
from fcmverify.logic import PredicateSymbol, parse_formula
from fcmverify.model import check_countermodel, eval_term, satisfies
from fcmverify.terms import Symbol, Vocabulary, parse_term
from reference import P, brute_force_min_size, random_tiny_theory

Q = PredicateSymbol("Q", 1)
C = Vocabulary([Symbol("c", 0), Symbol("f", 1)])


def sentence(text, vocab=C):
    return parse_formula(text, vocab, [Q, P])


def test_parity_model_of_size_two():
    pf = load_benchmark("parity")
    r = verify_safety(pf.to_problem(omit_congruence=(("s", None),)), SearchConfig(max_domain_size=4))
    assert isinstance(r, Verified) and r.model.size == 2
    assert len(r.translation.theory) == 25
    assert check_countermodel(r.model, r.translation.theory, r.translation.goal)


def test_contradiction_exhausts():
    r = find_model([sentence("all x Q(x)"), sentence("exists x -Q(x)")], SearchConfig(max_domain_size=3))
    assert isinstance(r, ExhaustedUpTo) and r.n == 3
    assert r.stats.sizes_tried == [1, 2, 3]


def test_empty_theory_has_a_one_element_model():
    r = find_model([], SearchConfig(max_domain_size=2))
    assert isinstance(r, ModelFound) and r.size == 1


def test_smallest_size_is_returned():
    # c, f(c) and f(f(c)) are pairwise distinct, so three elements are needed
    ss = [sentence(t) for t in ("Q(c)", "-Q(f(c))", "-Q(f(f(c)))", "P(f(c),f(c))", "-P(f(f(c)),f(f(c)))")]
    r = find_model(ss, SearchConfig(max_domain_size=4))
    assert isinstance(r, ModelFound) and r.size == 3
    assert r.stats.sizes_tried == [1, 2, 3]


def test_readers_writers_size_three():
    pf = load_benchmark("readers_writers")
    r = verify_safety(pf.to_problem(), SearchConfig(max_domain_size=3))
    assert isinstance(r, Verified) and r.model.size <= 3


def test_intro_model_identifies_double_successor():
    pf = load_benchmark("intro")
    r = verify_safety(pf.to_problem(), SearchConfig(max_domain_size=3))
    assert isinstance(r, Verified) and r.model.size == 2
    m = r.model
    for d in range(2):
        assert m.apply("s", (m.apply("s", (d,)),)) == d


def test_reverse_with_full_congruence_runs_out_of_time():
    pf = load_benchmark("reverse")
    r = verify_safety(pf.to_problem(omit_congruence=()), SearchConfig(max_domain_size=6, time_budget=2))
    assert isinstance(r, Unknown)
    assert isinstance(r.search, (Timeout, ExhaustedUpTo))


def test_search_is_deterministic():
    pf = load_benchmark("parity")
    a = verify_safety(pf.to_problem(), SearchConfig(max_domain_size=3))
    b = verify_safety(pf.to_problem(), SearchConfig(max_domain_size=3))
    assert a.model == b.model


def test_dump_clauses_writes_one_file_per_size(tmp_path):
    prefix = str(tmp_path / "cnf")
    find_model([sentence("all x Q(x)"), sentence("-Q(f(c))")], SearchConfig(max_domain_size=2, dump_clauses=prefix))
    dumped = sorted(p.name for p in tmp_path.iterdir())
    assert len(dumped) == 2
    assert all("p cnf" in (tmp_path / d).read_text() for d in dumped)


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(max_domain_size=0)
    with pytest.raises(ValueError):
        SearchConfig(time_budget=0)


def test_timeout_from_environment(monkeypatch):
    monkeypatch.setenv("FCM_TIMEOUT_SECS", "7.5")
    assert default_timeout() == 7.5
    monkeypatch.delenv("FCM_TIMEOUT_SECS")
    assert default_timeout() == 60.0
    monkeypatch.setenv("FCM_TIMEOUT_SECS", "soon")
    with pytest.raises(FinderError):
        default_timeout()


def test_found_model_interprets_constants():
    r = find_model([sentence("-Q(c)"), sentence("Q(f(c))")], SearchConfig(max_domain_size=3))
    assert isinstance(r, ModelFound) and r.size == 2
    assert eval_term(r.model, parse_term("f(c)", C)) != eval_term(r.model, parse_term("c", C))


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1))
def test_found_models_satisfy_and_sizes_are_minimal(seed):
    sentences, vocab = random_tiny_theory(random.Random(seed))
    r = find_model(sentences, SearchConfig(max_domain_size=2, time_budget=30))
    expected = brute_force_min_size(sentences, vocab, [P], 2)
    if expected is None:
        assert isinstance(r, ExhaustedUpTo) and r.n == 2
    else:
        assert isinstance(r, ModelFound) and r.size == expected
        assert all(satisfies(r.model, s) for s in sentences)
