import pytest
from hypothesis import given

from conftest import EX1, SMALL, automata, load_benchmark
from fcmverify.automaton import (
    AutomatonError,
    TreeAutomaton,
    accepts,
    accepts_in,
    determinize,
    eliminate_epsilon,
    enumerate_language,
    from_terms,
    is_empty,
    make_automaton,
    product,
    reachable_states,
)
from fcmverify.terms import Symbol, TermError, Vocabulary, enumerate_terms, parse_term


def ex1(text):
    return parse_term(text, EX1)


def parity_sides():
    pf = load_benchmark("parity")
    return pf, pf.side(pf.initial), pf.side(pf.unsafe)


def test_accepts_examples(example_automaton):
    assert accepts_in(example_automaton, ex1("b"), "q2")
    assert accepts(example_automaton, ex1("f(f(a))"))
    assert not accepts(TreeAutomaton(EX1, frozenset({"q"}), frozenset({"q"}), ()), ex1("a"))


def test_reachable_states_examples(example_automaton):
    assert reachable_states(example_automaton, ex1("b")) == {"q1", "q2"}
    pf, a_i, _ = parity_sides()
    assert reachable_states(a_i, parse_term("even(square(0))", pf.vocabulary)) == {"s0"}
    assert reachable_states(TreeAutomaton(EX1, frozenset(), frozenset(), ()), ex1("a")) == frozenset()


def test_symbol_outside_vocabulary_is_rejected(example_automaton):
    other = Vocabulary([Symbol("c", 0)])
    with pytest.raises((AutomatonError, TermError)):
        accepts(example_automaton, parse_term("c", other))


def test_enumerate_language_examples(example_automaton):
    assert enumerate_language(example_automaton, 1) == {ex1(x) for x in ("a", "b", "f(a)", "f(b)")}
    pf, a_i, _ = parity_sides()
    for d in (2, 3, 4):
        assert enumerate_language(a_i, d) == {parse_term("even(square(0))", pf.vocabulary)}
    assert enumerate_language(TreeAutomaton(EX1, frozenset({"q"}), frozenset({"q"}), ()), 3) == frozenset()


def test_determinize_examples(example_automaton):
    d = determinize(example_automaton)
    assert d.is_deterministic() and d.is_complete() and not d.has_epsilon
    for u in enumerate_terms(EX1, 3):
        assert accepts(d, u) == accepts(example_automaton, u)
    empty = determinize(TreeAutomaton(EX1, frozenset({"q"}), frozenset({"q"}), ()))
    assert empty.is_complete() and is_empty(empty)


def test_parity_sides_are_disjoint():
    _, a_i, a_u = parity_sides()
    assert is_empty(product(a_i, a_u))


def test_emptiness_with_unreachable_final_state():
    a = make_automaton(EX1, ["dead"], ["a -> q", "f(dead) -> dead"], ["q", "dead"])
    assert is_empty(a)


def test_product_needs_shared_vocabulary(example_automaton):
    other = make_automaton(SMALL, ["q"], ["a -> q"])
    with pytest.raises(AutomatonError):
        product(example_automaton, other)


def test_from_terms_recognizes_exactly_the_terms():
    chosen = [parse_term(x, SMALL) for x in ("g(a)", "h(a,g(b))", "b")]
    a = from_terms(SMALL, chosen)
    assert enumerate_language(a, 3) == set(chosen)


TERMS3 = enumerate_terms(SMALL, 2)


@given(automata())
def test_accepts_iff_final_state_reached(a):
    for u in TERMS3:
        assert accepts(a, u) == bool(reachable_states(a, u) & a.final)


@given(automata())
def test_determinize_preserves_language(a):
    d = determinize(a)
    assert d.is_deterministic() and d.is_complete()
    for u in TERMS3:
        assert accepts(d, u) == accepts(a, u)


@given(automata(), automata())
def test_product_is_intersection(a1, a2):
    p = product(a1, a2)
    for u in TERMS3:
        assert accepts(p, u) == (accepts(a1, u) and accepts(a2, u))


@given(automata(max_states=2))
def test_emptiness_matches_enumeration(a):
    # a nonempty language has a member no deeper than the number of subset states
    bound = len(determinize(eliminate_epsilon(a)).states)
    assert is_empty(a) == (not enumerate_language(a, bound))


@given(automata())
def test_epsilon_elimination_preserves_language(a):
    e = eliminate_epsilon(a)
    assert not e.has_epsilon
    for u in TERMS3:
        assert accepts(e, u) == accepts(a, u)
