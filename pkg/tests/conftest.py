from __future__ import annotations

from importlib.resources import files

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from fcmverify.automaton import TreeAutomaton, make_automaton
from fcmverify.problem import ProblemFile, parse_problem_file
from fcmverify.terms import TRS, App, RewriteRule, Symbol, Term, Var, Vocabulary

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SMALL = Vocabulary([Symbol("a", 0), Symbol("b", 0), Symbol("g", 1), Symbol("h", 2)])
EX1 = Vocabulary([Symbol("f", 1), Symbol("a", 0), Symbol("b", 0)])


def load_benchmark(name: str) -> ProblemFile:
    return parse_problem_file(files("fcmverify.benchmarks").joinpath(f"{name}.trs").read_text())


def benchmark_text(name: str) -> str:
    return files("fcmverify.benchmarks").joinpath(name).read_text()


@pytest.fixture
def example_automaton() -> TreeAutomaton:
    # all terms over {f, a, b} at q1; only b at q2
    return make_automaton(EX1, ["q1"], ["f(q1) -> q1", "a -> q1", "b -> q2", "q2 -> q1"])


def terms(vocab: Vocabulary = SMALL, variables: tuple[str, ...] = (), max_leaves: int = 8) -> st.SearchStrategy[Term]:
    leaves = [App(c) for c in vocab.constants()] + [Var(v) for v in variables]
    base = st.sampled_from(leaves)
    funcs = vocab.functions()

    def extend(children):
        return st.sampled_from(funcs).flatmap(
            lambda f: st.lists(children, min_size=f.arity, max_size=f.arity).map(lambda args: App(f, tuple(args)))
        )

    return st.recursive(base, extend, max_leaves=max_leaves)


def ground_terms(vocab: Vocabulary = SMALL, max_leaves: int = 8) -> st.SearchStrategy[Term]:
    return terms(vocab, (), max_leaves)


@st.composite
def rules(draw, vocab: Vocabulary = SMALL) -> RewriteRule:
    lhs = draw(terms(vocab, ("x", "y"), 4).filter(lambda t: not isinstance(t, Var)))
    rhs = draw(terms(vocab, tuple(lhs.variables()), 4))
    return RewriteRule(lhs, rhs)


@st.composite
def rewrite_systems(draw, vocab: Vocabulary = SMALL, max_rules: int = 3) -> TRS:
    return TRS(draw(st.lists(rules(vocab), min_size=0, max_size=max_rules)), vocab)


@st.composite
def automata(draw, vocab: Vocabulary = SMALL, max_states: int = 3, epsilon: bool = True) -> TreeAutomaton:
    n = draw(st.integers(1, max_states))
    states = [f"q{i}" for i in range(n)]
    state = st.sampled_from(states)
    trans = []
    for f in vocab:
        for _ in range(draw(st.integers(0, 2))):
            args = [draw(state) for _ in range(f.arity)]
            head = f"{f.name}({','.join(args)})" if args else f.name
            trans.append(f"{head} -> {draw(state)}")
    if epsilon:
        for _ in range(draw(st.integers(0, 1))):
            trans.append(f"{draw(state)} -> {draw(state)}")
    final = draw(st.lists(state, min_size=0, max_size=n, unique=True))
    return make_automaton(vocab, final, trans, states)
