"""Independent oracles for tests: a naive evaluator, random models and sentences, brute-force model search."""

from __future__ import annotations

import random
from itertools import product

from fcmverify.automaton import TreeAutomaton, determinize, from_terms
from fcmverify.logic import And, Atom, Exists, ForAll, Formula, Implies, Not, Or, PredicateSymbol, universal_closure
from fcmverify.model import FiniteModel
from fcmverify.terms import TRS, App, RewriteRule, Symbol, Term, Var, Vocabulary, bounded_reachable, enumerate_terms, successors
from fcmverify.translate import Basis, VerificationProblem


def ref_term(m: FiniteModel, t: Term, env: dict[str, int]) -> int:
    if isinstance(t, Var):
        return env[t.name]
    vals = [ref_term(m, a, env) for a in t.args]
    # row-major index, computed independently of the model's own lookup
    idx = 0
    for v in vals:
        idx = idx * m.size + v
    return m.functions[t.symbol.name][idx]


def ref_holds(m: FiniteModel, f: Formula, env: dict[str, int] | None = None) -> bool:
    env = dict(env or {})
    if isinstance(f, Atom):
        return tuple(ref_term(m, a, env) for a in f.args) in m.relations.get(f.pred.name, frozenset())
    if isinstance(f, Not):
        return not ref_holds(m, f.body, env)
    if isinstance(f, And):
        result = True
        for p in f.parts:
            result = result and ref_holds(m, p, env)
        return result
    if isinstance(f, Or):
        result = False
        for p in f.parts:
            result = result or ref_holds(m, p, env)
        return result
    if isinstance(f, Implies):
        return (not ref_holds(m, f.left, env)) or ref_holds(m, f.right, env)
    results = []
    for d in range(m.size):
        inner = dict(env)
        inner[f.var] = d
        results.append(ref_holds(m, f.body, inner))
    return all(results) if isinstance(f, ForAll) else any(results)


def random_model(rng: random.Random, vocab: Vocabulary, preds: list[PredicateSymbol], max_size: int = 3) -> FiniteModel:
    n = rng.randint(1, max_size)
    functions = {f.name: tuple(rng.randrange(n) for _ in range(n**f.arity)) for f in vocab}
    arity = {f.name: f.arity for f in vocab}
    relations = {
        p.name: frozenset(t for t in product(range(n), repeat=p.arity) if rng.random() < 0.5) for p in preds
    }
    return FiniteModel(n, functions, arity, relations, {p.name: p.arity for p in preds})


def random_term(rng: random.Random, vocab: Vocabulary, variables: list[str], depth: int) -> Term:
    consts = vocab.constants()
    if depth == 0 or not vocab.functions() or rng.random() < 0.4:
        if variables and (not consts or rng.random() < 0.6):
            return Var(rng.choice(variables))
        return App(rng.choice(consts))
    f = rng.choice(vocab.functions())
    return App(f, tuple(random_term(rng, vocab, variables, depth - 1) for _ in range(f.arity)))


def random_formula(rng: random.Random, vocab: Vocabulary, preds: list[PredicateSymbol], bound: list[str], depth: int) -> Formula:
    if depth == 0 or rng.random() < 0.25:
        p = rng.choice(preds)
        return Atom(p, tuple(random_term(rng, vocab, bound, 2) for _ in range(p.arity)))
    kind = rng.choice(["not", "and", "or", "imp", "all", "ex", "all", "ex"])
    if kind == "not":
        return Not(random_formula(rng, vocab, preds, bound, depth - 1))
    if kind in ("and", "or"):
        parts = tuple(random_formula(rng, vocab, preds, bound, depth - 1) for _ in range(rng.randint(2, 3)))
        return And(parts) if kind == "and" else Or(parts)
    if kind == "imp":
        return Implies(random_formula(rng, vocab, preds, bound, depth - 1), random_formula(rng, vocab, preds, bound, depth - 1))
    v = rng.choice(["x", "y", "z"])
    body = random_formula(rng, vocab, preds, bound + [v], depth - 1)
    return ForAll(v, body) if kind == "all" else Exists(v, body)


def random_sentence(rng: random.Random, vocab: Vocabulary, preds: list[PredicateSymbol], depth: int = 4) -> Formula:
    return universal_closure(random_formula(rng, vocab, preds, [], depth))


def all_models(vocab: Vocabulary, preds: list[PredicateSymbol], n: int):
    """Every interpretation of the vocabulary over a domain of size n."""
    funcs = list(vocab)
    pred_list = list(preds)
    f_spaces = [list(product(range(n), repeat=n**f.arity)) for f in funcs]
    p_cells = [list(product(range(n), repeat=p.arity)) for p in pred_list]
    p_spaces = [list(product((False, True), repeat=len(cells))) for cells in p_cells]
    for ftables in product(*f_spaces):
        for pbits in product(*p_spaces):
            relations = {
                p.name: frozenset(c for c, b in zip(cells, bits) if b) for p, cells, bits in zip(pred_list, p_cells, pbits)
            }
            yield FiniteModel(
                n,
                {f.name: tuple(t) for f, t in zip(funcs, ftables)},
                {f.name: f.arity for f in funcs},
                relations,
                {p.name: p.arity for p in pred_list},
            )


def brute_force_min_size(sentences: list[Formula], vocab: Vocabulary, preds: list[PredicateSymbol], max_size: int) -> int | None:
    """Least domain size with a model of all sentences, or None if there is none up to ``max_size``."""
    for n in range(1, max_size + 1):
        for m in all_models(vocab, preds, n):
            if all(ref_holds(m, s) for s in sentences):
                return n
    return None


TINY_SYMBOLS = [Symbol("c", 0), Symbol("d", 0), Symbol("f", 1)]
P = PredicateSymbol("P", 2)


def random_tiny_theory(rng: random.Random) -> tuple[list[Formula], Vocabulary]:
    """A few sentences over one or two constants, one unary function and a binary predicate."""
    k = rng.randint(1, 2)
    syms = TINY_SYMBOLS[:k] + ([TINY_SYMBOLS[2]] if rng.random() < 0.6 else [])
    vocab = Vocabulary(syms)
    sentences = [random_sentence(rng, vocab, [P], depth=3) for _ in range(rng.randint(1, 3))]
    return sentences, vocab


def random_rule(rng: random.Random, vocab: Vocabulary) -> RewriteRule:
    while True:
        lhs = random_term(rng, vocab, ["x"], 2)
        if not isinstance(lhs, Var):
            break
    rhs = random_term(rng, vocab, lhs.variables(), 2)
    return RewriteRule(lhs, rhs)


def random_unsafe_problem(rng: random.Random, vocab: Vocabulary, steps: int = 3) -> tuple[VerificationProblem, Term]:
    """A problem whose unsafe set contains a term reachable from its initial set, plus that term."""
    while True:
        trs = TRS([random_rule(rng, vocab) for _ in range(rng.randint(1, 3))], vocab)
        start = random_term(rng, vocab, [], 2)
        reach = bounded_reachable(start, trs, steps, 12)
        target = rng.choice(sorted(reach.terms, key=str))
        initial: Basis | TreeAutomaton = Basis((start,))
        unsafe: Basis | TreeAutomaton = Basis((target,))
        if rng.random() < 0.5:
            initial = from_terms(vocab, [start], "i")
            unsafe = from_terms(vocab, [target, random_term(rng, vocab, [], 2)], "u")
        return VerificationProblem(initial, unsafe, trs), target


def random_witness_instance(rng: random.Random, vocab: Vocabulary):
    """Automata (initial, unsafe, overapproximation) and rules where the overapproximation is exact.

    The overapproximation accepts exactly the reachable terms, which must form a finite
    set closed under rewriting. Returns None when a draw does not qualify.
    """
    trs = TRS([random_rule(rng, vocab) for _ in range(rng.randint(1, 3))], vocab)
    pool = enumerate_terms(vocab, 2)
    init = rng.sample(pool, 2)
    reach = bounded_reachable(init, trs, 6, 12)
    if reach.pruned or any(s not in reach.terms for t in reach.terms for s in successors(t, trs)):
        return None
    outside = [t for t in pool if t not in reach.terms]
    if not outside:
        return None
    a_i = from_terms(vocab, init, "i")
    a_u = from_terms(vocab, rng.sample(outside, min(2, len(outside))), "u")
    a_star = determinize(from_terms(vocab, reach.terms, "r"))
    return a_i, a_u, a_star, trs
