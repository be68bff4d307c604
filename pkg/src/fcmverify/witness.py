"""Countermodels built directly from a regular overapproximation of reachability.

Given an automaton ``a_star`` whose language contains every term reachable
from the initial language and misses the unsafe language, the model below
satisfies the basic translation and falsifies its goal.

Each domain element is a triple of state sets: for a configuration (a term
that may contain automaton states as constants), component ``x`` is the set
of states of automaton ``x`` that some concretization of the term reaches.
Concretizing a state constant means replacing it by a term of its language.
On plain terms this is the subset construction, with the empty set as the
sink. Only elements denoted by some ground configuration are kept.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as cartesian
from typing import Iterable

from .automaton import TreeAutomaton, accepts, enumerate_language, is_empty, product
from .logic import format_formula
from .model import FiniteModel, check_countermodel, eval_term, first_violation
from .terms import TRS, Step, Strategy, Term, Var, bounded_reachable
from .translate import R2, TranslationOptions, TranslationResult, VerificationProblem, build_basic

Triple = tuple[frozenset[str], frozenset[str], frozenset[str]]


class WitnessError(RuntimeError):
    def __init__(self, message: str, violated: str | None = None):
        super().__init__(message)
        self.violated = violated


@dataclass(frozen=True)
class CompletionCertificate:
    a_star: TreeAutomaton
    coverage_depth: int
    disjointness: bool  # exact
    counterexample: Term | None = None  # reachable term a_star rejects
    trace: tuple[Step, ...] = ()
    initial_terms: int = 0
    reachable_terms: int = 0

    @property
    def coverage(self) -> bool:
        return self.counterexample is None

    @property
    def holds(self) -> bool:
        return self.disjointness and self.coverage


def check_hypotheses(
    a_i: TreeAutomaton,
    a_u: TreeAutomaton,
    a_star: TreeAutomaton,
    trs: TRS,
    depth: int,
    size_cap: int | None = None,
    strategy: Strategy = "any",
) -> CompletionCertificate:
    """Exact disjointness of ``a_star`` and ``a_u``; coverage of reachable terms up to ``depth``."""
    disjoint = is_empty(product(a_star, a_u))
    starts = sorted(enumerate_language(a_i, depth), key=str)
    reach = bounded_reachable(starts, trs, depth, size_cap, strategy) if starts else None
    bad = None
    if reach is not None:
        missed = [t for t in reach.terms if not accepts(a_star, t)]
        if missed:
            bad = min(missed, key=lambda t: (len(reach.trace(t)), str(t)))
    return CompletionCertificate(
        a_star,
        depth,
        disjoint,
        bad,
        tuple(reach.trace(bad)) if bad is not None else (),
        len(starts),
        len(reach) if reach is not None else 0,
    )


# -- the product model ---------------------------------------------------------


class _Components:
    """Componentwise semantics over (initial, overapproximation, unsafe) automata."""

    def __init__(self, a_i: TreeAutomaton, a_star: TreeAutomaton, a_u: TreeAutomaton):
        self.autos = (a_i, a_star, a_u)
        self.vocab = a_i.vocabulary

    def apply(self, name: str, args: tuple[Triple, ...]) -> Triple:
        return tuple(a.step(name, tuple(arg[k] for arg in args)) for k, a in enumerate(self.autos))

    def term_classes(self) -> set[Triple]:
        """Values of all ground terms without state constants."""
        return _close(self, [self.apply(c.name, ()) for c in self.vocab.constants()])

    def state_value(self, q: str, classes: Iterable[Triple]) -> Triple:
        a_i, _, a_u = self.autos
        own = (a_i.close([q]) if q in a_i.states else frozenset(), frozenset(), a_u.close([q]) if q in a_u.states else frozenset())
        comps = [set(x) for x in own]
        for cls in classes:
            if (q in a_i.states and q in cls[0]) or (q in a_u.states and q in cls[2]):
                for k in range(3):
                    comps[k] |= cls[k]
        return tuple(frozenset(c) for c in comps)


def _close(sem: _Components, seeds: Iterable[Triple]) -> set[Triple]:
    found = set(seeds)
    funcs = sem.vocab.functions()
    changed = True
    while changed:
        changed = False
        current = sorted(found, key=_order)
        for f in funcs:
            for args in cartesian(current, repeat=f.arity):
                v = sem.apply(f.name, args)
                if v not in found:
                    found.add(v)
                    changed = True
    return found


def _order(t: Triple):
    return tuple(tuple(sorted(c)) for c in t)


@dataclass(frozen=True)
class WitnessModel:
    model: FiniteModel
    elements: tuple[Triple, ...]  # element i of the domain
    translation: TranslationResult


def _eval(t: Term, env: dict[str, int], funcs: dict[str, list[int]], size: int) -> int:
    if type(t) is Var:
        return env[t.name]
    idx = 0
    for a in t.args:
        idx = idx * size + _eval(a, env, funcs, size)
    return funcs[t.symbol.name][idx]


def _least_relation(
    n: int,
    funcs: dict[str, list[int]],
    arity: dict[str, int],
    seeds: Iterable[tuple[int, int]],
    congruence: list[tuple[str, int]],
) -> set[tuple[int, int]]:
    """Smallest set containing ``seeds``, closed under transitivity and the given congruences."""
    rel: set[tuple[int, int]] = set()
    succ: list[set[int]] = [set() for _ in range(n)]
    pred: list[set[int]] = [set() for _ in range(n)]
    work = list(seeds)
    while work:
        a, b = work.pop()
        if (a, b) in rel:
            continue
        rel.add((a, b))
        succ[a].add(b)
        pred[b].add(a)
        for c in list(pred[a]):
            work.append((c, b))
        for d in list(succ[b]):
            work.append((a, d))
        for name, pos in congruence:
            k = arity[name]
            table = funcs[name]
            for rest in cartesian(range(n), repeat=k - 1):
                left = rest[:pos] + (a,) + rest[pos:]
                right = rest[:pos] + (b,) + rest[pos:]
                li = ri = 0
                for x, y in zip(left, right):
                    li = li * n + x
                    ri = ri * n + y
                work.append((table[li], table[ri]))
    return rel


def product_countermodel(
    a_i: TreeAutomaton,
    a_u: TreeAutomaton,
    a_star: TreeAutomaton,
    trs: TRS,
    options: TranslationOptions = TranslationOptions(),
) -> WitnessModel:
    """Build the model and check it against the basic translation; raises WitnessError if the check fails."""
    problem = VerificationProblem(a_i, a_u, trs, options=options)
    translation = build_basic(problem)
    sem = _Components(a_i, a_star, a_u)
    classes = sem.term_classes()
    states = sorted(a_i.states | a_u.states)
    state_vals = {q: sem.state_value(q, classes) for q in states}
    domain = sorted(_close(sem, [*classes, *state_vals.values()]), key=_order)
    index = {e: i for i, e in enumerate(domain)}
    n = len(domain)

    funcs: dict[str, list[int]] = {}
    arity: dict[str, int] = {}
    for f in trs.vocabulary:
        arity[f.name] = f.arity
        funcs[f.name] = [index[sem.apply(f.name, tuple(domain[i] for i in args))] for args in cartesian(range(n), repeat=f.arity)]
    for q, v in state_vals.items():
        arity[q] = 0
        funcs[q] = [index[v]]

    seeds: list[tuple[int, int]] = [(i, i) for i in range(n)]
    for rule in trs.rules:
        names = rule.lhs.variables()
        for values in cartesian(range(n), repeat=len(names)):
            env = dict(zip(names, values))
            seeds.append((_eval(rule.lhs, env, funcs, n), _eval(rule.rhs, env, funcs, n)))
    for a in (a_i, a_u):
        for tr in a.transitions:
            seeds.append((_eval(tr.lhs_term(), {}, funcs, n), funcs[tr.target][0]))
    congruence = [
        (f.name, pos)
        for f in trs.vocabulary.functions()
        for pos in range(f.arity)
        if not options.omits(f.name, pos + 1)
    ]
    relation = _least_relation(n, funcs, arity, seeds, congruence)

    model = FiniteModel(n, {k: tuple(v) for k, v in funcs.items()}, arity, {R2.name: frozenset(relation)}, {R2.name: 2})
    if not check_countermodel(model, translation.theory, translation.goal):
        bad = first_violation(model, translation.theory)
        if bad is not None:
            text = format_formula(bad)
            raise WitnessError(f"witness model violates {text}", text)
        text = format_formula(translation.goal)
        raise WitnessError(f"witness model satisfies the unsafety goal {text}", text)
    return WitnessModel(model, tuple(domain), translation)


def term_triple(w: WitnessModel, t: Term) -> Triple:
    """The domain element a ground configuration denotes, as a state-set triple."""
    return w.elements[eval_term(w.model, t)]

