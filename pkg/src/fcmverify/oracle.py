"""Bounded reachability search for concrete counterexamples.

Complements model search from the other side: a trace found here shows that
an unsafe term really is reachable, so no countermodel can exist.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

from .automaton import TreeAutomaton, accepts, enumerate_language
from .terms import TRS, Step, Strategy, Term, Vocabulary, apply_substitution, bounded_reachable, depth, enumerate_terms, match, size, successors
from .translate import Basis, TermSet, VerificationProblem


@dataclass(frozen=True)
class Refutation:
    start: Term
    target: Term
    steps: tuple[Step, ...]

    def render(self) -> str:
        terms = [str(self.start)] + [str(s.target) for s in self.steps]
        return " => ".join(terms)


@dataclass(frozen=True)
class OracleResult:
    refutation: Refutation | None
    starts: int
    explored: int
    pruned: bool


def ground_members(side: TermSet, vocabulary: Vocabulary, max_depth: int, limit: int | None = None) -> list[Term]:
    """Ground terms of depth at most ``max_depth`` in the set, smallest first."""
    if isinstance(side, TreeAutomaton):
        found = set(enumerate_language(side, max_depth))
    else:
        found = set()
        pool = None
        for t in side:
            names = t.variables()
            if not names:
                if depth(t) <= max_depth:
                    found.add(t)
                continue
            if pool is None:
                pool = enumerate_terms(vocabulary, max_depth)
            for values in product(pool, repeat=len(names)):
                inst = apply_substitution(t, dict(zip(names, values)))
                if depth(inst) <= max_depth:
                    found.add(inst)
    ordered = sorted(found, key=lambda t: (size(t), str(t)))
    return ordered if limit is None else ordered[:limit]


def is_member(side: TermSet, t: Term) -> bool:
    if isinstance(side, TreeAutomaton):
        return accepts(side, t)
    return any(match(u, t) is not None for u in side)


def bounded_oracle(
    problem: VerificationProblem,
    max_depth: int,
    size_cap: int | None = None,
    max_starts: int = 500,
) -> OracleResult:
    """Search ``max_depth`` rewrite steps from initial terms of depth at most ``max_depth``."""
    starts = ground_members(problem.initial, problem.vocabulary, max_depth, max_starts)
    if not starts:
        return OracleResult(None, 0, 0, False)
    reach = bounded_reachable(starts, problem.trs, max_depth, size_cap, problem.strategy)
    hits = [t for t in reach.terms if is_member(problem.unsafe, t)]
    if not hits:
        return OracleResult(None, len(starts), len(reach), reach.pruned)
    # shortest trace, then smallest term, for stable output
    traces = {t: reach.trace(t) for t in hits}
    target = min(hits, key=lambda t: (len(traces[t]), size(t), str(t)))
    steps = tuple(traces[target])
    start = steps[0].source if steps else target
    return OracleResult(Refutation(start, target, steps), len(starts), len(reach), reach.pruned)


def replay(refutation: Refutation, problem: VerificationProblem) -> bool:
    """Check every step of a trace against the rewrite relation and both end points."""
    return replay_steps(refutation.start, refutation.steps, problem.trs, problem.strategy) and (
        is_member(problem.initial, refutation.start)
        and is_member(problem.unsafe, refutation.target)
        and (refutation.steps[-1].target if refutation.steps else refutation.start) == refutation.target
    )


def replay_steps(start: Term, steps: Sequence[Step], trs: TRS, strategy: Strategy = "any") -> bool:
    current = start
    for step in steps:
        if step.source != current or step.target not in successors(current, trs, strategy):
            return False
        current = step.target
    return True
