"""Bottom-up nondeterministic tree automata with epsilon transitions."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product as cartesian
from typing import Iterable, Mapping, Union

from .terms import App, Symbol, Term, TermError, Var, Vocabulary, parse_term


class AutomatonError(ValueError):
    pass


@dataclass(frozen=True)
class Normalized:
    """``symbol(args...) -> target``."""

    symbol: Symbol
    args: tuple[str, ...]
    target: str

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != self.symbol.arity:
            raise AutomatonError(f"transition {self}: {self.symbol.name} expects {self.symbol.arity} state(s)")

    def __str__(self):
        if not self.args:
            return f"{self.symbol.name} -> {self.target}"
        return f"{self.symbol.name}({','.join(self.args)}) -> {self.target}"

    def lhs_term(self) -> Term:
        """Left-hand side as a configuration (states as constants)."""
        return App(self.symbol, [App(Symbol(q, 0)) for q in self.args])


@dataclass(frozen=True)
class Epsilon:
    """``source -> target`` between states."""

    source: str
    target: str

    def __str__(self):
        return f"{self.source} -> {self.target}"

    def lhs_term(self) -> Term:
        return App(Symbol(self.source, 0))


Transition = Union[Normalized, Epsilon]


@dataclass(frozen=True)
class TreeAutomaton:
    vocabulary: Vocabulary
    states: frozenset[str]
    final: frozenset[str]
    transitions: tuple[Transition, ...]
    sink: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "states", frozenset(self.states))
        object.__setattr__(self, "final", frozenset(self.final))
        object.__setattr__(self, "transitions", tuple(dict.fromkeys(self.transitions)))
        if not self.final <= self.states:
            raise AutomatonError(f"final states {sorted(self.final - self.states)} are not states")
        for tr in self.transitions:
            used = (tr.source, tr.target) if isinstance(tr, Epsilon) else (*tr.args, tr.target)
            unknown = [q for q in used if q not in self.states]
            if unknown:
                raise AutomatonError(f"transition {tr} uses undeclared state(s) {unknown}")
            if isinstance(tr, Normalized) and tr.symbol not in self.vocabulary:
                raise AutomatonError(f"transition {tr} uses symbol {tr.symbol} outside the vocabulary")

    @cached_property
    def by_symbol(self) -> dict[str, list[Normalized]]:
        table: dict[str, list[Normalized]] = {}
        for tr in self.transitions:
            if isinstance(tr, Normalized):
                table.setdefault(tr.symbol.name, []).append(tr)
        return table

    @cached_property
    def closure(self) -> dict[str, frozenset[str]]:
        """Epsilon closure of each state (reflexive, transitive)."""
        succ: dict[str, set[str]] = {q: set() for q in self.states}
        for tr in self.transitions:
            if isinstance(tr, Epsilon):
                succ[tr.source].add(tr.target)
        out = {}
        for q in self.states:
            seen = {q}
            stack = [q]
            while stack:
                for r in succ[stack.pop()]:
                    if r not in seen:
                        seen.add(r)
                        stack.append(r)
            out[q] = frozenset(seen)
        return out

    def close(self, states: Iterable[str]) -> frozenset[str]:
        out: set[str] = set()
        for q in states:
            out |= self.closure[q]
        return frozenset(out)

    def step(self, name: str, args: tuple[frozenset[str], ...]) -> frozenset[str]:
        """States reachable from ``name(args)`` where each argument is a set of states."""
        hits = set()
        for tr in self.by_symbol.get(name, ()):
            if all(q in s for q, s in zip(tr.args, args)):
                hits.add(tr.target)
        return self.close(hits)

    @property
    def has_epsilon(self) -> bool:
        return any(isinstance(tr, Epsilon) for tr in self.transitions)

    def is_deterministic(self) -> bool:
        """No epsilon transitions and at most one target per symbol/argument tuple."""
        if self.has_epsilon:
            return False
        seen = set()
        for tr in self.transitions:
            key = (tr.symbol.name, tr.args)
            if key in seen:
                return False
            seen.add(key)
        return True

    def is_complete(self) -> bool:
        present = {(tr.symbol.name, tr.args) for tr in self.transitions if isinstance(tr, Normalized)}
        states = sorted(self.states)
        for f in self.vocabulary:
            for args in cartesian(states, repeat=f.arity):
                if (f.name, args) not in present:
                    return False
        return True

    def __str__(self):
        lines = [
            "States " + " ".join(sorted(self.states)),
            "Final " + " ".join(sorted(self.final)),
            "Transitions",
        ]
        lines += [f"  {tr}" for tr in self.transitions]
        return "\n".join(lines)


def make_automaton(
    vocabulary: Vocabulary,
    final: Iterable[str],
    transitions: Iterable[str | Transition],
    states: Iterable[str] | None = None,
) -> TreeAutomaton:
    """Build an automaton from transitions written as ``f(q1,q2) -> q`` or ``q1 -> q2``."""
    parsed: list[Transition] = []
    declared = set(states) if states is not None else None
    for tr in transitions:
        if isinstance(tr, str):
            tr = parse_transition(tr, vocabulary, declared)
        parsed.append(tr)
    if declared is None:
        declared = set(final)
        for tr in parsed:
            declared |= {tr.source, tr.target} if isinstance(tr, Epsilon) else {*tr.args, tr.target}
    return TreeAutomaton(vocabulary, frozenset(declared), frozenset(final), tuple(parsed))


def parse_transition(text: str, vocabulary: Vocabulary, states: set[str] | None = None) -> Transition:
    lhs, sep, rhs = text.partition("->")
    if not sep:
        raise AutomatonError(f"missing '->' in transition {text!r}")
    target = rhs.strip()
    lhs = lhs.strip()
    if states is not None and lhs in states:
        return Epsilon(lhs, target)
    if states is None and vocabulary.get(lhs) is None and "(" not in lhs:
        return Epsilon(lhs, target)
    # states in argument positions parse as variables
    try:
        t = parse_term(lhs, None, variables=())
    except TermError as exc:
        raise AutomatonError(str(exc)) from exc
    sym = vocabulary.get(t.symbol.name)
    if sym is None:
        raise AutomatonError(f"unknown symbol {t.symbol.name!r} in transition {text!r}")
    args = []
    for a in t.args:
        if a.args:
            raise AutomatonError(f"transition {text!r} is not normalized")
        args.append(a.symbol.name)
    return Normalized(sym, tuple(args), target)


# -- runs --------------------------------------------------------------------


def _check_vocab(a: TreeAutomaton, t: Term) -> None:
    if type(t) is Var:
        raise TermError(f"automata run on ground terms, got variable {t}")
    if a.vocabulary.get(t.symbol.name) != t.symbol:
        raise AutomatonError(f"symbol {t.symbol} is outside the automaton vocabulary")


def reachable_states(a: TreeAutomaton, t: Term) -> frozenset[str]:
    """``{q | t =>* q}`` computed bottom-up with epsilon closure at every node."""
    _check_vocab(a, t)
    args = tuple(reachable_states(a, s) for s in t.args)
    return a.step(t.symbol.name, args)


def accepts(a: TreeAutomaton, t: Term) -> bool:
    return not reachable_states(a, t).isdisjoint(a.final)


def accepts_in(a: TreeAutomaton, t: Term, q: str) -> bool:
    return q in reachable_states(a, t)


def reachable_state_set(a: TreeAutomaton) -> frozenset[str]:
    """States that some ground term reaches (the standard emptiness fixpoint)."""
    reached: set[str] = set()
    changed = True
    while changed:
        changed = False
        for tr in a.transitions:
            if isinstance(tr, Normalized) and tr.target not in reached and all(q in reached for q in tr.args):
                reached.add(tr.target)
                changed = True
            elif isinstance(tr, Epsilon) and tr.source in reached and tr.target not in reached:
                reached.add(tr.target)
                changed = True
    return frozenset(reached)


def is_empty(a: TreeAutomaton) -> bool:
    return reachable_state_set(a).isdisjoint(a.final)


# -- constructions -----------------------------------------------------------


def eliminate_epsilon(a: TreeAutomaton) -> TreeAutomaton:
    if not a.has_epsilon:
        return a
    out: list[Transition] = []
    for tr in a.transitions:
        if isinstance(tr, Normalized):
            for q in sorted(a.closure[tr.target]):
                out.append(Normalized(tr.symbol, tr.args, q))
    return TreeAutomaton(a.vocabulary, a.states, a.final, tuple(out))


@dataclass(frozen=True)
class SubsetAutomaton:
    """A determinized automaton together with the state set each new state stands for."""

    automaton: TreeAutomaton
    subsets: Mapping[str, frozenset[str]]

    def state_of(self, subset: frozenset[str]) -> str:
        for name, s in self.subsets.items():
            if s == subset:
                return name
        raise KeyError(subset)


def subset_construction(a: TreeAutomaton, prefix: str = "d") -> SubsetAutomaton:
    """Bottom-up subset construction over the reachable subsets.

    The result is epsilon-free, deterministic and complete; the empty subset, when
    reachable, is the non-final sink.
    """
    known: list[frozenset[str]] = []
    index: dict[frozenset[str], int] = {}

    def add(s: frozenset[str]) -> bool:
        if s in index:
            return False
        index[s] = len(known)
        known.append(s)
        return True

    symbols = list(a.vocabulary)
    table: dict[tuple[str, tuple[int, ...]], int] = {}
    for f in symbols:
        if f.arity == 0:
            s = a.step(f.name, ())
            add(s)
            table[(f.name, ())] = index[s]
    # filling every tuple over the known subsets makes the result complete
    changed = True
    while changed:
        changed = False
        for f in symbols:
            for args in cartesian(range(len(known)), repeat=f.arity):
                if (f.name, args) not in table:
                    s = a.step(f.name, tuple(known[i] for i in args))
                    changed |= add(s)
                    table[(f.name, args)] = index[s]
    names = [f"{prefix}{i}" for i in range(len(known))]
    sink = None
    if frozenset() in index:
        sink = names[index[frozenset()]]
    transitions = tuple(
        Normalized(a.vocabulary[fname], tuple(names[i] for i in args), names[target])
        for (fname, args), target in table.items()
    )
    final = frozenset(names[i] for i, s in enumerate(known) if not s.isdisjoint(a.final))
    dfa = TreeAutomaton(a.vocabulary, frozenset(names), final, transitions, sink=sink)
    return SubsetAutomaton(dfa, dict(zip(names, known)))


def determinize(a: TreeAutomaton) -> TreeAutomaton:
    return subset_construction(a).automaton


def product(a1: TreeAutomaton, a2: TreeAutomaton) -> TreeAutomaton:
    """Automaton for ``L(a1) & L(a2)`` restricted to reachable state pairs."""
    if a1.vocabulary != a2.vocabulary:
        raise AutomatonError("product requires a shared vocabulary")
    b1, b2 = eliminate_epsilon(a1), eliminate_epsilon(a2)
    pairs: list[tuple[Normalized, Normalized]] = []
    for name, trs1 in b1.by_symbol.items():
        for t1 in trs1:
            for t2 in b2.by_symbol.get(name, ()):
                pairs.append((t1, t2))
    name_of = lambda p, q: f"{p}*{q}"  # noqa: E731
    reached: set[tuple[str, str]] = set()
    changed = True
    while changed:
        changed = False
        for t1, t2 in pairs:
            tgt = (t1.target, t2.target)
            if tgt not in reached and all(pq in reached for pq in zip(t1.args, t2.args)):
                reached.add(tgt)
                changed = True
    transitions = tuple(
        Normalized(t1.symbol, tuple(name_of(p, q) for p, q in zip(t1.args, t2.args)), name_of(t1.target, t2.target))
        for t1, t2 in pairs
        if all(pq in reached for pq in zip(t1.args, t2.args))
    )
    states = frozenset(name_of(p, q) for p, q in reached)
    final = frozenset(name_of(p, q) for p, q in reached if p in b1.final and q in b2.final)
    return TreeAutomaton(a1.vocabulary, states, final, transitions)


def from_terms(vocabulary: Vocabulary, terms: Iterable[Term], prefix: str = "t") -> TreeAutomaton:
    """Deterministic automaton with one state per distinct subterm, accepting exactly ``terms``."""
    names: dict[Term, str] = {}
    transitions: list[Transition] = []

    def visit(t: Term) -> str:
        if type(t) is Var:
            raise TermError("from_terms needs ground terms")
        if t in names:
            return names[t]
        args = tuple(visit(s) for s in t.args)
        q = f"{prefix}{len(names)}"
        names[t] = q
        transitions.append(Normalized(vocabulary[t.symbol.name], args, q))
        return q

    final = {visit(t) for t in terms}
    return TreeAutomaton(vocabulary, frozenset(names.values()), frozenset(final), tuple(transitions))


def enumerate_language(a: TreeAutomaton, max_depth: int) -> frozenset[Term]:
    """``{t in L(a) | depth(t) <= max_depth}``.

    Terms reaching no state are pruned early, since no context can recover a run.
    """
    if max_depth < 0:
        raise ValueError("max_depth must be non-negative")
    runs: dict[Term, frozenset[str]] = {}
    newest: dict[Term, frozenset[str]] = {}
    for f in a.vocabulary.constants():
        t = App(f)
        s = a.step(f.name, ())
        if s:
            newest[t] = s
    runs.update(newest)
    for _ in range(max_depth):
        fresh: dict[Term, frozenset[str]] = {}
        pool = list(runs.items())
        for f in a.vocabulary.functions():
            for combo in cartesian(pool, repeat=f.arity):
                if not any(t in newest for t, _ in combo):
                    continue
                s = a.step(f.name, tuple(st for _, st in combo))
                if s:
                    fresh[App(f, [t for t, _ in combo])] = s
        if not fresh:
            break
        runs.update(fresh)
        newest = fresh
    return frozenset(t for t, s in runs.items() if not s.isdisjoint(a.final))
