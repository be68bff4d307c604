"""First-order encodings of rewrite systems, automata and safety questions.

The binary predicate ``R(s, t)`` stands for "``s`` rewrites to ``t`` in zero or
more steps", where steps come from the rules and from automaton transitions
(states are constants). In the monadic variant ``R(t)`` reads "``t`` is
reachable from an initial term by root rewriting".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal, Union

from .automaton import Epsilon, Normalized, TreeAutomaton
from .logic import (
    FALSE,
    Atom,
    Formula,
    Implies,
    Not,
    PredicateSymbol,
    Theory,
    conj,
    disj,
    existential_closure,
    universal_closure,
)
from .terms import TRS, App, Strategy, Symbol, Term, Var, Vocabulary, apply_substitution, symbols_of

R2 = PredicateSymbol("R", 2)
R1 = PredicateSymbol("R", 1)

Tag = Literal["rule-atom", "transitivity", "congruence", "reflexivity", "automaton-transition", "initial-term"]


class TranslationError(ValueError):
    pass


@dataclass(frozen=True)
class Basis:
    """A finite set of terms standing for all their ground instances."""

    terms: tuple[Term, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(dict.fromkeys(self.terms)))

    def __iter__(self):
        return iter(self.terms)

    def is_ground(self) -> bool:
        return all(t.is_ground() for t in self.terms)


TermSet = Union[TreeAutomaton, Basis]


@dataclass(frozen=True)
class TranslationOptions:
    include_reflexivity: bool = True
    # (symbol name, 1-based position) pairs; position None omits every position
    omitted_congruence: frozenset[tuple[str, int | None]] = frozenset()
    monadic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "omitted_congruence", frozenset(self.omitted_congruence))

    def omits(self, name: str, position: int) -> bool:
        return (name, None) in self.omitted_congruence or (name, position) in self.omitted_congruence


@dataclass(frozen=True)
class VerificationProblem:
    initial: TermSet
    unsafe: TermSet
    trs: TRS
    strategy: Strategy = "any"
    options: TranslationOptions = field(default_factory=TranslationOptions)
    raw_goal: Formula | None = None
    # internal state name -> name as written, for states renamed to avoid symbol clashes
    renamed_states: dict[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.options.monadic and self.strategy != "outermost":
            raise TranslationError("the monadic translation requires the outermost strategy")
        if self.strategy == "outermost" and not (isinstance(self.initial, Basis) and self.initial.is_ground()):
            raise TranslationError("the outermost strategy requires a finite set of ground initial terms")
        for side in (self.initial, self.unsafe):
            if isinstance(side, TreeAutomaton) and side.vocabulary != self.trs.vocabulary:
                raise TranslationError("automaton vocabulary differs from the rewrite system's")

    @property
    def vocabulary(self) -> Vocabulary:
        return self.trs.vocabulary

    @classmethod
    def assemble(cls, initial: TermSet, unsafe: TermSet, trs: TRS, **kwargs) -> VerificationProblem:
        """Build a problem, renaming automaton states that clash with function symbols."""
        taken = set(trs.vocabulary.names)
        renamed: dict[str, str] = {}
        sides = []
        for side in (initial, unsafe):
            if isinstance(side, TreeAutomaton):
                side = _rename_clashing_states(side, taken, renamed)
            sides.append(side)
        return cls(sides[0], sides[1], trs, renamed_states=renamed, **kwargs)


def _rename_clashing_states(a: TreeAutomaton, taken: set[str], renamed: dict[str, str]) -> TreeAutomaton:
    back = {v: k for k, v in renamed.items()}
    mapping = {}
    for q in sorted(a.states):
        if q in back:
            mapping[q] = back[q]
        elif q in taken:
            new = "q_" + q
            while new in taken or new in a.states or new in renamed:
                new += "_"
            mapping[q] = new
            renamed[new] = q
    if not mapping:
        return a
    ren = lambda q: mapping.get(q, q)  # noqa: E731
    trans = [
        Epsilon(ren(t.source), ren(t.target)) if isinstance(t, Epsilon) else Normalized(t.symbol, tuple(map(ren, t.args)), ren(t.target))
        for t in a.transitions
    ]
    return TreeAutomaton(a.vocabulary, frozenset(map(ren, a.states)), frozenset(map(ren, a.final)), tuple(trans))


@dataclass(frozen=True)
class TranslationResult:
    theory: Theory
    goal: Formula
    kind: str = "basic"

    @property
    def provenance(self) -> tuple[str, ...]:
        return self.theory.tags

    def sentences_with_negated_goal(self) -> list[Formula]:
        return [*self.theory.sentences, Not(self.goal)]


# -- pieces ------------------------------------------------------------------


def _fresh_names(bases: Iterable[str], avoid: set[str]) -> list[str]:
    out = []
    for b in bases:
        name = b
        while name in avoid or name in out:
            name += "'"
        out.append(name)
    return out


def _r(a: Term, b: Term) -> Atom:
    return Atom(R2, (a, b))


def transitivity_axiom(avoid: set[str] = frozenset()) -> Formula:
    x, y, z = (Var(n) for n in _fresh_names("xyz", set(avoid)))
    return universal_closure(Implies(conj(_r(x, y), _r(y, z)), _r(x, z)))


def reflexivity_axiom(avoid: set[str] = frozenset()) -> Formula:
    (x,) = (Var(n) for n in _fresh_names("x", set(avoid)))
    return universal_closure(_r(x, x))


def congruence_axiom(f: Symbol, position: int, avoid: set[str] = frozenset()) -> Formula:
    """``R(x,y) -> R(f(..x..), f(..y..))`` with ``x`` at the 1-based ``position``."""
    others = ["z"] if f.arity == 2 else [f"z{i}" for i in range(1, f.arity)]
    names = _fresh_names(["x", "y", *others], set(avoid))
    x, y = Var(names[0]), Var(names[1])
    rest = [Var(n) for n in names[2:]]
    left = rest[: position - 1] + [x] + rest[position - 1 :]
    right = rest[: position - 1] + [y] + rest[position - 1 :]
    return universal_closure(Implies(_r(x, y), _r(App(f, left), App(f, right))))


def _state_constant(q: str) -> App:
    return App(Symbol(q, 0))


def state_symbols(*automata: TreeAutomaton) -> list[Symbol]:
    out: dict[str, Symbol] = {}
    for a in automata:
        for q in sorted(a.states):
            out.setdefault(q, Symbol(q, 0))
    return list(out.values())


def translate_trs(trs: TRS, options: TranslationOptions = TranslationOptions()) -> Theory:
    """Rule atoms, transitivity, optional reflexivity and one congruence axiom per symbol position."""
    avoid = set(trs.vocabulary.names)
    sentences: list[Formula] = []
    tags: list[str] = []
    for rule in trs.rules:
        sentences.append(universal_closure(_r(rule.lhs, rule.rhs)))
        tags.append("rule-atom")
    sentences.append(transitivity_axiom(avoid))
    tags.append("transitivity")
    if options.include_reflexivity:
        sentences.append(reflexivity_axiom(avoid))
        tags.append("reflexivity")
    for f in trs.vocabulary.functions():
        for i in range(1, f.arity + 1):
            if not options.omits(f.name, i):
                sentences.append(congruence_axiom(f, i, avoid))
                tags.append("congruence")
    return Theory(trs.vocabulary, tuple(sentences), tuple(tags), (R2,))


def translate_automaton(a: TreeAutomaton) -> Theory:
    """One ground atom ``R(c, q)`` per transition ``c -> q``."""
    clash = sorted(a.states & set(a.vocabulary.names))
    if clash:
        raise TranslationError(f"state names clash with function symbols: {clash}")
    sentences = [_r(tr.lhs_term(), _state_constant(tr.target)) for tr in a.transitions]
    vocab = a.vocabulary.union(state_symbols(a))
    return Theory(vocab, tuple(sentences), ("automaton-transition",) * len(sentences), (R2,))


def _merge(vocabulary: Vocabulary, parts: Iterable[Theory]) -> Theory:
    seen: dict[Formula, str] = {}
    for th in parts:
        for s, tag in zip(th.sentences, th.tags):
            seen.setdefault(s, tag)
    return Theory(vocabulary, tuple(seen), tuple(seen.values()), (R2,))


def _rename_apart(t: Term, taken: set[str]) -> Term:
    mapping = {}
    for v in t.variables():
        if v in taken:
            (new,) = _fresh_names([v], taken | set(mapping.values()))
            mapping[v] = Var(new)
    return apply_substitution(t, mapping) if mapping else t


def _sides(initial: TermSet, unsafe: TermSet) -> list[Formula]:
    """Goal disjuncts; an automaton side is represented by a variable ``x``/``y`` tied to a final state."""
    disjuncts: list[Formula] = []
    sources: list[tuple[Term, list[Formula]]] = []
    if isinstance(initial, TreeAutomaton):
        for qi in sorted(initial.final):
            sources.append((Var("x"), [_r(Var("x"), _state_constant(qi))]))
    else:
        sources = [(t, []) for t in initial]
    for src, pre in sources:
        if isinstance(unsafe, TreeAutomaton):
            for qu in sorted(unsafe.final):
                y = Var("y" if "y" not in src.variables() else _fresh_names(["y"], set(src.variables()))[0])
                disjuncts.append(conj(*pre, _r(src, y), _r(y, _state_constant(qu))))
        else:
            for u in unsafe:
                disjuncts.append(conj(*pre, _r(src, _rename_apart(u, set(src.variables())))))
    return disjuncts


def goal_formula(initial: TermSet, unsafe: TermSet) -> Formula:
    """Existential closure of the disjunction over initial/unsafe pairs; ``$F`` when there are none."""
    disjuncts = _sides(initial, unsafe)
    if not disjuncts:
        return FALSE
    return existential_closure(disj(*disjuncts))


def _problem_vocabulary(problem: VerificationProblem) -> Vocabulary:
    autos = [s for s in (problem.initial, problem.unsafe) if isinstance(s, TreeAutomaton)]
    vocab = problem.vocabulary.union(state_symbols(*autos))
    return vocab


def _basis_symbols_ok(problem: VerificationProblem) -> None:
    for side in (problem.initial, problem.unsafe):
        if isinstance(side, Basis):
            for t in side:
                bad = [s for s in symbols_of(t) if s not in problem.vocabulary]
                if bad:
                    raise TranslationError(f"basis term {t} uses undeclared symbols {bad}")


def build_basic(problem: VerificationProblem) -> TranslationResult:
    if not (isinstance(problem.initial, TreeAutomaton) and isinstance(problem.unsafe, TreeAutomaton)):
        raise TranslationError("the basic translation needs automata on both sides")
    return build_binary(problem)


def build_finitely_based(problem: VerificationProblem) -> TranslationResult:
    if not (isinstance(problem.initial, Basis) and isinstance(problem.unsafe, Basis)):
        raise TranslationError("the finitely based translation needs term bases on both sides")
    return build_binary(problem)


def build_binary(problem: VerificationProblem) -> TranslationResult:
    """Binary-R translation for any mix of automaton and basis sides."""
    _basis_symbols_ok(problem)
    parts = []
    for side in (problem.initial, problem.unsafe):
        if isinstance(side, TreeAutomaton):
            parts.append(translate_automaton(side))
    parts.append(translate_trs(problem.trs, problem.options))
    vocab = _problem_vocabulary(problem)
    theory = _merge(vocab, parts)
    goal = problem.raw_goal if problem.raw_goal is not None else goal_formula(problem.initial, problem.unsafe)
    kind = "basic" if isinstance(problem.initial, TreeAutomaton) or isinstance(problem.unsafe, TreeAutomaton) else "finitely-based"
    return TranslationResult(theory, goal, kind)


def build_monadic_outermost(problem: VerificationProblem) -> TranslationResult:
    """Unary reachability: initial facts plus one implication per rule; no congruence or transitivity."""
    if not isinstance(problem.initial, Basis) or not problem.initial.is_ground():
        raise TranslationError("the monadic translation needs ground initial terms")
    if not isinstance(problem.unsafe, Basis):
        raise TranslationError("the monadic translation needs a term basis for unsafe terms")
    _basis_symbols_ok(problem)
    sentences: list[Formula] = []
    tags: list[str] = []
    for t in problem.initial:
        sentences.append(Atom(R1, (t,)))
        tags.append("initial-term")
    for rule in problem.trs.rules:
        sentences.append(universal_closure(Implies(Atom(R1, (rule.lhs,)), Atom(R1, (rule.rhs,)))))
        tags.append("rule-atom")
    theory = Theory(problem.vocabulary, tuple(sentences), tuple(tags), (R1,))
    if problem.raw_goal is not None:
        goal = problem.raw_goal
    else:
        parts = [Atom(R1, (u,)) for u in problem.unsafe]
        goal = existential_closure(disj(*parts)) if parts else FALSE
    return TranslationResult(theory, goal, "monadic-outermost")


def translate_problem(problem: VerificationProblem) -> TranslationResult:
    if problem.options.monadic:
        return build_monadic_outermost(problem)
    return build_binary(problem)

