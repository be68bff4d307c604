"""MACE-style finite model search.

For each domain size in turn, sentences are clausified, flattened so that
every literal mentions only variables, grounded over the domain and handed to
the CDCL solver. Function symbols become "graph" atoms ``f(d1..dk) = e``
constrained to be total and single-valued.
"""

from __future__ import annotations

import os
import random
import time
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence, Union

from .logic import And, Atom, Exists, ForAll, Formula, Implies, Not, Or, format_formula, function_symbols, predicate_symbols
from .model import FiniteModel, check_countermodel, first_violation
from .sat import Solver, write_dimacs
from .terms import App, Symbol, Term, Var
from .translate import TranslationResult, VerificationProblem, translate_problem

# Disjunctions whose distributed CNF would exceed this many clauses get a definitional atom.
_CNF_LIMIT = 64


class FinderError(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    max_domain_size: int = 6
    time_budget: float = 60.0
    symmetry_breaking: bool = True
    deterministic_order: bool = True
    dump_clauses: str | None = None  # path prefix for DIMACS dumps, one file per size

    def __post_init__(self):
        if self.max_domain_size < 1:
            raise ValueError("max_domain_size must be at least 1")
        if not self.time_budget > 0:
            raise ValueError("time_budget must be positive")


@dataclass
class SizeStats:
    size: int
    variables: int
    clauses: int
    conflicts: int
    seconds: float
    outcome: str


@dataclass
class SearchStats:
    sizes: list[SizeStats] = field(default_factory=list)
    clauses_first_order: int = 0
    elapsed: float = 0.0

    @property
    def sizes_tried(self) -> list[int]:
        return [s.size for s in self.sizes]


@dataclass
class ModelFound:
    model: FiniteModel
    stats: SearchStats

    @property
    def size(self) -> int:
        return self.model.size


@dataclass
class ExhaustedUpTo:
    n: int
    stats: SearchStats


@dataclass
class Timeout:
    exhausted_up_to: int
    stats: SearchStats


SearchResult = Union[ModelFound, ExhaustedUpTo, Timeout]


# -- clausification ----------------------------------------------------------
# A literal is (positive, name, args); a clause is a list of literals over
# first-order terms, implicitly universally closed.

Literal = tuple[bool, str, tuple[Term, ...]]
Clause = list[Literal]


class _Clausifier:
    def __init__(self, taken: set[str]):
        self.taken = set(taken)
        self.counter = 0
        self.skolems: list[Symbol] = []
        self.definitions: dict[str, int] = {}
        self.clauses: list[Clause] = []

    def fresh(self, base: str) -> str:
        while True:
            self.counter += 1
            name = f"{base}{self.counter}"
            if name not in self.taken:
                self.taken.add(name)
                return name

    def nnf(self, f: Formula, positive: bool, env: dict[str, Term], universals: tuple[str, ...]) -> Formula:
        """Negation normal form with bound variables renamed apart and existentials Skolemized."""
        if isinstance(f, Atom):
            a = Atom(f.pred, tuple(_subst(t, env) for t in f.args))
            return a if positive else Not(a)
        if isinstance(f, Not):
            return self.nnf(f.body, not positive, env, universals)
        if isinstance(f, Implies):
            return self.nnf(Or((Not(f.left), f.right)), positive, env, universals)
        if isinstance(f, (And, Or)):
            parts = tuple(self.nnf(p, positive, env, universals) for p in f.parts)
            return And(parts) if isinstance(f, And) == positive else Or(parts)
        universal = isinstance(f, ForAll) == positive
        inner = dict(env)
        if universal:
            v = self.fresh("v")
            inner[f.var] = Var(v)
            return self.nnf(f.body, positive, inner, universals + (v,))
        sym = Symbol(self.fresh("sk"), len(universals))
        self.skolems.append(sym)
        inner[f.var] = App(sym, tuple(Var(u) for u in universals))
        return self.nnf(f.body, positive, inner, universals)

    def cnf(self, f: Formula) -> list[Clause]:
        if isinstance(f, Atom):
            return [[(True, f.pred.name, f.args)]]
        if isinstance(f, Not):
            a = f.body
            return [[(False, a.pred.name, a.args)]]
        if isinstance(f, And):
            return [c for p in f.parts for c in self.cnf(p)]
        result: list[Clause] = [[]]
        for p in f.parts:
            sub = self.cnf(p)
            if len(result) * len(sub) > _CNF_LIMIT and len(sub) > 1:
                sub = [[self.define(p, sub)]]
            result = [a + b for a in result for b in sub]
        return result

    def define(self, f: Formula, clauses: list[Clause]) -> Literal:
        """Name a subformula by a fresh atom over its variables; only the needed direction is emitted."""
        variables = tuple(dict.fromkeys(v for c in clauses for _, _, args in c for t in args for v in t.variables()))
        name = self.fresh("def")
        args = tuple(Var(v) for v in variables)
        self.definitions[name] = len(args)
        for c in clauses:
            self.clauses.append([(False, name, args), *c])
        return (True, name, args)

    def add(self, sentence: Formula) -> None:
        self.clauses.extend(self.cnf(self.nnf(sentence, True, {}, ())))


def _subst(t: Term, env: dict[str, Term]) -> Term:
    if type(t) is Var:
        return env.get(t.name, t)
    if not t.args:
        return t
    return App(t.symbol, tuple(_subst(a, env) for a in t.args))


# -- flattening --------------------------------------------------------------


@dataclass(frozen=True)
class FlatClause:
    """Variables are numbered ``0..arity-1``.

    ``atoms`` are predicate literals ``(positive, name, var_indices)``;
    ``defs`` are negated function graph literals ``(name, arg_var_indices, result_var)``
    meaning ``name(args) != result``.
    """

    num_vars: int
    atoms: tuple[tuple[bool, str, tuple[int, ...]], ...]
    defs: tuple[tuple[str, tuple[int, ...], int], ...]


def flatten(clause: Clause) -> FlatClause:
    index: dict[str, int] = {}
    memo: dict[Term, int] = {}
    defs: list[tuple[str, tuple[int, ...], int]] = []

    def var_for(t: Term) -> int:
        if type(t) is Var:
            if t.name not in index:
                index[t.name] = len(index)
            return index[t.name]
        if t in memo:
            return memo[t]
        args = tuple(var_for(a) for a in t.args)
        v = len(index)
        index[f"#{v}"] = v
        memo[t] = v
        defs.append((t.symbol.name, args, v))
        return v

    atoms = tuple((pos, name, tuple(var_for(a) for a in args)) for pos, name, args in clause)
    return FlatClause(len(index), atoms, tuple(defs))


# -- grounding ---------------------------------------------------------------


class _Encoding:
    """Propositional variable layout for one domain size."""

    def __init__(self, n: int, functions: dict[str, int], predicates: dict[str, int]):
        self.n = n
        self.functions = functions
        self.predicates = predicates
        self.base: dict[str, int] = {}
        nxt = 1
        for name in sorted(functions):
            self.base[name] = nxt
            nxt += n ** (functions[name] + 1)
        for name in sorted(predicates):
            self.base["P:" + name] = nxt
            nxt += n ** predicates[name]
        self.num_vars = nxt - 1

    def fvar(self, name: str, args: Sequence[int], value: int) -> int:
        idx = 0
        for a in args:
            idx = idx * self.n + a
        return self.base[name] + idx * self.n + value

    def pvar(self, name: str, args: Sequence[int]) -> int:
        idx = 0
        for a in args:
            idx = idx * self.n + a
        return self.base["P:" + name] + idx


def _literal_template(enc: _Encoding, positions: Sequence[int], base: int, trailing: int | None) -> tuple[int, tuple[tuple[int, int], ...]]:
    """Express a ground variable index as ``base + sum(assignment[pos] * weight)``."""
    n = enc.n
    weights: dict[int, int] = {}
    k = len(positions)
    scale = n if trailing is not None else 1
    for i, pos in enumerate(positions):
        weights[pos] = weights.get(pos, 0) + n ** (k - 1 - i) * scale
    if trailing is not None:
        weights[trailing] = weights.get(trailing, 0) + 1
    return base, tuple(weights.items())


def ground_clauses(flat: Sequence[FlatClause], enc: _Encoding, deadline: float | None = None):
    """Yield DIMACS clauses for every assignment of domain elements to each clause's variables."""
    n = enc.n
    for fc in flat:
        templates = []
        for pos, name, args in fc.atoms:
            base, w = _literal_template(enc, args, enc.base["P:" + name], None)
            templates.append((1 if pos else -1, base, w))
        for name, args, res in fc.defs:
            base, w = _literal_template(enc, args, enc.base[name], res)
            templates.append((-1, base, w))
        if deadline is not None and time.monotonic() > deadline:
            raise _Deadline
        for asg in product(range(n), repeat=fc.num_vars):
            yield [sign * (base + sum(asg[p] * m for p, m in w)) for sign, base, w in templates]


class _Deadline(Exception):
    pass


def _structure_clauses(enc: _Encoding, constants: Sequence[str], symmetry_breaking: bool):
    n = enc.n
    for name in sorted(enc.functions):
        k = enc.functions[name]
        for args in product(range(n), repeat=k):
            cell = [enc.fvar(name, args, e) for e in range(n)]
            yield cell
            for i in range(n):
                for j in range(i + 1, n):
                    yield [-cell[i], -cell[j]]
    if symmetry_breaking:
        # least number heuristic on constants: the i-th constant is at most one above the
        # largest value used by earlier constants
        for i, c in enumerate(constants):
            for e in range(1, n):
                if e > i:
                    yield [-enc.fvar(c, (), e)]
                else:
                    yield [-enc.fvar(c, (), e)] + [enc.fvar(d, (), e - 1) for d in constants[:i]]


def _decode(enc: _Encoding, assignment: list[bool], keep_functions: dict[str, int], keep_predicates: dict[str, int]) -> FiniteModel:
    n = enc.n
    functions = {}
    for name, k in keep_functions.items():
        table = []
        for args in product(range(n), repeat=k):
            vals = [e for e in range(n) if assignment[enc.fvar(name, args, e) - 1]]
            table.append(vals[0])
        functions[name] = tuple(table)
    relations = {}
    for name, k in keep_predicates.items():
        relations[name] = frozenset(args for args in product(range(n), repeat=k) if assignment[enc.pvar(name, args) - 1])
    return FiniteModel(n, functions, dict(keep_functions), relations, dict(keep_predicates))


@dataclass
class Problem:
    """Clausified sentences, ready for grounding at any domain size."""

    sentences: list[Formula]
    flat: list[FlatClause]
    functions: dict[str, int]
    predicates: dict[str, int]
    user_functions: dict[str, int]
    user_predicates: dict[str, int]


def prepare(sentences: Sequence[Formula]) -> Problem:
    user_functions: dict[str, int] = {}
    user_predicates: dict[str, int] = {}
    for s in sentences:
        for sym in sorted(function_symbols(s), key=lambda x: x.name):
            if user_functions.setdefault(sym.name, sym.arity) != sym.arity:
                raise FinderError(f"symbol {sym.name} used with two arities")
        for p in sorted(predicate_symbols(s), key=lambda x: x.name):
            if user_predicates.setdefault(p.name, p.arity) != p.arity:
                raise FinderError(f"predicate {p.name} used with two arities")
    clausifier = _Clausifier(set(user_functions) | set(user_predicates))
    for s in sentences:
        clausifier.add(s)
    functions = dict(user_functions)
    functions.update({s.name: s.arity for s in clausifier.skolems})
    predicates = dict(user_predicates)
    predicates.update(clausifier.definitions)
    clauses = clausifier.clauses
    return Problem(list(sentences), [flatten(c) for c in clauses], functions, predicates, user_functions, user_predicates)


def _constants(problem: Problem) -> list[str]:
    return [name for name in sorted(problem.functions) if problem.functions[name] == 0]


def _solve_size(problem: Problem, n: int, config: SearchConfig, deadline: float) -> tuple[bool | None, FiniteModel | None, SizeStats]:
    t0 = time.monotonic()
    enc = _Encoding(n, problem.functions, problem.predicates)
    solver = Solver(enc.num_vars)
    if not config.deterministic_order:
        rng = random.Random()
        for v in range(enc.num_vars):
            solver.activity[v] = rng.random() * 1e-3
        solver.heap = [(-a, v) for v, a in enumerate(solver.activity)]
        solver.heap.sort()
    dump = [] if config.dump_clauses else None
    count = 0
    try:
        for clause in _structure_clauses(enc, _constants(problem), config.symmetry_breaking):
            count += 1
            if dump is not None:
                dump.append(clause)
            solver.add_clause(clause)
        for clause in ground_clauses(problem.flat, enc, deadline):
            count += 1
            if dump is not None:
                dump.append(clause)
            if not solver.add_clause(clause) and dump is None:
                break
    except _Deadline:
        return None, None, SizeStats(n, enc.num_vars, count, 0, time.monotonic() - t0, "timeout")
    if dump is not None:
        write_dimacs(dump, enc.num_vars, f"{config.dump_clauses}.size{n}.cnf", [f"domain size {n}"])
    status = solver.solve(deadline)
    stats = SizeStats(n, enc.num_vars, count, solver.stats["conflicts"], time.monotonic() - t0,
                      {True: "model", False: "exhausted", None: "timeout"}[status])
    if not status:
        return status, None, stats
    return True, _decode(enc, solver.model(), problem.user_functions, problem.user_predicates), stats


def find_model(sentences: Sequence[Formula], config: SearchConfig = SearchConfig()) -> SearchResult:
    """Smallest model of ``sentences`` with at most ``config.max_domain_size`` elements."""
    start = time.monotonic()
    deadline = start + config.time_budget
    problem = prepare(sentences)
    stats = SearchStats(clauses_first_order=len(problem.flat))
    exhausted = 0
    for n in range(1, config.max_domain_size + 1):
        status, model, size_stats = _solve_size(problem, n, config, deadline)
        stats.sizes.append(size_stats)
        stats.elapsed = time.monotonic() - start
        if status is None:
            return Timeout(exhausted, stats)
        if status:
            bad = first_violation(model, problem.sentences)
            if bad is not None:
                raise FinderError(f"internal error: model of size {n} violates {format_formula(bad)}")
            return ModelFound(model, stats)
        exhausted = n
    return ExhaustedUpTo(exhausted, stats)


# -- safety verification -----------------------------------------------------


@dataclass
class Verified:
    model: FiniteModel
    translation: TranslationResult
    search: ModelFound


@dataclass
class Unknown:
    reason: str
    translation: TranslationResult
    search: SearchResult


def verify_safety(problem: VerificationProblem, config: SearchConfig = SearchConfig()) -> Verified | Unknown:
    """Look for a finite model of the translated theory in which the unsafety goal is false."""
    translation = translate_problem(problem)
    result = find_model(translation.sentences_with_negated_goal(), config)
    if isinstance(result, ModelFound):
        if not check_countermodel(result.model, translation.theory, translation.goal):
            raise FinderError("internal error: model fails the countermodel check")
        return Verified(result.model, translation, result)
    if isinstance(result, ExhaustedUpTo):
        reason = f"no countermodel with at most {result.n} elements"
    else:
        reason = f"time budget of {config.time_budget:g}s exhausted"
        if result.exhausted_up_to:
            reason += f"; no countermodel with at most {result.exhausted_up_to} elements"
    return Unknown(reason, translation, result)


def default_timeout() -> float:
    """Default time budget, overridable through ``FCM_TIMEOUT_SECS``."""
    raw = os.environ.get("FCM_TIMEOUT_SECS")
    if raw:
        try:
            value = float(raw)
        except ValueError:
            raise FinderError(f"FCM_TIMEOUT_SECS must be a number, got {raw!r}") from None
        if value > 0:
            return value
    return 60.0
