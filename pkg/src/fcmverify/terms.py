"""Ranked vocabularies, terms, substitutions and term rewriting."""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator, Literal, Mapping, Sequence

Strategy = Literal["any", "outermost"]

_IDENT = r"[A-Za-z0-9_][A-Za-z0-9_']*"
_TOKEN_RE = re.compile(rf"\s*(?:({_IDENT})|(\S))")


class TermError(ValueError):
    """Raised for malformed terms, rules or rewriting requests.

    ``kind`` classifies the problem (syntax, arity, unknown-symbol,
    variable-lhs, extra-variable or other); ``offset`` locates it in the
    parsed text when known.
    """

    def __init__(self, message: str, kind: str = "other", offset: int | None = None):
        super().__init__(message)
        self.kind = kind
        self.offset = offset


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int

    def __post_init__(self):
        if self.arity < 0:
            raise TermError(f"negative arity for {self.name!r}")

    def __str__(self):
        return f"{self.name}:{self.arity}"


class Vocabulary:
    """An ordered, immutable collection of function symbols with unique names."""

    __slots__ = ("_symbols",)

    def __init__(self, symbols: Iterable[Symbol] = ()):
        table: dict[str, Symbol] = {}
        for sym in symbols:
            old = table.get(sym.name)
            if old is not None and old.arity != sym.arity:
                raise TermError(f"symbol {sym.name!r} declared with arities {old.arity} and {sym.arity}")
            table[sym.name] = sym
        self._symbols = table

    def __iter__(self) -> Iterator[Symbol]:
        return iter(self._symbols.values())

    def __len__(self):
        return len(self._symbols)

    def __contains__(self, item) -> bool:
        if isinstance(item, Symbol):
            return self._symbols.get(item.name) == item
        return item in self._symbols

    def __getitem__(self, name: str) -> Symbol:
        return self._symbols[name]

    def get(self, name: str) -> Symbol | None:
        return self._symbols.get(name)

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and set(self._symbols.values()) == set(other._symbols.values())

    def __hash__(self):
        return hash(frozenset(self._symbols.values()))

    def __repr__(self):
        return "Vocabulary(" + " ".join(str(s) for s in self) + ")"

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._symbols)

    def constants(self) -> list[Symbol]:
        return [s for s in self if s.arity == 0]

    def functions(self) -> list[Symbol]:
        return [s for s in self if s.arity > 0]

    def union(self, other: Iterable[Symbol]) -> Vocabulary:
        return Vocabulary([*self, *other])


class Term:
    """Base class of :class:`Var` and :class:`App`. Terms are immutable and hashable."""

    __slots__ = ()

    def is_ground(self) -> bool:
        raise NotImplementedError

    def variables(self) -> list[str]:
        """Variable names in first-occurrence (left-to-right) order."""
        seen: dict[str, None] = {}
        _collect_vars(self, seen)
        return list(seen)


class Var(Term):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __eq__(self, other):
        return type(other) is Var and other.name == self.name

    def __hash__(self):
        return hash(("var", self.name))

    def __repr__(self):
        return f"Var({self.name!r})"

    def __str__(self):
        return self.name

    def is_ground(self) -> bool:
        return False


class App(Term):
    __slots__ = ("symbol", "args", "_hash")

    def __init__(self, symbol: Symbol, args: Sequence[Term] = ()):
        args = tuple(args)
        if len(args) != symbol.arity:
            raise TermError(f"{symbol.name} expects {symbol.arity} argument(s), got {len(args)}", "arity")
        object.__setattr__(self, "symbol", symbol)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "_hash", hash((symbol, args)))

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __eq__(self, other):
        if self is other:
            return True
        return (
            type(other) is App
            and other._hash == self._hash
            and other.symbol == self.symbol
            and other.args == self.args
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"App({self})"

    def __str__(self):
        if not self.args:
            return self.symbol.name
        return f"{self.symbol.name}({','.join(str(a) for a in self.args)})"

    def is_ground(self) -> bool:
        return all(a.is_ground() for a in self.args)


def _collect_vars(t: Term, seen: dict[str, None]) -> None:
    if type(t) is Var:
        seen.setdefault(t.name, None)
    else:
        for a in t.args:
            _collect_vars(a, seen)


def const(name: str) -> App:
    return App(Symbol(name, 0))


def size(t: Term) -> int:
    """Node count."""
    if type(t) is Var:
        return 1
    return 1 + sum(size(a) for a in t.args)


def depth(t: Term) -> int:
    """Height of the tree; constants and variables have depth 0."""
    if type(t) is Var or not t.args:
        return 0
    return 1 + max(depth(a) for a in t.args)


def symbols_of(t: Term) -> set[Symbol]:
    out: set[Symbol] = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if type(u) is App:
            out.add(u.symbol)
            stack.extend(u.args)
    return out


def term_key(t: Term):
    """Canonical sort key: variables first, then by symbol name, arity and arguments."""
    if type(t) is Var:
        return (0, t.name)
    return (1, t.symbol.name, t.symbol.arity, tuple(term_key(a) for a in t.args))


def canonical(terms: Iterable[Term]) -> list[Term]:
    return sorted(set(terms), key=term_key)


# -- positions ---------------------------------------------------------------

Position = tuple[int, ...]


def positions(t: Term) -> Iterator[Position]:
    """All positions of ``t`` in pre-order (root first)."""
    yield ()
    if type(t) is App:
        for i, a in enumerate(t.args):
            for p in positions(a):
                yield (i, *p)


def subterm_at(t: Term, pos: Position) -> Term:
    for i in pos:
        t = t.args[i]
    return t


def replace_at(t: Term, pos: Position, new: Term) -> Term:
    if not pos:
        return new
    i, rest = pos[0], pos[1:]
    args = list(t.args)
    args[i] = replace_at(args[i], rest, new)
    return App(t.symbol, args)


# -- substitutions -----------------------------------------------------------


class Substitution(Mapping[str, Term]):
    """A finite map from variable names to terms, applied simultaneously."""

    __slots__ = ("_map",)

    def __init__(self, mapping: Mapping[str, Term] | Iterable[tuple[str, Term]] = ()):
        self._map = dict(mapping)

    def __getitem__(self, key):
        return self._map[key]

    def __iter__(self):
        return iter(self._map)

    def __len__(self):
        return len(self._map)

    def __repr__(self):
        inner = ", ".join(f"{k} -> {v}" for k, v in self._map.items())
        return "{" + inner + "}"

    def __call__(self, t: Term) -> Term:
        return apply_substitution(t, self)


def apply_substitution(t: Term, s: Mapping[str, Term]) -> Term:
    if type(t) is Var:
        return s.get(t.name, t)
    if not t.args:
        return t
    return App(t.symbol, [apply_substitution(a, s) for a in t.args])


def match(pattern: Term, t: Term, binding: dict[str, Term] | None = None) -> dict[str, Term] | None:
    """First-order matching of ``pattern`` against ``t``; returns the extended binding or None."""
    binding = {} if binding is None else dict(binding)
    stack = [(pattern, t)]
    while stack:
        p, u = stack.pop()
        if type(p) is Var:
            bound = binding.get(p.name)
            if bound is None:
                binding[p.name] = u
            elif bound != u:
                return None
        else:
            if type(u) is not App or u.symbol != p.symbol:
                return None
            stack.extend(zip(p.args, u.args))
    return binding


# -- rewrite rules -----------------------------------------------------------


@dataclass(frozen=True)
class RewriteRule:
    lhs: Term
    rhs: Term

    def __post_init__(self):
        if type(self.lhs) is Var:
            raise TermError(f"left-hand side of {self} is a variable", "variable-lhs")
        extra = set(self.rhs.variables()) - set(self.lhs.variables())
        if extra:
            raise TermError(f"rule {self}: right-hand side variables {sorted(extra)} do not occur on the left", "extra-variable")

    def __str__(self):
        return f"{self.lhs} -> {self.rhs}"

    def variables(self) -> list[str]:
        seen = dict.fromkeys(self.lhs.variables())
        seen.update(dict.fromkeys(self.rhs.variables()))
        return list(seen)


@dataclass(frozen=True)
class TRS:
    rules: tuple[RewriteRule, ...]
    vocabulary: Vocabulary = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        syms: set[Symbol] = set()
        for r in self.rules:
            syms |= symbols_of(r.lhs) | symbols_of(r.rhs)
        if self.vocabulary is None:
            object.__setattr__(self, "vocabulary", Vocabulary(sorted(syms, key=lambda s: s.name)))
        else:
            missing = [s for s in syms if s not in self.vocabulary]
            if missing:
                raise TermError("rule symbols outside vocabulary: " + ", ".join(map(str, missing)))

    def __iter__(self):
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)


@dataclass(frozen=True)
class Step:
    """One rewrite step: ``rule`` applied at ``position`` of ``source`` giving ``target``."""

    source: Term
    position: Position
    rule: int
    target: Term


def _require_ground(t: Term) -> None:
    if not t.is_ground():
        raise TermError(f"rewriting is defined on ground terms only, got {t}")


def rewrite_steps(t: Term, trs: TRS, strategy: Strategy = "any") -> Iterator[Step]:
    """All single rewrite steps from ground ``t``; ``outermost`` restricts redexes to the root."""
    _require_ground(t)
    where = [()] if strategy == "outermost" else positions(t)
    for pos in where:
        sub = subterm_at(t, pos)
        for i, rule in enumerate(trs.rules):
            sigma = match(rule.lhs, sub)
            if sigma is not None:
                yield Step(t, pos, i, replace_at(t, pos, apply_substitution(rule.rhs, sigma)))


def one_step_successors(t: Term, trs: TRS) -> list[Term]:
    return canonical(s.target for s in rewrite_steps(t, trs, "any"))


def outermost_successors(t: Term, trs: TRS) -> list[Term]:
    return canonical(s.target for s in rewrite_steps(t, trs, "outermost"))


def successors(t: Term, trs: TRS, strategy: Strategy = "any") -> list[Term]:
    return canonical(s.target for s in rewrite_steps(t, trs, strategy))


@dataclass
class Reachability:
    """Result of a bounded breadth-first exploration from one or more start terms."""

    terms: frozenset[Term]
    pruned: bool
    parent: dict[Term, Step | None]

    def __contains__(self, t) -> bool:
        return t in self.terms

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def trace(self, t: Term) -> list[Step]:
        """Rewrite steps leading from a start term to ``t``."""
        steps: list[Step] = []
        step = self.parent[t]
        while step is not None:
            steps.append(step)
            step = self.parent[step.source]
        steps.reverse()
        return steps


def bounded_reachable(
    start: Term | Iterable[Term],
    trs: TRS,
    depth: int,
    size_cap: int | None = None,
    strategy: Strategy = "any",
) -> Reachability:
    """Terms reachable in at most ``depth`` steps whose size stays within ``size_cap``.

    Start terms are always included. Successors over the cap are dropped and the
    ``pruned`` flag is set.
    """
    if depth < 0:
        raise TermError("depth must be non-negative")
    starts = [start] if isinstance(start, Term) else list(start)
    parent: dict[Term, Step | None] = {}
    frontier = deque()
    for t in starts:
        _require_ground(t)
        if t not in parent:
            parent[t] = None
            frontier.append((t, 0))
    pruned = False
    while frontier:
        t, d = frontier.popleft()
        if d == depth:
            continue
        for step in rewrite_steps(t, trs, strategy):
            u = step.target
            if u in parent:
                continue
            if size_cap is not None and size(u) > size_cap:
                pruned = True
                continue
            parent[u] = step
            frontier.append((u, d + 1))
    return Reachability(frozenset(parent), pruned, parent)


# -- enumeration -------------------------------------------------------------


def enumerate_terms(vocabulary: Vocabulary, max_depth: int) -> list[Term]:
    """All ground terms over ``vocabulary`` of depth at most ``max_depth``."""
    upto: list[Term] = [App(c) for c in vocabulary.constants()]
    newest = set(upto)
    for _ in range(max_depth):
        fresh: list[Term] = []
        for f in vocabulary.functions():
            for args in product(upto, repeat=f.arity):
                # exactly the terms whose height is one more than the previous level
                if any(a in newest for a in args):
                    fresh.append(App(f, args))
        if not fresh:
            break
        upto.extend(fresh)
        newest = set(fresh)
    return upto


# -- text syntax -------------------------------------------------------------


def tokenize(text: str) -> list[tuple[str, int]]:
    """Split into identifier and single-character tokens, keeping offsets."""
    out: list[tuple[str, int]] = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            break
        if m.group(1) is not None:
            out.append((m.group(1), m.start(1)))
        elif m.group(2) is not None:
            out.append((m.group(2), m.start(2)))
        pos = m.end()
    return out


def is_identifier(name: str) -> bool:
    return re.fullmatch(_IDENT, name) is not None


class _TermParser:
    def __init__(self, text, vocabulary, variables):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.vocabulary = vocabulary
        self.variables = set(variables)

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def offset(self):
        return self.toks[self.i][1] if self.i < len(self.toks) else len(self.text)

    def expect(self, tok):
        if self.peek() != tok:
            raise TermError(f"expected {tok!r} at offset {self.offset()} in {self.text!r}", "syntax", self.offset())
        self.i += 1

    def term(self) -> Term:
        name = self.peek()
        if name is None or not is_identifier(name):
            raise TermError(f"expected a term at offset {self.offset()} in {self.text!r}", "syntax", self.offset())
        start = self.offset()
        self.i += 1
        args: list[Term] = []
        if self.peek() == "(":
            self.i += 1
            args.append(self.term())
            while self.peek() == ",":
                self.i += 1
                args.append(self.term())
            self.expect(")")
        elif name in self.variables:
            return Var(name)
        if self.vocabulary is not None:
            sym = self.vocabulary.get(name)
            if sym is None:
                raise TermError(f"unknown symbol {name!r} in {self.text!r}", "unknown-symbol", start)
            if sym.arity != len(args):
                raise TermError(f"{name} expects {sym.arity} argument(s), got {len(args)} in {self.text!r}", "arity", start)
        else:
            sym = Symbol(name, len(args))
        return App(sym, args)


def parse_term(text: str, vocabulary: Vocabulary | None = None, variables: Iterable[str] = ()) -> Term:
    """Parse ``f(x,s(0))``-style syntax. Names listed in ``variables`` become variables."""
    p = _TermParser(text, vocabulary, variables)
    t = p.term()
    if p.peek() is not None:
        raise TermError(f"trailing input at offset {p.offset()} in {text!r}", "syntax", p.offset())
    return t


def parse_rule(text: str, vocabulary: Vocabulary | None = None, variables: Iterable[str] = ()) -> RewriteRule:
    lhs, sep, rhs = text.partition("->")
    if not sep:
        raise TermError(f"missing '->' in rule {text!r}", "syntax", len(text))
    left = parse_term(lhs, vocabulary, variables)
    try:
        right = parse_term(rhs, vocabulary, variables)
    except TermError as exc:
        if exc.offset is not None:
            exc.offset += len(lhs) + 2
        raise
    return RewriteRule(left, right)
