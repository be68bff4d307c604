"""First-order formulas over function symbols and a small set of predicates.

The concrete syntax follows the Prover9/Mace4 (LADR) conventions::

    all x all y (R(x,y) & R(y,z) -> R(x,z))
    exists x (-P(x) | Q(f(x)))

``$T`` and ``$F`` denote the empty conjunction and the empty disjunction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .terms import App, Symbol, Term, TermError, Var, Vocabulary, apply_substitution, is_identifier, tokenize


class FormulaError(ValueError):
    pass


@dataclass(frozen=True)
class PredicateSymbol:
    name: str
    arity: int

    def __str__(self):
        return f"{self.name}/{self.arity}"


@dataclass(frozen=True)
class Atom:
    pred: PredicateSymbol
    args: tuple[Term, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != self.pred.arity:
            raise FormulaError(f"{self.pred.name} expects {self.pred.arity} argument(s), got {len(self.args)}")


@dataclass(frozen=True)
class Not:
    body: Formula


@dataclass(frozen=True)
class And:
    parts: tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if len(self.parts) == 1:
            raise FormulaError("a conjunction needs zero or at least two parts; use conj()")


@dataclass(frozen=True)
class Or:
    parts: tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if len(self.parts) == 1:
            raise FormulaError("a disjunction needs zero or at least two parts; use disj()")


@dataclass(frozen=True)
class Implies:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class ForAll:
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists:
    var: str
    body: Formula


Formula = Union[Atom, Not, And, Or, Implies, ForAll, Exists]
TRUE = And(())
FALSE = Or(())


def conj(*parts: Formula) -> Formula:
    flat = [p for p in parts]
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*parts: Formula) -> Formula:
    flat = [p for p in parts]
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def atom(pred: PredicateSymbol, *args: Term) -> Atom:
    return Atom(pred, args)


def forall(variables: Iterable[str], body: Formula) -> Formula:
    for v in reversed(list(variables)):
        body = ForAll(v, body)
    return body


def exists(variables: Iterable[str], body: Formula) -> Formula:
    for v in reversed(list(variables)):
        body = Exists(v, body)
    return body


# -- traversal ---------------------------------------------------------------


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from subformulas(f.body)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            yield from subformulas(p)
    elif isinstance(f, Implies):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, (ForAll, Exists)):
        yield from subformulas(f.body)


def _free(f: Formula, bound: frozenset[str], out: dict[str, None]) -> None:
    if isinstance(f, Atom):
        for t in f.args:
            for v in t.variables():
                if v not in bound:
                    out.setdefault(v, None)
    elif isinstance(f, Not):
        _free(f.body, bound, out)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            _free(p, bound, out)
    elif isinstance(f, Implies):
        _free(f.left, bound, out)
        _free(f.right, bound, out)
    else:
        _free(f.body, bound | {f.var}, out)


def free_vars_ordered(f: Formula) -> list[str]:
    """Free variables in first-occurrence order."""
    out: dict[str, None] = {}
    _free(f, frozenset(), out)
    return list(out)


def free_vars(f: Formula) -> set[str]:
    return set(free_vars_ordered(f))


def is_sentence(f: Formula) -> bool:
    return not free_vars_ordered(f)


def universal_closure(f: Formula) -> Formula:
    return forall(free_vars_ordered(f), f)


def existential_closure(f: Formula) -> Formula:
    return exists(free_vars_ordered(f), f)


def function_symbols(f: Formula) -> set[Symbol]:
    out: set[Symbol] = set()
    for g in subformulas(f):
        if isinstance(g, Atom):
            stack = list(g.args)
            while stack:
                t = stack.pop()
                if type(t) is App:
                    out.add(t.symbol)
                    stack.extend(t.args)
    return out


def predicate_symbols(f: Formula) -> set[PredicateSymbol]:
    return {g.pred for g in subformulas(f) if isinstance(g, Atom)}


def bound_vars(f: Formula) -> set[str]:
    return {g.var for g in subformulas(f) if isinstance(g, (ForAll, Exists))}


def _fresh(base: str, avoid: set[str]) -> str:
    name = base
    while name in avoid:
        name += "'"
    return name


def substitute(f: Formula, s: Mapping[str, Term]) -> Formula:
    """Capture-avoiding substitution of terms for free variables."""
    if not s:
        return f
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(apply_substitution(t, s) for t in f.args))
    if isinstance(f, Not):
        return Not(substitute(f.body, s))
    if isinstance(f, And):
        return And(tuple(substitute(p, s) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(substitute(p, s) for p in f.parts))
    if isinstance(f, Implies):
        return Implies(substitute(f.left, s), substitute(f.right, s))
    inner = {k: v for k, v in s.items() if k != f.var}
    incoming = set()
    for t in inner.values():
        incoming.update(t.variables())
    var, body = f.var, f.body
    if var in incoming:
        new = _fresh(var, incoming | free_vars(body) | set(inner))
        body = substitute(body, {var: Var(new)})
        var = new
    return type(f)(var, substitute(body, inner))


# -- theories ----------------------------------------------------------------


@dataclass(frozen=True)
class Theory:
    """A finite sequence of sentences over a vocabulary, each optionally tagged."""

    vocabulary: Vocabulary
    sentences: tuple[Formula, ...]
    tags: tuple[str, ...] = ()
    predicates: tuple[PredicateSymbol, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        tags = tuple(self.tags) or ("",) * len(self.sentences)
        if len(tags) != len(self.sentences):
            raise FormulaError("one tag per sentence is required")
        object.__setattr__(self, "tags", tags)
        preds = dict.fromkeys(self.predicates)
        for s in self.sentences:
            if not is_sentence(s):
                raise FormulaError(f"not a sentence: {format_formula(s)}")
            for sym in function_symbols(s):
                if sym not in self.vocabulary:
                    raise FormulaError(f"symbol {sym} is not declared in the theory vocabulary")
            for p in predicate_symbols(s):
                preds.setdefault(p, None)
        object.__setattr__(self, "predicates", tuple(preds))

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def tagged(self, tag: str) -> list[Formula]:
        return [s for s, t in zip(self.sentences, self.tags) if t == tag]


# -- printing ----------------------------------------------------------------


def _fmt_atom(a: Atom) -> str:
    if not a.args:
        return a.pred.name
    return f"{a.pred.name}({','.join(str(t) for t in a.args)})"


def _fmt_operand(f: Formula) -> str:
    if isinstance(f, (And, Or)) and f.parts or isinstance(f, (Implies, ForAll, Exists)):
        return f"({format_formula(f)})"
    return format_formula(f)


def format_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return _fmt_atom(f)
    if isinstance(f, Not):
        return "-" + _fmt_operand(f.body)
    if isinstance(f, And):
        return " & ".join(_fmt_operand(p) for p in f.parts) if f.parts else "$T"
    if isinstance(f, Or):
        return " | ".join(_fmt_operand(p) for p in f.parts) if f.parts else "$F"
    if isinstance(f, Implies):
        return f"{_fmt_operand(f.left)} -> {_fmt_operand(f.right)}"
    word = "all" if isinstance(f, ForAll) else "exists"
    body = f.body
    if isinstance(body, (ForAll, Exists)):
        return f"{word} {f.var} {format_formula(body)}"
    return f"{word} {f.var} {_fmt_operand(body)}"


# -- parsing -----------------------------------------------------------------


class _FormulaParser:
    def __init__(self, text, vocabulary, predicates, variables):
        self.text = text
        self.toks = _merge_arrows(tokenize(text))
        self.i = 0
        self.vocabulary = vocabulary
        self.predicates: dict[str, PredicateSymbol] = {p.name: p for p in predicates or ()}
        self.fixed_predicates = predicates is not None
        self.functions: dict[str, Symbol] = {}
        self.free = set(variables)

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j][0] if j < len(self.toks) else None

    def where(self):
        return self.toks[self.i][1] if self.i < len(self.toks) else len(self.text)

    def fail(self, msg):
        raise FormulaError(f"{msg} at offset {self.where()} in {self.text!r}")

    def expect(self, tok):
        if self.peek() != tok:
            self.fail(f"expected {tok!r}")
        self.i += 1

    def formula(self, bound: tuple[str, ...]) -> Formula:
        left = self.disjunction(bound)
        if self.peek() == "->":
            self.i += 1
            return Implies(left, self.formula(bound))
        return left

    def disjunction(self, bound):
        parts = [self.conjunction(bound)]
        while self.peek() == "|":
            self.i += 1
            parts.append(self.conjunction(bound))
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self, bound):
        parts = [self.unary(bound)]
        while self.peek() == "&":
            self.i += 1
            parts.append(self.unary(bound))
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self, bound):
        tok = self.peek()
        if tok == "-":
            self.i += 1
            return Not(self.unary(bound))
        if tok == "(":
            self.i += 1
            f = self.formula(bound)
            self.expect(")")
            return f
        if tok in ("all", "exists") and self.peek(1) is not None and is_identifier(self.peek(1)) and self.peek(2) != ",":
            self.i += 1
            var = self.peek()
            self.i += 1
            body = self.unary(bound + (var,))
            return ForAll(var, body) if tok == "all" else Exists(var, body)
        if tok == "$T":
            self.i += 1
            return TRUE
        if tok == "$F":
            self.i += 1
            return FALSE
        return self.atom(bound)

    def atom(self, bound):
        name = self.peek()
        if name is None or not is_identifier(name):
            self.fail("expected an atom")
        self.i += 1
        args: list[Term] = []
        if self.peek() == "(":
            self.i += 1
            args.append(self.term(bound))
            while self.peek() == ",":
                self.i += 1
                args.append(self.term(bound))
            self.expect(")")
        pred = self.predicates.get(name)
        if pred is None:
            if self.fixed_predicates:
                self.fail(f"unknown predicate {name!r}")
            pred = self.predicates[name] = PredicateSymbol(name, len(args))
        elif pred.arity != len(args):
            self.fail(f"{name} expects {pred.arity} argument(s)")
        return Atom(pred, tuple(args))

    def term(self, bound) -> Term:
        name = self.peek()
        if name is None or not is_identifier(name):
            self.fail("expected a term")
        self.i += 1
        args: list[Term] = []
        if self.peek() == "(":
            self.i += 1
            args.append(self.term(bound))
            while self.peek() == ",":
                self.i += 1
                args.append(self.term(bound))
            self.expect(")")
        elif name in bound or name in self.free:
            return Var(name)
        return App(self._symbol(name, len(args)), args)

    def _symbol(self, name, arity) -> Symbol:
        if self.vocabulary is not None:
            sym = self.vocabulary.get(name)
            if sym is None:
                self.fail(f"unknown function symbol {name!r}")
            if sym.arity != arity:
                self.fail(f"{name} expects {sym.arity} argument(s)")
            return sym
        sym = self.functions.get(name)
        if sym is None:
            sym = self.functions[name] = Symbol(name, arity)
        elif sym.arity != arity:
            self.fail(f"{name} used with arities {sym.arity} and {arity}")
        return sym


def _merge_arrows(toks):
    out = []
    for tok, pos in toks:
        if tok == ">" and out and out[-1][0] == "-" and out[-1][1] == pos - 1:
            out[-1] = ("->", out[-1][1])
        elif out and out[-1][0] == "$" and out[-1][1] == pos - 1 and tok in ("T", "F"):
            out[-1] = ("$" + tok, out[-1][1])
        else:
            out.append((tok, pos))
    return out


def parse_formula(
    text: str,
    vocabulary: Vocabulary | None = None,
    predicates: Sequence[PredicateSymbol] | None = None,
    variables: Iterable[str] = (),
) -> Formula:
    """Parse LADR-style syntax.

    Identifiers bound by a quantifier or listed in ``variables`` are variables;
    any other identifier in term position is a function symbol or constant.
    """
    p = _FormulaParser(text, vocabulary, predicates, variables)
    try:
        f = p.formula(())
    except TermError as exc:
        raise FormulaError(str(exc)) from exc
    if p.peek() is not None:
        p.fail("trailing input")
    return f


def format_theory(theory: Theory, goal: Formula | None = None) -> str:
    """Render as a Prover9/Mace4 input document, with tags as comments."""
    lines = ["formulas(assumptions)."]
    last = None
    for s, tag in zip(theory.sentences, theory.tags):
        if tag and tag != last:
            lines.append(f"  % {tag}")
            last = tag
        lines.append(f"  {format_formula(s)}.")
    lines.append("end_of_list.")
    if goal is not None:
        lines += ["", "formulas(goals).", f"  {format_formula(goal)}.", "end_of_list."]
    return "\n".join(lines) + "\n"


def parse_theory(text: str) -> tuple[list[Formula], list[Formula], list[str]]:
    """Parse a document produced by :func:`format_theory`.

    Returns assumptions, goals and the tag attached to each assumption.
    """
    assumptions: list[Formula] = []
    goals: list[Formula] = []
    tags: list[str] = []
    section = None
    tag = ""
    pending = ""
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("%"):
            tag = line[1:].strip()
            continue
        if line in ("formulas(assumptions).", "formulas(sos)."):
            section, tag = assumptions, ""
            continue
        if line == "formulas(goals).":
            section = goals
            continue
        if line == "end_of_list.":
            section = None
            continue
        if section is None:
            raise FormulaError(f"text outside a formula list: {line!r}")
        pending += " " + line
        if pending.rstrip().endswith("."):
            section.append(parse_formula(pending.strip()[:-1]))
            if section is assumptions:
                tags.append(tag)
            pending = ""
    if pending.strip():
        raise FormulaError("unterminated formula")
    return assumptions, goals, tags
