"""Explicit finite first-order models."""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping

from .logic import And, Atom, Exists, ForAll, Formula, Implies, Not, Or, Theory, format_formula
from .terms import Term, Var


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteModel:
    """Domain ``{0..size-1}`` with flat row-major function tables and tuple-set relations.

    ``functions[name]`` holds ``size ** arity`` entries; constants hold a single entry.
    """

    size: int
    functions: Mapping[str, tuple[int, ...]]
    function_arity: Mapping[str, int]
    relations: Mapping[str, frozenset[tuple[int, ...]]]
    relation_arity: Mapping[str, int]

    def __post_init__(self):
        n = self.size
        if n < 1:
            raise ModelError("domain must be non-empty")
        funcs = {k: tuple(v) for k, v in self.functions.items()}
        rels = {k: frozenset(tuple(t) for t in v) for k, v in self.relations.items()}
        object.__setattr__(self, "functions", funcs)
        object.__setattr__(self, "relations", rels)
        object.__setattr__(self, "function_arity", dict(self.function_arity))
        object.__setattr__(self, "relation_arity", dict(self.relation_arity))
        for name, table in funcs.items():
            k = self.function_arity[name]
            if len(table) != n**k:
                raise ModelError(f"table of {name} has {len(table)} entries, expected {n ** k}")
            if any(not 0 <= v < n for v in table):
                raise ModelError(f"table of {name} leaves the domain")
        for name, tuples in rels.items():
            k = self.relation_arity[name]
            for t in tuples:
                if len(t) != k or any(not 0 <= v < n for v in t):
                    raise ModelError(f"bad tuple {t} in relation {name}")

    def apply(self, name: str, args: tuple[int, ...]) -> int:
        table = self.functions.get(name)
        if table is None:
            raise ModelError(f"no interpretation for function symbol {name!r}")
        idx = 0
        for a in args:
            idx = idx * self.size + a
        return table[idx]

    def holds(self, name: str, args: tuple[int, ...]) -> bool:
        rel = self.relations.get(name)
        if rel is None:
            raise ModelError(f"no interpretation for predicate {name!r}")
        return args in rel

    def function_dict(self, name: str) -> dict[tuple[int, ...], int]:
        k = self.function_arity[name]
        return dict(zip(product(range(self.size), repeat=k), self.functions[name]))


def eval_term(m: FiniteModel, t: Term, v: Mapping[str, int] | None = None) -> int:
    if type(t) is Var:
        if v is None or t.name not in v:
            raise ModelError(f"variable {t.name} has no value")
        return v[t.name]
    return m.apply(t.symbol.name, tuple(eval_term(m, a, v) for a in t.args))


def satisfies(m: FiniteModel, f: Formula, v: Mapping[str, int] | None = None) -> bool:
    """Tarskian satisfaction; quantifiers range over the whole domain."""
    v = {} if v is None else v
    if isinstance(f, Atom):
        return m.holds(f.pred.name, tuple(eval_term(m, t, v) for t in f.args))
    if isinstance(f, Not):
        return not satisfies(m, f.body, v)
    if isinstance(f, And):
        return all(satisfies(m, p, v) for p in f.parts)
    if isinstance(f, Or):
        return any(satisfies(m, p, v) for p in f.parts)
    if isinstance(f, Implies):
        return not satisfies(m, f.left, v) or satisfies(m, f.right, v)
    want = isinstance(f, ForAll)
    inner = dict(v)
    for d in range(m.size):
        inner[f.var] = d
        if satisfies(m, f.body, inner) is not want:
            return not want
    return want


def first_violation(m: FiniteModel, sentences: Iterable[Formula]) -> Formula | None:
    for s in sentences:
        if not satisfies(m, s):
            return s
    return None


def check_countermodel(m: FiniteModel, theory: Theory | Iterable[Formula], goal: Formula) -> bool:
    """True iff ``m`` satisfies every theory sentence and falsifies ``goal``."""
    return first_violation(m, theory) is None and not satisfies(m, goal)


# -- text format -------------------------------------------------------------
# Mace4's ``interpretation(...)`` syntax: flat value lists in row-major order.


def render_model(m: FiniteModel) -> str:
    lines = [f"interpretation( {m.size}, [number=1, seconds=0], ["]
    items = []
    for name in sorted(m.functions, key=lambda s: (m.function_arity[s], s)):
        k = m.function_arity[name]
        head = name if k == 0 else f"{name}({','.join('_' * k)})"
        items.append(f"    function({head}, [{','.join(map(str, m.functions[name]))}])")
    for name in sorted(m.relations):
        k = m.relation_arity[name]
        bits = [1 if t in m.relations[name] else 0 for t in product(range(m.size), repeat=k)]
        head = name if k == 0 else f"{name}({','.join('_' * k)})"
        items.append(f"    relation({head}, [{','.join(map(str, bits))}])")
    lines.append(",\n".join(items))
    lines.append("]).")
    return "\n".join(lines) + "\n"


_ITEM_RE = re.compile(r"(function|relation)\(\s*([A-Za-z0-9_']+)(?:\(([_,\s]*)\))?\s*,\s*\[([0-9,\s]*)\]\s*\)")


def parse_model(text: str) -> FiniteModel:
    head = re.search(r"interpretation\(\s*(\d+)", text)
    if head is None:
        raise ModelError("no interpretation(...) block found")
    n = int(head.group(1))
    functions, farity, relations, rarity = {}, {}, {}, {}
    for kind, name, holes, values in _ITEM_RE.findall(text[head.end():]):
        k = holes.count("_") if holes else 0
        vals = [int(x) for x in values.replace(" ", "").split(",") if x.strip()]
        if len(vals) != n**k:
            raise ModelError(f"{kind} {name}: expected {n ** k} values, got {len(vals)}")
        if kind == "function":
            functions[name] = tuple(vals)
            farity[name] = k
        else:
            if any(b not in (0, 1) for b in vals):
                raise ModelError(f"relation {name}: values must be 0 or 1")
            tuples = product(range(n), repeat=k)
            relations[name] = frozenset(t for t, b in zip(tuples, vals) if b)
            rarity[name] = k
    return FiniteModel(n, functions, farity, relations, rarity)


def describe_model(m: FiniteModel, hide: Iterable[str] = ()) -> str:
    """Human-readable tables: constants, function graphs and relation tuples."""
    hide = set(hide)
    out = [f"domain: {{{', '.join(map(str, range(m.size)))}}}"]
    consts = sorted(n for n, k in m.function_arity.items() if k == 0 and n not in hide)
    if consts:
        groups: dict[int, list[str]] = {}
        for c in consts:
            groups.setdefault(m.functions[c][0], []).append(c)
        out.append("constants: " + "; ".join(" = ".join(f"[{c}]" for c in cs) + f" = {v}" for v, cs in sorted(groups.items())))
    for name in sorted(n for n, k in m.function_arity.items() if k > 0 and n not in hide):
        cells = ", ".join(f"[{name}]({','.join(map(str, args))}) = {val}" for args, val in m.function_dict(name).items())
        out.append(cells)
    for name in sorted(m.relations):
        tuples = sorted(m.relations[name])
        body = ", ".join("(" + ",".join(map(str, t)) + ")" for t in tuples)
        out.append(f"[{name}] = {{{body}}}")
    return "\n".join(out) + "\n"


def explain_violation(m: FiniteModel, theory: Iterable[Formula], goal: Formula) -> str | None:
    bad = first_violation(m, theory)
    if bad is not None:
        return f"violates {format_formula(bad)}"
    if satisfies(m, goal):
        return f"satisfies the goal {format_formula(goal)}"
    return None
