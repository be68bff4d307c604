"""Line-oriented problem files: declarations, rules, initial/unsafe sets and options.

See ``docs/grammar.md`` for the grammar. Example::

    Ops f:1 s:1 a:0
    Vars x
    TRS
      f(x) -> f(s(s(x)))
    Initial Basis
      f(a)
    Unsafe Basis
      f(s(a))
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .automaton import AutomatonError, Epsilon, Normalized, TreeAutomaton
from .logic import Formula, FormulaError, format_formula, parse_formula
from .terms import TRS, RewriteRule, Symbol, Term, TermError, Vocabulary, is_identifier, parse_term
from .translate import R1, R2, Basis, TranslationOptions, VerificationProblem

KEYWORDS = ("Ops", "Vars", "TRS", "Initial", "Unsafe", "States", "Final", "Transitions", "Options")
OPTION_KEYS = ("strategy", "reflexivity", "monadic", "omit-congruence", "goal")


class ProblemError(ValueError):
    """A diagnostic pinned to a 1-based line and column.

    ``kind`` is one of ``syntax``, ``arity``, ``unknown-symbol``, ``unknown-state``,
    ``variable-lhs``, ``extra-variable``, ``name-clash``, ``duplicate``,
    ``missing-section`` or ``option``.
    """

    def __init__(self, kind: str, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.kind = kind
        self.line = line
        self.column = column
        self.message = message


@dataclass(frozen=True)
class AutomatonSpec:
    states: tuple[str, ...]
    final: tuple[str, ...]
    transitions: tuple[Union[Normalized, Epsilon], ...]

    def build(self, vocabulary: Vocabulary) -> TreeAutomaton:
        return TreeAutomaton(vocabulary, frozenset(self.states), frozenset(self.final), self.transitions)


@dataclass(frozen=True)
class FileOptions:
    strategy: str = "any"
    reflexivity: bool = True
    monadic: bool = False
    omit_congruence: tuple[tuple[str, int | None], ...] = ()
    goal: Formula | None = None


@dataclass(frozen=True)
class ProblemFile:
    vocabulary: Vocabulary
    variables: tuple[str, ...]
    rules: tuple[RewriteRule, ...]
    initial: Union[AutomatonSpec, Basis]
    unsafe: Union[AutomatonSpec, Basis]
    options: FileOptions = field(default_factory=FileOptions)

    def side(self, spec: Union[AutomatonSpec, Basis]):
        return spec.build(self.vocabulary) if isinstance(spec, AutomatonSpec) else spec

    def goal_vocabulary(self) -> Vocabulary:
        """Function symbols plus one constant per automaton state, for goal formulas."""
        states = set()
        for side in (self.initial, self.unsafe):
            if isinstance(side, AutomatonSpec):
                states |= set(side.states)
        return self.vocabulary.union(Symbol(q, 0) for q in sorted(states))

    def parse_goal(self, text: str, monadic: bool | None = None) -> Formula:
        if monadic is None:
            monadic = self.options.monadic
        return parse_formula(text, self.goal_vocabulary(), [R1 if monadic else R2])

    def to_problem(self, **overrides) -> VerificationProblem:
        """Assemble a problem; ``overrides`` replace option fields by name."""
        opts = FileOptions(**{**self.options.__dict__, **overrides})
        translation = TranslationOptions(
            include_reflexivity=opts.reflexivity,
            omitted_congruence=frozenset(opts.omit_congruence),
            monadic=opts.monadic,
        )
        trs = TRS(self.rules, self.vocabulary)
        return VerificationProblem(
            self.side(self.initial), self.side(self.unsafe), trs, opts.strategy, translation, opts.goal
        )


# -- parsing -----------------------------------------------------------------


def _strip_comment(line: str) -> str:
    for mark in ("#", "%"):
        k = line.find(mark)
        if k >= 0:
            line = line[:k]
    return line.rstrip()


class _Parser:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.ops: list[Symbol] | None = None
        self.vocab = Vocabulary()
        self.variables: list[str] = []
        self.rules: list[RewriteRule] = []
        self.sides: dict[str, Union[AutomatonSpec, Basis]] = {}
        self.options = {}
        self.omit: list[tuple[str, int | None]] = []
        self.seen: set[str] = set()
        self.section = None  # current block kind
        self.side_name = None
        self.auto: dict | None = None
        self.basis: list[Term] | None = None
        self.state_line: dict[str, tuple[int, int]] = {}

    def err(self, kind, ln, col, msg):
        raise ProblemError(kind, ln, col, msg)

    # words with their 1-based columns
    @staticmethod
    def words(line: str, start: int = 0) -> list[tuple[str, int]]:
        out = []
        i = start
        n = len(line)
        while i < n:
            if line[i].isspace():
                i += 1
                continue
            j = i
            while j < n and not line[j].isspace():
                j += 1
            out.append((line[i:j], i + 1))
            i = j
        return out

    def parse(self) -> ProblemFile:
        for ln, raw in enumerate(self.lines, 1):
            line = _strip_comment(raw)
            if not line.strip():
                continue
            words = self.words(line)
            head, col = words[0]
            if head in KEYWORDS:
                self.keyword(head, words, ln, line)
            else:
                self.body(line, ln, col)
        self.close_side()
        last = len(self.lines) + 1
        if self.ops is None:
            self.err("missing-section", last, 1, "missing 'Ops' declaration")
        for name in ("Initial", "Unsafe"):
            if name not in self.sides:
                self.err("missing-section", last, 1, f"missing '{name}' section")
        return ProblemFile(
            self.vocab,
            tuple(self.variables),
            tuple(self.rules),
            self.sides["Initial"],
            self.sides["Unsafe"],
            FileOptions(
                strategy=self.options.get("strategy", "any"),
                reflexivity=self.options.get("reflexivity", True),
                monadic=self.options.get("monadic", False),
                omit_congruence=tuple(self.omit),
                goal=self.goal(*self.options["goal"]) if "goal" in self.options else None,
            ),
        )

    def once(self, name, ln, col):
        if name in self.seen:
            self.err("duplicate", ln, col, f"section '{name}' appears twice")
        self.seen.add(name)

    def keyword(self, head, words, ln, line):
        col = words[0][1]
        rest = words[1:]
        if head in ("States", "Final", "Transitions"):
            if self.auto is None:
                self.err("syntax", ln, col, f"'{head}' outside an automaton block")
            self.automaton_keyword(head, rest, ln, col)
            return
        self.close_side()
        if head == "Ops":
            self.once(head, ln, col)
            self.declare_ops(rest, ln)
            self.section = None
        elif head == "Vars":
            self.once(head, ln, col)
            self.require_ops(ln, col)
            for name, c in rest:
                if not is_identifier(name):
                    self.err("syntax", ln, c, f"bad variable name {name!r}")
                if name in self.vocab:
                    self.err("name-clash", ln, c, f"variable {name!r} is also a function symbol")
                if name in self.variables:
                    self.err("duplicate", ln, c, f"variable {name!r} declared twice")
                self.variables.append(name)
            self.section = None
        elif head in ("TRS", "Options"):
            self.once(head, ln, col)
            self.require_ops(ln, col)
            if rest:
                self.err("syntax", ln, rest[0][1], f"unexpected text after '{head}'")
            self.section = head
        else:  # Initial / Unsafe
            self.once(head, ln, col)
            self.require_ops(ln, col)
            if len(rest) != 1 or rest[0][0] not in ("Automaton", "Basis"):
                c = rest[0][1] if rest else len(line) + 1
                self.err("syntax", ln, c, f"expected '{head} Automaton' or '{head} Basis'")
            self.side_name = head
            if rest[0][0] == "Automaton":
                self.auto = {"states": None, "final": None, "transitions": [], "line": ln, "in_transitions": False}
                self.section = "Automaton"
            else:
                self.basis = []
                self.section = "Basis"

    def require_ops(self, ln, col):
        if self.ops is None:
            self.err("missing-section", ln, col, "'Ops' must come first")

    def declare_ops(self, rest, ln):
        ops = []
        for word, c in rest:
            name, sep, ar = word.rpartition(":")
            if not sep or not is_identifier(name) or not ar.isdigit():
                self.err("syntax", ln, c, f"expected name:arity, got {word!r}")
            if name in KEYWORDS:
                self.err("name-clash", ln, c, f"{name!r} is a reserved word")
            if any(s.name == name for s in ops):
                self.err("duplicate", ln, c, f"symbol {name!r} declared twice")
            ops.append(Symbol(name, int(ar)))
        self.ops = ops
        self.vocab = Vocabulary(ops)

    def automaton_keyword(self, head, rest, ln, col):
        a = self.auto
        key = head.lower()
        if key == "transitions":
            if rest:
                self.err("syntax", ln, rest[0][1], "unexpected text after 'Transitions'")
            if a["states"] is None:
                self.err("missing-section", ln, col, "'States' must precede 'Transitions'")
            a["in_transitions"] = True
            return
        if a[key] is not None:
            self.err("duplicate", ln, col, f"'{head}' given twice")
        names = []
        for name, c in rest:
            if not is_identifier(name):
                self.err("syntax", ln, c, f"bad state name {name!r}")
            if key == "states":
                if name in self.vocab:
                    self.err("name-clash", ln, c, f"state {name!r} is also a function symbol")
                if name in self.variables:
                    self.err("name-clash", ln, c, f"state {name!r} is also a variable")
                self.state_line.setdefault(name, (ln, c))
            elif a["states"] is None or name not in a["states"]:
                self.err("unknown-state", ln, c, f"final state {name!r} is not declared in 'States'")
            names.append(name)
        a[key] = tuple(dict.fromkeys(names))

    def close_side(self):
        if self.side_name is None:
            return
        if self.auto is not None:
            a = self.auto
            if a["states"] is None or a["final"] is None:
                self.err("missing-section", a["line"], 1, "automaton block needs 'States' and 'Final'")
            self.sides[self.side_name] = AutomatonSpec(a["states"], a["final"], tuple(dict.fromkeys(a["transitions"])))
        else:
            self.sides[self.side_name] = Basis(tuple(self.basis))
        self.side_name = None
        self.auto = None
        self.basis = None
        self.section = None

    def term(self, text: str, ln: int, col: int) -> Term:
        stripped = text.lstrip()
        col += len(text) - len(stripped)
        text = stripped.rstrip()
        try:
            return parse_term(text, self.vocab, self.variables)
        except TermError as exc:
            self.err(exc.kind, ln, col + (exc.offset or 0), str(exc))

    def body(self, line, ln, col):
        text = line[col - 1:]
        if self.section == "TRS":
            self.rule(text, ln, col)
        elif self.section == "Automaton":
            if not self.auto["in_transitions"]:
                self.err("syntax", ln, col, "transitions must follow 'Transitions'")
            self.transition(text, ln, col)
        elif self.section == "Basis":
            self.basis.append(self.term(text, ln, col))
        elif self.section == "Options":
            self.option(text, ln, col)
        else:
            self.err("syntax", ln, col, f"unexpected line outside any section: {text!r}")

    def rule(self, text, ln, col):
        lhs, sep, rhs = text.partition("->")
        if not sep:
            self.err("syntax", ln, col + len(text), "expected 'lhs -> rhs'")
        left = self.term(lhs, ln, col)
        right = self.term(rhs, ln, col + len(lhs) + 2)
        try:
            self.rules.append(RewriteRule(left, right))
        except TermError as exc:
            self.err(exc.kind, ln, col, str(exc))

    def transition(self, text, ln, col):
        lhs, sep, rhs = text.partition("->")
        if not sep:
            self.err("syntax", ln, col + len(text), "expected 'f(q1,...,qn) -> q' or 'q1 -> q2'")
        states = self.auto["states"]
        target = rhs.strip()
        tcol = col + len(lhs) + 2 + (len(rhs) - len(rhs.lstrip()))
        if target not in states:
            self.err("unknown-state", ln, tcol, f"state {target!r} is not declared")
        src = lhs.strip()
        if src in states:
            self.auto["transitions"].append(Epsilon(src, target))
            return
        try:
            t = parse_term(src, None)
        except TermError as exc:
            self.err("syntax", ln, col + (exc.offset or 0), str(exc))
        sym = self.vocab.get(t.symbol.name)
        if sym is None:
            self.err("unknown-symbol", ln, col, f"unknown symbol or state {t.symbol.name!r}")
        if sym.arity != len(t.args):
            self.err("arity", ln, col, f"{sym.name} expects {sym.arity} argument(s), got {len(t.args)}")
        args = []
        for a in t.args:
            if a.args or a.symbol.name not in states:
                self.err("unknown-state", ln, col, f"argument {a} of a transition must be a declared state")
            args.append(a.symbol.name)
        self.auto["transitions"].append(Normalized(sym, tuple(args), target))

    def option(self, text, ln, col):
        key, _, value = text.strip().partition(" ")
        value = value.strip()
        vcol = col + len(text) - len(value)
        if key not in OPTION_KEYS:
            self.err("option", ln, col, f"unknown option {key!r}; expected one of {', '.join(OPTION_KEYS)}")
        if key in self.options and key != "omit-congruence":
            self.err("duplicate", ln, col, f"option {key!r} given twice")
        if key == "strategy":
            if value not in ("any", "outermost"):
                self.err("option", ln, vcol, "strategy must be 'any' or 'outermost'")
            self.options[key] = value
        elif key in ("reflexivity", "monadic"):
            if value not in ("on", "off"):
                self.err("option", ln, vcol, f"{key} must be 'on' or 'off'")
            self.options[key] = value == "on"
        elif key == "omit-congruence":
            for word, c in self.words(value):
                try:
                    self.omit.append(parse_congruence_spec(word, self.vocab))
                except ValueError as exc:
                    self.err("option", ln, vcol + c - 1, str(exc))
        else:
            self.options[key] = (value, ln, vcol)  # parsed once all states are known

    def goal(self, text, ln, col):
        pf = ProblemFile(self.vocab, (), (), self.sides["Initial"], self.sides["Unsafe"])
        try:
            return pf.parse_goal(text, self.options.get("monadic", False))
        except FormulaError as exc:
            self.err("option", ln, col, f"bad goal formula: {exc}")


def parse_congruence_spec(text: str, vocabulary: Vocabulary) -> tuple[str, int | None]:
    """``sym`` or ``sym:pos`` (1-based) naming congruence axioms to leave out."""
    name, sep, pos = text.partition(":")
    sym = vocabulary.get(name)
    if sym is None:
        raise ValueError(f"unknown symbol {name!r} in congruence omission")
    if not sep:
        return (name, None)
    if not pos.isdigit() or not 1 <= int(pos) <= sym.arity:
        raise ValueError(f"position {pos!r} is out of range for {sym}")
    return (name, int(pos))


def parse_problem_file(text: str) -> ProblemFile:
    try:
        return _Parser(text).parse()
    except AutomatonError as exc:  # defensive: the parser checks these itself
        raise ProblemError("syntax", 0, 0, str(exc)) from exc


def parse_automaton_file(text: str, vocabulary: Vocabulary) -> TreeAutomaton:
    """A lone automaton block: ``States``, ``Final`` and ``Transitions`` lines."""
    p = _Parser(text)
    p.ops = list(vocabulary)
    p.vocab = vocabulary
    p.side_name = "Automaton"
    p.auto = {"states": None, "final": None, "transitions": [], "line": 1, "in_transitions": False}
    p.section = "Automaton"
    for ln, raw in enumerate(p.lines, 1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        words = p.words(line)
        head, col = words[0]
        if head in ("States", "Final", "Transitions"):
            p.automaton_keyword(head, words[1:], ln, col)
        elif head in KEYWORDS:
            p.err("syntax", ln, col, f"'{head}' is not allowed in an automaton file")
        else:
            p.body(line, ln, col)
    p.close_side()
    return p.sides["Automaton"].build(vocabulary)


def format_automaton(a: TreeAutomaton) -> str:
    lines = ["States " + " ".join(sorted(a.states)), "Final " + " ".join(sorted(a.final)), "Transitions"]
    lines += [f"  {tr}" for tr in a.transitions]
    return "\n".join(lines) + "\n"


def parse_problem(text: str) -> VerificationProblem:
    return parse_problem_file(text).to_problem()


# -- printing ----------------------------------------------------------------


def _format_side(head: str, side) -> list[str]:
    if isinstance(side, Basis):
        return [f"{head} Basis", *(f"  {t}" for t in side)]
    return [
        f"{head} Automaton",
        "  States " + " ".join(side.states),
        "  Final " + " ".join(side.final),
        "  Transitions",
        *(f"    {tr}" for tr in side.transitions),
    ]


def format_problem(pf: ProblemFile) -> str:
    lines = ["Ops " + " ".join(str(s) for s in pf.vocabulary)]
    if pf.variables:
        lines.append("Vars " + " ".join(pf.variables))
    lines += ["", "TRS", *(f"  {r}" for r in pf.rules), ""]
    lines += _format_side("Initial", pf.initial) + [""]
    lines += _format_side("Unsafe", pf.unsafe)
    o = pf.options
    opts = []
    if o.strategy != "any":
        opts.append(f"strategy {o.strategy}")
    if not o.reflexivity:
        opts.append("reflexivity off")
    if o.monadic:
        opts.append("monadic on")
    for name, pos in o.omit_congruence:
        opts.append(f"omit-congruence {name}" + ("" if pos is None else f":{pos}"))
    if o.goal is not None:
        opts.append(f"goal {format_formula(o.goal)}")
    if opts:
        lines += ["", "Options", *(f"  {x}" for x in opts)]
    return "\n".join(lines) + "\n"
