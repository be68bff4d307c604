"""Command-line front end: ``fcmverify {verify,translate,oracle,witness,check} PROBLEM``.

Exit codes: 0 verified, 1 unknown, 2 refuted, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path
from typing import Sequence

from .automaton import AutomatonError, TreeAutomaton, from_terms
from .finder import FinderError, SearchConfig, Verified, default_timeout, verify_safety
from .logic import FormulaError, format_theory
from .model import FiniteModel, ModelError, check_countermodel, describe_model, explain_violation, parse_model, render_model
from .oracle import Refutation, bounded_oracle, replay
from .problem import ProblemError, ProblemFile, parse_automaton_file, parse_congruence_spec, parse_problem_file
from .terms import TermError
from .translate import Basis, TranslationError, VerificationProblem, translate_problem
from .witness import WitnessError, check_hypotheses, product_countermodel

EXIT_CODES = {"Verified": 0, "Unknown": 1, "Refuted": 2}
INPUT_ERROR = 3
COMMANDS = ("verify", "translate", "oracle", "witness", "check")


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    search: SearchConfig = field(default_factory=SearchConfig)
    oracle_depth: int = 4  # 0 disables the pre-pass
    a_star: TreeAutomaton | None = None  # witness
    coverage_depth: int = 4  # witness
    model: FiniteModel | None = None  # check


@dataclass
class RunReport:
    command: str
    verdict: str | None  # Verified | Unknown | Refuted; None for translate
    model: FiniteModel | None = None
    oracle_witness: Refutation | None = None
    statistics: dict = field(default_factory=dict)
    output: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES.get(self.verdict, 0)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "verdict": self.verdict,
            "exit_code": self.exit_code,
            "model": render_model(self.model) if self.model is not None else None,
            "model_size": self.model.size if self.model is not None else None,
            "oracle_witness": self.oracle_witness.render() if self.oracle_witness is not None else None,
            "statistics": self.statistics,
        }


def run(command: str, problem: VerificationProblem, config: RunConfig = RunConfig()) -> RunReport:
    start = time.monotonic()
    if command not in COMMANDS:
        raise InputError(f"unknown command {command!r}")
    report = globals()[f"_run_{command}"](problem, config)
    report.statistics.setdefault("elapsed", round(time.monotonic() - start, 4))
    return report


def _run_oracle(problem: VerificationProblem, config: RunConfig, command: str = "oracle") -> RunReport:
    result = bounded_oracle(problem, max(config.oracle_depth, 0))
    stats = {"oracle_depth": config.oracle_depth, "oracle_starts": result.starts, "oracle_explored": result.explored}
    if result.refutation is not None:
        if not replay(result.refutation, problem):
            raise FinderError("internal error: refutation trace does not replay")
        out = ["verdict: Refuted", f"unsafe term reachable: {result.refutation.render()}"]
        return RunReport(command, "Refuted", oracle_witness=result.refutation, statistics=stats, output=out)
    note = " (search pruned by the size cap)" if result.pruned else ""
    out = [f"no unsafe term within {config.oracle_depth} steps of {result.starts} initial terms{note}"]
    return RunReport(command, "Unknown", statistics=stats, output=out)


def _run_verify(problem: VerificationProblem, config: RunConfig) -> RunReport:
    stats: dict = {}
    if config.oracle_depth > 0:
        pre = _run_oracle(problem, config, "verify")
        if pre.verdict == "Refuted":
            return pre
        stats.update(pre.statistics)
    result = verify_safety(problem, config.search)
    search = result.search.stats
    stats.update(
        sentences=len(result.translation.theory),
        clauses=search.clauses_first_order,
        sizes_tried=search.sizes_tried,
        per_size=[s.__dict__ for s in search.sizes],
        search_seconds=round(search.elapsed, 4),
    )
    if isinstance(result, Verified):
        out = [
            f"verdict: Verified (countermodel of size {result.model.size})",
            describe_model(result.model).rstrip(),
            "",
            render_model(result.model).rstrip(),
        ]
        return RunReport("verify", "Verified", model=result.model, statistics=stats, output=out)
    return RunReport("verify", "Unknown", statistics=stats, output=[f"verdict: Unknown ({result.reason})"])


def _run_translate(problem: VerificationProblem, config: RunConfig) -> RunReport:
    t = translate_problem(problem)
    tags: dict[str, int] = {}
    for tag in t.theory.tags:
        tags[tag] = tags.get(tag, 0) + 1
    stats = {"sentences": len(t.theory), "by_tag": tags}
    return RunReport("translate", None, statistics=stats, output=[format_theory(t.theory, t.goal).rstrip()])


def _as_automaton(side, problem: VerificationProblem, prefix: str) -> TreeAutomaton:
    if isinstance(side, TreeAutomaton):
        return side
    assert isinstance(side, Basis)
    if not side.is_ground():
        raise InputError("witness needs automata or ground term lists for the initial and unsafe sets")
    return from_terms(problem.vocabulary, list(side), prefix=prefix)


def _run_witness(problem: VerificationProblem, config: RunConfig) -> RunReport:
    if config.a_star is None:
        raise InputError("witness needs an overapproximation automaton (--a-star FILE)")
    a_i = _as_automaton(problem.initial, problem, "init")
    a_u = _as_automaton(problem.unsafe, problem, "unsafe")
    cert = check_hypotheses(a_i, a_u, config.a_star, problem.trs, config.coverage_depth, strategy=problem.strategy)
    stats = {
        "disjointness": cert.disjointness,
        "coverage_depth": cert.coverage_depth,
        "coverage": cert.coverage,
        "initial_terms": cert.initial_terms,
        "reachable_terms": cert.reachable_terms,
    }
    out = [
        f"disjoint from the unsafe set: {'yes' if cert.disjointness else 'no'}",
        f"covers reachable terms to depth {cert.coverage_depth}: {'yes' if cert.coverage else 'no'}",
    ]
    if cert.counterexample is not None:
        out.append(f"  reachable but rejected: {cert.counterexample}")
    if not cert.holds:
        return RunReport("witness", "Unknown", statistics=stats, output=out + ["verdict: Unknown (hypotheses fail)"])
    try:
        w = product_countermodel(a_i, a_u, config.a_star, problem.trs, problem.options)
    except WitnessError as exc:
        stats["gate"] = False
        return RunReport("witness", "Unknown", statistics=stats, output=out + [f"verdict: Unknown ({exc})"])
    stats["gate"] = True
    out += [
        f"verdict: Verified (product model of size {w.model.size})",
        describe_model(w.model).rstrip(),
        "",
        render_model(w.model).rstrip(),
    ]
    return RunReport("witness", "Verified", model=w.model, statistics=stats, output=out)


def _run_check(problem: VerificationProblem, config: RunConfig) -> RunReport:
    if config.model is None:
        raise InputError("check needs a model file (--model FILE)")
    t = translate_problem(problem)
    try:
        ok = check_countermodel(config.model, t.theory, t.goal)
    except ModelError as exc:
        raise InputError(f"model does not fit the problem: {exc}") from exc
    stats = {"model_size": config.model.size, "sentences": len(t.theory)}
    if ok:
        return RunReport("check", "Verified", model=config.model, statistics=stats, output=["verdict: Verified (model checks)"])
    why = explain_violation(config.model, t.theory, t.goal)
    return RunReport("check", "Unknown", statistics=stats, output=[f"verdict: Unknown (model {why})"])


# -- argument handling -------------------------------------------------------


def benchmark_names() -> list[str]:
    return sorted(p.name[:-4] for p in files("fcmverify.benchmarks").iterdir() if p.name.endswith(".trs"))


def read_input(name: str, suffix: str = ".trs") -> str:
    """Read a file, falling back to a bundled benchmark of that name."""
    path = Path(name)
    if path.is_file():
        return path.read_text()
    stem = name[: -len(suffix)] if name.endswith(suffix) else name
    bundled = files("fcmverify.benchmarks").joinpath(stem + suffix)
    if "/" not in name and bundled.is_file():
        return bundled.read_text()
    raise InputError(f"no such file or bundled benchmark: {name}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fcmverify",
        description="Safety of rewrite systems by finite countermodel search.",
        epilog="Bundled benchmarks: " + ", ".join(benchmark_names()),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "verify": "bounded search for a counterexample, then countermodel search",
        "translate": "print the first-order theory and goal",
        "oracle": "bounded search for a reachable unsafe term only",
        "witness": "build the product model from an overapproximation automaton",
        "check": "check a model file against a problem",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("problem", help="problem file or bundled benchmark name")
        p.add_argument("--strategy", choices=("any", "outermost"), help="override the file's rewriting strategy")
        p.add_argument("--no-reflexivity", action="store_true", help="leave out the reflexivity axiom")
        p.add_argument("--omit-congruence", action="append", default=[], metavar="SYM[:POS]", help="leave out congruence axioms (repeatable)")
        p.add_argument("--full-congruence", action="store_true", help="ignore omit-congruence entries in the file")
        p.add_argument("--raw-goal", metavar="FORMULA", help="use this goal formula instead of the generated one")
        p.add_argument("--report", metavar="FILE", help="write a JSON report ('-' for stdout)")
        if name in ("verify", "oracle"):
            p.add_argument("--oracle-depth", type=int, default=4, help="bounded search depth (0 disables the pre-pass)")
        if name == "verify":
            p.add_argument("--max-size", type=int, default=6, help="largest domain size to try")
            p.add_argument("--timeout-secs", type=float, default=None, help="time budget (default $FCM_TIMEOUT_SECS or 60)")
            p.add_argument("--dump-clauses", metavar="PREFIX", help="write the ground clauses per size in DIMACS format")
            p.add_argument("--model-out", metavar="FILE", help="write the countermodel in interpretation format")
        if name == "witness":
            p.add_argument("--a-star", required=True, metavar="FILE", help="overapproximation automaton file")
            p.add_argument("--coverage-depth", type=int, default=4, help="depth of the bounded coverage check")
        if name == "check":
            p.add_argument("--model", required=True, metavar="FILE", help="model in interpretation format")
    return parser


def load_problem(args: argparse.Namespace) -> tuple[ProblemFile, VerificationProblem]:
    pf = parse_problem_file(read_input(args.problem))
    overrides: dict = {}
    if args.strategy:
        overrides["strategy"] = args.strategy
    if args.no_reflexivity:
        overrides["reflexivity"] = False
    omit = () if args.full_congruence else pf.options.omit_congruence
    try:
        omit = tuple(omit) + tuple(parse_congruence_spec(x, pf.vocabulary) for x in args.omit_congruence)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    overrides["omit_congruence"] = omit
    if args.raw_goal:
        overrides["goal"] = pf.parse_goal(args.raw_goal)
    return pf, pf.to_problem(**overrides)


def config_from_args(args: argparse.Namespace, pf: ProblemFile) -> RunConfig:
    config = RunConfig()
    if hasattr(args, "oracle_depth"):
        config.oracle_depth = args.oracle_depth
    if args.command == "verify":
        timeout = args.timeout_secs if args.timeout_secs is not None else default_timeout()
        try:
            config.search = SearchConfig(max_domain_size=args.max_size, time_budget=timeout, dump_clauses=args.dump_clauses)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    if args.command == "witness":
        config.a_star = parse_automaton_file(read_input(args.a_star, ".aut"), pf.vocabulary)
        config.coverage_depth = args.coverage_depth
    if args.command == "check":
        config.model = parse_model(read_input(args.model, ".model"))
    return config


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        pf, problem = load_problem(args)
        report = run(args.command, problem, config_from_args(args, pf))
    except (InputError, ProblemError, TermError, FormulaError, TranslationError, AutomatonError, ModelError, FinderError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    print("\n".join(report.output))
    if getattr(args, "model_out", None) and report.model is not None:
        Path(args.model_out).write_text(render_model(report.model))
    if args.report:
        text = json.dumps(report.to_dict(), indent=2)
        if args.report == "-":
            print(text)
        else:
            Path(args.report).write_text(text + "\n")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
