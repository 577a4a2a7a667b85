"""Command-line entry point: difflog synth|eval|gen-rules|encode-3cnf|bench.

synth drives a portfolio of independent search instances over distinct
seeds with first-success cancellation.  The driver interleaves the
instances round-robin in iteration-sized slices, so a fixed base seed
yields a reproducible report.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .core import (ProblemError, format_rule, parse_problem, parse_rules,
                   validate_rule, write_problem)
from .optimizer import SearchConfig, SearchOutcome, SearchRunner
from .rulegen import GenConfig, GenerationOverflow, generate
from .testkit import encode_3cnf, parse_dimacs
from .viterbi import Evaluator

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_NO_SOLUTION = 2


@dataclass
class RunReport:
    outcomes: list[SearchOutcome]
    best_time: float | None
    median_time: float | None
    timeouts: int
    winner: frozenset[str] | None


def run_portfolio(problem, seeds: int, base_seed: int, config: SearchConfig,
                  trace=None) -> RunReport:
    """Round-robin portfolio: seed i runs with rng_seed = base_seed + i."""
    evaluator = Evaluator(
        problem.rules, problem.input,
        output_relations=[d.name for d in problem.relations.values() if d.kind == "output"])
    runners = []
    for i in range(seeds):
        cfg = SearchConfig(max_iters=config.max_iters, mcmc_period=config.mcmc_period,
                           annealing_c=config.annealing_c, init_low=config.init_low,
                           init_high=config.init_high,
                           support_threshold=config.support_threshold,
                           rng_seed=base_seed + i, timeout=config.timeout)
        runners.append(SearchRunner(problem, cfg, evaluator,
                                    trace(i) if trace is not None else None))

    winner = None
    live = [r for r in runners if r.outcome is None]
    solved = [r for r in runners if r.outcome is not None and r.outcome.status == "solved"]
    if solved:
        winner = solved[0]
    while winner is None and live:
        still_live = []
        for runner in live:
            outcome = runner.step()
            if outcome is None:
                still_live.append(runner)
            elif outcome.status == "solved" and winner is None:
                winner = runner
        live = still_live
        if winner is not None:
            break
    for runner in runners:
        runner.cancel()

    outcomes = [r.outcome for r in runners]
    solved_times = [o.wall_time for o in outcomes if o.status == "solved"]
    return RunReport(
        outcomes=outcomes,
        best_time=min(solved_times) if solved_times else None,
        median_time=statistics.median(solved_times) if solved_times else None,
        timeouts=sum(1 for o in outcomes if o.status == "timeout"),
        winner=winner.outcome.rules if winner is not None else None,
    )


def write_report(path: Path, base_seed: int, outcomes: list[SearchOutcome]) -> None:
    # wall_ms is reported at whole-second granularity so that reruns with the
    # same base seed produce byte-identical reports.
    lines = ["seed\tstatus\titerations\tsamplings\twall_ms"]
    for i, outcome in enumerate(outcomes):
        wall_ms = int(outcome.wall_time) * 1000
        lines.append(f"{base_seed + i}\t{outcome.status}\t{outcome.iterations}"
                     f"\t{outcome.samplings}\t{wall_ms}")
    path.write_text("\n".join(lines) + "\n")


def _load_problem(directory: str, rules_override: str | None):
    problem = parse_problem(directory)
    if rules_override:
        rules_text = Path(rules_override).read_text()
        rules = parse_rules(rules_text, rules_override)
        for rule in rules:
            validate_rule(rule, problem.relations)
        from .core import CandidateRuleSet, Problem
        problem = Problem(problem.relations, problem.input, problem.labels,
                          CandidateRuleSet(rules))
    return problem


def cmd_synth(args) -> int:
    try:
        problem = _load_problem(args.problem, args.rules)
    except ProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    out_dir = Path(args.out) if args.out else Path(args.problem)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = SearchConfig(max_iters=args.max_iters, mcmc_period=args.mcmc_period,
                          timeout=args.timeout)

    trace = None
    handle = None
    if args.trace:
        handle = (out_dir / "trace.tsv").open("w")
        handle.write("seed\titer\tloss\tevent\ttemperature\n")

        def trace(seed_index):
            def emit(iteration, loss_value, event, temp):
                handle.write(f"{args.base_seed + seed_index}\t{iteration}"
                             f"\t{loss_value:.12g}\t{event}\t{temp:.6g}\n")
            return emit

    started = time.perf_counter()
    try:
        report = run_portfolio(problem, args.seeds, args.base_seed, config, trace)
    finally:
        if handle is not None:
            handle.close()
    elapsed = time.perf_counter() - started

    write_report(out_dir / "report.tsv", args.base_seed, report.outcomes)
    if report.winner is not None:
        rules = [problem.rules[rid] for rid in sorted(report.winner)]
        lines = [format_rule(r) for r in rules]
        (out_dir / "solution.dl").write_text("# recovered program\n" + "\n".join(lines) + "\n")
        print(f"solved with {len(rules)} rules in {elapsed:.2f}s "
              f"(best run {report.best_time:.2f}s); wrote {out_dir / 'solution.dl'}")
        return EXIT_OK
    print(f"no solution found ({report.timeouts}/{len(report.outcomes)} timeouts, "
          f"{elapsed:.2f}s)", file=sys.stderr)
    return EXIT_NO_SOLUTION


def cmd_eval(args) -> int:
    try:
        problem = _load_problem(args.problem, args.rules)
        weights = {rid: 1.0 for rid in problem.rules.ids()}
        if args.weights:
            for lineno, raw in enumerate(Path(args.weights).read_text().splitlines(), 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                rid, _, value = line.partition("\t")
                if rid not in problem.rules:
                    raise ProblemError(f"{args.weights}:{lineno}: unknown rule id {rid}")
                weights[rid] = float(value)
        evaluator = Evaluator(
            problem.rules, problem.input,
            output_relations=[d.name for d in problem.relations.values()
                              if d.kind == "output"])
        result = evaluator.evaluate(weights)
    except ProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    lines = []
    for fact in result.derived.facts():
        prov = result.provenance_of(fact)
        prov_text = ",".join(f"{rid}:{count}" for rid, count in sorted(prov.counts.items()))
        lines.append("\t".join((fact.relation, *fact.args,
                                f"{result.value_of(fact):.12g}", prov_text)))
    for line in sorted(lines):
        print(line)
    return EXIT_OK


def cmd_gen_rules(args) -> int:
    try:
        directory = Path(args.problem)
        from .core import parse_relations
        decls = parse_relations((directory / "relations.txt").read_text(),
                                directory / "relations.txt")
        config = GenConfig(max_body_len=args.max_body_len, k=args.k, cap=args.cap,
                           allow_recursion=not args.no_recursion)
        rules = generate(decls, config)
    except (ProblemError, GenerationOverflow, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    out_path = directory / "rules.dl"
    lines = [format_rule(r) for r in rules]
    out_path.write_text("# candidate rules\n" + "\n".join(lines) + ("\n" if lines else ""))
    print(f"wrote {len(rules)} rules to {out_path}")
    return EXIT_OK


def cmd_encode_3cnf(args) -> int:
    try:
        formula = parse_dimacs(Path(args.cnf).read_text())
        problem = encode_3cnf(formula)
    except (ProblemError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    write_problem(args.out, problem.relations, problem.input, problem.labels,
                  problem.rules)
    print(f"wrote problem directory {args.out} "
          f"({len(problem.input)} input tuples, {len(problem.rules)} rules)")
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        entries = [line.strip() for line in Path(args.manifest).read_text().splitlines()
                   if line.strip() and not line.startswith("#")]
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    print("Benchmark\tRel\tExp\tCnd\tIn\tOut\tIter\tSmpl\tTime")
    config = SearchConfig(max_iters=args.max_iters, mcmc_period=args.mcmc_period,
                          timeout=args.timeout)
    for entry in entries:
        name = Path(entry).name
        try:
            problem = parse_problem(entry)
            started = time.perf_counter()
            report = run_portfolio(problem, args.seeds, args.base_seed, config)
            elapsed = time.perf_counter() - started
        except ProblemError as exc:
            print(f"{name}\terror: {exc}")
            continue
        n_labels = len(problem.labels.positive) + len(problem.labels.negative)
        if report.winner is not None:
            best = min((o for o in report.outcomes if o.status == "solved"),
                       key=lambda o: o.wall_time)
            print(f"{name}\t{len(problem.relations)}\t{len(report.winner)}"
                  f"\t{len(problem.rules)}\t{len(problem.input)}\t{n_labels}"
                  f"\t{best.iterations}\t{best.samplings}\t{elapsed:.2f}")
        else:
            print(f"{name}\t{len(problem.relations)}\t-\t{len(problem.rules)}"
                  f"\t{len(problem.input)}\t{n_labels}\t-\t-\ttimeout")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="difflog",
                                     description="Learn Datalog programs from examples.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_search_flags(p):
        p.add_argument("--seeds", type=int, default=None,
                       help="parallel search instances (default: available parallelism)")
        p.add_argument("--timeout", type=float, default=3600.0,
                       help="per-instance timeout in seconds")
        p.add_argument("--max-iters", type=int, default=10_000)
        p.add_argument("--mcmc-period", type=int, default=30)
        p.add_argument("--base-seed", type=int, default=0)

    p = sub.add_parser("synth", help="synthesize a program from a problem directory")
    p.add_argument("problem")
    add_search_flags(p)
    p.add_argument("--trace", action="store_true", help="write per-iteration trace.tsv")
    p.add_argument("--rules", default=None, help="override rules.dl")
    p.add_argument("--out", default=None, help="output directory (default: problem dir)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="evaluate rules at given weights and dump values")
    p.add_argument("problem")
    p.add_argument("--weights", default=None, help="TSV file: rule_id<TAB>weight")
    p.add_argument("--rules", default=None, help="override rules.dl")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gen-rules", help="generate candidate rules into rules.dl")
    p.add_argument("--problem", required=True)
    p.add_argument("--max-body-len", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--cap", type=int, default=50_000)
    p.add_argument("--no-recursion", action="store_true")
    p.set_defaults(func=cmd_gen_rules)

    p = sub.add_parser("encode-3cnf", help="encode a DIMACS 3-CNF file as a problem")
    p.add_argument("cnf")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode_3cnf)

    p = sub.add_parser("bench", help="run synth over a manifest of problem directories")
    p.add_argument("manifest")
    add_search_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seeds", None) is None and args.command in ("synth", "bench"):
        import os
        args.seeds = os.cpu_count() or 1
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
