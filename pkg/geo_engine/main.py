"""Command line entrypoint: run, score, report, compare, grid, align and validation commands."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from pathlib import Path
from typing import Any, Sequence

from .config import RunConfig, load_run_config
from .corpus import get_manifest, load_problems, validate_problem
from .dsl import load_registry, parse_program, symbols, validate
from .errors import ConfigError, DataError, GeoEngineError, PredicateSyntaxError, ProviderError, UnknownRun
from .evaluation import Report, compare_runs
from .orchestrator import RunOrchestrator, run_grid
from .storage import RunStore

LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_PROVIDER = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # usage errors share the config exit code
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Path to YAML run configuration")
    parser.add_argument("--env-file", dest="env_file", help="Path to .env overrides (A__B=value)")
    parser.add_argument("--runs-dir", dest="runs_dir", help="Directory holding run directories")
    parser.add_argument("--run-id", dest="run_id", help="Run identifier (default derived from the config digest)")
    parser.add_argument("--dataset", help="Dataset file or directory")
    parser.add_argument("--format", dest="dataset_format", choices=("generic_jsonl", "geometry3k", "mathverse"))
    parser.add_argument("--data-root", dest="data_root", help="Root for relative image paths")
    parser.add_argument("--manifest", help="Expected-count manifest, e.g. geometry3k-test")
    parser.add_argument("-k", "--attempts", type=int, help="Attempts per problem and stage")
    parser.add_argument("--judge", help="Judge endpoint name")
    parser.add_argument("--max-in-flight", dest="max_in_flight", type=int, help="Concurrent provider calls")
    parser.add_argument("--workers", type=int, help="Problems processed concurrently")
    parser.add_argument("--no-cache", dest="no_cache", action="store_true", help="Disable the response cache")
    parser.add_argument("--strict", action="store_true", help="Fail on malformed records and missing attempts")


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    parser = _Parser(prog="geo-engine", description="Geometry problem solving and evaluation harness")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = commands.add_parser("run", help="Execute (or resume) a run")
    _add_config_args(run)
    run.add_argument("--mode", choices=("single", "multi", "both"))
    run.add_argument("--interpreter", help="Interpreter endpoint name")
    run.add_argument("--solver", help="Solver endpoint name")
    run.add_argument("--single", help="Single-agent endpoint name")
    run.add_argument("--retry-failed", dest="retry_failed", action="store_true", help="Re-execute failed attempts")

    score = commands.add_parser("score", help="(Re)score a run's persisted attempts")
    score.add_argument("run", help="Run id")
    score.add_argument("--runs-dir", dest="runs_dir", default="runs")

    report = commands.add_parser("report", help="Render a run report")
    report.add_argument("run", help="Run id")
    report.add_argument("--runs-dir", dest="runs_dir", default="runs")
    report.add_argument("--format", dest="output", choices=("json", "markdown", "csv"), default="markdown")
    report.add_argument("--compare", help="Second run id for a delta table")

    compare = commands.add_parser("compare", help="Percentage-point deltas between two runs")
    compare.add_argument("run_a")
    compare.add_argument("run_b")
    compare.add_argument("--runs-dir", dest="runs_dir", default="runs")
    compare.add_argument("--mode-a", dest="mode_a")
    compare.add_argument("--mode-b", dest="mode_b")
    compare.add_argument("--format", dest="output", choices=("json", "markdown"), default="markdown")

    grid = commands.add_parser("grid", help="Interpreter x solver ablation grid")
    _add_config_args(grid)
    grid.add_argument("--interpreters", required=True, help="Comma-separated interpreter endpoint names")
    grid.add_argument("--solvers", required=True, help="Comma-separated solver endpoint names")

    align = commands.add_parser("align", help="Predicate alignment for a completed run")
    align.add_argument("run", help="Run id")
    align.add_argument("--runs-dir", dest="runs_dir", default="runs")
    align.add_argument("--attempt-index", dest="attempt_index", type=int, default=0)
    align.add_argument("--template", action="store_true", help="Describe predicates with the offline renderer")
    align.add_argument("--describe", help="Vision-language endpoint describing the diagram")
    align.add_argument("--embed", help="Embedding endpoint")

    data = commands.add_parser("validate-data", help="Load a dataset and report per-record diagnostics")
    data.add_argument("path")
    data.add_argument("--format", dest="dataset_format", default="generic_jsonl")
    data.add_argument("--data-root", dest="data_root")
    data.add_argument("--manifest")
    data.add_argument("--strict", action="store_true")

    predicates = commands.add_parser("validate-predicates", help="Parse and validate a predicate file")
    predicates.add_argument("path")
    predicates.add_argument("--strict", action="store_true", help="Reject lines that are not predicates")
    predicates.add_argument("--dedupe", action="store_true", help="Drop repeated predicates before validating")
    predicates.add_argument("--registry", help="Predicate registry YAML replacing the bundled one")
    return parser.parse_args(argv)


# ------------------------------------------------------------------ helpers
def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    overrides: dict[str, Any] = {}

    def put(section: str | None, key: str, value: Any) -> None:
        if value is None:
            return
        target = overrides if section is None else overrides.setdefault(section, {})
        target[key] = value

    put(None, "runs_dir", args.runs_dir)
    put(None, "run_id", args.run_id)
    put(None, "attempts", args.attempts)
    put(None, "mode", getattr(args, "mode", None))
    put("dataset", "path", args.dataset)
    put("dataset", "format", args.dataset_format)
    put("dataset", "data_root", args.data_root)
    put("dataset", "manifest", args.manifest)
    for role in ("interpreter", "solver", "single", "judge"):
        put("roles", role, getattr(args, role, None))
    put("concurrency", "max_in_flight", args.max_in_flight)
    put("concurrency", "problem_workers", args.workers)
    if args.no_cache:
        put("cache", "enabled", False)
    if args.strict:
        put("dataset", "strict", True)
        put("evaluation", "strict", True)
    return overrides


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    config = load_run_config(args.config, args.env_file) if (args.config or args.env_file) else RunConfig()
    overrides = _overrides(args)
    return config.merge(overrides) if overrides else config


def _stored_config(runs_dir: str, run_id: str) -> RunConfig:
    store = RunStore.open(runs_dir, run_id)
    payload = store.load_config()
    payload["run_id"] = run_id
    payload["runs_dir"] = runs_dir
    return RunConfig.from_dict(payload)


def _load_report(runs_dir: str, run_id: str) -> Report:
    store = RunStore.open(runs_dir, run_id)
    stored = store.load_report()
    if stored is None:
        LOGGER.info("Run %s has no report yet; scoring it", run_id)
        _, report = RunOrchestrator(_stored_config(runs_dir, run_id)).score()
        return report
    return Report.from_dict(stored)


# ----------------------------------------------------------------- commands
def cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    result = RunOrchestrator(config, retry_failed=args.retry_failed).run()
    print(result.report.to_markdown())
    print(f"Run directory: {result.directory}")
    if result.provider_failures:
        LOGGER.error("%d attempt(s) failed on provider errors after retries", result.provider_failures)
        return EXIT_PROVIDER
    return EXIT_OK


def cmd_score(args: argparse.Namespace) -> int:
    _, report = RunOrchestrator(_stored_config(args.runs_dir, args.run)).score()
    print(report.to_markdown())
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    report = _load_report(args.runs_dir, args.run)
    if args.output == "json":
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    elif args.output == "csv":
        print(report.to_csv(), end="")
    else:
        print(report.to_markdown())
    if args.compare:
        other = _load_report(args.runs_dir, args.compare)
        print(compare_runs(report, other).to_markdown())
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    table = compare_runs(
        _load_report(args.runs_dir, args.run_a),
        _load_report(args.runs_dir, args.run_b),
        mode_a=args.mode_a,
        mode_b=args.mode_b,
    )
    if args.output == "json":
        print(json.dumps(table.to_dict(), indent=2, sort_keys=True))
    else:
        print(table.to_markdown())
    return EXIT_OK


def cmd_grid(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    interpreters = [name.strip() for name in args.interpreters.split(",") if name.strip()]
    solvers = [name.strip() for name in args.solvers.split(",") if name.strip()]
    result = run_grid(config, interpreters, solvers)
    print(result.to_markdown())
    failures = sum(cell.provider_failures for cell in result.cells.values())
    return EXIT_PROVIDER if failures else EXIT_OK


def cmd_align(args: argparse.Namespace) -> int:
    config = _stored_config(args.runs_dir, args.run)
    roles: dict[str, Any] = {}
    if args.describe:
        roles["describe"] = args.describe
    if args.embed:
        roles["embed"] = args.embed
    if roles:
        config = config.merge({"roles": roles})
    records, table = RunOrchestrator(config).align(
        attempt_index=args.attempt_index, template=True if args.template else None
    )
    print(table or "No alignment records.")
    return EXIT_OK if records else EXIT_DATA


def cmd_validate_data(args: argparse.Namespace) -> int:
    manifest = get_manifest(args.manifest) if args.manifest else None
    problems = load_problems(
        args.path, args.dataset_format, data_root=args.data_root, strict=args.strict, manifest=manifest
    )
    failing = 0
    for problem in problems:
        report = validate_problem(problem)
        failing += 0 if report.ok else 1
        for issue in report.issues:
            print(f"{problem.id}: {issue}")
    counts = Counter(problem.kind.value for problem in problems)
    print(f"{len(problems)} problems: " + ", ".join(f"{kind} {count}" for kind, count in sorted(counts.items())))
    return EXIT_DATA if failing else EXIT_OK


def cmd_validate_predicates(args: argparse.Namespace) -> int:
    registry = load_registry(args.registry)
    program, skipped = parse_program(Path(args.path).read_bytes(), strict=args.strict, registry=registry)
    for item in skipped:
        if item.reason != "blank":
            print(f"line {item.line}: skipped ({item.reason}): {item.text.strip()}")
    summary: dict[str, Any] = {}
    if args.dedupe:
        unique = program.deduplicate()
        summary["duplicates"] = len(program) - len(unique)
        program = unique
    report = validate(program, registry)
    for issue in report.issues:
        print(issue)
    summary.update(predicates=len(program), ok=report.ok, symbols=symbols(program).to_dict())
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK if report.ok else EXIT_DATA


COMMANDS = {
    "run": cmd_run,
    "score": cmd_score,
    "report": cmd_report,
    "compare": cmd_compare,
    "grid": cmd_grid,
    "align": cmd_align,
    "validate-data": cmd_validate_data,
    "validate-predicates": cmd_validate_predicates,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, UnknownRun) as exc:
        LOGGER.error("%s", exc)
        return EXIT_CONFIG
    except (DataError, PredicateSyntaxError, OSError) as exc:
        LOGGER.error("%s", exc)
        return EXIT_DATA
    except ProviderError as exc:
        LOGGER.error("%s", exc)
        return EXIT_PROVIDER
    except (GeoEngineError, ValueError) as exc:
        LOGGER.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
