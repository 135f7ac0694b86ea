"""Run orchestration: execute attempts with bounded concurrency, persist, score and report."""

from __future__ import annotations

import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import httpx

from ..agents import AgentPipeline
from ..alignment import aggregate_alignment, alignment_score, format_alignment_table
from ..config import TEMPLATE, RunConfig
from ..corpus import get_manifest, load_problems
from ..db import Database
from ..errors import ConfigError, DataError, GeoEngineError
from ..evaluation import Report, aggregate, problem_set_digest, score_run
from ..journal import Journal
from ..models import AlignmentRecord, Attempt, Mode, PipelineMode, Problem, TaskKind, Verdict
from ..providers import ProviderHub, ResponseCache
from ..storage import RunStore

LOGGER = logging.getLogger(__name__)

PROVIDER_ERROR_CODES = frozenset(
    {"ProviderError", "AuthError", "RateLimitExhausted", "TransportError", "MalformedResponse"}
)


def build_hub(config: RunConfig, *, transport: httpx.BaseTransport | None = None) -> ProviderHub:
    cache = ResponseCache(config.cache_directory(), enabled=config.cache.enabled)
    return ProviderHub(
        config.endpoints,
        cache=cache,
        max_in_flight=config.concurrency.max_in_flight,
        transport=transport,
    )


def default_run_id(config: RunConfig) -> str:
    return config.run_id or f"run-{config.digest()[:12]}"


@dataclass(slots=True)
class RunResult:
    run_id: str
    directory: Path
    report: Report
    verdicts: list[Verdict]
    executed: int = 0
    resumed: int = 0
    provider_failures: int = 0
    stats: dict[str, dict[str, int]] = field(default_factory=dict)

    def summary(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "executed": self.executed,
            "resumed": self.resumed,
            "provider_failures": self.provider_failures,
            "stats": self.stats,
        }


class RunOrchestrator:
    """Coordinate problem loading, pipeline execution, persistence and scoring for one run."""

    def __init__(
        self,
        config: RunConfig,
        *,
        hub: ProviderHub | None = None,
        problems: Sequence[Problem] | None = None,
        transport: httpx.BaseTransport | None = None,
        retry_failed: bool = False,
    ) -> None:
        self.config = config.validate()
        self.digest = config.digest()
        self.run_id = default_run_id(config)
        self.hub = hub or build_hub(config, transport=transport)
        self.pipeline = AgentPipeline(
            self.hub,
            temperatures=config.decoding.temperatures(),
            choice_epsilon=config.evaluation.choice_epsilon_value,
        )
        self.store = RunStore(config.runs_dir, self.run_id)
        self.retry_failed = retry_failed
        self._problems = list(problems) if problems is not None else None

    # ---------------------------------------------------------------- inputs
    def load_problems(self) -> list[Problem]:
        if self._problems is None:
            dataset = self.config.dataset
            if not dataset.path:
                raise ConfigError("dataset.path is not set")
            manifest = get_manifest(dataset.manifest) if dataset.manifest else None
            self._problems = load_problems(
                dataset.path,
                dataset.format,
                data_root=dataset.resolved_root(),
                tag=dataset.tag,
                strict=dataset.strict,
                manifest=manifest,
            )
            if not self._problems:
                raise DataError(f"no problems loaded from {dataset.path}")
        return self._problems

    def _snapshot(self) -> dict[str, Any]:
        payload = self.config.to_dict()
        payload["run_id"] = self.run_id
        return payload

    def _reusable(self, attempt: Attempt | None) -> bool:
        if attempt is None:
            return False
        if attempt.config_digest and attempt.config_digest != self.digest:
            raise ConfigError(f"{attempt.key} was produced under a different configuration")
        return attempt.ok or not self.retry_failed

    # ------------------------------------------------------------- execution
    def _persist(self, attempt: Attempt, journal: Journal) -> None:
        attempt.config_digest = self.digest
        self.store.save_attempt(attempt)
        journal.record_attempt(attempt)

    def _single(self, problem: Problem, index: int, journal: Journal) -> int:
        key = f"{problem.id}__{Mode.SINGLE.value}__{index}"
        if self._reusable(self.store.load_attempt(key)):
            return 0
        attempt = self.pipeline.run_single(self.config.endpoint_for("single"), problem, index)
        self._persist(attempt, journal)
        return 1

    def _multi(self, problem: Problem, index: int, journal: Journal) -> int:
        interpreter_endpoint = self.config.endpoint_for("interpreter")
        solver_endpoint = self.config.endpoint_for("solver")
        interpreter = self.store.load_attempt(f"{problem.id}__{Mode.INTERPRETER.value}__{index}")
        solver = self.store.load_attempt(f"{problem.id}__{Mode.SOLVER.value}__{index}")
        if self._reusable(interpreter) and self._reusable(solver):
            return 0
        if self._reusable(interpreter):
            # keep the saved interpreter attempt, failed or not; only the solver is redone
            self._persist(self.pipeline.solve_from(solver_endpoint, interpreter, problem), journal)
            return 1
        interpreter, solver = self.pipeline.run_multi(interpreter_endpoint, solver_endpoint, problem, index)
        self._persist(interpreter, journal)
        self._persist(solver, journal)
        return 2

    async def _execute_attempts(self, problems: Sequence[Problem], journal: Journal) -> int:
        semaphore = asyncio.Semaphore(self.config.concurrency.problem_workers)
        modes = self.config.mode

        async def unit(problem: Problem, index: int, multi: bool) -> int:
            async with semaphore:
                work = self._multi if multi else self._single
                return await asyncio.to_thread(work, problem, index, journal)

        tasks = []
        for problem in problems:
            for index in range(self.config.attempts):
                if modes in (PipelineMode.SINGLE, PipelineMode.BOTH):
                    tasks.append(unit(problem, index, multi=False))
                if modes in (PipelineMode.MULTI, PipelineMode.BOTH):
                    tasks.append(unit(problem, index, multi=True))
        counts = await asyncio.gather(*tasks)
        return sum(counts)

    async def execute(self) -> RunResult:
        problems = self.load_problems()
        if not self.config.roles.judge and any(problem.kind is TaskKind.FREE_FORM for problem in problems):
            raise ConfigError("free-form problems need a judge endpoint in roles.judge")
        self.store.initialise(
            self._snapshot(),
            self.digest,
            extra={"problem_set": problem_set_digest(problem.id for problem in problems), "problems": len(problems)},
        )
        database = Database(self.store.journal_path)
        journal = Journal(database, self.run_id)
        journal.run_started(
            config_digest=self.digest, mode=self.config.mode.value, k=self.config.attempts, problems=len(problems)
        )
        LOGGER.info("Run %s: %d problems, mode=%s, k=%d", self.run_id, len(problems), self.config.mode.value, self.config.attempts)
        try:
            executed = await self._execute_attempts(problems, journal)
            verdicts, report = await asyncio.to_thread(self.score, problems)
        except BaseException as exc:
            journal.run_finished("interrupted", {"error": f"{type(exc).__name__}: {exc}"})
            database.close()
            raise
        attempts = self.store.attempts()
        expected = len(attempts)
        result = RunResult(
            run_id=self.run_id,
            directory=self.store.directory,
            report=report,
            verdicts=verdicts,
            executed=executed,
            resumed=max(expected - executed, 0),
            provider_failures=sum(1 for attempt in attempts if attempt.error_code in PROVIDER_ERROR_CODES),
            stats=self.hub.summary(),
        )
        journal.record_cache_stats(result.stats)
        journal.run_finished("completed", result.summary())
        database.close()
        hits = sum(counters.get("cache_hits", 0) for counters in result.stats.values())
        LOGGER.info(
            "Run %s complete: %d attempts executed, %d resumed, %d cache hits",
            self.run_id, result.executed, result.resumed, hits,
        )
        return result

    def run(self) -> RunResult:
        return asyncio.run(self.execute())

    # --------------------------------------------------------------- scoring
    def score(self, problems: Sequence[Problem] | None = None) -> tuple[list[Verdict], Report]:
        """Score the persisted attempts and write verdicts and report; idempotent."""

        problems = list(problems) if problems is not None else self.load_problems()
        judge = None
        if self.config.roles.judge and any(problem.kind is TaskKind.FREE_FORM for problem in problems):
            judge = self.config.endpoint_for("judge")
        verdicts = score_run(
            self.store.attempts(),
            problems,
            hub=self.hub,
            judge_endpoint=judge,
            choice_epsilon=self.config.evaluation.choice_epsilon_value,
            free_form_epsilon=self.config.evaluation.free_form_epsilon,
            k=self.config.attempts,
            modes=self.config.mode.scored(),
            strict=self.config.evaluation.strict,
            workers=self.config.evaluation.judge_workers,
            config_digest=self.digest,
        )
        report = aggregate(verdicts, problems, run_id=self.run_id, config_digest=self.digest, k=self.config.attempts)
        self.store.save_verdicts(verdicts)
        self.store.save_report(report.to_dict(), report.to_markdown())
        return verdicts, report

    # ------------------------------------------------------------- alignment
    def align(self, *, attempt_index: int = 0, template: bool | None = None) -> tuple[list[AlignmentRecord], str]:
        """Predicate alignment for every problem with a usable interpreter attempt."""

        roles = self.config.roles
        if not roles.embed:
            raise ConfigError("alignment needs an embedding endpoint in roles.embed")
        diagram = roles.describe or roles.interpreter
        if not diagram:
            raise ConfigError("alignment needs roles.describe or roles.interpreter")
        use_template = template if template is not None else roles.describe_predicates == TEMPLATE
        predicate_endpoint = None if use_template else roles.describe_predicates
        problems = self.load_problems()

        def one(problem: Problem) -> AlignmentRecord | None:
            attempt = self.store.load_attempt(f"{problem.id}__{Mode.INTERPRETER.value}__{attempt_index}")
            if attempt is None or not attempt.ok or attempt.program is None:
                LOGGER.warning("No usable interpreter attempt %d for %s; skipped", attempt_index, problem.id)
                return None
            try:
                return alignment_score(
                    problem,
                    attempt.program,
                    hub=self.hub,
                    diagram_endpoint=diagram,
                    predicate_endpoint=predicate_endpoint,
                    embed_endpoint=roles.embed,
                    config={
                        "interpreter": attempt.endpoint,
                        "describe": diagram,
                        "describe_predicates": predicate_endpoint or TEMPLATE,
                        "embed": roles.embed,
                        "attempt_index": attempt_index,
                    },
                )
            except GeoEngineError as exc:
                LOGGER.warning("Alignment for %s failed: %s", problem.id, exc)
                return None

        with ThreadPoolExecutor(max_workers=self.config.concurrency.problem_workers, thread_name_prefix="align") as pool:
            records = [record for record in pool.map(one, problems) if record is not None]
        self.store.save_alignment(records)
        table = format_alignment_table(aggregate_alignment(records)) if records else ""
        self.store.update_metadata(alignment_records=len(records))
        return records, table
