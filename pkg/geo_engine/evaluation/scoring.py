"""Turn persisted attempts into per-problem verdicts."""

from __future__ import annotations

import logging
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Sequence

from ..errors import JudgeUnavailable, MissingAttempts
from ..models import Attempt, JudgeVerdict, Mode, Outcome, Problem, TaskKind, Verdict
from ..providers import ModelEndpoint, ProviderHub
from .judge import judge_free_form
from .metrics import match_choice, pass_at_k

LOGGER = logging.getLogger(__name__)

SCORED_STAGE = {"single": Mode.SINGLE, "multi": Mode.SOLVER}


def _group(attempts: Iterable[Attempt]) -> dict[tuple[str, str], list[Attempt]]:
    stage_to_mode = {stage: mode for mode, stage in SCORED_STAGE.items()}
    grouped: dict[tuple[str, str], list[Attempt]] = defaultdict(list)
    for attempt in attempts:
        mode = stage_to_mode.get(attempt.mode)
        if mode is not None:
            grouped[(attempt.problem_id, mode)].append(attempt)
    for items in grouped.values():
        items.sort(key=lambda attempt: attempt.attempt_index)
    return grouped


class RunScorer:
    """Score one problem at a time; safe to share across worker threads."""

    def __init__(
        self,
        *,
        hub: ProviderHub | None = None,
        judge_endpoint: ModelEndpoint | str | None = None,
        choice_epsilon: float | None = None,
        free_form_epsilon: float = 1e-2,
        k: int = 3,
    ) -> None:
        if k < 1:
            raise ValueError("k must be at least 1")
        self.hub = hub
        self.judge_endpoint = judge_endpoint
        self.choice_epsilon = choice_epsilon
        self.free_form_epsilon = free_form_epsilon
        self.k = k

    @property
    def can_judge(self) -> bool:
        return self.hub is not None and self.judge_endpoint is not None

    def outcome(self, attempt: Attempt, problem: Problem) -> tuple[Outcome, JudgeVerdict | None]:
        if not attempt.ok or attempt.answer is None:
            return Outcome.FAILED, None
        if problem.is_multiple_choice:
            index = match_choice(attempt.answer, problem.choices, self.choice_epsilon)
            correct = index is not None and index == problem.gold_index
            return (Outcome.CORRECT if correct else Outcome.INCORRECT), None
        if not self.can_judge:
            raise JudgeUnavailable(f"free-form problem {problem.id} needs a judge endpoint")
        verdict = judge_free_form(self.hub, self.judge_endpoint, attempt.answer.text, problem.answer, self.free_form_epsilon)
        return (Outcome.CORRECT if verdict.outcome == 1 else Outcome.INCORRECT), verdict

    def score(self, problem: Problem, mode: str, attempts: Sequence[Attempt], config_digest: str | None) -> Verdict:
        scored = list(attempts[: self.k])
        results = [self.outcome(attempt, problem) for attempt in scored]
        outcomes = tuple(outcome for outcome, _ in results)
        judged = tuple(judge for _, judge in results) if not problem.is_multiple_choice else ()
        return Verdict(
            problem_id=problem.id,
            mode=mode,
            dataset=problem.dataset,
            kind=problem.kind,
            outcomes=outcomes,
            k=self.k,
            pass_at_k=pass_at_k(outcomes, self.k) if outcomes else 0,
            first_attempt=int(bool(outcomes) and outcomes[0] is Outcome.CORRECT),
            judge=judged,
            config_digest=config_digest,
        )


def score_run(
    attempts: Iterable[Attempt],
    problems: Sequence[Problem],
    *,
    hub: ProviderHub | None = None,
    judge_endpoint: ModelEndpoint | str | None = None,
    choice_epsilon: float | None = None,
    free_form_epsilon: float = 1e-2,
    k: int = 3,
    modes: Sequence[str] = ("single", "multi"),
    strict: bool = False,
    workers: int = 4,
    config_digest: str | None = None,
) -> list[Verdict]:
    """One verdict per (problem, mode), in problem order.

    Failed attempts score as incorrect. A problem without attempts for a mode
    raises ``MissingAttempts`` in strict mode and otherwise scores 0 with a
    warning.
    """

    unknown = [mode for mode in modes if mode not in SCORED_STAGE]
    if unknown:
        raise ValueError(f"unknown scoring mode(s): {', '.join(unknown)}")
    scorer = RunScorer(
        hub=hub,
        judge_endpoint=judge_endpoint,
        choice_epsilon=choice_epsilon,
        free_form_epsilon=free_form_epsilon,
        k=k,
    )
    if not scorer.can_judge and any(problem.kind is TaskKind.FREE_FORM for problem in problems):
        raise JudgeUnavailable("free-form problems present but no judge endpoint configured")
    grouped = _group(attempts)
    if config_digest is None:
        config_digest = next(
            (item.config_digest for items in grouped.values() for item in items if item.config_digest), None
        )

    jobs: list[tuple[Problem, str, list[Attempt]]] = []
    missing: list[str] = []
    for problem in problems:
        for mode in modes:
            items = grouped.get((problem.id, mode), [])
            if not items:
                missing.append(f"{problem.id}/{mode}")
            jobs.append((problem, mode, items))
    if missing:
        if strict:
            raise MissingAttempts(f"no attempts for {len(missing)} problem/mode pair(s): {', '.join(missing[:10])}")
        LOGGER.warning("No attempts for %d problem/mode pair(s); scoring them as 0", len(missing))

    with ThreadPoolExecutor(max_workers=max(1, workers), thread_name_prefix="score") as pool:
        verdicts = list(pool.map(lambda job: scorer.score(*job, config_digest), jobs))
    LOGGER.info(
        "Scored %d verdicts: %d pass@%d", len(verdicts), sum(verdict.pass_at_k for verdict in verdicts), k
    )
    return verdicts
