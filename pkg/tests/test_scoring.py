from __future__ import annotations

import logging

import pytest

from geo_engine.errors import JudgeUnavailable, MissingAttempts
from geo_engine.evaluation import score_run
from geo_engine.models import Answer, Attempt, AttemptStatus, Mode, Outcome, Problem, TaskKind
from geo_engine.providers import EndpointKind, ProviderHub, mock_endpoint

from .conftest import JUDGE_RULES


def _mc_problem(index: int) -> Problem:
    return Problem(
        id=f"mc-{index:02d}",
        dataset="synthetic",
        question=f"Question {index}",
        kind=TaskKind.MULTIPLE_CHOICE,
        answer="B",
        choices=("1", "2", "3", "4"),
    )


def _attempt(problem_id: str, mode: Mode, index: int, answer: Answer | None, *, ok: bool = True) -> Attempt:
    attempt = Attempt(problem_id=problem_id, mode=mode, attempt_index=index, endpoint="mock", answer=answer)
    if not ok:
        attempt.fail("TransportError", "scripted transport failure")
    return attempt


def _judge_hub() -> ProviderHub:
    endpoint = mock_endpoint(script={"rules": JUDGE_RULES}, name="judge", kind=EndpointKind.TEXT_ONLY)
    return ProviderHub({endpoint.name: endpoint})


def test_pass_at_three_over_ten_problems() -> None:
    problems = [_mc_problem(index) for index in range(10)]
    attempts = []
    for position, problem in enumerate(problems):
        letters = ["A", "B", "A"] if position < 6 else ["A", "C", "D"]
        attempts.extend(_attempt(problem.id, Mode.SINGLE, index, Answer.choice(letter)) for index, letter in enumerate(letters))

    verdicts = score_run(attempts, problems, modes=("single",), k=3)

    assert len(verdicts) == 10
    assert sum(verdict.pass_at_k for verdict in verdicts) / len(verdicts) == pytest.approx(0.6)
    assert [verdict.problem_id for verdict in verdicts] == [problem.id for problem in problems]
    assert all(verdict.first_attempt == 0 for verdict in verdicts)


def test_value_answers_select_choices() -> None:
    problem = _mc_problem(0)
    attempts = [_attempt(problem.id, Mode.SOLVER, 0, Answer.numeric("2", 2.0))]

    (verdict,) = score_run(attempts, [problem], modes=("multi",), k=1)

    assert verdict.outcomes == (Outcome.CORRECT,)
    assert verdict.first_attempt == 1
    assert verdict.mode == "multi"


def test_failed_attempts_score_incorrect() -> None:
    problem = _mc_problem(0)
    attempts = [
        _attempt(problem.id, Mode.SOLVER, 0, None, ok=False),
        _attempt(problem.id, Mode.SOLVER, 1, Answer.choice("B")),
    ]

    (verdict,) = score_run(attempts, [problem], modes=("multi",), k=3)

    assert verdict.outcomes == (Outcome.FAILED, Outcome.CORRECT)
    assert verdict.pass_at_k == 1
    assert verdict.first_attempt == 0
    assert attempts[0].status is AttemptStatus.FAILED


def test_interpreter_attempts_are_not_scored() -> None:
    problem = _mc_problem(0)
    attempts = [_attempt(problem.id, Mode.INTERPRETER, 0, None)]

    (verdict,) = score_run(attempts, [problem], modes=("multi",), k=3)

    assert verdict.outcomes == ()
    assert verdict.pass_at_k == 0


def test_free_form_uses_the_judge(problem_2405: Problem) -> None:
    attempts = [
        _attempt(problem_2405.id, Mode.SOLVER, 0, Answer.numeric("38", 38.0)),
        _attempt(problem_2405.id, Mode.SOLVER, 1, Answer.numeric("71", 71.0)),
    ]

    (verdict,) = score_run(attempts, [problem_2405], hub=_judge_hub(), judge_endpoint="judge", modes=("multi",), k=3)

    assert verdict.outcomes == (Outcome.INCORRECT, Outcome.CORRECT)
    assert [judge.outcome for judge in verdict.judge] == [0, 1]
    assert verdict.kind is TaskKind.FREE_FORM


def test_free_form_without_judge_is_refused(problem_2405: Problem) -> None:
    with pytest.raises(JudgeUnavailable):
        score_run([], [problem_2405], modes=("single",))


def test_missing_attempts(caplog: pytest.LogCaptureFixture) -> None:
    problem = _mc_problem(0)

    with pytest.raises(MissingAttempts):
        score_run([], [problem], modes=("single",), strict=True)

    with caplog.at_level(logging.WARNING):
        (verdict,) = score_run([], [problem], modes=("single",))

    assert verdict.pass_at_k == 0
    assert verdict.outcomes == ()
    assert "No attempts for 1 problem/mode pair" in caplog.text


def test_only_first_k_attempts_count() -> None:
    problem = _mc_problem(0)
    attempts = [_attempt(problem.id, Mode.SINGLE, index, Answer.choice(letter)) for index, letter in enumerate("AAB")]

    (verdict,) = score_run(attempts, [problem], modes=("single",), k=2)

    assert verdict.outcomes == (Outcome.INCORRECT, Outcome.INCORRECT)
    assert verdict.pass_at_k == 0


def test_unknown_mode_is_rejected() -> None:
    with pytest.raises(ValueError):
        score_run([], [_mc_problem(0)], modes=("interpreter",))
