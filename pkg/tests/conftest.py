from __future__ import annotations

import socket
from pathlib import Path
from typing import Any, Callable

import pytest

from geo_engine.config import RunConfig
from geo_engine.corpus import FIXTURE_PREDICATES_2405, FIXTURE_PROBLEMS, load_problems
from geo_engine.models import Problem

INTERPRETER_MARK = "generate accurate geometric predicates"
DESCRIBE_MARK = "in one paragraph of plain prose"

QUESTION_2405 = "parallel lines l and m"
QUESTION_MATHVERSE = "Three television presenters"
QUESTION_RIGHT = "right angle at B"

PREDICATES_2405 = FIXTURE_PREDICATES_2405.read_text(encoding="utf-8")

INTERPRETER_2405 = (
    "1. COMPREHENSIVE IMAGE ANALYSIS\n"
    "Two parallel lines D and H are cut by a broken transversal through B.\n"
    "\n"
    "PREDICATES:\n" + PREDICATES_2405
)
INTERPRETER_MATHVERSE = (
    "The figure is a right triangle with the bearing marked at A.\n"
    "PREDICATES:\n"
    "Triangle(A,B,C)\n"
    "Perpendicular(Line(A,B),Line(B,C))\n"
    "Equals(LengthOf(Line(A,B)),17.6)\n"
    "Equals(MeasureOf(Angle(B,A,C)),38)\n"
)
INTERPRETER_RIGHT = (
    "PREDICATES:\n"
    "Triangle(A,B,C)\n"
    "Perpendicular(Line(A,B),Line(B,C))\n"
    "Equals(LengthOf(Line(A,B)),3)\n"
    "Equals(LengthOf(Line(B,C)),4)\n"
)

VL_RULES: list[dict[str, Any]] = [
    {"contains": INTERPRETER_MARK, "regex": QUESTION_2405, "response": INTERPRETER_2405},
    {"contains": INTERPRETER_MARK, "regex": QUESTION_MATHVERSE, "response": INTERPRETER_MATHVERSE},
    {"contains": INTERPRETER_MARK, "regex": QUESTION_RIGHT, "response": INTERPRETER_RIGHT},
    {"contains": DESCRIBE_MARK, "response": "A figure with points A, B and C joined by straight lines."},
    {"regex": QUESTION_2405, "response": "The transversal bends at B.\nFinal Answer: 38"},
    {"regex": QUESTION_MATHVERSE, "response": "Using the bearing.\nFinal Answer: B"},
    {"regex": QUESTION_RIGHT, "response": "By Pythagoras AC = 5.\nFinal Answer: C"},
]

LM_RULES: list[dict[str, Any]] = [
    {"contains": QUESTION_MATHVERSE, "response": "tan(38) = BC / 17.6, so\nTherefore d ≈ 22.34 m"},
    {"contains": QUESTION_RIGHT, "response": "AC = sqrt(9 + 16) = 5.\nThus, the correct answer is C."},
    {"contains": QUESTION_2405, "response": "38 + 33 = 71, so the angle is \\boxed{71}."},
]

JUDGE_RULES: list[dict[str, Any]] = [
    {
        "contains": "Candidate answer: 71",
        "response": '{"reasoning": "both are 71", "candidate_value": 71, "reference_value": 71, "correct": "yes"}',
    },
    {
        "contains": "Candidate answer: 38",
        "response": '{"reasoning": "38 is not 71", "candidate_value": 38, "reference_value": 71, "correct": "no"}',
    },
]


def mock_endpoint_spec(kind: str, rules: list[dict[str, Any]] | None = None, **extra: Any) -> dict[str, Any]:
    script: dict[str, Any] = {"rules": rules or []}
    script.update(extra.pop("script", {}))
    return {"kind": kind, "dialect": "mock", "model": f"mock-{kind}", "script": script, **extra}


def run_config_data(runs_dir: Path, **overrides: Any) -> dict[str, Any]:
    data: dict[str, Any] = {
        "runs_dir": str(runs_dir),
        "mode": "both",
        "attempts": 3,
        "dataset": {"path": str(FIXTURE_PROBLEMS)},
        "endpoints": {
            "vl": mock_endpoint_spec("vision-language", VL_RULES),
            "lm": mock_endpoint_spec("text-only", LM_RULES),
            "judge": mock_endpoint_spec("text-only", JUDGE_RULES),
            "embed": mock_endpoint_spec("embedding", script={"embedding": "hashed"}),
        },
        "roles": {"interpreter": "vl", "solver": "lm", "single": "vl", "judge": "judge", "embed": "embed"},
        "concurrency": {"max_in_flight": 4, "problem_workers": 2},
    }
    data.update(overrides)
    return data


@pytest.fixture(autouse=True)
def no_network(monkeypatch: pytest.MonkeyPatch) -> None:
    def refuse(*_args: Any, **_kwargs: Any) -> None:
        raise RuntimeError("network access attempted during tests")

    monkeypatch.setattr(socket.socket, "connect", refuse)
    monkeypatch.setattr(socket, "create_connection", refuse)


@pytest.fixture()
def problems() -> list[Problem]:
    return load_problems(FIXTURE_PROBLEMS)


@pytest.fixture()
def problem_2405(problems: list[Problem]) -> Problem:
    return next(problem for problem in problems if problem.id == "2405")


@pytest.fixture()
def mathverse_problem(problems: list[Problem]) -> Problem:
    return next(problem for problem in problems if problem.id == "mathverse-328")


@pytest.fixture()
def right_triangle(problems: list[Problem]) -> Problem:
    return next(problem for problem in problems if problem.id == "right-triangle")


@pytest.fixture()
def make_config(tmp_path: Path) -> Callable[..., RunConfig]:
    def build(**overrides: Any) -> RunConfig:
        return RunConfig.from_dict(run_config_data(tmp_path / "runs", **overrides))

    return build
