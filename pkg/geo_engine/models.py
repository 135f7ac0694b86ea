"""Core dataclasses shared by the pipelines, scoring, and persistence."""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Mapping

from .diagnostics import ValidationReport
from .dsl import PredicateProgram, parse_program, serialize

CHOICE_LETTERS = string.ascii_uppercase


class TaskKind(str, Enum):
    MULTIPLE_CHOICE = "multiple-choice"
    FREE_FORM = "free-form"


class Mode(str, Enum):
    """Stage that produced an attempt."""

    SINGLE = "single"
    INTERPRETER = "interpreter"
    SOLVER = "solver"


class PipelineMode(str, Enum):
    SINGLE = "single"
    MULTI = "multi"
    BOTH = "both"

    def scored(self) -> tuple[str, ...]:
        if self is PipelineMode.BOTH:
            return ("single", "multi")
        return (self.value,)


class AttemptStatus(str, Enum):
    OK = "ok"
    FAILED = "failed"


class Outcome(str, Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"
    FAILED = "failed"


# ------------------------------------------------------------------ problems
@dataclass(slots=True, frozen=True)
class Problem:
    """One benchmark item; ``image`` is relative to ``root`` unless absolute."""

    id: str
    dataset: str
    question: str
    kind: TaskKind
    answer: str
    image: str | None = None
    choices: tuple[str, ...] = ()
    meta: Mapping[str, Any] = field(default_factory=dict, hash=False)
    root: str | None = field(default=None, compare=False, hash=False)

    @property
    def is_multiple_choice(self) -> bool:
        return self.kind is TaskKind.MULTIPLE_CHOICE

    @property
    def letters(self) -> str:
        return CHOICE_LETTERS[: len(self.choices)]

    @property
    def gold_index(self) -> int | None:
        if not self.is_multiple_choice:
            return None
        letter = self.answer.strip().upper()
        index = self.letters.find(letter) if len(letter) == 1 else -1
        return index if index >= 0 else None

    @property
    def image_path(self) -> Path | None:
        if not self.image:
            return None
        path = Path(self.image)
        if path.is_absolute() or self.root is None:
            return path
        return Path(self.root) / path

    def to_dict(self) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "id": self.id,
            "dataset": self.dataset,
            "image": self.image,
            "question": self.question,
            "kind": self.kind.value,
            "answer": self.answer,
        }
        if self.choices:
            payload["choices"] = list(self.choices)
        if self.meta:
            payload["meta"] = dict(self.meta)
        return payload


# ------------------------------------------------------------------- answers
class AnswerKind(str, Enum):
    CHOICE = "choice"
    VALUE = "value"


@dataclass(slots=True, frozen=True)
class Answer:
    kind: AnswerKind
    letter: str | None = None
    text: str | None = None
    value: float | None = None

    @classmethod
    def choice(cls, letter: str) -> "Answer":
        return cls(kind=AnswerKind.CHOICE, letter=letter.upper())

    @classmethod
    def numeric(cls, text: str, value: float | None = None) -> "Answer":
        return cls(kind=AnswerKind.VALUE, text=text, value=value)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "letter": self.letter, "text": self.text, "value": self.value}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Answer":
        return cls(
            kind=AnswerKind(data["kind"]),
            letter=data.get("letter"),
            text=data.get("text"),
            value=data.get("value"),
        )

    def __str__(self) -> str:
        return self.letter if self.kind is AnswerKind.CHOICE else str(self.text)


@dataclass(slots=True, frozen=True)
class ExtractionFailure:
    """Typed result of an extraction that found nothing usable."""

    code: str
    message: str

    def to_dict(self) -> dict[str, str]:
        return {"code": self.code, "message": self.message}


# ------------------------------------------------------------------ attempts
def _program_to_dict(program: PredicateProgram) -> dict[str, Any]:
    return {"text": serialize(program), "lines": list(program.source_lines)}


def _program_from_dict(data: Mapping[str, Any]) -> PredicateProgram:
    parsed, _ = parse_program(data.get("text", ""))
    lines = tuple(data.get("lines") or ())
    if len(lines) == len(parsed):
        return PredicateProgram(predicates=parsed.predicates, source_lines=lines)
    return parsed


@dataclass(slots=True)
class Attempt:
    """Trace of one model invocation for one stage of one problem."""

    problem_id: str
    mode: Mode
    attempt_index: int
    endpoint: str
    prompt: Mapping[str, Any] = field(default_factory=dict)
    raw: str | None = None
    program: PredicateProgram | None = None
    answer: Answer | None = None
    validation: ValidationReport | None = None
    status: AttemptStatus = AttemptStatus.OK
    error_code: str | None = None
    error: str | None = None
    retries: int = 0
    cached: bool = False
    usage: Mapping[str, int] = field(default_factory=dict)
    latency_s: float = 0.0
    started_at: str | None = None
    source_interpreter: str | None = None
    config_digest: str | None = None

    @property
    def ok(self) -> bool:
        return self.status is AttemptStatus.OK

    @property
    def artifact(self) -> PredicateProgram | Answer | None:
        return self.program if self.mode is Mode.INTERPRETER else self.answer

    @property
    def key(self) -> str:
        return f"{self.problem_id}__{self.mode.value}__{self.attempt_index}"

    def fail(self, code: str, message: str) -> "Attempt":
        self.status = AttemptStatus.FAILED
        self.error_code = code
        self.error = message
        return self

    def to_dict(self) -> dict[str, Any]:
        return {
            "problem_id": self.problem_id,
            "mode": self.mode.value,
            "attempt_index": self.attempt_index,
            "endpoint": self.endpoint,
            "source_interpreter": self.source_interpreter,
            "config_digest": self.config_digest,
            "status": self.status.value,
            "error_code": self.error_code,
            "error": self.error,
            "prompt": dict(self.prompt),
            "raw": self.raw,
            "program": _program_to_dict(self.program) if self.program is not None else None,
            "answer": self.answer.to_dict() if self.answer is not None else None,
            "validation": self.validation.to_dict() if self.validation is not None else None,
            "retries": self.retries,
            "cached": self.cached,
            "usage": dict(self.usage),
            "latency_s": self.latency_s,
            "started_at": self.started_at,
            "verdict": None,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Attempt":
        return cls(
            problem_id=str(data["problem_id"]),
            mode=Mode(data["mode"]),
            attempt_index=int(data["attempt_index"]),
            endpoint=str(data["endpoint"]),
            prompt=dict(data.get("prompt") or {}),
            raw=data.get("raw"),
            program=_program_from_dict(data["program"]) if data.get("program") is not None else None,
            answer=Answer.from_dict(data["answer"]) if data.get("answer") is not None else None,
            validation=ValidationReport.from_dict(data["validation"]) if data.get("validation") else None,
            status=AttemptStatus(data.get("status", "ok")),
            error_code=data.get("error_code"),
            error=data.get("error"),
            retries=int(data.get("retries", 0)),
            cached=bool(data.get("cached", False)),
            usage=dict(data.get("usage") or {}),
            latency_s=float(data.get("latency_s", 0.0)),
            started_at=data.get("started_at"),
            source_interpreter=data.get("source_interpreter"),
            config_digest=data.get("config_digest"),
        )


# ------------------------------------------------------------------ verdicts
@dataclass(slots=True, frozen=True)
class JudgeVerdict:
    reasoning: str
    outcome: int
    value_llm: float | None = None
    value_gt: float | None = None
    failure: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "reasoning": self.reasoning,
            "outcome": self.outcome,
            "value_llm": self.value_llm,
            "value_gt": self.value_gt,
            "failure": self.failure,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "JudgeVerdict":
        return cls(
            reasoning=str(data.get("reasoning", "")),
            outcome=int(data.get("outcome", 0)),
            value_llm=data.get("value_llm"),
            value_gt=data.get("value_gt"),
            failure=data.get("failure"),
        )


@dataclass(slots=True)
class Verdict:
    """Scored outcomes of one problem under one pipeline mode."""

    problem_id: str
    mode: str
    dataset: str
    kind: TaskKind
    outcomes: tuple[Outcome, ...]
    k: int
    pass_at_k: int
    first_attempt: int
    judge: tuple[JudgeVerdict | None, ...] = ()
    config_digest: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "problem_id": self.problem_id,
            "mode": self.mode,
            "dataset": self.dataset,
            "kind": self.kind.value,
            "outcomes": [outcome.value for outcome in self.outcomes],
            "k": self.k,
            "pass_at_k": self.pass_at_k,
            "first_attempt": self.first_attempt,
            "judge": [item.to_dict() if item is not None else None for item in self.judge],
            "config_digest": self.config_digest,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Verdict":
        return cls(
            problem_id=str(data["problem_id"]),
            mode=str(data["mode"]),
            dataset=str(data.get("dataset", "")),
            kind=TaskKind(data["kind"]),
            outcomes=tuple(Outcome(item) for item in data["outcomes"]),
            k=int(data["k"]),
            pass_at_k=int(data["pass_at_k"]),
            first_attempt=int(data["first_attempt"]),
            judge=tuple(JudgeVerdict.from_dict(item) if item else None for item in data.get("judge", [])),
            config_digest=data.get("config_digest"),
        )


# ----------------------------------------------------------------- alignment
@dataclass(slots=True, frozen=True)
class AlignmentRecord:
    problem_id: str
    description_a: str
    description_b: str
    similarity: float
    config: Mapping[str, Any] = field(default_factory=dict, hash=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "problem_id": self.problem_id,
            "description_a": self.description_a,
            "description_b": self.description_b,
            "similarity": self.similarity,
            "config": dict(self.config),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "AlignmentRecord":
        return cls(
            problem_id=str(data["problem_id"]),
            description_a=str(data["description_a"]),
            description_b=str(data["description_b"]),
            similarity=float(data["similarity"]),
            config=dict(data.get("config") or {}),
        )
