"""Single-agent and two-stage (interpreter then solver) pipelines."""

from __future__ import annotations

import logging
from datetime import datetime, timezone
from typing import Callable, Mapping

from ..dsl import PredicateProgram, PredicateRegistry, default_registry, validate
from ..errors import EndpointKindMismatch, PromptError, ProviderError
from ..models import Attempt, ExtractionFailure, Mode, Problem
from ..providers import ChatRequest, EndpointKind, ModelEndpoint, ProviderHub
from .extraction import extract_answer, extract_predicate_block
from .prompts import build_interpreter_prompt, build_single_agent_prompt, build_solver_prompt

LOGGER = logging.getLogger(__name__)

DEFAULT_TEMPERATURES: Mapping[str, float] = {"interpreter": 0.2, "solver": 0.0, "single": 0.0}
INTERPRETER_FAILED = "InterpreterFailed"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class AgentPipeline:
    """Run pipeline stages against a ``ProviderHub`` and record every call as an ``Attempt``.

    Provider and prompt failures never escape: the attempt is marked failed
    with the error class as its code. Only endpoint kind mismatches raise.
    """

    def __init__(
        self,
        hub: ProviderHub,
        *,
        registry: PredicateRegistry | None = None,
        temperatures: Mapping[str, float] | None = None,
        choice_epsilon: float | None = None,
    ) -> None:
        self.hub = hub
        self.registry = registry or default_registry()
        self.temperatures = {**DEFAULT_TEMPERATURES, **(temperatures or {})}
        self.choice_epsilon = choice_epsilon

    # ------------------------------------------------------------------ helpers
    @staticmethod
    def _require(endpoint: ModelEndpoint, *kinds: EndpointKind) -> None:
        if endpoint.kind not in kinds:
            allowed = " or ".join(kind.value for kind in kinds)
            raise EndpointKindMismatch(f"endpoint '{endpoint.name}' is {endpoint.kind.value}; need {allowed}")

    def _decorate(self, endpoint: ModelEndpoint, request: ChatRequest, role: str, attempt_index: int) -> ChatRequest:
        temperature = endpoint.temperature if endpoint.temperature is not None else self.temperatures[role]
        return request.with_decoding(
            temperature=temperature, max_tokens=endpoint.max_tokens, seed=endpoint.seed_for(attempt_index)
        )

    def _invoke(
        self,
        attempt: Attempt,
        endpoint: ModelEndpoint,
        role: str,
        build: Callable[[], ChatRequest],
    ) -> str | None:
        """Build, send and trace one request; returns the raw text or None on failure."""

        attempt.started_at = _now()
        try:
            request = self._decorate(endpoint, build(), role, attempt.attempt_index)
        except PromptError as exc:
            LOGGER.warning("%s: cannot build prompt: %s", attempt.key, exc)
            attempt.fail(type(exc).__name__, str(exc))
            return None
        attempt.prompt = request.to_dict()
        try:
            response = self.hub.chat(endpoint, request, attempt.attempt_index)
        except (ProviderError, PromptError) as exc:
            LOGGER.warning("%s: %s", attempt.key, exc)
            attempt.retries = getattr(exc, "retries", 0)
            attempt.fail(type(exc).__name__, str(exc))
            return None
        attempt.raw = response.text
        attempt.retries = response.retries
        attempt.cached = response.cached
        attempt.usage = dict(response.usage)
        attempt.latency_s = response.latency_s
        return response.text

    def _answer(self, attempt: Attempt, raw: str | None, problem: Problem) -> Attempt:
        if raw is None:
            return attempt
        answer = extract_answer(raw, problem, epsilon=self.choice_epsilon)
        if isinstance(answer, ExtractionFailure):
            return attempt.fail(answer.code, answer.message)
        attempt.answer = answer
        return attempt

    # ------------------------------------------------------------------- stages
    def run_single(self, endpoint: ModelEndpoint, problem: Problem, attempt_index: int) -> Attempt:
        self._require(endpoint, EndpointKind.VISION_LANGUAGE)
        attempt = Attempt(problem.id, Mode.SINGLE, attempt_index, endpoint.name)
        raw = self._invoke(attempt, endpoint, "single", lambda: build_single_agent_prompt(problem))
        return self._answer(attempt, raw, problem)

    def run_interpreter(self, endpoint: ModelEndpoint, problem: Problem, attempt_index: int) -> Attempt:
        self._require(endpoint, EndpointKind.VISION_LANGUAGE)
        attempt = Attempt(problem.id, Mode.INTERPRETER, attempt_index, endpoint.name)
        raw = self._invoke(attempt, endpoint, "interpreter", lambda: build_interpreter_prompt(problem))
        if raw is None:
            return attempt
        program = extract_predicate_block(raw, self.registry)
        if isinstance(program, ExtractionFailure):
            return attempt.fail(program.code, program.message)
        attempt.program = program
        attempt.validation = validate(program, self.registry)
        if not attempt.validation.ok:
            LOGGER.info("%s: %d predicate diagnostics", attempt.key, len(attempt.validation.errors))
        return attempt

    def run_solver(
        self,
        endpoint: ModelEndpoint,
        program: PredicateProgram,
        problem: Problem,
        attempt_index: int,
        *,
        source_interpreter: str | None = None,
    ) -> Attempt:
        self._require(endpoint, EndpointKind.TEXT_ONLY, EndpointKind.VISION_LANGUAGE)
        attempt = Attempt(problem.id, Mode.SOLVER, attempt_index, endpoint.name, source_interpreter=source_interpreter)
        raw = self._invoke(attempt, endpoint, "solver", lambda: build_solver_prompt(program, problem))
        return self._answer(attempt, raw, problem)

    def run_multi(
        self,
        vl_endpoint: ModelEndpoint,
        lm_endpoint: ModelEndpoint,
        problem: Problem,
        attempt_index: int,
    ) -> tuple[Attempt, Attempt]:
        """Interpreter then solver for one attempt index; the solver sees only the program."""

        self._require(vl_endpoint, EndpointKind.VISION_LANGUAGE)
        self._require(lm_endpoint, EndpointKind.TEXT_ONLY, EndpointKind.VISION_LANGUAGE)
        interpreter = self.run_interpreter(vl_endpoint, problem, attempt_index)
        return interpreter, self.solve_from(lm_endpoint, interpreter, problem)

    def solve_from(self, lm_endpoint: ModelEndpoint, interpreter: Attempt, problem: Problem) -> Attempt:
        """Solver attempt paired with an existing interpreter attempt; a failed one yields ``InterpreterFailed``."""

        self._require(lm_endpoint, EndpointKind.TEXT_ONLY, EndpointKind.VISION_LANGUAGE)
        if not interpreter.ok or interpreter.program is None:
            solver = Attempt(
                problem.id, Mode.SOLVER, interpreter.attempt_index, lm_endpoint.name, source_interpreter=interpreter.endpoint
            )
            solver.started_at = _now()
            solver.fail(INTERPRETER_FAILED, f"interpreter attempt failed: {interpreter.error_code}")
            return solver
        return self.run_solver(
            lm_endpoint, interpreter.program, problem, interpreter.attempt_index, source_interpreter=interpreter.endpoint
        )
