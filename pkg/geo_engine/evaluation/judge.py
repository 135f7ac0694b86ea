"""LLM-as-judge for free-form answers."""

from __future__ import annotations

import json
import logging
import math
from typing import Any, Mapping

from ..agents.prompts import build_judge_prompt
from ..errors import EndpointKindMismatch, PromptError, ProviderError
from ..models import JudgeVerdict
from ..providers import EndpointKind, ModelEndpoint, ProviderHub
from .metrics import numeric_equiv
from .numeric import parse_numeric

LOGGER = logging.getLogger(__name__)

_YES = {"yes", "true", "correct", "1"}


def _try_parse_json(text: str) -> dict[str, Any] | None:
    text = (text or "").strip()
    if not text:
        return None
    try:
        parsed = json.loads(text)
        if isinstance(parsed, dict):
            return parsed
    except json.JSONDecodeError:
        pass
    start = text.find("{")
    end = text.rfind("}")
    if start != -1 and end > start:
        try:
            parsed = json.loads(text[start : end + 1])
        except json.JSONDecodeError:
            return None
        if isinstance(parsed, dict):
            return parsed
    return None


def _as_float(value: Any) -> float | None:
    if isinstance(value, bool) or value is None:
        return None
    if isinstance(value, (int, float)):
        number = float(value)
    else:
        number = parse_numeric(str(value))
    if number is None or not math.isfinite(number):
        return None
    return number


def _says_yes(value: Any) -> bool:
    if value is True:
        return True
    return isinstance(value, str) and value.strip().lower() in _YES


def tolerance_for(reference: str, epsilon: float) -> float:
    """Relative tolerance: ``epsilon`` scaled by the reference magnitude, never below ``epsilon``."""

    value = parse_numeric(reference)
    return epsilon * max(1.0, abs(value)) if value is not None else epsilon


def interpret_verdict(payload: Mapping[str, Any] | None, tolerance: float, raw: str) -> JudgeVerdict:
    """Map a judge reply to a binary outcome; anything short of a clear yes is 0."""

    if payload is None:
        return JudgeVerdict(reasoning=raw.strip(), outcome=0, failure="unparseable judge output")
    reasoning = str(payload.get("reasoning", "")).strip()
    value_llm = _as_float(payload.get("candidate_value"))
    value_gt = _as_float(payload.get("reference_value"))
    if not _says_yes(payload.get("correct")):
        return JudgeVerdict(reasoning, 0, value_llm, value_gt)
    if value_llm is not None and value_gt is not None and not numeric_equiv(value_llm, value_gt, tolerance):
        LOGGER.info("Judge said yes but %s and %s differ beyond %s", value_llm, value_gt, tolerance)
        return JudgeVerdict(reasoning, 0, value_llm, value_gt, failure="values outside tolerance")
    return JudgeVerdict(reasoning, 1, value_llm, value_gt)


def judge_free_form(
    hub: ProviderHub,
    endpoint: ModelEndpoint | str,
    a_llm: str | None,
    a_gt: str,
    epsilon: float,
) -> JudgeVerdict:
    """Ask the judge endpoint whether ``a_llm`` matches ``a_gt`` within tolerance."""

    if isinstance(endpoint, str):
        endpoint = hub.endpoint(endpoint)
    if endpoint.kind is EndpointKind.EMBEDDING:
        raise EndpointKindMismatch(f"judge endpoint '{endpoint.name}' must be text-capable")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if not a_llm or not a_llm.strip():
        return JudgeVerdict(reasoning="", outcome=0, failure="empty candidate answer")
    tolerance = tolerance_for(a_gt, epsilon)
    request = build_judge_prompt(a_llm.strip(), a_gt.strip(), tolerance)
    request = request.with_decoding(
        temperature=endpoint.temperature if endpoint.temperature is not None else 0.0,
        max_tokens=endpoint.max_tokens,
        seed=endpoint.seed,
    )
    try:
        response = hub.chat(endpoint, request, 0)
    except (ProviderError, PromptError) as exc:
        LOGGER.warning("Judge call failed: %s", exc)
        return JudgeVerdict(reasoning="", outcome=0, failure=f"{type(exc).__name__}: {exc}")
    return interpret_verdict(_try_parse_json(response.text), tolerance, response.text)
