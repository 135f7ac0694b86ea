"""Predicate alignment: compare a diagram-derived description with a predicate-derived one.

Both descriptions are embedded and compared by cosine similarity. The
predicate side can come from a model or, offline, from the template renderer.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .agents.prompts import build_describe_diagram_prompt, build_describe_predicates_prompt
from .dsl import PredicateProgram, render_description
from .errors import DimensionMismatch, EmptyGroup, EmptyProgram, EndpointKindMismatch, ZeroVector
from .models import AlignmentRecord, Problem
from .providers import ChatRequest, EndpointKind, ModelEndpoint, ProviderHub

LOGGER = logging.getLogger(__name__)

TEMPLATE = "template"
DESCRIBE_TEMPERATURE = 0.0


def cosine(u: Sequence[float] | np.ndarray, v: Sequence[float] | np.ndarray) -> float:
    a = np.asarray(u, dtype=np.float64).ravel()
    b = np.asarray(v, dtype=np.float64).ravel()
    if a.size == 0 or a.shape != b.shape:
        raise DimensionMismatch(f"cannot compare vectors of dimension {a.size} and {b.size}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroVector("cosine similarity is undefined for an all-zero vector")
    return float(np.clip(np.dot(a, b) / (norm_a * norm_b), -1.0, 1.0))


def _resolve(hub: ProviderHub, endpoint: ModelEndpoint | str) -> ModelEndpoint:
    return hub.endpoint(endpoint) if isinstance(endpoint, str) else endpoint


def _with_decoding(request: ChatRequest, endpoint: ModelEndpoint) -> ChatRequest:
    temperature = DESCRIBE_TEMPERATURE if endpoint.temperature is None else endpoint.temperature
    return request.with_decoding(temperature=temperature, max_tokens=endpoint.max_tokens, seed=endpoint.seed)


def describe_from_diagram(hub: ProviderHub, endpoint: ModelEndpoint | str, problem: Problem) -> str:
    endpoint = _resolve(hub, endpoint)
    if endpoint.kind is not EndpointKind.VISION_LANGUAGE:
        raise EndpointKindMismatch(f"describing a diagram needs a vision-language endpoint, not '{endpoint.name}'")
    request = build_describe_diagram_prompt(problem)
    return hub.chat(endpoint, _with_decoding(request, endpoint)).text.strip()


def describe_from_predicates(
    program: PredicateProgram,
    *,
    hub: ProviderHub | None = None,
    endpoint: ModelEndpoint | str | None = None,
) -> str:
    """Prose for ``program``: model-written when an endpoint is given, template-rendered otherwise."""

    if not program:
        raise EmptyProgram("cannot describe an empty predicate program")
    if endpoint is None or endpoint == TEMPLATE:
        return render_description(program)
    if hub is None:
        raise ValueError("a hub is required to describe predicates with a model")
    endpoint = _resolve(hub, endpoint)
    request = build_describe_predicates_prompt(program)
    return hub.chat(endpoint, _with_decoding(request, endpoint)).text.strip()


def alignment_score(
    problem: Problem,
    program: PredicateProgram,
    *,
    hub: ProviderHub,
    diagram_endpoint: ModelEndpoint | str,
    predicate_endpoint: ModelEndpoint | str | None,
    embed_endpoint: ModelEndpoint | str,
    config: Mapping[str, Any] | None = None,
) -> AlignmentRecord:
    description_a = describe_from_diagram(hub, diagram_endpoint, problem)
    description_b = describe_from_predicates(program, hub=hub, endpoint=predicate_endpoint)
    if not description_a or not description_b:
        raise EmptyProgram(f"problem {problem.id}: a description came back empty")
    similarity = cosine(hub.embed(embed_endpoint, description_a), hub.embed(embed_endpoint, description_b))
    LOGGER.debug("Alignment for %s: %.4f", problem.id, similarity)
    return AlignmentRecord(
        problem_id=problem.id,
        description_a=description_a,
        description_b=description_b,
        similarity=similarity,
        config=dict(config or {}),
    )


def aggregate_alignment(records: Iterable[AlignmentRecord], key: str = "interpreter") -> dict[str, float]:
    """Mean similarity per value of ``record.config[key]``, in first-seen order."""

    groups: dict[str, list[float]] = defaultdict(list)
    for record in records:
        groups[str(record.config.get(key, "-"))].append(record.similarity)
    if not groups:
        raise EmptyGroup("no alignment records to aggregate")
    return {name: float(np.mean(values)) for name, values in groups.items()}


def format_alignment_table(means: Mapping[str, float], *, label: str = "Interpreter") -> str:
    lines = [f"| {label} | Avg. Cosine Similarity |", "| --- | --- |"]
    lines += [f"| {name} | {value:.3f} |" for name, value in means.items()]
    return "\n".join(lines) + "\n"
