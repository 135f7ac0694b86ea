"""Deterministic offline endpoint driven by a response script.

A script is a mapping with ``rules`` (tried in order), ``replies`` (shorthand
``{substring: response}`` rules tried after ``rules``), ``default``,
``embedding`` (``hashed`` or ``bucket``) and ``dim``. Any other key is an error. A rule may match on ``contains``, ``regex``,
``image`` (bool) and ``attempt``; it answers with ``response``, a per-attempt
``responses`` list, an error via ``raise``, or an explicit ``vector``.
"""

from __future__ import annotations

import hashlib
import logging
import re
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from ..errors import AuthError, ConfigError, MalformedResponse, TransportError
from .base import ChatRequest, ChatResponse, Dialect, EndpointKind, ModelEndpoint
from .http import RetryableError

LOGGER = logging.getLogger(__name__)

DEFAULT_RESPONSE = "UNKNOWN"
_TOKEN = re.compile(r"\w+", re.UNICODE)
_RAISABLE = ("AuthError", "TransportError", "MalformedResponse", "RateLimited", "Timeout")
_SCRIPT_KEYS = {"rules", "replies", "default", "embedding", "dim"}
_RULE_KEYS = {"contains", "regex", "image", "attempt", "response", "responses", "raise", "vector"}


@dataclass(slots=True, frozen=True)
class MockRule:
    contains: str | None = None
    regex: str | None = None
    image: bool | None = None
    attempt: int | None = None
    response: str | None = None
    responses: tuple[str, ...] = ()
    raise_: str | None = None
    vector: tuple[float, ...] | None = None

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "MockRule":
        unknown = set(data) - _RULE_KEYS
        if unknown:
            raise ConfigError(f"unknown mock rule keys: {sorted(unknown)}")
        raise_ = data.get("raise")
        if raise_ is not None and raise_ not in _RAISABLE:
            raise ConfigError(f"mock rule cannot raise '{raise_}'; choose from {_RAISABLE}")
        if data.get("regex") is not None:
            re.compile(data["regex"])
        vector = data.get("vector")
        return cls(
            contains=data.get("contains"),
            regex=data.get("regex"),
            image=data.get("image"),
            attempt=data.get("attempt"),
            response=data.get("response"),
            responses=tuple(str(item) for item in data.get("responses", ())),
            raise_=raise_,
            vector=tuple(float(value) for value in vector) if vector is not None else None,
        )

    def matches(self, text: str, *, has_image: bool, attempt_index: int | None) -> bool:
        if self.contains is not None and self.contains not in text:
            return False
        if self.regex is not None and re.search(self.regex, text) is None:
            return False
        if self.image is not None and self.image != has_image:
            return False
        if self.attempt is not None and self.attempt != attempt_index:
            return False
        return True

    def answer(self, attempt_index: int) -> str | None:
        if self.responses:
            return self.responses[min(attempt_index, len(self.responses) - 1)]
        return self.response


class MockScript:
    def __init__(
        self,
        rules: tuple[MockRule, ...] = (),
        *,
        default: str = DEFAULT_RESPONSE,
        embedding: str = "hashed",
        dim: int = 256,
    ) -> None:
        if embedding not in ("hashed", "bucket"):
            raise ConfigError(f"mock embedding mode must be 'hashed' or 'bucket', got '{embedding}'")
        if dim < 1:
            raise ConfigError("mock embedding dim must be positive")
        self.rules = rules
        self.default = default
        self.embedding = embedding
        self.dim = dim

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any] | None, *, dim: int = 256) -> "MockScript":
        if not data:
            return cls(dim=dim)
        unknown = set(data) - _SCRIPT_KEYS
        if unknown:
            raise ConfigError(f"unknown mock script keys: {sorted(unknown)}")
        replies = data.get("replies") or {}
        if not isinstance(replies, Mapping):
            raise ConfigError("mock script replies must map substrings to responses")
        rules = tuple(MockRule.from_mapping(item) for item in data.get("rules", ()))
        rules += tuple(MockRule(contains=str(key), response=str(value)) for key, value in replies.items())
        return cls(
            rules,
            default=str(data.get("default", DEFAULT_RESPONSE)),
            embedding=str(data.get("embedding", "hashed")),
            dim=int(data.get("dim", dim)),
        )

    def _match(self, text: str, *, has_image: bool, attempt_index: int | None) -> MockRule | None:
        for rule in self.rules:
            if rule.matches(text, has_image=has_image, attempt_index=attempt_index):
                return rule
        return None

    @staticmethod
    def _raise(endpoint: str, name: str) -> None:
        if name == "AuthError":
            raise AuthError(endpoint, "scripted authentication failure")
        if name == "MalformedResponse":
            raise MalformedResponse(endpoint, "scripted malformed response")
        if name == "TransportError":
            raise TransportError(endpoint, "scripted transport failure")
        if name == "RateLimited":
            raise RetryableError(endpoint, "scripted HTTP 429", rate_limited=True)
        raise RetryableError(endpoint, "scripted timeout")

    def chat(self, endpoint: ModelEndpoint, request: ChatRequest, attempt_index: int) -> ChatResponse:
        text = request.full_text
        rule = self._match(text, has_image=request.image is not None, attempt_index=attempt_index)
        if rule is not None and rule.raise_:
            self._raise(endpoint.name, rule.raise_)
        reply = rule.answer(attempt_index) if rule is not None else None
        if reply is None:
            reply = self.default
        LOGGER.debug("Mock %s attempt %d -> %s", endpoint.name, attempt_index, "rule" if rule else "default")
        return ChatResponse(
            text=reply,
            finish_reason="stop",
            usage={"prompt_tokens": len(text.split()), "completion_tokens": len(reply.split())},
        )

    def embed(self, endpoint: ModelEndpoint, text: str) -> list[float]:
        rule = self._match(text, has_image=False, attempt_index=None)
        if rule is not None and rule.raise_:
            self._raise(endpoint.name, rule.raise_)
        if rule is not None and rule.vector is not None:
            return list(rule.vector)
        if self.embedding == "bucket":
            return bucket_vector(text, self.dim).tolist()
        return hashed_vector(text, self.dim).tolist()


def _digest(token: str) -> bytes:
    return hashlib.sha256(token.encode("utf-8")).digest()


def bucket_index(text: str, dim: int) -> int:
    return int.from_bytes(_digest(text)[:8], "big") % dim


def bucket_vector(text: str, dim: int) -> np.ndarray:
    vector = np.zeros(dim, dtype=np.float64)
    vector[bucket_index(text, dim)] = 1.0
    return vector


def hashed_vector(text: str, dim: int) -> np.ndarray:
    """Signed feature hashing of lower-cased word tokens, scaled to unit norm."""

    vector = np.zeros(dim, dtype=np.float64)
    for token in _TOKEN.findall(text.lower()):
        digest = _digest(token)
        index = int.from_bytes(digest[:8], "big") % dim
        vector[index] += 1.0 if digest[8] & 1 else -1.0
    norm = np.linalg.norm(vector)
    if norm == 0.0:
        return bucket_vector(text, dim)
    return vector / norm


def mock_endpoint(
    replies: Mapping[str, str] | None = None,
    *,
    script: Mapping[str, Any] | None = None,
    name: str = "mock",
    kind: EndpointKind = EndpointKind.VISION_LANGUAGE,
    default: str | None = None,
    max_retries: int = 0,
) -> ModelEndpoint:
    """Build an offline endpoint.

    ``replies`` is the ``{substring: response}`` shorthand and is always read as
    rules, whatever its keys. Full configuration goes through ``script``.
    ``default`` overrides the script's fallback reply.
    """

    payload: dict[str, Any] = dict(script or {})
    if replies:
        payload["replies"] = {**payload.get("replies", {}), **replies}
    if default is not None:
        payload["default"] = default
    MockScript.from_mapping(payload)
    return ModelEndpoint(
        name=name,
        kind=kind,
        dialect=Dialect.MOCK,
        model="mock",
        max_retries=max_retries,
        backoff_s=0.0,
        script=payload,
    )
