"""Endpoint descriptions and the request/response payloads exchanged with them."""

from __future__ import annotations

import base64
import hashlib
import json
import mimetypes
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Union

from ..errors import AuthError, ConfigError, MissingImage, PromptError


class EndpointKind(str, Enum):
    VISION_LANGUAGE = "vision-language"
    TEXT_ONLY = "text-only"
    EMBEDDING = "embedding"


class Dialect(str, Enum):
    OPENAI = "openai"
    GEMINI = "gemini"
    MOCK = "mock"


@dataclass(slots=True)
class ModelEndpoint:
    name: str
    kind: EndpointKind
    dialect: Dialect = Dialect.OPENAI
    model: str = ""
    base_url: str = ""
    api_key_env: str | None = None
    temperature: float | None = None
    max_tokens: int = 2048
    timeout_s: float = 120.0
    max_retries: int = 3
    backoff_s: float = 1.0
    seed: int | None = None
    embedding_dim: int = 256
    script: Mapping[str, Any] | None = None

    @classmethod
    def from_mapping(cls, name: str, data: Mapping[str, Any]) -> "ModelEndpoint":
        payload = dict(data)
        payload.pop("name", None)
        try:
            payload["kind"] = EndpointKind(payload.get("kind", EndpointKind.TEXT_ONLY.value))
            payload["dialect"] = Dialect(payload.get("dialect", Dialect.OPENAI.value))
        except ValueError as exc:
            raise ConfigError(f"endpoint '{name}': {exc}") from exc
        try:
            endpoint = cls(name=name, **payload)
        except TypeError as exc:
            raise ConfigError(f"endpoint '{name}': {exc}") from exc
        if endpoint.max_retries < 0:
            raise ConfigError(f"endpoint '{name}': max_retries must be >= 0")
        if endpoint.dialect is not Dialect.MOCK and not endpoint.base_url:
            raise ConfigError(f"endpoint '{name}': base_url is required for dialect {endpoint.dialect.value}")
        return endpoint

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "dialect": self.dialect.value,
            "model": self.model,
            "base_url": self.base_url,
            "api_key_env": self.api_key_env,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "timeout_s": self.timeout_s,
            "max_retries": self.max_retries,
            "backoff_s": self.backoff_s,
            "seed": self.seed,
            "embedding_dim": self.embedding_dim,
            "script": self.script,
        }

    def identity(self) -> dict[str, Any]:
        """Fields that change what the endpoint answers; used in cache keys and config digests."""

        return {
            "name": self.name,
            "kind": self.kind.value,
            "dialect": self.dialect.value,
            "model": self.model,
            "base_url": self.base_url,
            "max_tokens": self.max_tokens,
            "seed": self.seed,
            "embedding_dim": self.embedding_dim if self.kind is EndpointKind.EMBEDDING else None,
            "script": self.script,
        }

    def api_key(self) -> str | None:
        if not self.api_key_env:
            return None
        value = os.environ.get(self.api_key_env)
        if not value:
            raise AuthError(self.name, f"environment variable {self.api_key_env} is not set")
        return value

    def seed_for(self, attempt_index: int) -> int | None:
        return None if self.seed is None else self.seed + attempt_index


# ------------------------------------------------------------------ request
@dataclass(slots=True, frozen=True)
class TextPart:
    text: str


@dataclass(slots=True, frozen=True)
class ImagePart:
    path: str

    @property
    def media_type(self) -> str:
        guessed, _ = mimetypes.guess_type(self.path)
        return guessed or "image/png"

    def read_bytes(self) -> bytes:
        try:
            return Path(self.path).read_bytes()
        except OSError as exc:
            raise MissingImage(f"image {self.path} is not readable: {exc}") from exc

    def sha256(self) -> str:
        return hashlib.sha256(self.read_bytes()).hexdigest()

    def base64(self) -> str:
        return base64.b64encode(self.read_bytes()).decode("ascii")


Part = Union[TextPart, ImagePart]


@dataclass(slots=True, frozen=True)
class ChatRequest:
    parts: tuple[Part, ...]
    system: str | None = None
    temperature: float | None = None
    max_tokens: int | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if sum(isinstance(part, ImagePart) for part in self.parts) > 1:
            raise PromptError("a request carries at most one image")

    @property
    def image(self) -> ImagePart | None:
        return next((part for part in self.parts if isinstance(part, ImagePart)), None)

    @property
    def text(self) -> str:
        return "\n".join(part.text for part in self.parts if isinstance(part, TextPart))

    @property
    def full_text(self) -> str:
        return f"{self.system}\n{self.text}" if self.system else self.text

    def with_decoding(self, *, temperature: float | None, max_tokens: int | None, seed: int | None) -> "ChatRequest":
        return ChatRequest(parts=self.parts, system=self.system, temperature=temperature, max_tokens=max_tokens, seed=seed)

    def fingerprint(self) -> dict[str, Any]:
        """Content-addressed view: images enter by digest so runs stay relocatable."""

        parts: list[dict[str, str]] = []
        for part in self.parts:
            if isinstance(part, ImagePart):
                parts.append({"image_sha256": part.sha256()})
            else:
                parts.append({"text": part.text})
        return {
            "system": self.system,
            "parts": parts,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "seed": self.seed,
        }

    def to_dict(self) -> dict[str, Any]:
        parts: list[dict[str, str]] = []
        for part in self.parts:
            if isinstance(part, ImagePart):
                parts.append({"image": part.path})
            else:
                parts.append({"text": part.text})
        return {
            "system": self.system,
            "parts": parts,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "seed": self.seed,
        }


# ----------------------------------------------------------------- response
@dataclass(slots=True)
class ChatResponse:
    text: str
    finish_reason: str | None = None
    usage: dict[str, int] = field(default_factory=dict)
    latency_s: float = 0.0
    retries: int = 0
    cached: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "text": self.text,
            "finish_reason": self.finish_reason,
            "usage": dict(self.usage),
            "latency_s": self.latency_s,
            "retries": self.retries,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], *, cached: bool = False) -> "ChatResponse":
        return cls(
            text=str(data.get("text", "")),
            finish_reason=data.get("finish_reason"),
            usage={key: int(value) for key, value in (data.get("usage") or {}).items()},
            latency_s=float(data.get("latency_s", 0.0)),
            retries=int(data.get("retries", 0)),
            cached=cached,
        )


# ---------------------------------------------------------------- cache key
@dataclass(slots=True, frozen=True)
class CacheKey:
    digest: str

    @staticmethod
    def _hash(payload: Mapping[str, Any]) -> str:
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False, default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @classmethod
    def for_chat(cls, endpoint: ModelEndpoint, request: ChatRequest, attempt_index: int) -> "CacheKey":
        return cls(
            cls._hash(
                {
                    "operation": "chat",
                    "endpoint": endpoint.identity(),
                    "request": request.fingerprint(),
                    "attempt_index": attempt_index,
                }
            )
        )

    @classmethod
    def for_embedding(cls, endpoint: ModelEndpoint, text: str) -> "CacheKey":
        return cls(cls._hash({"operation": "embed", "endpoint": endpoint.identity(), "text": text}))

    def __str__(self) -> str:
        return self.digest
