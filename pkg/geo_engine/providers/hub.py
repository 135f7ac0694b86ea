"""Unified model access used by the pipelines, the judge and the alignment protocol."""

from __future__ import annotations

import logging
import threading
import time
from collections import Counter
from typing import Mapping

import httpx
import numpy as np
from tenacity import Retrying, before_sleep_log, retry_if_exception_type, stop_after_attempt, wait_exponential

from ..errors import ConfigError, EndpointKindMismatch, PromptError, RateLimitExhausted, TransportError
from .base import CacheKey, ChatRequest, ChatResponse, Dialect, EndpointKind, ModelEndpoint
from .cache import ResponseCache
from .http import HttpBackend, RetryableError
from .mock import MockScript

LOGGER = logging.getLogger(__name__)


class ProviderHub:
    """Provide cached, retried and concurrency-bounded access to model endpoints."""

    def __init__(
        self,
        endpoints: Mapping[str, ModelEndpoint] | None = None,
        *,
        cache: ResponseCache | None = None,
        max_in_flight: int = 8,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        if max_in_flight < 1:
            raise ConfigError("max_in_flight must be at least 1")
        self._endpoints: dict[str, ModelEndpoint] = dict(endpoints or {})
        self.cache = cache or ResponseCache(None, enabled=False)
        self._in_flight = threading.BoundedSemaphore(max_in_flight)
        self._transport = transport
        self._http: HttpBackend | None = None
        self._scripts: dict[str, MockScript] = {}
        self._lock = threading.Lock()
        self.stats: dict[str, Counter[str]] = {}

    # ------------------------------------------------------------------ registry
    def register(self, endpoint: ModelEndpoint) -> ModelEndpoint:
        self._endpoints[endpoint.name] = endpoint
        self._scripts.pop(endpoint.name, None)
        return endpoint

    def endpoint(self, name: str) -> ModelEndpoint:
        try:
            return self._endpoints[name]
        except KeyError:
            raise ConfigError(f"unknown endpoint '{name}'") from None

    @property
    def endpoints(self) -> dict[str, ModelEndpoint]:
        return dict(self._endpoints)

    def close(self) -> None:
        if self._http is not None:
            self._http.close()
            self._http = None

    def __enter__(self) -> "ProviderHub":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    # ------------------------------------------------------------------- helpers
    def _count(self, endpoint: ModelEndpoint, field: str, amount: int = 1) -> None:
        with self._lock:
            self.stats.setdefault(endpoint.name, Counter())[field] += amount

    def _backend(self) -> HttpBackend:
        with self._lock:
            if self._http is None:
                self._http = HttpBackend(transport=self._transport)
            return self._http

    def _script(self, endpoint: ModelEndpoint) -> MockScript:
        with self._lock:
            script = self._scripts.get(endpoint.name)
            if script is None:
                script = MockScript.from_mapping(endpoint.script, dim=endpoint.embedding_dim)
                self._scripts[endpoint.name] = script
            return script

    def _with_retries(self, endpoint: ModelEndpoint, call):
        """Run ``call`` under the in-flight bound, retrying transient failures.

        Returns ``(result, retries)``; exhausted transient failures surface as
        ``RateLimitExhausted`` or ``TransportError`` carrying the retry count.
        """

        retrying = Retrying(
            stop=stop_after_attempt(endpoint.max_retries + 1),
            wait=wait_exponential(multiplier=endpoint.backoff_s, max=60),
            retry=retry_if_exception_type(RetryableError),
            before_sleep=before_sleep_log(LOGGER, logging.INFO),
            reraise=True,
        )
        attempts = 0
        try:
            for attempt in retrying:
                with attempt:
                    attempts = attempt.retry_state.attempt_number
                    with self._in_flight:
                        self._count(endpoint, "invocations")
                        result = call()
        except RetryableError as exc:
            retries = max(attempts - 1, 0)
            self._count(endpoint, "retries", retries)
            self._count(endpoint, "failures")
            message = f"{exc.args[0].split('] ', 1)[-1]} (after {retries} retries)"
            if exc.rate_limited:
                raise RateLimitExhausted(endpoint.name, message, retries=retries) from exc
            raise TransportError(endpoint.name, message, retries=retries) from exc
        except Exception:
            self._count(endpoint, "failures")
            raise
        retries = attempts - 1
        self._count(endpoint, "retries", retries)
        return result, retries

    # ---------------------------------------------------------------------- chat
    def chat(self, endpoint: ModelEndpoint | str, request: ChatRequest, attempt_index: int = 0) -> ChatResponse:
        if isinstance(endpoint, str):
            endpoint = self.endpoint(endpoint)
        if endpoint.kind is EndpointKind.EMBEDDING:
            raise EndpointKindMismatch(f"endpoint '{endpoint.name}' is an embedding endpoint and cannot chat")
        if request.image is not None and endpoint.kind is not EndpointKind.VISION_LANGUAGE:
            raise EndpointKindMismatch(
                f"request carries an image but endpoint '{endpoint.name}' is {endpoint.kind.value}"
            )
        key = CacheKey.for_chat(endpoint, request, attempt_index)
        with self.cache.lock(key):
            stored = self.cache.get(key)
            if stored is not None:
                self._count(endpoint, "cache_hits")
                return ChatResponse.from_dict(stored, cached=True)
            started = time.perf_counter()
            if endpoint.dialect is Dialect.MOCK:
                script = self._script(endpoint)
                response, retries = self._with_retries(endpoint, lambda: script.chat(endpoint, request, attempt_index))
            else:
                backend = self._backend()
                response, retries = self._with_retries(endpoint, lambda: backend.chat(endpoint, request))
            response.latency_s = round(time.perf_counter() - started, 6)
            response.retries = retries
            self.cache.put(key, {"endpoint": endpoint.name, "attempt_index": attempt_index, **request.fingerprint()}, response.to_dict())
        return response

    # --------------------------------------------------------------------- embed
    def embed(self, endpoint: ModelEndpoint | str, text: str) -> np.ndarray:
        if isinstance(endpoint, str):
            endpoint = self.endpoint(endpoint)
        if endpoint.kind is not EndpointKind.EMBEDDING:
            raise EndpointKindMismatch(f"endpoint '{endpoint.name}' is {endpoint.kind.value}, not an embedding endpoint")
        if not text.strip():
            raise PromptError("cannot embed empty text")
        key = CacheKey.for_embedding(endpoint, text)
        with self.cache.lock(key):
            stored = self.cache.get(key)
            if stored is not None:
                self._count(endpoint, "cache_hits")
                return np.asarray(stored["vector"], dtype=np.float64)
            if endpoint.dialect is Dialect.MOCK:
                script = self._script(endpoint)
                vector, _ = self._with_retries(endpoint, lambda: script.embed(endpoint, text))
            else:
                backend = self._backend()
                vector, _ = self._with_retries(endpoint, lambda: backend.embed(endpoint, text))
            self.cache.put(key, {"endpoint": endpoint.name, "text": text}, {"vector": list(vector)})
        return np.asarray(vector, dtype=np.float64)

    def summary(self) -> dict[str, dict[str, int]]:
        with self._lock:
            return {name: dict(counter) for name, counter in sorted(self.stats.items())}
