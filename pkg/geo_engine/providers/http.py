"""HTTP dialect adapters for hosted chat and embedding endpoints."""

from __future__ import annotations

import logging
from typing import Any, Mapping, Protocol

import httpx

from ..errors import AuthError, MalformedResponse, ProviderError, TransportError
from .base import ChatRequest, ChatResponse, Dialect, ImagePart, ModelEndpoint, TextPart

LOGGER = logging.getLogger(__name__)


class RetryableError(ProviderError):
    """Transient failure (HTTP 429, 5xx, connection trouble); the hub retries these."""

    def __init__(self, endpoint: str, message: str, *, rate_limited: bool = False) -> None:
        self.rate_limited = rate_limited
        super().__init__(endpoint, message)


class DialectAdapter(Protocol):
    def chat_call(self, endpoint: ModelEndpoint, request: ChatRequest, api_key: str | None) -> tuple[str, dict[str, str], dict[str, Any]]:
        ...

    def parse_chat(self, endpoint: ModelEndpoint, body: Mapping[str, Any]) -> ChatResponse:
        ...

    def embed_call(self, endpoint: ModelEndpoint, text: str, api_key: str | None) -> tuple[str, dict[str, str], dict[str, Any]]:
        ...

    def parse_embedding(self, endpoint: ModelEndpoint, body: Mapping[str, Any]) -> list[float]:
        ...


def _url(endpoint: ModelEndpoint, path: str) -> str:
    return endpoint.base_url.rstrip("/") + "/" + path.lstrip("/")


class OpenAIAdapter:
    """``/chat/completions`` and ``/embeddings``; also vLLM, Ollama and other compatible servers."""

    def _headers(self, api_key: str | None) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        return headers

    def chat_call(self, endpoint, request, api_key):
        messages: list[dict[str, Any]] = []
        if request.system:
            messages.append({"role": "system", "content": request.system})
        if request.image is None:
            messages.append({"role": "user", "content": request.text})
        else:
            content: list[dict[str, Any]] = []
            for part in request.parts:
                if isinstance(part, ImagePart):
                    url = f"data:{part.media_type};base64,{part.base64()}"
                    content.append({"type": "image_url", "image_url": {"url": url}})
                else:
                    content.append({"type": "text", "text": part.text})
            messages.append({"role": "user", "content": content})
        payload: dict[str, Any] = {"model": endpoint.model, "messages": messages}
        if request.temperature is not None:
            payload["temperature"] = request.temperature
        if request.max_tokens is not None:
            payload["max_tokens"] = request.max_tokens
        if request.seed is not None:
            payload["seed"] = request.seed
        return _url(endpoint, "chat/completions"), self._headers(api_key), payload

    def parse_chat(self, endpoint, body):
        try:
            choice = body["choices"][0]
            text = choice["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponse(endpoint.name, f"no choices[0].message.content in response ({exc})") from exc
        if isinstance(text, list):
            text = "".join(str(item.get("text", "")) for item in text if isinstance(item, Mapping))
        usage = body.get("usage") or {}
        return ChatResponse(
            text=text or "",
            finish_reason=choice.get("finish_reason"),
            usage={
                "prompt_tokens": int(usage.get("prompt_tokens", 0)),
                "completion_tokens": int(usage.get("completion_tokens", 0)),
            },
        )

    def embed_call(self, endpoint, text, api_key):
        return _url(endpoint, "embeddings"), self._headers(api_key), {"model": endpoint.model, "input": text}

    def parse_embedding(self, endpoint, body):
        try:
            return [float(value) for value in body["data"][0]["embedding"]]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise MalformedResponse(endpoint.name, f"no data[0].embedding in response ({exc})") from exc


class GeminiAdapter:
    """``models/{model}:generateContent`` and ``:embedContent``."""

    def _headers(self, api_key: str | None) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["x-goog-api-key"] = api_key
        return headers

    def chat_call(self, endpoint, request, api_key):
        parts: list[dict[str, Any]] = []
        for part in request.parts:
            if isinstance(part, ImagePart):
                parts.append({"inline_data": {"mime_type": part.media_type, "data": part.base64()}})
            elif isinstance(part, TextPart):
                parts.append({"text": part.text})
        payload: dict[str, Any] = {"contents": [{"role": "user", "parts": parts}]}
        if request.system:
            payload["systemInstruction"] = {"parts": [{"text": request.system}]}
        generation: dict[str, Any] = {}
        if request.temperature is not None:
            generation["temperature"] = request.temperature
        if request.max_tokens is not None:
            generation["maxOutputTokens"] = request.max_tokens
        if request.seed is not None:
            generation["seed"] = request.seed
        if generation:
            payload["generationConfig"] = generation
        return _url(endpoint, f"models/{endpoint.model}:generateContent"), self._headers(api_key), payload

    def parse_chat(self, endpoint, body):
        try:
            candidate = body["candidates"][0]
            parts = candidate["content"]["parts"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponse(endpoint.name, f"no candidates[0].content.parts in response ({exc})") from exc
        usage = body.get("usageMetadata") or {}
        return ChatResponse(
            text="".join(str(part.get("text", "")) for part in parts if isinstance(part, Mapping)),
            finish_reason=candidate.get("finishReason"),
            usage={
                "prompt_tokens": int(usage.get("promptTokenCount", 0)),
                "completion_tokens": int(usage.get("candidatesTokenCount", 0)),
            },
        )

    def embed_call(self, endpoint, text, api_key):
        url = _url(endpoint, f"models/{endpoint.model}:embedContent")
        return url, self._headers(api_key), {"content": {"parts": [{"text": text}]}}

    def parse_embedding(self, endpoint, body):
        try:
            return [float(value) for value in body["embedding"]["values"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedResponse(endpoint.name, f"no embedding.values in response ({exc})") from exc


ADAPTERS: dict[Dialect, DialectAdapter] = {
    Dialect.OPENAI: OpenAIAdapter(),
    Dialect.GEMINI: GeminiAdapter(),
}


class HttpBackend:
    """One shared ``httpx.Client``; maps HTTP failures onto the provider error hierarchy."""

    def __init__(self, *, transport: httpx.BaseTransport | None = None) -> None:
        self._client = httpx.Client(transport=transport, follow_redirects=True)

    def close(self) -> None:
        self._client.close()

    def _post(self, endpoint: ModelEndpoint, url: str, headers: dict[str, str], payload: dict[str, Any]) -> Mapping[str, Any]:
        try:
            response = self._client.post(url, headers=headers, json=payload, timeout=endpoint.timeout_s)
        except httpx.TimeoutException as exc:
            raise RetryableError(endpoint.name, f"timed out after {endpoint.timeout_s}s") from exc
        except httpx.TransportError as exc:
            raise RetryableError(endpoint.name, f"transport failure: {exc}") from exc
        status = response.status_code
        if status in (401, 403):
            raise AuthError(endpoint.name, f"HTTP {status}: credentials rejected")
        if status == 429:
            raise RetryableError(endpoint.name, "HTTP 429: rate limited", rate_limited=True)
        if status >= 500:
            raise RetryableError(endpoint.name, f"HTTP {status}: server error")
        if status >= 400:
            raise TransportError(endpoint.name, f"HTTP {status}: {response.text[:200]}")
        try:
            body = response.json()
        except ValueError as exc:
            raise MalformedResponse(endpoint.name, "response body is not JSON") from exc
        if not isinstance(body, Mapping):
            raise MalformedResponse(endpoint.name, "response body is not a JSON object")
        return body

    def chat(self, endpoint: ModelEndpoint, request: ChatRequest) -> ChatResponse:
        adapter = ADAPTERS[endpoint.dialect]
        url, headers, payload = adapter.chat_call(endpoint, request, endpoint.api_key())
        LOGGER.debug("POST %s (%s, %d chars)", url, endpoint.name, len(request.text))
        return adapter.parse_chat(endpoint, self._post(endpoint, url, headers, payload))

    def embed(self, endpoint: ModelEndpoint, text: str) -> list[float]:
        adapter = ADAPTERS[endpoint.dialect]
        url, headers, payload = adapter.embed_call(endpoint, text, endpoint.api_key())
        return adapter.parse_embedding(endpoint, self._post(endpoint, url, headers, payload))
