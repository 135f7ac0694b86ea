"""Model endpoint clients: HTTP dialects, offline mock, cache and hub."""

from .base import (
    CacheKey,
    ChatRequest,
    ChatResponse,
    Dialect,
    EndpointKind,
    ImagePart,
    ModelEndpoint,
    TextPart,
)
from .cache import ResponseCache
from .http import HttpBackend, RetryableError
from .hub import ProviderHub
from .mock import MockRule, MockScript, bucket_index, bucket_vector, hashed_vector, mock_endpoint

__all__ = [
    "CacheKey",
    "ChatRequest",
    "ChatResponse",
    "Dialect",
    "EndpointKind",
    "HttpBackend",
    "ImagePart",
    "MockRule",
    "MockScript",
    "ModelEndpoint",
    "ProviderHub",
    "ResponseCache",
    "RetryableError",
    "TextPart",
    "bucket_index",
    "bucket_vector",
    "hashed_vector",
    "mock_endpoint",
]
