"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class GeoEngineError(Exception):
    """Base class for every error raised by the engine."""


class ConfigError(GeoEngineError, ValueError):
    pass


# ---------------------------------------------------------------------- data
class DataError(GeoEngineError):
    pass


class FormatError(DataError):
    def __init__(self, message: str, *, path: str | None = None, line: int | None = None) -> None:
        self.path = path
        self.line = line
        where = path or "<input>"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {message}")


class MissingField(FormatError):
    def __init__(self, field: str, *, path: str | None = None, line: int | None = None) -> None:
        self.field = field
        super().__init__(f"missing required field '{field}'", path=path, line=line)


class CountMismatch(DataError):
    pass


class UnknownRun(DataError):
    pass


# ----------------------------------------------------------------------- dsl
class PredicateSyntaxError(GeoEngineError, ValueError):
    """A predicate expression failed to parse.

    ``offset`` is the byte offset (UTF-8) into the expression where parsing
    stopped; ``line`` is set when the expression came from a multi-line program.
    """

    def __init__(self, message: str, *, offset: int = 0, line: int | None = None, text: str = "") -> None:
        self.reason = message
        self.offset = offset
        self.line = line
        self.text = text
        where = f"line {line}, byte {offset}" if line is not None else f"byte {offset}"
        super().__init__(f"{message} at {where}")


class RenderError(GeoEngineError, ValueError):
    pass


class NonCanonicalPredicate(GeoEngineError, ValueError):
    """A hand-built predicate whose text form would parse back to a different tree."""

    def __init__(self, predicate: object, reparsed: object) -> None:
        self.predicate = predicate
        self.reparsed = reparsed
        super().__init__(f"{predicate!r} serializes to a form that parses as {reparsed!r}")


# ------------------------------------------------------------------ providers
class ProviderError(GeoEngineError):
    """A model endpoint call failed; always names the endpoint."""

    def __init__(self, endpoint: str, message: str, *, retries: int = 0) -> None:
        self.endpoint = endpoint
        self.retries = retries
        super().__init__(f"[{endpoint}] {message}")


class AuthError(ProviderError):
    pass


class RateLimitExhausted(ProviderError):
    pass


class TransportError(ProviderError):
    pass


class MalformedResponse(ProviderError):
    pass


class EndpointKindMismatch(GeoEngineError, ValueError):
    pass


# -------------------------------------------------------------------- prompts
class PromptError(GeoEngineError, ValueError):
    pass


class MissingImage(PromptError):
    pass


class EmptyProgram(PromptError):
    pass


class MissingPlaceholder(PromptError):
    pass


# ----------------------------------------------------------------- evaluation
class EvaluationError(GeoEngineError):
    pass


class EmptyOutcomes(EvaluationError, ValueError):
    pass


class MissingAttempts(EvaluationError):
    pass


class ProblemSetMismatch(EvaluationError):
    pass


class JudgeUnavailable(EvaluationError):
    pass


# ------------------------------------------------------------------ alignment
class AlignmentError(GeoEngineError, ValueError):
    pass


class DimensionMismatch(AlignmentError):
    pass


class ZeroVector(AlignmentError):
    pass


class EmptyGroup(AlignmentError):
    pass
