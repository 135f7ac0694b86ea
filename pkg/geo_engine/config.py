"""Run configuration models and loaders."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping, MutableMapping

import yaml

from .errors import ConfigError
from .models import PipelineMode
from .providers import EndpointKind, ModelEndpoint

DATA_ROOT_ENV = "GEO_ENGINE_DATA_ROOT"
TEMPLATE = "template"


def _deep_update(target: MutableMapping[str, Any], updates: Mapping[str, Any]) -> MutableMapping[str, Any]:
    """Recursively merge ``updates`` into ``target``."""

    for key, value in updates.items():
        if isinstance(value, Mapping) and isinstance(target.get(key), MutableMapping):
            _deep_update(target[key], value)  # type: ignore[index]
        else:
            target[key] = value
    return target


def _build(cls, section: str, data: Mapping[str, Any] | None):
    payload = dict(data or {})
    known = {item.name for item in fields(cls)}
    unknown = sorted(set(payload) - known)
    if unknown:
        raise ConfigError(f"{section}: unknown key(s) {', '.join(unknown)}")
    return cls(**payload)


@dataclass(slots=True)
class DatasetConfig:
    path: str | None = None
    format: str = "generic_jsonl"
    data_root: str | None = None
    tag: str | None = None
    manifest: str | None = None
    strict: bool = False

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "DatasetConfig":
        return _build(cls, "dataset", data)

    def resolved_root(self) -> Path | None:
        root = self.data_root or os.environ.get(DATA_ROOT_ENV)
        return Path(root) if root else None


@dataclass(slots=True)
class RolesConfig:
    interpreter: str | None = None
    solver: str | None = None
    single: str | None = None
    judge: str | None = None
    embed: str | None = None
    describe: str | None = None
    describe_predicates: str = TEMPLATE

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "RolesConfig":
        return _build(cls, "roles", data)


@dataclass(slots=True)
class DecodingConfig:
    interpreter: float = 0.2
    solver: float = 0.0
    single: float = 0.0

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "DecodingConfig":
        return _build(cls, "decoding", data)

    def temperatures(self) -> dict[str, float]:
        return {"interpreter": self.interpreter, "solver": self.solver, "single": self.single}


@dataclass(slots=True)
class EvaluationConfig:
    choice_epsilon: float | str = "auto"
    free_form_epsilon: float = 1e-2
    judge_workers: int = 4
    strict: bool = False

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "EvaluationConfig":
        config = _build(cls, "evaluation", data)
        if config.choice_epsilon != "auto":
            try:
                config.choice_epsilon = float(config.choice_epsilon)
            except (TypeError, ValueError):
                raise ConfigError("evaluation.choice_epsilon must be 'auto' or a number") from None
            if config.choice_epsilon < 0:
                raise ConfigError("evaluation.choice_epsilon must be non-negative")
        if config.free_form_epsilon < 0:
            raise ConfigError("evaluation.free_form_epsilon must be non-negative")
        return config

    @property
    def choice_epsilon_value(self) -> float | None:
        return None if self.choice_epsilon == "auto" else float(self.choice_epsilon)


@dataclass(slots=True)
class ConcurrencyConfig:
    max_in_flight: int = 8
    problem_workers: int = 4

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "ConcurrencyConfig":
        config = _build(cls, "concurrency", data)
        if config.max_in_flight < 1 or config.problem_workers < 1:
            raise ConfigError("concurrency limits must be at least 1")
        return config


@dataclass(slots=True)
class CacheConfig:
    enabled: bool = True
    directory: str | None = None

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "CacheConfig":
        return _build(cls, "cache", data)


_ROLE_KINDS: Mapping[str, tuple[EndpointKind, ...]] = {
    "interpreter": (EndpointKind.VISION_LANGUAGE,),
    "single": (EndpointKind.VISION_LANGUAGE,),
    "describe": (EndpointKind.VISION_LANGUAGE,),
    "solver": (EndpointKind.TEXT_ONLY, EndpointKind.VISION_LANGUAGE),
    "judge": (EndpointKind.TEXT_ONLY, EndpointKind.VISION_LANGUAGE),
    "describe_predicates": (EndpointKind.TEXT_ONLY, EndpointKind.VISION_LANGUAGE),
    "embed": (EndpointKind.EMBEDDING,),
}


@dataclass(slots=True)
class RunConfig:
    run_id: str | None = None
    runs_dir: str = "runs"
    mode: PipelineMode = PipelineMode.BOTH
    attempts: int = 3
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    endpoints: dict[str, ModelEndpoint] = field(default_factory=dict)
    roles: RolesConfig = field(default_factory=RolesConfig)
    decoding: DecodingConfig = field(default_factory=DecodingConfig)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)
    concurrency: ConcurrencyConfig = field(default_factory=ConcurrencyConfig)
    cache: CacheConfig = field(default_factory=CacheConfig)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any] | None = None) -> "RunConfig":
        payload = dict(data or {})
        known = {item.name for item in fields(cls)}
        unknown = sorted(set(payload) - known)
        if unknown:
            raise ConfigError(f"unknown top-level key(s) {', '.join(unknown)}")
        try:
            mode = PipelineMode(payload.get("mode", PipelineMode.BOTH.value))
        except ValueError:
            raise ConfigError(f"mode must be one of single, multi, both; got {payload.get('mode')!r}") from None
        endpoints = payload.get("endpoints") or {}
        if not isinstance(endpoints, Mapping):
            raise ConfigError("endpoints must be a mapping of name to settings")
        config = cls(
            run_id=payload.get("run_id"),
            runs_dir=str(payload.get("runs_dir", "runs")),
            mode=mode,
            attempts=int(payload.get("attempts", 3)),
            dataset=DatasetConfig.from_mapping(payload.get("dataset", {})),
            endpoints={name: ModelEndpoint.from_mapping(name, spec or {}) for name, spec in endpoints.items()},
            roles=RolesConfig.from_mapping(payload.get("roles", {})),
            decoding=DecodingConfig.from_mapping(payload.get("decoding", {})),
            evaluation=EvaluationConfig.from_mapping(payload.get("evaluation", {})),
            concurrency=ConcurrencyConfig.from_mapping(payload.get("concurrency", {})),
            cache=CacheConfig.from_mapping(payload.get("cache", {})),
        )
        if config.attempts < 1:
            raise ConfigError("attempts must be at least 1")
        return config

    def to_dict(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "runs_dir": self.runs_dir,
            "mode": self.mode.value,
            "attempts": self.attempts,
            "dataset": asdict(self.dataset),
            "endpoints": {name: endpoint.to_dict() for name, endpoint in self.endpoints.items()},
            "roles": asdict(self.roles),
            "decoding": asdict(self.decoding),
            "evaluation": asdict(self.evaluation),
            "concurrency": asdict(self.concurrency),
            "cache": asdict(self.cache),
        }

    def merge(self, data: Mapping[str, Any]) -> "RunConfig":
        base = self.to_dict()
        merged = _deep_update(base, data)
        return RunConfig.from_dict(merged)

    # --------------------------------------------------------------- accessors
    @property
    def k(self) -> int:
        return self.attempts

    def endpoint_for(self, role: str) -> ModelEndpoint:
        name = getattr(self.roles, role)
        if not name:
            raise ConfigError(f"no endpoint assigned to role '{role}'")
        try:
            return self.endpoints[name]
        except KeyError:
            raise ConfigError(f"role '{role}' refers to unknown endpoint '{name}'") from None

    def required_roles(self) -> list[str]:
        roles: list[str] = []
        if self.mode in (PipelineMode.SINGLE, PipelineMode.BOTH):
            roles.append("single")
        if self.mode in (PipelineMode.MULTI, PipelineMode.BOTH):
            roles += ["interpreter", "solver"]
        return roles

    def validate(self) -> "RunConfig":
        """Check role assignments against the mode and endpoint kinds."""

        for role in self.required_roles():
            self.endpoint_for(role)
        for role, kinds in _ROLE_KINDS.items():
            name = getattr(self.roles, role)
            if not name or (role == "describe_predicates" and name == TEMPLATE):
                continue
            endpoint = self.endpoint_for(role)
            if endpoint.kind not in kinds:
                allowed = " or ".join(kind.value for kind in kinds)
                raise ConfigError(f"role '{role}' needs a {allowed} endpoint; '{name}' is {endpoint.kind.value}")
        return self

    def cache_directory(self) -> Path:
        return Path(self.cache.directory) if self.cache.directory else Path(self.runs_dir) / ".cache"

    def digest(self) -> str:
        """sha256 over the result-affecting fields, in canonical key order."""

        used = sorted({getattr(self.roles, role) for role in ("interpreter", "solver", "single", "judge")} - {None})
        payload = {
            "mode": self.mode.value,
            "attempts": self.attempts,
            "dataset": {
                "path": self.dataset.path,
                "format": self.dataset.format,
                "tag": self.dataset.tag,
                "manifest": self.dataset.manifest,
            },
            "roles": {role: getattr(self.roles, role) for role in ("interpreter", "solver", "single", "judge")},
            "endpoints": {
                name: {**self.endpoints[name].identity(), "temperature": self.endpoints[name].temperature}
                for name in used
                if name in self.endpoints
            },
            "decoding": asdict(self.decoding),
            "evaluation": {
                "choice_epsilon": self.evaluation.choice_epsilon,
                "free_form_epsilon": self.evaluation.free_form_epsilon,
            },
        }
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _load_env_file(env_path: Path) -> dict[str, Any]:
    overrides: dict[str, Any] = {}
    for line in env_path.read_text().splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#") or "=" not in stripped:
            continue
        key, raw_value = stripped.split("=", 1)
        key_parts = key.strip().lower().split("__")
        current = overrides
        for part in key_parts[:-1]:
            current = current.setdefault(part, {})  # type: ignore[assignment]
        current[key_parts[-1]] = yaml.safe_load(raw_value)
    return overrides


def load_run_config(yaml_path: str | Path | None = None, env_path: str | Path | None = None) -> RunConfig:
    """Load a run configuration from YAML and optional ``.env`` overrides."""

    payload: dict[str, Any] = {}
    if yaml_path:
        yaml_file = Path(yaml_path)
        if not yaml_file.exists():
            raise ConfigError(f"config file {yaml_file} not found")
        try:
            loaded = yaml.safe_load(yaml_file.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{yaml_file}: {exc}") from exc
        if not isinstance(loaded, Mapping):
            raise ConfigError("configuration root must be a mapping")
        payload = dict(loaded)
    if env_path:
        env_file = Path(env_path)
        if env_file.exists():
            payload = dict(_deep_update(payload, _load_env_file(env_file)))
    return RunConfig.from_dict(payload)
