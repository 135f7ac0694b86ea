"""Predicate registry: head → category and admissible argument counts."""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping

import yaml

from ..errors import ConfigError

LOGGER = logging.getLogger(__name__)

REGISTRY_PATH = Path(__file__).with_name("registry.yaml")


class Category(str, Enum):
    SHAPE = "Shape"
    UNARY_ATTRIBUTE = "UnaryAttribute"
    GEOMETRIC_ATTRIBUTE = "GeometricAttribute"
    BINARY_RELATION = "BinaryRelation"
    IS_X_OF_RELATION = "IsXOfRelation"
    NUMERIC_RELATION = "NumericRelation"


@dataclass(slots=True, frozen=True)
class AritySpec:
    """One of ``exact(n)``, ``range(min, max)``, ``variadic(min)`` or ``one_of(n, ...)``."""

    kind: str
    values: tuple[int, ...]

    def admits(self, count: int) -> bool:
        if self.kind == "exact":
            return count == self.values[0]
        if self.kind == "range":
            return self.values[0] <= count <= self.values[1]
        if self.kind == "variadic":
            return count >= self.values[0]
        return count in self.values

    def describe(self) -> str:
        if self.kind == "exact":
            return f"exactly {self.values[0]}"
        if self.kind == "range":
            return f"{self.values[0]} to {self.values[1]}"
        if self.kind == "variadic":
            return f"at least {self.values[0]}"
        return "one of " + "/".join(str(value) for value in self.values)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "AritySpec":
        if len(data) != 1:
            raise ConfigError(f"arity spec must have exactly one form, got {dict(data)!r}")
        kind, raw = next(iter(data.items()))
        if kind in ("exact", "variadic"):
            values: tuple[int, ...] = (int(raw),)
        elif kind == "range":
            low, high = (int(item) for item in raw)
            if low > high:
                raise ConfigError(f"arity range {low}..{high} is empty")
            values = (low, high)
        elif kind == "one_of":
            values = tuple(sorted({int(item) for item in raw}))
            if not values:
                raise ConfigError("one_of arity needs at least one count")
        else:
            raise ConfigError(f"unknown arity form '{kind}'")
        if any(value < 0 for value in values):
            raise ConfigError(f"negative arity in {dict(data)!r}")
        return cls(kind=kind, values=values)

    def to_dict(self) -> dict[str, Any]:
        if self.kind in ("exact", "variadic"):
            return {self.kind: self.values[0]}
        return {self.kind: list(self.values)}


@dataclass(slots=True, frozen=True)
class RegistryEntry:
    head: str
    category: Category
    arity: AritySpec
    forms: tuple[str, ...] = ()
    note: str | None = None

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "RegistryEntry":
        try:
            return cls(
                head=str(data["head"]),
                category=Category(data["category"]),
                arity=AritySpec.from_mapping(data["arity"]),
                forms=tuple(str(form) for form in data.get("forms", ())),
                note=data.get("note"),
            )
        except KeyError as exc:
            raise ConfigError(f"registry entry missing field {exc.args[0]!r}: {dict(data)!r}") from exc
        except ValueError as exc:
            raise ConfigError(f"invalid registry entry {dict(data)!r}: {exc}") from exc


class PredicateRegistry:
    """Read-only lookup of registered predicate heads."""

    def __init__(self, entries: Iterable[RegistryEntry]) -> None:
        self._entries: dict[str, RegistryEntry] = {}
        for entry in entries:
            if entry.head in self._entries:
                raise ConfigError(f"predicate head '{entry.head}' registered twice")
            self._entries[entry.head] = entry

    def __contains__(self, head: object) -> bool:
        return head in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[RegistryEntry]:
        return iter(self._entries.values())

    def get(self, head: str) -> RegistryEntry | None:
        return self._entries.get(head)

    def category_of(self, head: str) -> Category | None:
        entry = self._entries.get(head)
        return entry.category if entry else None

    def heads(self, category: Category | None = None) -> list[str]:
        return [entry.head for entry in self._entries.values() if category is None or entry.category is category]

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "PredicateRegistry":
        items = data.get("predicates")
        if not isinstance(items, list):
            raise ConfigError("registry file must contain a 'predicates' list")
        return cls(RegistryEntry.from_mapping(item) for item in items)

    @classmethod
    def from_yaml(cls, path: str | Path) -> "PredicateRegistry":
        loaded = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        if not isinstance(loaded, Mapping):
            raise ConfigError(f"registry root must be a mapping: {path}")
        registry = cls.from_mapping(loaded)
        LOGGER.debug("Loaded %d predicate heads from %s", len(registry), path)
        return registry


@functools.lru_cache(maxsize=1)
def default_registry() -> PredicateRegistry:
    """The bundled registry, loaded once per process."""

    return PredicateRegistry.from_yaml(REGISTRY_PATH)


def load_registry(path: str | Path | None = None) -> PredicateRegistry:
    if path is None:
        return default_registry()
    return PredicateRegistry.from_yaml(path)
