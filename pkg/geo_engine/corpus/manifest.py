"""Expected problem counts for the supported benchmark splits."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..errors import ConfigError, CountMismatch
from ..models import Problem, TaskKind

LOGGER = logging.getLogger(__name__)


@dataclass(slots=True, frozen=True)
class DatasetManifest:
    tag: str
    format_id: str
    expected: Mapping[TaskKind, int] = field(default_factory=dict, hash=False)

    @property
    def total(self) -> int:
        return sum(self.expected.values())

    def check(self, problems: Sequence[Problem], *, strict: bool = False) -> dict[str, int]:
        """Compare loaded counts per kind with the declared ones."""

        counts = Counter(problem.kind for problem in problems)
        mismatches = {
            kind.value: (counts.get(kind, 0), expected)
            for kind, expected in self.expected.items()
            if counts.get(kind, 0) != expected
        }
        if mismatches:
            detail = ", ".join(f"{kind}: loaded {got}, expected {want}" for kind, (got, want) in mismatches.items())
            if strict:
                raise CountMismatch(f"{self.tag}: {detail}")
            LOGGER.warning("%s: %s", self.tag, detail)
        return {kind.value: counts.get(kind, 0) for kind in TaskKind}


MANIFESTS: dict[str, DatasetManifest] = {
    "geometry3k-test": DatasetManifest(
        tag="geometry3k",
        format_id="geometry3k",
        expected={TaskKind.MULTIPLE_CHOICE: 601},
    ),
    "mathverse-testmini": DatasetManifest(
        tag="mathverse",
        format_id="mathverse",
        expected={TaskKind.MULTIPLE_CHOICE: 436, TaskKind.FREE_FORM: 352},
    ),
}


def get_manifest(name: str) -> DatasetManifest:
    try:
        return MANIFESTS[name]
    except KeyError:
        known = ", ".join(sorted(MANIFESTS))
        raise ConfigError(f"unknown dataset manifest '{name}' (known: {known})") from None
