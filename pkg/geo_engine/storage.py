"""Run directory layout: the persisted artifact set of one evaluation run.

::

    <runs_dir>/<run_id>/
        config.yaml        snapshot of the run configuration
        run.json           run id, config digest, problem-set digest
        attempts/          one JSON file per (problem, stage, attempt index)
        verdicts.jsonl
        report.json / report.md
        alignment.jsonl
        journal.db
"""

from __future__ import annotations

import json
import logging
import os
import re
import tempfile
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping

import yaml

from .errors import ConfigError, FormatError, UnknownRun
from .models import AlignmentRecord, Attempt, Verdict

LOGGER = logging.getLogger(__name__)

_UNSAFE = re.compile(r"[^A-Za-z0-9._-]")


def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, temp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}", suffix=".tmp")
    try:
        with os.fdopen(handle, "w", encoding="utf-8") as stream:
            stream.write(text)
        os.replace(temp_name, path)
    except BaseException:
        Path(temp_name).unlink(missing_ok=True)
        raise


def _read_jsonl(path: Path) -> Iterator[Mapping[str, Any]]:
    with path.open(encoding="utf-8") as stream:
        for number, line in enumerate(stream, start=1):
            if not line.strip():
                continue
            try:
                yield json.loads(line)
            except ValueError as exc:
                raise FormatError(str(exc), path=str(path), line=number) from exc


class RunStore:
    def __init__(self, runs_dir: str | Path, run_id: str) -> None:
        if not run_id or _UNSAFE.search(run_id):
            raise ConfigError(f"invalid run id {run_id!r}; use letters, digits, '.', '_' or '-'")
        self.runs_dir = Path(runs_dir)
        self.run_id = run_id
        self.directory = self.runs_dir / run_id

    @classmethod
    def open(cls, runs_dir: str | Path, run_id: str) -> "RunStore":
        store = cls(runs_dir, run_id)
        if not store.metadata_path.exists():
            raise UnknownRun(f"no run '{run_id}' under {store.runs_dir}")
        return store

    # ----------------------------------------------------------------- paths
    @property
    def attempts_dir(self) -> Path:
        return self.directory / "attempts"

    @property
    def metadata_path(self) -> Path:
        return self.directory / "run.json"

    @property
    def config_path(self) -> Path:
        return self.directory / "config.yaml"

    @property
    def verdicts_path(self) -> Path:
        return self.directory / "verdicts.jsonl"

    @property
    def report_path(self) -> Path:
        return self.directory / "report.json"

    @property
    def alignment_path(self) -> Path:
        return self.directory / "alignment.jsonl"

    @property
    def journal_path(self) -> Path:
        return self.directory / "journal.db"

    def attempt_path(self, key: str) -> Path:
        return self.attempts_dir / f"{_UNSAFE.sub('_', key)}.json"

    # -------------------------------------------------------------- metadata
    def metadata(self) -> dict[str, Any]:
        if not self.metadata_path.exists():
            return {}
        return json.loads(self.metadata_path.read_text(encoding="utf-8"))

    @property
    def config_digest(self) -> str | None:
        return self.metadata().get("config_digest")

    def initialise(self, config: Mapping[str, Any], config_digest: str, extra: Mapping[str, Any] | None = None) -> None:
        """Create the directory or reopen it; a different config digest is rejected."""

        existing = self.config_digest
        if existing is not None and existing != config_digest:
            raise ConfigError(
                f"run '{self.run_id}' was created with config {existing[:12]}; refusing to mix in {config_digest[:12]}"
            )
        self.attempts_dir.mkdir(parents=True, exist_ok=True)
        atomic_write_text(self.config_path, yaml.safe_dump(dict(config), sort_keys=True, allow_unicode=True))
        payload = {"run_id": self.run_id, "config_digest": config_digest, **dict(extra or {})}
        atomic_write_text(self.metadata_path, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def update_metadata(self, **values: Any) -> None:
        payload = {**self.metadata(), **values}
        atomic_write_text(self.metadata_path, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def load_config(self) -> dict[str, Any]:
        if not self.config_path.exists():
            return {}
        return yaml.safe_load(self.config_path.read_text(encoding="utf-8")) or {}

    # -------------------------------------------------------------- attempts
    def save_attempt(self, attempt: Attempt) -> Path:
        path = self.attempt_path(attempt.key)
        atomic_write_text(path, json.dumps(attempt.to_dict(), indent=2, ensure_ascii=False, sort_keys=True) + "\n")
        return path

    def load_attempt(self, key: str) -> Attempt | None:
        path = self.attempt_path(key)
        if not path.exists():
            return None
        try:
            return Attempt.from_dict(json.loads(path.read_text(encoding="utf-8")))
        except (ValueError, KeyError) as exc:
            LOGGER.warning("Ignoring unreadable attempt file %s: %s", path.name, exc)
            return None

    def attempts(self) -> list[Attempt]:
        """Every persisted attempt; attempts from another configuration are rejected."""

        digest = self.config_digest
        loaded: list[Attempt] = []
        for path in sorted(self.attempts_dir.glob("*.json")) if self.attempts_dir.exists() else ():
            try:
                attempt = Attempt.from_dict(json.loads(path.read_text(encoding="utf-8")))
            except (ValueError, KeyError) as exc:
                raise FormatError(str(exc), path=str(path)) from exc
            if digest and attempt.config_digest and attempt.config_digest != digest:
                raise ConfigError(f"{path.name} belongs to config {attempt.config_digest[:12]}, not {digest[:12]}")
            loaded.append(attempt)
        return loaded

    # --------------------------------------------------------------- results
    def save_verdicts(self, verdicts: Iterable[Verdict]) -> None:
        lines = [json.dumps(verdict.to_dict(), sort_keys=True, ensure_ascii=False) for verdict in verdicts]
        atomic_write_text(self.verdicts_path, "".join(line + "\n" for line in lines))

    def load_verdicts(self) -> list[Verdict] | None:
        if not self.verdicts_path.exists():
            return None
        return [Verdict.from_dict(item) for item in _read_jsonl(self.verdicts_path)]

    def save_report(self, report: Mapping[str, Any], markdown: str) -> None:
        atomic_write_text(self.report_path, json.dumps(dict(report), indent=2, sort_keys=True) + "\n")
        atomic_write_text(self.directory / "report.md", markdown)

    def load_report(self) -> dict[str, Any] | None:
        if not self.report_path.exists():
            return None
        return json.loads(self.report_path.read_text(encoding="utf-8"))

    def save_alignment(self, records: Iterable[AlignmentRecord]) -> None:
        lines = [json.dumps(record.to_dict(), sort_keys=True, ensure_ascii=False) for record in records]
        atomic_write_text(self.alignment_path, "".join(line + "\n" for line in lines))

    def load_alignment(self) -> list[AlignmentRecord]:
        if not self.alignment_path.exists():
            return []
        return [AlignmentRecord.from_dict(item) for item in _read_jsonl(self.alignment_path)]
