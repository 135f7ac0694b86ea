"""Dataset adapters that normalise benchmark files into ``Problem`` records.

``generic_jsonl`` is the interchange format, one object per line::

    {"id": "2405", "image": "images/2405.png", "question": "...",
     "kind": "free-form", "answer": "71", "choices": [...], "meta": {...}}

Images are referenced, never copied; relative paths resolve against the data
root (``--data-root`` or ``GEO_ENGINE_DATA_ROOT``), else the file's directory.
"""

from __future__ import annotations

import json
import logging
import re
from pathlib import Path
from typing import Any, Callable, Iterator, Mapping

from ..diagnostics import ValidationReport
from ..errors import ConfigError, DataError, FormatError, MissingField
from ..models import Problem, TaskKind
from .manifest import DatasetManifest

LOGGER = logging.getLogger(__name__)

_KIND_ALIASES = {
    "multiple-choice": TaskKind.MULTIPLE_CHOICE,
    "multiple_choice": TaskKind.MULTIPLE_CHOICE,
    "multi-choice": TaskKind.MULTIPLE_CHOICE,
    "mc": TaskKind.MULTIPLE_CHOICE,
    "free-form": TaskKind.FREE_FORM,
    "free_form": TaskKind.FREE_FORM,
    "ff": TaskKind.FREE_FORM,
}
_DIGITS = re.compile(r"(\d+)")
_CHOICES_BLOCK = re.compile(r"\n\s*Choices\s*:\s*\n?(.*)$", re.IGNORECASE | re.DOTALL)
_CHOICE_LINE = re.compile(r"^\s*\(?([A-Z])\)?\s*[:.)]\s*(.+?)\s*$")

Record = tuple[int, Mapping[str, Any]]
Adapter = Callable[[Path, Path, str, bool], list[Problem]]


def natural_key(value: str) -> tuple[tuple[int, Any], ...]:
    """Sort key ordering embedded numbers numerically: ``"2" < "10"``."""

    return tuple((0, int(part)) if part.isdigit() else (1, part) for part in _DIGITS.split(value) if part)


def parse_kind(value: Any, *, path: str | None = None, line: int | None = None) -> TaskKind:
    kind = _KIND_ALIASES.get(str(value).strip().lower())
    if kind is None:
        raise FormatError(f"unknown problem kind {value!r}", path=path, line=line)
    return kind


def _require(record: Mapping[str, Any], name: str, *, path: str, line: int | None) -> Any:
    value = record.get(name)
    if value is None or (isinstance(value, str) and not value.strip()):
        raise MissingField(name, path=path, line=line)
    return value


def _collect(
    records: Iterator[Record],
    build: Callable[[Mapping[str, Any], int | None], Problem],
    *,
    path: Path,
    strict: bool,
) -> list[Problem]:
    problems: list[Problem] = []
    seen: set[str] = set()
    for line, record in records:
        try:
            if not isinstance(record, Mapping):
                raise FormatError("record is not an object", path=str(path), line=line)
            problem = build(record, line)
        except MissingField as exc:
            if strict:
                raise
            LOGGER.warning("Skipping record: %s", exc)
            continue
        if problem.id in seen:
            raise FormatError(f"duplicate problem id '{problem.id}'", path=str(path), line=line)
        seen.add(problem.id)
        problems.append(problem)
    problems.sort(key=lambda problem: natural_key(problem.id))
    return problems


# ------------------------------------------------------------- generic jsonl
def _jsonl_records(path: Path) -> Iterator[Record]:
    with path.open(encoding="utf-8") as stream:
        for number, line in enumerate(stream, start=1):
            if not line.strip():
                continue
            try:
                yield number, json.loads(line)
            except ValueError as exc:
                raise FormatError(f"invalid JSON: {exc.args[0]}", path=str(path), line=number) from None


def load_generic_jsonl(path: Path, root: Path, tag: str, strict: bool) -> list[Problem]:
    def build(record: Mapping[str, Any], line: int | None) -> Problem:
        where = {"path": str(path), "line": line}
        kind = parse_kind(_require(record, "kind", **where), **where)
        choices = tuple(str(choice) for choice in record.get("choices") or ())
        return Problem(
            id=str(_require(record, "id", **where)),
            dataset=str(record.get("dataset") or tag),
            question=str(_require(record, "question", **where)),
            kind=kind,
            answer=str(_require(record, "answer", **where)).strip(),
            image=record.get("image"),
            choices=choices,
            meta=dict(record.get("meta") or {}),
            root=str(root),
        )

    return _collect(_jsonl_records(path), build, path=path, strict=strict)


# ---------------------------------------------------------------- geometry3k
def _geometry3k_records(path: Path) -> Iterator[Record]:
    folders = sorted((entry for entry in path.iterdir() if entry.is_dir()), key=lambda entry: natural_key(entry.name))
    for folder in folders:
        data_file = folder / "data.json"
        if not data_file.exists():
            LOGGER.debug("Skipping %s: no data.json", folder)
            continue
        try:
            record = json.loads(data_file.read_text(encoding="utf-8"))
        except ValueError as exc:
            raise FormatError(f"invalid JSON: {exc.args[0]}", path=str(data_file)) from None
        if isinstance(record, dict):
            record.setdefault("id", folder.name)
            record["_folder"] = folder.name
        yield None, record


def load_geometry3k(path: Path, root: Path, tag: str, strict: bool) -> list[Problem]:
    """Official layout: ``<split>/<id>/data.json`` plus ``img_diagram.png``; every item is multiple choice."""

    if not path.is_dir():
        raise FormatError("geometry3k expects a split directory", path=str(path))

    def build(record: Mapping[str, Any], line: int | None) -> Problem:
        source = str(path / str(record.get("_folder", record.get("id"))) / "data.json")
        where = {"path": source, "line": line}
        folder = str(record.get("_folder", record["id"]))
        image = Path(path.relative_to(root) if path.is_relative_to(root) else path) / folder / "img_diagram.png"
        meta = {
            name: record[name]
            for name in ("problem_type_graph", "problem_type_goal", "problem_level")
            if name in record
        }
        return Problem(
            id=str(record["id"]),
            dataset=tag,
            question=str(_require(record, "problem_text", **where)),
            kind=TaskKind.MULTIPLE_CHOICE,
            answer=str(_require(record, "answer", **where)).strip().upper(),
            image=str(image),
            choices=tuple(str(choice) for choice in _require(record, "choices", **where)),
            meta=meta,
            root=str(root),
        )

    return _collect(_geometry3k_records(path), build, path=path, strict=strict)


# ----------------------------------------------------------------- mathverse
def split_choices(question: str) -> tuple[str, tuple[str, ...]]:
    """Separate a trailing ``Choices:`` block (``A:22.3`` lines) from the question text."""

    match = _CHOICES_BLOCK.search(question)
    if match is None:
        return question.strip(), ()
    choices: list[str] = []
    for line in match.group(1).splitlines():
        item = _CHOICE_LINE.match(line)
        if item:
            choices.append(item.group(2))
    return question[: match.start()].strip(), tuple(choices)


def _json_array_records(path: Path) -> Iterator[Record]:
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise FormatError(f"invalid JSON: {exc.args[0]}", path=str(path)) from None
    if not isinstance(payload, list):
        raise FormatError("expected a JSON array of problems", path=str(path))
    for index, record in enumerate(payload, start=1):
        yield index, record


def load_mathverse(path: Path, root: Path, tag: str, strict: bool) -> list[Problem]:
    """``testmini.json``: a list with ``question_type`` multi-choice or free-form; ``line`` is the item index."""

    def build(record: Mapping[str, Any], line: int | None) -> Problem:
        where = {"path": str(path), "line": line}
        kind = parse_kind(_require(record, "question_type", **where), **where)
        question, choices = split_choices(str(_require(record, "question", **where)))
        if kind is TaskKind.MULTIPLE_CHOICE and len(choices) < 2:
            raise FormatError("multiple-choice item without a parseable Choices block", **where)
        metadata = record.get("metadata") or {}
        meta = {"problem_version": record.get("problem_version"), "problem_index": record.get("problem_index")}
        meta.update({key: metadata[key] for key in ("subject", "subfield", "source") if key in metadata})
        return Problem(
            id=str(_require(record, "sample_index", **where)),
            dataset=tag,
            question=question,
            kind=kind,
            answer=str(_require(record, "answer", **where)).strip(),
            image=record.get("image"),
            choices=choices if kind is TaskKind.MULTIPLE_CHOICE else (),
            meta={key: value for key, value in meta.items() if value is not None},
            root=str(root),
        )

    return _collect(_json_array_records(path), build, path=path, strict=strict)


ADAPTERS: dict[str, Adapter] = {
    "generic_jsonl": load_generic_jsonl,
    "geometry3k": load_geometry3k,
    "mathverse": load_mathverse,
}


def load_problems(
    path: str | Path,
    format_id: str = "generic_jsonl",
    *,
    data_root: str | Path | None = None,
    tag: str | None = None,
    strict: bool = False,
    manifest: DatasetManifest | None = None,
) -> list[Problem]:
    """Load canonical problems, ordered by natural id order."""

    adapter = ADAPTERS.get(format_id)
    if adapter is None:
        raise ConfigError(f"unknown dataset format '{format_id}' (known: {', '.join(sorted(ADAPTERS))})")
    source = Path(path)
    if not source.exists():
        raise DataError(f"dataset path {source} does not exist")
    root = Path(data_root) if data_root else (source if source.is_dir() else source.parent)
    tag = tag or (manifest.tag if manifest else None) or (source.stem if source.is_file() else source.name)
    problems = adapter(source, root, tag, strict)
    LOGGER.info("Loaded %d problems from %s (%s)", len(problems), source, format_id)
    if manifest is not None:
        manifest.check(problems, strict=strict)
    return problems


def validate_problem(problem: Problem) -> ValidationReport:
    report = ValidationReport()
    if not problem.question.strip():
        report.error("empty-question", f"problem {problem.id} has no question text")
    if problem.is_multiple_choice:
        if len(problem.choices) < 2:
            report.error("too-few-choices", f"problem {problem.id} has {len(problem.choices)} choice(s); need at least 2")
        if problem.gold_index is None:
            report.error(
                "gold-out-of-range",
                f"gold answer {problem.answer!r} is not one of {', '.join(problem.letters) or 'no letters'}",
            )
    elif not problem.answer.strip():
        report.error("empty-answer", f"free-form problem {problem.id} has an empty gold answer")
    path = problem.image_path
    if path is None:
        report.warning("no-image", f"problem {problem.id} has no image reference")
    elif not path.exists():
        report.warning("missing-image", f"image {path} not found")
    return report
