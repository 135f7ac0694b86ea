"""Aggregate verdicts into accuracy reports and diff reports against each other."""

from __future__ import annotations

import csv
import hashlib
import io
import logging
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Any, Iterable, Mapping, Sequence

from ..errors import ProblemSetMismatch
from ..models import Outcome, Problem, TaskKind, Verdict
from .metrics import pass_at_k_estimate

LOGGER = logging.getLogger(__name__)

STRATA = ("multiple-choice", "free-form", "overall")
_CENT = Decimal("0.01")
_TENTH = Decimal("0.1")
_MINUS = "–"


def percent_value(correct: int, total: int) -> Decimal | None:
    if total <= 0:
        return None
    return (Decimal(correct) * 100 / Decimal(total)).quantize(_CENT, rounding=ROUND_HALF_UP)


def format_percent(correct: int, total: int) -> str:
    """``361/601`` renders as ``60.07%``; an empty stratum renders as ``-``."""

    value = percent_value(correct, total)
    return "-" if value is None else f"{value}%"


def format_delta(delta: Decimal | None) -> str:
    """Signed percentage points to one decimal: ``+6.8``, ``–1.3``, ``0.0``."""

    if delta is None:
        return "-"
    rounded = delta.quantize(_TENTH, rounding=ROUND_HALF_UP)
    if rounded == 0:
        return "0.0"
    if rounded > 0:
        return f"+{rounded}"
    return f"{_MINUS}{-rounded}"


def problem_set_digest(problem_ids: Iterable[str]) -> str:
    payload = "\n".join(sorted(set(problem_ids))).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


# --------------------------------------------------------------------- types
@dataclass(slots=True)
class StratumCounts:
    correct: int = 0
    total: int = 0
    first_correct: int = 0
    expected_correct_at_1: float = 0.0

    def add(self, verdict: Verdict) -> None:
        self.total += 1
        self.correct += verdict.pass_at_k
        self.first_correct += verdict.first_attempt
        sampled = verdict.outcomes[: verdict.k]
        if sampled:
            hits = sum(1 for outcome in sampled if outcome is Outcome.CORRECT)
            self.expected_correct_at_1 += pass_at_k_estimate(len(sampled), hits, 1)

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    @property
    def first_attempt_accuracy(self) -> float:
        return self.first_correct / self.total if self.total else 0.0

    @property
    def pass_at_1_estimate(self) -> float:
        """Mean per-attempt success, the unbiased pass@1 over all k samples."""

        return self.expected_correct_at_1 / self.total if self.total else 0.0

    @property
    def percent(self) -> Decimal | None:
        return percent_value(self.correct, self.total)

    def to_dict(self) -> dict[str, Any]:
        return {
            "correct": self.correct,
            "total": self.total,
            "first_correct": self.first_correct,
            "accuracy": round(self.accuracy, 6),
            "first_attempt_accuracy": round(self.first_attempt_accuracy, 6),
            "expected_correct_at_1": self.expected_correct_at_1,
            "pass_at_1_estimate": round(self.pass_at_1_estimate, 6),
            "display": format_percent(self.correct, self.total),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "StratumCounts":
        return cls(
            int(data["correct"]),
            int(data["total"]),
            int(data.get("first_correct", 0)),
            float(data.get("expected_correct_at_1", 0.0)),
        )


@dataclass(slots=True)
class ModeReport:
    overall: StratumCounts = field(default_factory=StratumCounts)
    multiple_choice: StratumCounts = field(default_factory=StratumCounts)
    free_form: StratumCounts = field(default_factory=StratumCounts)
    datasets: dict[str, StratumCounts] = field(default_factory=dict)

    def stratum(self, name: str) -> StratumCounts:
        if name == "overall":
            return self.overall
        if name == "multiple-choice":
            return self.multiple_choice
        if name == "free-form":
            return self.free_form
        if name.startswith("dataset:"):
            return self.datasets.get(name.split(":", 1)[1], StratumCounts())
        raise KeyError(name)

    def strata(self) -> list[str]:
        return [*STRATA, *(f"dataset:{name}" for name in sorted(self.datasets))]

    def to_dict(self) -> dict[str, Any]:
        return {
            "overall": self.overall.to_dict(),
            "multiple-choice": self.multiple_choice.to_dict(),
            "free-form": self.free_form.to_dict(),
            "datasets": {name: counts.to_dict() for name, counts in sorted(self.datasets.items())},
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ModeReport":
        return cls(
            overall=StratumCounts.from_dict(data["overall"]),
            multiple_choice=StratumCounts.from_dict(data["multiple-choice"]),
            free_form=StratumCounts.from_dict(data["free-form"]),
            datasets={name: StratumCounts.from_dict(item) for name, item in (data.get("datasets") or {}).items()},
        )


@dataclass(slots=True)
class Report:
    run_id: str
    k: int
    config_digest: str | None
    problem_set: str
    modes: dict[str, ModeReport] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "k": self.k,
            "config_digest": self.config_digest,
            "problem_set": self.problem_set,
            "modes": {name: mode.to_dict() for name, mode in self.modes.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Report":
        return cls(
            run_id=str(data["run_id"]),
            k=int(data["k"]),
            config_digest=data.get("config_digest"),
            problem_set=str(data["problem_set"]),
            modes={name: ModeReport.from_dict(item) for name, item in (data.get("modes") or {}).items()},
        )

    def _cell(self, mode: str, stratum: str) -> str:
        counts = self.modes[mode].stratum(stratum)
        text = format_percent(counts.correct, counts.total)
        if mode == "multi" and "single" in self.modes and counts.total:
            baseline = self.modes["single"].stratum(stratum)
            if baseline.total:
                text = f"{text} ({format_delta(counts.percent - baseline.percent)})"
        return text

    def to_markdown(self) -> str:
        lines = [
            f"# Run {self.run_id}",
            "",
            f"Pass@{self.k}; config `{(self.config_digest or '-')[:12]}`; problem set `{self.problem_set[:12]}`",
            "",
            "| Mode | Multiple Choice | Free Form | Overall |",
            "| --- | --- | --- | --- |",
        ]
        for mode in self.modes:
            lines.append(f"| {mode} | " + " | ".join(self._cell(mode, stratum) for stratum in STRATA) + " |")
        lines += ["", "First-attempt accuracy:", "", "| Mode | Multiple Choice | Free Form | Overall |", "| --- | --- | --- | --- |"]
        for mode, report in self.modes.items():
            cells = [
                format_percent(report.stratum(stratum).first_correct, report.stratum(stratum).total)
                for stratum in STRATA
            ]
            lines.append(f"| {mode} | " + " | ".join(cells) + " |")
        datasets = sorted({name for report in self.modes.values() for name in report.datasets})
        if len(datasets) > 1:
            lines += ["", "Per dataset:", "", "| Mode | " + " | ".join(datasets) + " |", "| --- |" + " --- |" * len(datasets)]
            for mode in self.modes:
                lines.append(f"| {mode} | " + " | ".join(self._cell(mode, f"dataset:{name}") for name in datasets) + " |")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["run_id", "mode", "stratum", "correct", "total", "first_correct", "percent"])
        for mode, report in self.modes.items():
            for stratum in report.strata():
                counts = report.stratum(stratum)
                writer.writerow(
                    [self.run_id, mode, stratum, counts.correct, counts.total, counts.first_correct,
                     format_percent(counts.correct, counts.total)]
                )
        return buffer.getvalue()


# ---------------------------------------------------------------- aggregation
def aggregate(
    verdicts: Sequence[Verdict],
    problems: Sequence[Problem],
    *,
    run_id: str,
    config_digest: str | None = None,
    k: int = 3,
) -> Report:
    """Fold verdicts into per-mode accuracy strata; accuracy is pass@k over problems."""

    by_id = {problem.id: problem for problem in problems}
    modes: dict[str, ModeReport] = {}
    for verdict in verdicts:
        problem = by_id.get(verdict.problem_id)
        if problem is None:
            LOGGER.warning("Verdict for unknown problem %s ignored", verdict.problem_id)
            continue
        report = modes.setdefault(verdict.mode, ModeReport())
        report.overall.add(verdict)
        if problem.kind is TaskKind.MULTIPLE_CHOICE:
            report.multiple_choice.add(verdict)
        else:
            report.free_form.add(verdict)
        report.datasets.setdefault(problem.dataset, StratumCounts()).add(verdict)
    ordered = {name: modes[name] for name in sorted(modes, key=lambda name: (name != "single", name))}
    return Report(
        run_id=run_id,
        k=k,
        config_digest=config_digest,
        problem_set=problem_set_digest(by_id),
        modes=ordered,
    )


# ------------------------------------------------------------------- deltas
@dataclass(slots=True, frozen=True)
class DeltaRow:
    label: str
    stratum: str
    percent_a: Decimal | None
    percent_b: Decimal | None

    @property
    def delta(self) -> Decimal | None:
        if self.percent_a is None or self.percent_b is None:
            return None
        return self.percent_a - self.percent_b

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "stratum": self.stratum,
            "a": None if self.percent_a is None else str(self.percent_a),
            "b": None if self.percent_b is None else str(self.percent_b),
            "delta": None if self.delta is None else str(self.delta),
            "display": format_delta(self.delta),
        }


@dataclass(slots=True)
class DeltaTable:
    run_a: str
    run_b: str
    rows: list[DeltaRow] = field(default_factory=list)

    def row(self, label: str, stratum: str) -> DeltaRow:
        for row in self.rows:
            if row.label == label and row.stratum == stratum:
                return row
        raise KeyError((label, stratum))

    def to_dict(self) -> dict[str, Any]:
        return {"run_a": self.run_a, "run_b": self.run_b, "rows": [row.to_dict() for row in self.rows]}

    def to_markdown(self) -> str:
        lines = [
            f"| Modes ({self.run_a} vs {self.run_b}) | Stratum | A | B | Delta |",
            "| --- | --- | --- | --- | --- |",
        ]
        for row in self.rows:
            a = "-" if row.percent_a is None else f"{row.percent_a}%"
            b = "-" if row.percent_b is None else f"{row.percent_b}%"
            lines.append(f"| {row.label} | {row.stratum} | {a} | {b} | {format_delta(row.delta)} |")
        return "\n".join(lines) + "\n"


def _pairs(report_a: Report, report_b: Report, mode_a: str | None, mode_b: str | None) -> list[tuple[str, str]]:
    if mode_a or mode_b:
        return [(mode_a or mode_b, mode_b or mode_a)]
    common = [name for name in report_a.modes if name in report_b.modes]
    if common:
        return [(name, name) for name in common]
    if len(report_a.modes) == 1 and len(report_b.modes) == 1:
        return [(next(iter(report_a.modes)), next(iter(report_b.modes)))]
    raise ValueError("reports share no mode; pass mode_a and mode_b explicitly")


def compare_runs(
    report_a: Report,
    report_b: Report,
    *,
    mode_a: str | None = None,
    mode_b: str | None = None,
) -> DeltaTable:
    """Percentage-point deltas ``a - b`` per stratum for each paired mode."""

    if report_a.problem_set != report_b.problem_set:
        raise ProblemSetMismatch(
            f"runs {report_a.run_id} and {report_b.run_id} were scored on different problem sets"
        )
    table = DeltaTable(run_a=report_a.run_id, run_b=report_b.run_id)
    for left, right in _pairs(report_a, report_b, mode_a, mode_b):
        if left not in report_a.modes or right not in report_b.modes:
            raise ValueError(f"mode '{left}' or '{right}' missing from the compared reports")
        a, b = report_a.modes[left], report_b.modes[right]
        label = left if left == right else f"{left} vs {right}"
        for stratum in a.strata():
            table.rows.append(DeltaRow(label, stratum, a.stratum(stratum).percent, b.stratum(stratum).percent))
    return table
