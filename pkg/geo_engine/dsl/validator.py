"""Registry validation of predicate programs."""

from __future__ import annotations

import logging
import re

from ..diagnostics import ValidationReport
from .ast import LineName, Predicate, PredicateProgram, Word
from .registry import PredicateRegistry, default_registry

LOGGER = logging.getLogger(__name__)

_COMPOUND_POINT = re.compile(r"[A-Z]{2,}")


def _check_node(node: Predicate, registry: PredicateRegistry, report: ValidationReport, index: int, line: int) -> None:
    entry = registry.get(node.head)
    if entry is None:
        report.error("unknown-head", f"'{node.head}' is not a registered predicate", index=index, line=line)
    elif not entry.arity.admits(len(node.args)):
        example = f" (e.g. {entry.forms[0]})" if entry.forms else ""
        report.error(
            "arity",
            f"{node.head} takes {entry.arity.describe()} arguments{example}, got {len(node.args)}",
            index=index,
            line=line,
        )
    for arg in node.args:
        if isinstance(arg, LineName) and arg.name != arg.name.lower():
            report.warning(
                "line-name-case", f"line name '{arg.name}' in {node} is not lowercase", index=index, line=line
            )
        elif isinstance(arg, Word) and _COMPOUND_POINT.fullmatch(arg.text):
            report.warning(
                "compound-point",
                f"'{arg.text}' in {node} looks like several points; list them as separate arguments",
                index=index,
                line=line,
            )


def validate(program: PredicateProgram, registry: PredicateRegistry | None = None) -> ValidationReport:
    """Check heads and arities against the registry; nested predicates included.

    Naming-convention slips and repeated predicates are warnings only.
    """

    registry = registry or default_registry()
    report = ValidationReport()
    first_seen: dict[Predicate, int] = {}
    for index, predicate in enumerate(program.predicates):
        line = program.line_of(index)
        for node in predicate.walk():
            _check_node(node, registry, report, index, line)
        if predicate in first_seen:
            report.warning(
                "duplicate", f"{predicate} repeats line {first_seen[predicate]}", index=index, line=line
            )
        else:
            first_seen[predicate] = line
    LOGGER.debug("Validated %d predicates: %d errors, %d warnings", len(program), len(report.errors), len(report.warnings))
    return report
