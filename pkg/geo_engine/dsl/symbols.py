"""Symbol inventory of a predicate program."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .ast import LineName, Number, NumericLabel, PointRef, PredicateProgram, Variable, Word


@dataclass(slots=True)
class SymbolTable:
    """Each distinct symbol mapped to the heads of the predicates that reference it."""

    points: dict[str, set[str]] = field(default_factory=dict)
    lines: dict[str, set[str]] = field(default_factory=dict)
    labels: dict[str, set[str]] = field(default_factory=dict)
    variables: dict[str, set[str]] = field(default_factory=dict)
    numbers: dict[str, set[str]] = field(default_factory=dict)
    words: dict[str, set[str]] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            kind: {name: sorted(heads) for name, heads in sorted(getattr(self, kind).items())}
            for kind in ("points", "lines", "labels", "variables", "numbers", "words")
        }


def symbols(program: PredicateProgram) -> SymbolTable:
    table = SymbolTable()
    point_refs: dict[str, set[str]] = {}
    for predicate in program:
        for node in predicate.walk():
            for arg in node.args:
                if isinstance(arg, PointRef):
                    bucket = point_refs
                    name = arg.name
                elif isinstance(arg, LineName):
                    bucket, name = table.lines, arg.name
                elif isinstance(arg, NumericLabel):
                    bucket, name = table.labels, arg.label
                elif isinstance(arg, Variable):
                    bucket, name = table.variables, arg.name
                elif isinstance(arg, Number):
                    bucket, name = table.numbers, arg.text
                elif isinstance(arg, Word):
                    bucket, name = table.words, arg.text
                else:
                    continue
                bucket.setdefault(name, set()).add(node.head)
    # A capital letter declared as a line name, e.g. Line(D), is a line everywhere.
    for name, heads in point_refs.items():
        target = table.lines if name in table.lines else table.points
        target.setdefault(name, set()).update(heads)
    return table
