"""AST nodes for the geometric predicate language."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union


@dataclass(slots=True, frozen=True)
class PointRef:
    """Capital-letter point name such as ``A`` or ``B1``."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(slots=True, frozen=True)
class LineName:
    """Name of a line not defined by points, e.g. ``m`` in ``Line(m)``."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(slots=True, frozen=True)
class NumericLabel:
    """Integer label of an unnamed shape, e.g. ``1`` in ``Angle(1)``."""

    label: str

    def __str__(self) -> str:
        return self.label


@dataclass(slots=True, frozen=True)
class Variable:
    """Generic variable: ``$``, ``$1``, ``$2`` ..."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(slots=True, frozen=True)
class Number:
    """Numeric literal; ``text`` keeps the source spelling so serialization is lossless."""

    text: str

    @property
    def value(self) -> float:
        return float(self.text)

    def __str__(self) -> str:
        return self.text


@dataclass(slots=True, frozen=True)
class Word:
    """Free identifier such as ``base``, ``height``, ``x`` or ``A_B_C``."""

    text: str

    def __str__(self) -> str:
        return self.text


@dataclass(slots=True, frozen=True)
class Nested:
    predicate: "Predicate"

    def __str__(self) -> str:
        return str(self.predicate)


Term = Union[PointRef, LineName, NumericLabel, Variable, Number, Word, Nested]


@dataclass(slots=True, frozen=True)
class Predicate:
    head: str
    args: tuple[Term, ...] = ()

    def __str__(self) -> str:
        return f"{self.head}({','.join(str(arg) for arg in self.args)})"

    def walk(self) -> Iterator["Predicate"]:
        """Yield this predicate and every nested predicate, depth first."""

        yield self
        for arg in self.args:
            if isinstance(arg, Nested):
                yield from arg.predicate.walk()

    def depth(self) -> int:
        nested = [arg.predicate.depth() for arg in self.args if isinstance(arg, Nested)]
        return 1 + max(nested, default=0)


@dataclass(slots=True, frozen=True)
class PredicateProgram:
    """Ordered predicates, one per source line.

    ``source_lines[i]`` is the 1-based origin line of ``predicates[i]``; it is
    bookkeeping only and does not take part in equality.
    """

    predicates: tuple[Predicate, ...] = ()
    source_lines: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if not self.source_lines and self.predicates:
            object.__setattr__(self, "source_lines", tuple(range(1, len(self.predicates) + 1)))
        if len(self.source_lines) != len(self.predicates):
            raise ValueError("source_lines must align with predicates")

    def __len__(self) -> int:
        return len(self.predicates)

    def __iter__(self) -> Iterator[Predicate]:
        return iter(self.predicates)

    def __bool__(self) -> bool:
        return bool(self.predicates)

    def line_of(self, index: int) -> int:
        return self.source_lines[index]

    def filter(self, keep) -> "PredicateProgram":
        pairs = [(pred, line) for pred, line in zip(self.predicates, self.source_lines) if keep(pred)]
        return PredicateProgram(
            predicates=tuple(pred for pred, _ in pairs),
            source_lines=tuple(line for _, line in pairs),
        )

    def deduplicate(self) -> "PredicateProgram":
        seen: set[Predicate] = set()

        def first_time(pred: Predicate) -> bool:
            if pred in seen:
                return False
            seen.add(pred)
            return True

        return self.filter(first_time)
