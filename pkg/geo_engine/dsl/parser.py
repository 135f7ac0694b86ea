"""Parsing of predicate expressions and predicate programs.

A single expression is parsed with a small lark LALR grammar. Programs are
parsed line by line: each line is normalised (bullets, emphasis, quotes,
degree marks, trailing punctuation, infix ``=``) before it is handed to the
expression parser. Lines that do not parse are returned as skipped.
"""

from __future__ import annotations

import functools
import logging
import re
from dataclasses import dataclass
from typing import Any, Union

from lark import Lark, Token, Transformer
from lark.exceptions import LarkError

from ..errors import PredicateSyntaxError
from .ast import LineName, Nested, Number, NumericLabel, PointRef, Predicate, PredicateProgram, Term, Variable, Word
from .registry import Category, PredicateRegistry, default_registry

LOGGER = logging.getLogger(__name__)

MAX_DEPTH = 16

_GRAMMAR = r"""
    start: predicate
    predicate: IDENT "(" [arguments] ")"
    arguments: argument ("," argument)*
    ?argument: predicate
             | IDENT    -> ident
             | VARIABLE -> variable
             | NUMBER   -> number

    IDENT: /[A-Za-z][A-Za-z0-9_]*'*/
    VARIABLE: /\$[0-9]*/
    NUMBER: /[+-]?(\d+(\.\d*)?|\.\d+)/

    %import common.WS
    %ignore WS
"""

_POINT_NAME = re.compile(r"[A-Z][0-9]*'*")
_INTEGER = re.compile(r"[0-9]+")


@functools.lru_cache(maxsize=1)
def _lark() -> Lark:
    return Lark(_GRAMMAR, parser="lalr", maybe_placeholders=True)


# ---------------------------------------------------------------- raw tree
@dataclass(slots=True)
class _RawPredicate:
    head: str
    args: list[Union["_RawPredicate", tuple[str, str]]]


class _RawBuilder(Transformer):
    def start(self, items: list[Any]) -> _RawPredicate:
        return items[0]

    def predicate(self, items: list[Any]) -> _RawPredicate:
        head, arguments = items
        return _RawPredicate(head=str(head), args=list(arguments or ()))

    def arguments(self, items: list[Any]) -> list[Any]:
        return list(items)

    def ident(self, items: list[Token]) -> tuple[str, str]:
        return ("ident", str(items[0]))

    def variable(self, items: list[Token]) -> tuple[str, str]:
        return ("variable", str(items[0]))

    def number(self, items: list[Token]) -> tuple[str, str]:
        return ("number", str(items[0]))


def _classify(raw: _RawPredicate, registry: PredicateRegistry) -> Predicate:
    is_shape = registry.category_of(raw.head) is Category.SHAPE
    single_line = raw.head == "Line" and len(raw.args) == 1
    terms: list[Term] = []
    for arg in raw.args:
        if isinstance(arg, _RawPredicate):
            terms.append(Nested(_classify(arg, registry)))
            continue
        kind, text = arg
        if kind == "variable":
            terms.append(Variable(text))
        elif kind == "number":
            terms.append(NumericLabel(text) if is_shape and _INTEGER.fullmatch(text) else Number(text))
        elif single_line:
            terms.append(LineName(text))
        elif _POINT_NAME.fullmatch(text):
            terms.append(PointRef(text))
        else:
            terms.append(Word(text))
    return Predicate(head=raw.head, args=tuple(terms))


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8", "surrogatepass"))


def _check_parens(text: str) -> None:
    depth = 0
    for index, char in enumerate(text):
        if char == "(":
            depth += 1
            if depth > MAX_DEPTH:
                raise PredicateSyntaxError(
                    f"nesting deeper than {MAX_DEPTH}", offset=_byte_offset(text, index), text=text
                )
        elif char == ")":
            depth -= 1
            if depth < 0:
                raise PredicateSyntaxError("unbalanced ')'", offset=_byte_offset(text, index), text=text)
    if depth:
        raise PredicateSyntaxError("unbalanced '('", offset=_byte_offset(text, len(text)), text=text)


def parse_predicate(text: str, *, registry: PredicateRegistry | None = None) -> Predicate:
    """Parse one expression such as ``Parallel(Line(D), Line(H))``."""

    if not text.strip():
        raise PredicateSyntaxError("empty expression", offset=0, text=text)
    _check_parens(text)
    try:
        tree = _lark().parse(text)
        raw = _RawBuilder().transform(tree)
    except LarkError as exc:
        position = getattr(exc, "pos_in_stream", None)
        if position is None or position < 0:
            position = len(text)
        raise PredicateSyntaxError(
            f"unexpected input ({type(exc).__name__})", offset=_byte_offset(text, position), text=text
        ) from None
    return _classify(raw, registry or default_registry())


# --------------------------------------------------------- line normaliser
_FENCE = re.compile(r"^\s*(```|~~~)")
_BULLET = re.compile(r"^(?:[-*•+]|\d+[.)])\s+")
_EMPHASIS = re.compile(r"[*`]")
_DEGREE = re.compile(r"\s*(?:°|\^\s*\{\s*\\circ\s*\}|\^\s*\\circ|\\circ)")
_QUOTES = "\"'“”‘’"


def normalize_line(line: str) -> str:
    """Strip the decoration models put around predicate lines."""

    text = line.strip()
    text = _BULLET.sub("", text, count=1)
    text = _EMPHASIS.sub("", text).strip()
    if text and text[0] in _QUOTES:
        text = text.strip(_QUOTES).strip()
    text = text.rstrip(",;.").strip()
    text = _DEGREE.sub("", text)
    return _rewrite_infix_equals(text)


def _rewrite_infix_equals(text: str) -> str:
    depth = 0
    split_at: list[int] = []
    for index, char in enumerate(text):
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
        elif char == "=" and depth == 0:
            split_at.append(index)
    if len(split_at) != 1:
        return text
    lhs = text[: split_at[0]].strip()
    rhs = text[split_at[0] + 1 :].strip()
    # Bare ``x = 5`` chatter from reasoning text is left alone.
    if not lhs or not rhs or ("(" not in lhs and "(" not in rhs):
        return text
    return f"Equals({lhs},{rhs})"


@dataclass(slots=True, frozen=True)
class SkippedLine:
    line: int
    text: str
    reason: str

    def to_dict(self) -> dict[str, Any]:
        return {"line": self.line, "text": self.text, "reason": self.reason}


def parse_program(
    text: str | bytes,
    *,
    strict: bool = False,
    registry: PredicateRegistry | None = None,
) -> tuple[PredicateProgram, list[SkippedLine]]:
    """Parse one predicate per line.

    Lenient mode never raises: anything that is not a predicate comes back in
    the skipped list. With ``strict=True`` the first non-blank line that does
    not parse raises ``PredicateSyntaxError`` carrying its line number.
    """

    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    registry = registry or default_registry()
    predicates: list[Predicate] = []
    lines: list[int] = []
    skipped: list[SkippedLine] = []
    for number, raw_line in enumerate(text.splitlines(), start=1):
        if not raw_line.strip():
            skipped.append(SkippedLine(number, raw_line, "blank"))
            continue
        if _FENCE.match(raw_line):
            if strict:
                raise PredicateSyntaxError("markdown fence", offset=0, line=number, text=raw_line)
            skipped.append(SkippedLine(number, raw_line, "fence"))
            continue
        candidate = normalize_line(raw_line)
        try:
            predicate = parse_predicate(candidate, registry=registry)
        except PredicateSyntaxError as exc:
            if strict:
                raise PredicateSyntaxError(exc.reason, offset=exc.offset, line=number, text=raw_line) from None
            skipped.append(SkippedLine(number, raw_line, "not a predicate"))
            continue
        except RecursionError:
            if strict:
                raise PredicateSyntaxError("expression too deep", offset=0, line=number, text=raw_line) from None
            skipped.append(SkippedLine(number, raw_line, "not a predicate"))
            continue
        predicates.append(predicate)
        lines.append(number)
    LOGGER.debug("Parsed %d predicates, skipped %d lines", len(predicates), len(skipped))
    return PredicateProgram(predicates=tuple(predicates), source_lines=tuple(lines)), skipped
