"""Numeric valuation of answer text: decimals, fractions, radicals, multiples of pi."""

from __future__ import annotations

import functools
import math
import re

from lark import Lark, Transformer
from lark.exceptions import LarkError

_GRAMMAR = r"""
    ?start: sum
    ?sum: product
        | sum "+" product   -> add
        | sum "-" product   -> sub
    ?product: implicit
        | product "*" implicit -> mul
        | product "/" implicit -> div
    ?implicit: unary
        | implicit factor   -> mul
    ?unary: power
        | "-" unary         -> neg
        | "+" unary
    ?power: atom
        | atom "^" unary    -> pow
    ?atom: NUMBER           -> number
        | factor
    ?factor: "pi"           -> pi
        | "sqrt" "(" sum ")" -> sqrt
        | "frac" "(" sum ")" "(" sum ")" -> div
        | "(" sum ")"

    NUMBER: /\d+(\.\d*)?|\.\d+/
    %import common.WS
    %ignore WS
"""

_KEEP_WORDS = {"pi", "sqrt", "frac"}
_REPLACEMENTS = (
    (re.compile(r"\\(?:left|right|displaystyle)"), ""),
    (re.compile(r"\\[,;:!]|~"), " "),
    (re.compile(r"\\[dt]frac"), r"\\frac"),
    (re.compile(r"\\(?:text|mathrm|mbox|operatorname)\s*\{[^{}]*\}"), " "),
    (re.compile(r"\^\s*\{?\s*\\circ\s*\}?|°|\\circ|\\degree"), " "),
    (re.compile(r"\\(?:cdot|times)|×|·"), "*"),
    (re.compile(r"\\div|÷"), "/"),
    (re.compile(r"π|\\pi"), " pi "),
    (re.compile(r"√\s*(\d+(?:\.\d+)?)"), r" sqrt(\1)"),
    (re.compile(r"√"), " sqrt"),
    (re.compile(r"\\"), " "),
    (re.compile(r"[{\[]"), "("),
    (re.compile(r"[}\]]"), ")"),
    (re.compile(r"(?<![A-Za-z])sqrt\s*(\d+(?:\.\d+)?)"), r"sqrt(\1)"),
    (re.compile(r"(?<=\d),(?=\d{3}(?!\d))"), ""),
    (re.compile(r"[−–]"), "-"),
)
_RELATION = re.compile(r"=|≈|≃|\bapprox\b|\\approx")
_UNIT_WORD = re.compile(r"[A-Za-z]+(?:\s*\^\s*\(?\d\)?|[²³])?")
_LAST_NUMBER = re.compile(r"[-+]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?|[-+]?\.\d+")


class _Evaluate(Transformer):
    def number(self, items):
        return float(items[0])

    def pi(self, _items):
        return math.pi

    def sqrt(self, items):
        return math.sqrt(items[0])

    def add(self, items):
        return items[0] + items[1]

    def sub(self, items):
        return items[0] - items[1]

    def mul(self, items):
        return items[0] * items[1]

    def div(self, items):
        return items[0] / items[1]

    def neg(self, items):
        return -items[0]

    def pow(self, items):
        return items[0] ** items[1]


@functools.lru_cache(maxsize=1)
def _lark() -> Lark:
    return Lark(_GRAMMAR, parser="lalr")


def _drop_unit_words(text: str) -> str:
    return _UNIT_WORD.sub(lambda match: match.group(0) if match.group(0) in _KEEP_WORDS else " ", text)


def parse_numeric(text: str | None) -> float | None:
    """Value of an answer expression, or None when it is not a single number.

    ``22.34 m``, ``71 degrees``, ``1,234``, ``\\frac{3}{4}``, ``3/4``,
    ``2\\sqrt{3}``, ``4π`` and ``d = 22.3`` all evaluate; anything else is None.
    """

    if not text:
        return None
    candidate = text.replace("$", " ")
    candidate = _RELATION.split(candidate)[-1]
    for pattern, replacement in _REPLACEMENTS:
        candidate = pattern.sub(replacement, candidate)
    candidate = _drop_unit_words(candidate).strip().rstrip(".").strip()
    if not candidate:
        return None
    try:
        value = _Evaluate().transform(_lark().parse(candidate))
    except (LarkError, ArithmeticError, ValueError, TypeError):
        return None
    if isinstance(value, complex) or not math.isfinite(value):
        return None
    return float(value)


def last_number(text: str) -> str | None:
    """Text of the last plain number in ``text``."""

    matches = _LAST_NUMBER.findall(text or "")
    return matches[-1] if matches else None
