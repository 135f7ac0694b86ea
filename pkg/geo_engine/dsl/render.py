"""Deterministic English rendering of predicate programs.

One sentence per top-level predicate; nested predicates become noun phrases.
Used as the offline description path of the alignment protocol.
"""

from __future__ import annotations

import re

from ..errors import RenderError
from .ast import LineName, Nested, NumericLabel, PointRef, Predicate, PredicateProgram, Term
from .registry import Category, PredicateRegistry, default_registry

_CAMEL = re.compile(r"(?<!^)(?=[A-Z])")

_RELATION_VERBS = {
    "PointLiesOnLine": "lies on",
    "PointLiesOnCircle": "lies on",
    "Parallel": "is parallel to",
    "Perpendicular": "is perpendicular to",
    "BisectsAngle": "bisects",
    "Congruent": "is congruent to",
    "Similar": "is similar to",
    "Tangent": "is tangent to",
    "Secant": "is a secant of",
    "CircumscribedTo": "is circumscribed about",
    "InscribedIn": "is inscribed in",
}

_UNARY_PHRASES = {
    "RightAngle": "is a right angle",
    "Right": "is right",
}

_NUMERIC_PREFIX = {
    "SinOf": "the sine of",
    "CosOf": "the cosine of",
    "TanOf": "the tangent of",
    "CotOf": "the cotangent of",
    "HalfOf": "half of",
    "SquareOf": "the square of",
    "SqrtOf": "the square root of",
}

_NUMERIC_LISTS = {
    "SumOf": "the sum of",
    "AverageOf": "the average of",
}

_NUMERIC_INFIX = {
    "Add": "plus",
    "Mul": "times",
    "Sub": "minus",
    "Div": "divided by",
    "Pow": "to the power of",
}


def _words(name: str) -> str:
    return _CAMEL.sub(" ", name).lower()


def _article(noun: str) -> str:
    return "an" if noun[:1] in "aeiou" else "a"


def _listing(items: list[str]) -> str:
    if len(items) <= 1:
        return "".join(items)
    return ", ".join(items[:-1]) + " and " + items[-1]


class DescriptionRenderer:
    def __init__(self, registry: PredicateRegistry | None = None) -> None:
        self.registry = registry or default_registry()

    # ---- terms and noun phrases
    def term(self, term: Term) -> str:
        if isinstance(term, Nested):
            return self.noun(term.predicate)
        if isinstance(term, LineName):
            return f"line {term.name}"
        return str(term)

    def _category(self, predicate: Predicate) -> Category:
        category = self.registry.category_of(predicate.head)
        if category is None:
            raise RenderError(f"no rendering for unregistered predicate '{predicate.head}'")
        return category

    def _shape(self, predicate: Predicate) -> str:
        kind = _words(predicate.head)
        args = predicate.args
        if not args:
            return f"{_article(kind)} {kind}"
        if len(args) == 1:
            return f"{kind} {args[0]}"
        if all(isinstance(arg, PointRef) for arg in args):
            return f"{kind} {''.join(str(arg) for arg in args)}"
        if all(isinstance(arg, NumericLabel) for arg in args):
            return f"{kind} {_listing([str(arg) for arg in args])}"
        return f"{kind} {_listing([self.term(arg) for arg in args])}"

    def _attribute(self, predicate: Predicate) -> str:
        name = _words(predicate.head[:-2] if predicate.head.endswith("Of") else predicate.head)
        operands = [self.term(arg) for arg in predicate.args]
        if predicate.head in ("IntersectionOf", "ScaleFactorOf"):
            return f"the {name} of {_listing(operands)}"
        if len(operands) == 2:
            return f"the {name} of {operands[0]}, which is {operands[1]}"
        return f"the {name} of {operands[0]}"

    def _numeric(self, predicate: Predicate) -> str:
        head = predicate.head
        operands = [self.term(arg) for arg in predicate.args]
        if head in _NUMERIC_PREFIX:
            return f"{_NUMERIC_PREFIX[head]} {operands[0]}"
        if head in _NUMERIC_LISTS:
            return f"{_NUMERIC_LISTS[head]} {_listing(operands)}"
        if head in _NUMERIC_INFIX:
            return f" {_NUMERIC_INFIX[head]} ".join(operands)
        if head == "RatioOf":
            if len(operands) == 1:
                return f"the ratio {operands[0]}"
            return f"the ratio of {operands[0]} to {operands[1]}"
        if head == "UseTheorem":
            return f"the {operands[0].replace('_', ' ')} theorem"
        if head == "Equals":
            return f"{operands[0]} equals {operands[1]}"
        return f"{_words(head)} of {_listing(operands)}"

    def noun(self, predicate: Predicate) -> str:
        category = self._category(predicate)
        if category is Category.SHAPE:
            return self._shape(predicate)
        if category is Category.GEOMETRIC_ATTRIBUTE:
            return self._attribute(predicate)
        if category is Category.NUMERIC_RELATION:
            return self._numeric(predicate)
        return self.clause(predicate)

    # ---- sentences
    def clause(self, predicate: Predicate) -> str:
        category = self._category(predicate)
        head = predicate.head
        operands = [self.term(arg) for arg in predicate.args]
        if category is Category.SHAPE:
            return f"there is {self._shape(predicate)}"
        if category is Category.UNARY_ATTRIBUTE:
            return f"{operands[0]} {_UNARY_PHRASES.get(head, 'is ' + _words(head))}"
        if category is Category.GEOMETRIC_ATTRIBUTE:
            if len(operands) == 2 and head not in ("IntersectionOf", "ScaleFactorOf"):
                if head == "MeasureOf":
                    return f"{operands[0]} measures {operands[1]} degrees"
                return f"{self._attribute(Predicate(head, predicate.args[:1]))} is {operands[1]}"
            return f"the figure involves {self._attribute(predicate)}"
        if category is Category.BINARY_RELATION:
            if head == "IntersectAt":
                return f"{_listing(operands[:-1])} intersect at {operands[-1]}"
            return f"{operands[0]} {_RELATION_VERBS.get(head, _words(head))} {operands[1]}"
        if category is Category.IS_X_OF_RELATION:
            return f"{operands[0]} is the {_words(head[2:-2])} of {operands[1]}"
        if head == "Equals":
            return self._numeric(predicate)
        if head == "UseTheorem":
            return f"the solution uses {self._numeric(predicate)}"
        return f"the figure involves {self._numeric(predicate)}"

    def sentence(self, predicate: Predicate) -> str:
        try:
            text = self.clause(predicate)
        except IndexError:
            raise RenderError(f"{predicate} has too few arguments to render") from None
        return text[:1].upper() + text[1:] + "."

    def render(self, program: PredicateProgram) -> str:
        return " ".join(self.sentence(predicate) for predicate in program)


def render_description(program: PredicateProgram, registry: PredicateRegistry | None = None) -> str:
    return DescriptionRenderer(registry).render(program)
