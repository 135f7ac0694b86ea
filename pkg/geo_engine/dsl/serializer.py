"""Canonical text form of predicate programs."""

from __future__ import annotations

from ..errors import NonCanonicalPredicate, PredicateSyntaxError
from .ast import Predicate, PredicateProgram
from .parser import parse_predicate
from .registry import PredicateRegistry, default_registry

QUESTION_HEAD = "find"


def check_canonical(predicate: Predicate, registry: PredicateRegistry | None = None) -> None:
    """Raise ``NonCanonicalPredicate`` unless ``predicate`` survives a text round trip.

    Term kinds depend on context (``m`` is a ``LineName`` only as the sole
    argument of ``Line``), so trees built by hand can name kinds the parser
    never produces for that position.
    """

    text = str(predicate)
    try:
        reparsed = parse_predicate(text, registry=registry or default_registry())
    except PredicateSyntaxError as exc:
        raise NonCanonicalPredicate(predicate, text) from exc
    if reparsed != predicate:
        raise NonCanonicalPredicate(predicate, reparsed)


def serialize(program: PredicateProgram, *, registry: PredicateRegistry | None = None) -> str:
    """One predicate per line in the exact ``Head(a,b)`` form, no trailing newline."""

    for predicate in program:
        check_canonical(predicate, registry)
    return "\n".join(str(predicate) for predicate in program)


def strip_question_predicates(program: PredicateProgram) -> PredicateProgram:
    """Drop ``Find(...)`` predicates (any case), preserving the order of the rest."""

    return program.filter(lambda predicate: predicate.head.lower() != QUESTION_HEAD)
