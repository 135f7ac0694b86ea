"""Formal geometric predicate language: parse, validate, serialize, render."""

from .ast import (
    LineName,
    Nested,
    Number,
    NumericLabel,
    PointRef,
    Predicate,
    PredicateProgram,
    Term,
    Variable,
    Word,
)
from .parser import MAX_DEPTH, SkippedLine, normalize_line, parse_predicate, parse_program
from .registry import AritySpec, Category, PredicateRegistry, RegistryEntry, default_registry, load_registry
from .render import DescriptionRenderer, render_description
from .serializer import check_canonical, serialize, strip_question_predicates
from .symbols import SymbolTable, symbols
from .validator import validate

__all__ = [
    "AritySpec",
    "Category",
    "DescriptionRenderer",
    "LineName",
    "MAX_DEPTH",
    "Nested",
    "Number",
    "NumericLabel",
    "PointRef",
    "Predicate",
    "PredicateProgram",
    "PredicateRegistry",
    "RegistryEntry",
    "SkippedLine",
    "SymbolTable",
    "Term",
    "Variable",
    "Word",
    "check_canonical",
    "default_registry",
    "load_registry",
    "normalize_line",
    "parse_predicate",
    "parse_program",
    "render_description",
    "serialize",
    "strip_question_predicates",
    "symbols",
    "validate",
]
