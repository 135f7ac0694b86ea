"""Recover structured artifacts (predicate programs, answers) from raw model text.

Both extractors are total: they return an ``ExtractionFailure`` value instead of
raising, whatever the input.
"""

from __future__ import annotations

import logging
import re

from ..dsl import PredicateProgram, PredicateRegistry, parse_program, strip_question_predicates
from ..evaluation.metrics import match_choice
from ..evaluation.numeric import last_number, parse_numeric
from ..models import Answer, ExtractionFailure, Problem

LOGGER = logging.getLogger(__name__)

NO_PREDICATES_FOUND = "NoPredicatesFound"
NO_ANSWER_FOUND = "NoAnswerFound"

_HEADER = re.compile(r"predicates?", re.IGNORECASE)
_HEADER_MAX_CHARS = 80
_NEUTRAL = {"blank", "fence"}

_FINAL_ANSWER = re.compile(r"final\s+answer\s*(?:is)?\s*[:：]?\s*(.*)$", re.IGNORECASE)
_ANSWER_IS = re.compile(r"(?i:answer)\s*(?:(?i:is)\s*[:：]?|[:：])\s*(.*)$")
_LEADING_LETTER = re.compile(r"^(?:(?i:option|choice)\s+)?\(?([A-Z])\)?(?![A-Za-z0-9'])")
_STANDALONE_LETTER = re.compile(r"^\W*(?:(?i:option|choice)\s+)?\(?([A-Z])\)?\W*$")
_BOXED = re.compile(r"\\boxed\s*\{")
_DECORATION = re.compile(r"[*_`$]|\\[()\[\]]")


# ---------------------------------------------------------------- predicates
def _regions(kinds: list[str]) -> list[tuple[int, int]]:
    """Maximal runs of predicate lines; blank and fence lines may sit inside a run."""

    regions: list[tuple[int, int]] = []
    start: int | None = None
    last_predicate: int | None = None
    for index, kind in enumerate(kinds):
        if kind == "predicate":
            if start is None:
                start = index
            last_predicate = index
        elif kind not in _NEUTRAL and start is not None:
            regions.append((start, last_predicate))
            start = None
    if start is not None:
        regions.append((start, last_predicate))
    return regions


def extract_predicate_block(
    raw: str | None, registry: PredicateRegistry | None = None
) -> PredicateProgram | ExtractionFailure:
    """The last block of parseable predicate lines, preferring blocks after a header.

    A header is a short non-predicate line mentioning "predicates". Source line
    numbers in the returned program refer to ``raw``. ``Find`` is stripped.
    """

    if not raw or not raw.strip():
        return ExtractionFailure(NO_PREDICATES_FOUND, "empty response")
    program, skipped = parse_program(raw, registry=registry)
    lines = raw.splitlines()
    kinds = ["text"] * len(lines)
    for item in skipped:
        kinds[item.line - 1] = item.reason if item.reason in _NEUTRAL else "text"
    for number in program.source_lines:
        kinds[number - 1] = "predicate"
    headers = [
        index
        for index, kind in enumerate(kinds)
        if kind == "text" and len(lines[index].strip()) <= _HEADER_MAX_CHARS and _HEADER.search(lines[index])
    ]

    line_to_predicate = dict(zip(program.source_lines, program.predicates))
    candidates: list[PredicateProgram] = []
    after_header: list[PredicateProgram] = []
    for start, end in _regions(kinds):
        numbers = [number for number in range(start + 1, end + 2) if number in line_to_predicate]
        block = strip_question_predicates(
            PredicateProgram(
                predicates=tuple(line_to_predicate[number] for number in numbers),
                source_lines=tuple(numbers),
            )
        )
        if not block:
            continue
        candidates.append(block)
        if headers and headers[0] < start:
            after_header.append(block)
    chosen = (after_header or candidates or [None])[-1]
    if chosen is None:
        return ExtractionFailure(NO_PREDICATES_FOUND, "no parseable predicate lines")
    LOGGER.debug("Extracted %d predicates from lines %d-%d", len(chosen), chosen.source_lines[0], chosen.source_lines[-1])
    return chosen


# ------------------------------------------------------------------- answers
def _clean(text: str) -> str:
    text = _DECORATION.sub("", text)
    boxed = _last_boxed(text)
    if boxed is not None:
        text = boxed
    return text.strip().rstrip(".").strip()


def _last_boxed(text: str) -> str | None:
    """Contents of the last ``\\boxed{...}``, braces balanced."""

    matches = list(_BOXED.finditer(text))
    for match in reversed(matches):
        depth = 1
        for index in range(match.end(), len(text)):
            char = text[index]
            if char == "{":
                depth += 1
            elif char == "}":
                depth -= 1
                if depth == 0:
                    return text[match.end() : index].strip()
    return None


def _final_answer_tail(lines: list[str]) -> str | None:
    """Text after the last "Final Answer" marker, or the next non-empty line."""

    for index in range(len(lines) - 1, -1, -1):
        match = _FINAL_ANSWER.search(lines[index])
        if match is None:
            continue
        tail = _clean(match.group(1))
        if tail:
            return tail
        following = next((line for line in lines[index + 1 :] if line.strip()), None)
        return _clean(following) if following else None
    return None


def _answer_is_tail(lines: list[str]) -> str | None:
    for line in reversed(lines):
        matches = list(_ANSWER_IS.finditer(line))
        if matches:
            tail = _clean(matches[-1].group(1))
            if tail:
                return tail
    return None


def _letter_in(text: str, problem: Problem) -> str | None:
    match = _LEADING_LETTER.match(text)
    if match and match.group(1) in problem.letters:
        return match.group(1)
    return None


def _choice_from_value(text: str | None, problem: Problem, epsilon: float | None) -> str | None:
    if not text:
        return None
    value = parse_numeric(text)
    if value is None:
        return None
    index = match_choice(Answer.numeric(text, value), problem.choices, epsilon)
    return problem.letters[index] if index is not None else None


def _multiple_choice(raw: str, problem: Problem, epsilon: float | None) -> Answer | None:
    lines = raw.splitlines()
    final = _final_answer_tail(lines)
    if final:
        letter = _letter_in(final, problem) or _choice_from_value(final, problem, epsilon)
        if letter:
            return Answer.choice(letter)

    boxed = _last_boxed(raw)
    stated = _answer_is_tail(lines)
    for text in (stated, boxed):
        if text:
            letter = _letter_in(_clean(text), problem) or _choice_from_value(text, problem, epsilon)
            if letter:
                return Answer.choice(letter)

    last_line = next((line for line in reversed(lines) if line.strip()), "")
    trailing = _STANDALONE_LETTER.match(_DECORATION.sub("", last_line))
    if trailing and trailing.group(1) in problem.letters:
        return Answer.choice(trailing.group(1))

    for text in (last_line, last_number(raw)):
        letter = _choice_from_value(text, problem, epsilon)
        if letter:
            return Answer.choice(letter)
    return None


def _free_form(raw: str) -> Answer | None:
    lines = raw.splitlines()
    for text in (_last_boxed(raw), _final_answer_tail(lines), _answer_is_tail(lines)):
        if text:
            text = _clean(text)
        if text:
            return Answer.numeric(text, parse_numeric(text))
    number = last_number(raw)
    if number is not None:
        return Answer.numeric(number, parse_numeric(number))
    return None


def extract_answer(raw: str | None, problem: Problem, *, epsilon: float | None = None) -> Answer | ExtractionFailure:
    """Final answer of a solve response.

    Multiple choice, in order of precedence: a "Final Answer" marker, an
    "answer is" statement or boxed letter, a standalone letter ending the
    response, then the last number matched against the choices. Free form: the
    last boxed expression, a "Final Answer" line, an "answer is" statement,
    then the last number.
    """

    if not raw or not raw.strip():
        return ExtractionFailure(NO_ANSWER_FOUND, "empty response")
    try:
        answer = _multiple_choice(raw, problem, epsilon) if problem.is_multiple_choice else _free_form(raw)
    except (ValueError, IndexError, RecursionError) as exc:
        LOGGER.warning("Answer extraction for %s failed: %s", problem.id, exc)
        answer = None
    if answer is None:
        return ExtractionFailure(NO_ANSWER_FOUND, "no answer marker, option letter or number found")
    return answer
