"""Answer-matching primitives and the Pass@k metric."""

from __future__ import annotations

import logging
import math
from typing import Sequence

from ..errors import EmptyOutcomes
from ..models import Answer, AnswerKind, CHOICE_LETTERS, Outcome
from .numeric import parse_numeric

LOGGER = logging.getLogger(__name__)

MAX_CHOICE_EPSILON = 0.05
_TIE_SLACK = 1e-12


def numeric_equiv(a: float, b: float, epsilon: float) -> bool:
    """``|a - b| <= epsilon``, with slack for binary rounding of decimal inputs."""

    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("numeric_equiv needs finite inputs")
    return abs(a - b) <= epsilon + _TIE_SLACK * max(1.0, abs(a), abs(b))


def default_choice_epsilon(choices: Sequence[str]) -> float:
    """Half the smallest gap between numeric choices, capped at 0.05."""

    values = sorted({value for value in (parse_numeric(choice) for choice in choices) if value is not None})
    gaps = [high - low for low, high in zip(values, values[1:]) if high - low > 0]
    if not gaps:
        return MAX_CHOICE_EPSILON
    return min(min(gaps) / 2.0, MAX_CHOICE_EPSILON)


def match_choice(answer: Answer, choices: Sequence[str], epsilon: float | None = None) -> int | None:
    """Index of the choice the answer selects, or None.

    Letters select by position. Values select the uniquely nearest numeric
    choice within ``epsilon``; ties select nothing.
    """

    if len(choices) < 2:
        raise ValueError("match_choice needs at least two choices")
    if answer.kind is AnswerKind.CHOICE:
        index = CHOICE_LETTERS.find((answer.letter or "").upper()) if answer.letter and len(answer.letter) == 1 else -1
        return index if 0 <= index < len(choices) else None
    value = answer.value if answer.value is not None else parse_numeric(answer.text)
    if value is None or not math.isfinite(value):
        return None
    if epsilon is None:
        epsilon = default_choice_epsilon(choices)
    within: list[tuple[float, int]] = []
    for index, choice in enumerate(choices):
        choice_value = parse_numeric(choice)
        if choice_value is not None and numeric_equiv(value, choice_value, epsilon):
            within.append((abs(value - choice_value), index))
    if not within:
        return None
    within.sort()
    best_distance, best_index = within[0]
    if len(within) > 1 and within[1][0] - best_distance <= _TIE_SLACK * max(1.0, abs(value)):
        LOGGER.debug("Value %s is equidistant from several choices; no match", value)
        return None
    return best_index


def _is_correct(outcome: Outcome | bool | int) -> bool:
    if isinstance(outcome, Outcome):
        return outcome is Outcome.CORRECT
    return bool(outcome)


def pass_at_k(outcomes: Sequence[Outcome | bool | int], k: int) -> int:
    """1 when any of the first ``k`` outcomes is correct.

    Fewer than ``k`` outcomes are scored as given, with a warning.
    """

    if not outcomes:
        raise EmptyOutcomes("pass_at_k needs at least one outcome")
    if k < 1:
        raise ValueError("k must be at least 1")
    if len(outcomes) < k:
        LOGGER.warning("Only %d of %d attempts available; scoring over the available ones", len(outcomes), k)
    return int(any(_is_correct(outcome) for outcome in outcomes[:k]))


def pass_at_k_estimate(n: int, c: int, k: int) -> float:
    """Unbiased estimate of pass@k from ``c`` correct out of ``n`` samples."""

    if not 0 <= c <= n or k < 1:
        raise ValueError("need 0 <= c <= n and k >= 1")
    if n - c < k:
        return 1.0
    return 1.0 - math.prod(1.0 - k / i for i in range(n - c + 1, n + 1))
