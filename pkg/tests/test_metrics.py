from __future__ import annotations

import itertools
import logging
import math
import random

import pytest

from geo_engine.errors import EmptyOutcomes
from geo_engine.evaluation import (
    default_choice_epsilon,
    last_number,
    match_choice,
    numeric_equiv,
    parse_numeric,
    pass_at_k,
    pass_at_k_estimate,
)
from geo_engine.models import Answer, Outcome

MATHVERSE_CHOICES = ["22.3", "44.5", "20.4", "50"]


@pytest.mark.parametrize(
    ("text", "value"),
    [
        ("22.34 m", 22.34),
        ("71 degrees", 71.0),
        ("71°", 71.0),
        ("1,234", 1234.0),
        ("3/4", 0.75),
        ("\\frac{3}{4}", 0.75),
        ("2\\sqrt{3}", 2 * math.sqrt(3)),
        ("4π", 4 * math.pi),
        ("d = 22.3", 22.3),
        ("-2.5", -2.5),
    ],
)
def test_parse_numeric(text: str, value: float) -> None:
    assert parse_numeric(text) == pytest.approx(value)


@pytest.mark.parametrize("text", [None, "", "abc", "x + y", "1/0"])
def test_parse_numeric_rejects(text: str | None) -> None:
    assert parse_numeric(text) is None


def test_last_number() -> None:
    assert last_number("from 17.6 m to 1,234 m") == "1,234"
    assert last_number("no digits") is None


# ------------------------------------------------------------ equivalence
def test_numeric_equiv_examples() -> None:
    assert numeric_equiv(22.34, 22.3, 0.05)
    assert not numeric_equiv(28.6, 22.3, 0.05)
    assert numeric_equiv(0.1 + 0.2, 0.3, 0.0)


def test_numeric_equiv_properties() -> None:
    rng = random.Random(5)
    for _ in range(2_000):
        a, b = rng.uniform(-100, 100), rng.uniform(-100, 100)
        epsilon = rng.uniform(0, 10)
        assert numeric_equiv(a, a, 0.0)
        assert numeric_equiv(a, b, epsilon) == numeric_equiv(b, a, epsilon)


def test_numeric_equiv_rejects_bad_input() -> None:
    with pytest.raises(ValueError):
        numeric_equiv(1.0, 1.0, -0.1)
    with pytest.raises(ValueError):
        numeric_equiv(math.inf, 1.0, 0.1)


# ---------------------------------------------------------------- choices
def test_default_choice_epsilon() -> None:
    assert default_choice_epsilon(MATHVERSE_CHOICES) == pytest.approx(0.05)
    assert default_choice_epsilon(["1", "1.02", "3"]) == pytest.approx(0.01)
    assert default_choice_epsilon(["a", "b"]) == pytest.approx(0.05)


def test_match_choice_by_value_and_letter() -> None:
    assert match_choice(Answer.numeric("22.34", 22.34), MATHVERSE_CHOICES, 0.05) == 0
    assert match_choice(Answer.numeric("28.6", 28.6), MATHVERSE_CHOICES, 0.05) is None
    assert match_choice(Answer.choice("B"), MATHVERSE_CHOICES) == 1
    assert match_choice(Answer.choice("E"), MATHVERSE_CHOICES) is None
    assert match_choice(Answer.numeric("20.4"), MATHVERSE_CHOICES) == 2


def test_match_choice_tie_selects_nothing() -> None:
    assert match_choice(Answer.numeric("2.5", 2.5), ["2", "3"], 0.5) is None


def test_match_choice_needs_two_choices() -> None:
    with pytest.raises(ValueError):
        match_choice(Answer.choice("A"), ["1"])


# ----------------------------------------------------------------- pass@k
def test_pass_at_k_truth_table() -> None:
    for outcomes in itertools.product([0, 1], repeat=3):
        assert pass_at_k(list(outcomes), 3) == int(any(outcomes))


def test_pass_at_k_uses_first_k() -> None:
    assert pass_at_k([Outcome.INCORRECT, Outcome.FAILED, Outcome.CORRECT], 2) == 0
    assert pass_at_k([Outcome.INCORRECT, Outcome.CORRECT], 2) == 1


def test_pass_at_k_monotone_in_k() -> None:
    rng = random.Random(9)
    for _ in range(200):
        outcomes = [rng.random() < 0.3 for _ in range(5)]
        scores = [pass_at_k(outcomes, k) for k in range(1, 6)]
        assert scores == sorted(scores)


def test_pass_at_k_short_lists_warn(caplog: pytest.LogCaptureFixture) -> None:
    with caplog.at_level(logging.WARNING, logger="geo_engine.evaluation.metrics"):
        assert pass_at_k([0, 1], 3) == 1

    assert "Only 2 of 3 attempts" in caplog.text


def test_pass_at_k_rejects_bad_input() -> None:
    with pytest.raises(EmptyOutcomes):
        pass_at_k([], 3)
    with pytest.raises(ValueError):
        pass_at_k([1], 0)


def test_pass_at_k_estimate() -> None:
    assert pass_at_k_estimate(3, 1, 3) == 1.0
    assert pass_at_k_estimate(10, 0, 1) == 0.0
    assert pass_at_k_estimate(5, 2, 1) == pytest.approx(0.4)
    with pytest.raises(ValueError):
        pass_at_k_estimate(3, 4, 1)
