from __future__ import annotations

from decimal import Decimal

import pytest

from geo_engine.errors import ProblemSetMismatch
from geo_engine.evaluation import Report, aggregate, compare_runs, format_delta, format_percent
from geo_engine.models import Outcome, Problem, TaskKind, Verdict


def _problems(dataset: str, n_mc: int, n_ff: int) -> list[Problem]:
    problems = [
        Problem(f"{dataset}-mc-{index}", dataset, "q", TaskKind.MULTIPLE_CHOICE, "A", choices=("1", "2"))
        for index in range(n_mc)
    ]
    problems += [Problem(f"{dataset}-ff-{index}", dataset, "q", TaskKind.FREE_FORM, "1") for index in range(n_ff)]
    return problems


def _verdicts(problems: list[Problem], mode: str, correct_mc: int, correct_ff: int) -> list[Verdict]:
    verdicts = []
    budget = {TaskKind.MULTIPLE_CHOICE: correct_mc, TaskKind.FREE_FORM: correct_ff}
    for problem in problems:
        passed = budget[problem.kind] > 0
        budget[problem.kind] -= 1
        outcome = Outcome.CORRECT if passed else Outcome.INCORRECT
        verdicts.append(
            Verdict(problem.id, mode, problem.dataset, problem.kind, (outcome,), 3, int(passed), int(passed))
        )
    return verdicts


def _report(problems: list[Problem], run_id: str = "run", **modes: tuple[int, int]) -> Report:
    verdicts = [verdict for mode, (mc, ff) in modes.items() for verdict in _verdicts(problems, mode, mc, ff)]
    return aggregate(verdicts, problems, run_id=run_id, config_digest="abc123", k=3)


def test_format_percent() -> None:
    assert format_percent(361, 601) == "60.07%"
    assert format_percent(534, 788) == "67.77%"
    assert format_percent(1, 3) == "33.33%"
    assert format_percent(2, 3) == "66.67%"
    assert format_percent(0, 0) == "-"


def test_format_delta() -> None:
    assert format_delta(Decimal("6.82")) == "+6.8"
    assert format_delta(Decimal("-1.27")) == "–1.3"
    assert format_delta(Decimal("0.04")) == "0.0"
    assert format_delta(None) == "-"


def test_mathverse_strata() -> None:
    problems = _problems("mathverse", 436, 352)

    report = _report(problems, single=(342, 192))

    single = report.modes["single"]
    assert single.overall.to_dict()["display"] == "67.77%"
    assert format_percent(single.multiple_choice.correct, single.multiple_choice.total) == "78.44%"
    assert format_percent(single.free_form.correct, single.free_form.total) == "54.55%"
    assert single.datasets["mathverse"].total == 788


def test_mode_deltas() -> None:
    geometry = _report(_problems("geometry3k", 601, 0), single=(361, 0), multi=(402, 0))
    mathverse = _report(_problems("mathverse", 436, 352), single=(342, 192), multi=(336, 188))

    up = compare_runs(geometry, geometry, mode_a="multi", mode_b="single")
    down = compare_runs(mathverse, mathverse, mode_a="multi", mode_b="single")

    assert up.row("multi vs single", "overall").to_dict()["display"] == "+6.8"
    assert down.row("multi vs single", "overall").to_dict()["display"] == "–1.3"
    assert "| multi vs single | overall | 66.50% | 67.77% | –1.3 |" in down.to_markdown()


def test_identical_runs_compare_to_zero() -> None:
    problems = _problems("mathverse", 4, 3)
    report = _report(problems, single=(3, 1), multi=(4, 2))

    table = compare_runs(report, report)

    assert {row.label for row in table.rows} == {"single", "multi"}
    assert all(format_delta(row.delta) == "0.0" for row in table.rows if row.delta is not None)


def test_compare_refuses_different_problem_sets() -> None:
    a = _report(_problems("mathverse", 3, 0), single=(1, 0))
    b = _report(_problems("mathverse", 4, 0), single=(1, 0))

    with pytest.raises(ProblemSetMismatch):
        compare_runs(a, b)


def test_compare_needs_the_named_modes() -> None:
    problems = _problems("mathverse", 3, 0)
    a = _report(problems, single=(1, 0), multi=(2, 0))
    b = _report(problems, single=(1, 0))

    with pytest.raises(ValueError):
        compare_runs(a, b, mode_a="multi", mode_b="multi")


def test_markdown_table(problems: list[Problem]) -> None:
    single = _verdicts(problems, "single", 1, 0)
    multi = _verdicts(problems, "multi", 2, 1)

    markdown = aggregate(multi + single, problems, run_id="demo", config_digest="abc", k=3).to_markdown()

    assert markdown.startswith("# Run demo\n")
    assert "| Mode | Multiple Choice | Free Form | Overall |" in markdown
    assert "| single | 50.00% | 0.00% | 33.33% |" in markdown
    assert "| multi | 100.00% (+50.0) | 100.00% (+100.0) | 100.00% (+66.7) |" in markdown
    assert markdown.index("| single |") < markdown.index("| multi |")
    assert "Per dataset:" in markdown


def test_report_round_trips_through_dict() -> None:
    report = _report(_problems("mathverse", 4, 3), single=(3, 1), multi=(4, 2))

    assert Report.from_dict(report.to_dict()).to_dict() == report.to_dict()
    assert Report.from_dict(report.to_dict()).to_markdown() == report.to_markdown()


def test_pass_at_1_estimate_uses_every_sample() -> None:
    problems = _problems("geo", 2, 0)
    correct, incorrect, failed = Outcome.CORRECT, Outcome.INCORRECT, Outcome.FAILED
    verdicts = [
        Verdict(problems[0].id, "single", "geo", TaskKind.MULTIPLE_CHOICE, (incorrect, correct, failed), 3, 1, 0),
        Verdict(problems[1].id, "single", "geo", TaskKind.MULTIPLE_CHOICE, (correct, correct, correct), 3, 1, 1),
    ]

    report = aggregate(verdicts, problems, run_id="est", k=3)

    overall = report.modes["single"].overall
    assert overall.accuracy == 1.0
    assert overall.first_attempt_accuracy == 0.5
    assert overall.pass_at_1_estimate == pytest.approx(2 / 3)
    assert overall.to_dict()["pass_at_1_estimate"] == pytest.approx(0.666667)
    assert Report.from_dict(report.to_dict()).modes["single"].overall.pass_at_1_estimate == pytest.approx(2 / 3)


def test_csv_export() -> None:
    report = _report(_problems("mathverse", 2, 0), single=(1, 0))

    rows = report.to_csv().splitlines()

    assert rows[0] == "run_id,mode,stratum,correct,total,first_correct,percent"
    assert "run,single,overall,1,2,1,50.00%" in rows
    assert "run,single,dataset:mathverse,1,2,1,50.00%" in rows
