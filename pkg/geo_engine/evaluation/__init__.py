"""Answer matching, LLM-as-judge, Pass@k scoring and reports."""

from .numeric import last_number, parse_numeric
from .metrics import default_choice_epsilon, match_choice, numeric_equiv, pass_at_k, pass_at_k_estimate
from .judge import interpret_verdict, judge_free_form, tolerance_for
from .scoring import RunScorer, score_run
from .report import (
    DeltaRow,
    DeltaTable,
    ModeReport,
    Report,
    StratumCounts,
    aggregate,
    compare_runs,
    format_delta,
    format_percent,
    percent_value,
    problem_set_digest,
)

__all__ = [
    "DeltaRow",
    "DeltaTable",
    "ModeReport",
    "Report",
    "RunScorer",
    "StratumCounts",
    "aggregate",
    "compare_runs",
    "default_choice_epsilon",
    "format_delta",
    "format_percent",
    "interpret_verdict",
    "judge_free_form",
    "last_number",
    "match_choice",
    "numeric_equiv",
    "pass_at_k",
    "pass_at_k_estimate",
    "percent_value",
    "problem_set_digest",
    "score_run",
    "tolerance_for",
]
