"""Geometry problem solving engine: predicate DSL, agent pipelines and evaluation harness."""

from .config import RunConfig, load_run_config
from .models import Answer, Attempt, Problem, TaskKind, Verdict
from .orchestrator import GridResult, RunOrchestrator, RunResult, run_grid

__all__ = [
    "Answer",
    "Attempt",
    "GridResult",
    "Problem",
    "RunConfig",
    "RunOrchestrator",
    "RunResult",
    "TaskKind",
    "Verdict",
    "load_run_config",
    "run_grid",
]
