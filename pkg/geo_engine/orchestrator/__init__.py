"""Run execution, resumption, scoring and ablation grids."""

from .grid import GridResult, run_grid
from .runner import PROVIDER_ERROR_CODES, RunOrchestrator, RunResult, build_hub, default_run_id

__all__ = [
    "GridResult",
    "PROVIDER_ERROR_CODES",
    "RunOrchestrator",
    "RunResult",
    "build_hub",
    "default_run_id",
    "run_grid",
]
