"""Interpreter x solver ablation grids sharing one provider hub and response cache."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Sequence

import httpx

from ..config import RunConfig
from ..errors import ConfigError
from ..evaluation import format_percent
from ..models import Problem
from ..providers import ProviderHub
from .runner import RunOrchestrator, RunResult, build_hub

LOGGER = logging.getLogger(__name__)

_UNSAFE = re.compile(r"[^A-Za-z0-9._-]")


@dataclass(slots=True)
class GridResult:
    interpreters: list[str]
    solvers: list[str]
    cells: dict[tuple[str, str], RunResult] = field(default_factory=dict)

    def run_ids(self) -> list[list[str]]:
        return [[self.cells[(i, s)].run_id for s in self.solvers] for i in self.interpreters]

    def cell_text(self, interpreter: str, solver: str) -> str:
        counts = self.cells[(interpreter, solver)].report.modes["multi"].overall
        return format_percent(counts.correct, counts.total)

    def to_markdown(self) -> str:
        lines = [
            "| Interpreter \\ Solver | " + " | ".join(self.solvers) + " |",
            "| --- |" + " --- |" * len(self.solvers),
        ]
        for interpreter in self.interpreters:
            cells = [self.cell_text(interpreter, solver) for solver in self.solvers]
            lines.append(f"| {interpreter} | " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"


def run_grid(
    config: RunConfig,
    interpreters: Sequence[str],
    solvers: Sequence[str],
    *,
    hub: ProviderHub | None = None,
    problems: Sequence[Problem] | None = None,
    transport: httpx.BaseTransport | None = None,
) -> GridResult:
    """One multi-agent run per (interpreter, solver) pair, executed in sequence.

    Cells share the hub and its on-disk cache, so each interpreter answers each
    (problem, attempt) once however many solvers it is paired with.
    """

    if not interpreters or not solvers:
        raise ConfigError("a grid needs at least one interpreter and one solver")
    if not config.cache.enabled:
        LOGGER.warning("Grid runs share interpreter work through the response cache; enabling it")
        config = config.merge({"cache": {"enabled": True}})
    base = config.run_id or f"grid-{config.digest()[:8]}"
    hub = hub or build_hub(config, transport=transport)
    result = GridResult(list(interpreters), list(solvers))
    for interpreter in interpreters:
        for solver in solvers:
            cell = config.merge(
                {
                    "run_id": _UNSAFE.sub("_", f"{base}--{interpreter}--{solver}"),
                    "mode": "multi",
                    "roles": {"interpreter": interpreter, "solver": solver},
                }
            )
            LOGGER.info("Grid cell %s x %s", interpreter, solver)
            orchestrator = RunOrchestrator(cell, hub=hub, problems=problems)
            problems = orchestrator.load_problems()
            result.cells[(interpreter, solver)] = orchestrator.run()
    return result
