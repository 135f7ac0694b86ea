"""High level journaling of run lifecycle, attempts and cache statistics."""

from __future__ import annotations

import json
import logging
from typing import Any, Mapping

from .db import Database
from .models import Attempt

LOGGER = logging.getLogger(__name__)


class Journal:
    def __init__(self, database: Database, run_id: str) -> None:
        self.database = database
        self.run_id = run_id

    def run_started(self, *, config_digest: str, mode: str, k: int, problems: int) -> None:
        self.database.start_run(run_id=self.run_id, config_digest=config_digest, mode=mode, k=k, problems=problems)
        self.log("run", "Run started", {"mode": mode, "k": k, "problems": problems})

    def run_finished(self, status: str, summary: Mapping[str, Any]) -> None:
        self.database.finish_run(run_id=self.run_id, status=status, summary_json=json.dumps(summary, sort_keys=True))
        self.log("run", f"Run {status}", summary)

    def record_attempt(self, attempt: Attempt) -> None:
        self.database.record_attempt(
            key=attempt.key,
            run_id=self.run_id,
            problem_id=attempt.problem_id,
            mode=attempt.mode.value,
            attempt_index=attempt.attempt_index,
            endpoint=attempt.endpoint,
            status=attempt.status.value,
            error_code=attempt.error_code,
            error=attempt.error,
            retries=attempt.retries,
            cached=attempt.cached,
            latency_s=attempt.latency_s,
        )
        if not attempt.ok:
            self.log("attempt", f"{attempt.key} failed: {attempt.error_code}", {"error": attempt.error})

    def record_cache_stats(self, stats: Mapping[str, Mapping[str, int]]) -> None:
        for endpoint, counters in stats.items():
            self.database.record_cache_stats(
                run_id=self.run_id,
                endpoint=endpoint,
                invocations=int(counters.get("invocations", 0)),
                cache_hits=int(counters.get("cache_hits", 0)),
                retries=int(counters.get("retries", 0)),
                failures=int(counters.get("failures", 0)),
            )

    def log(self, category: str, message: str, payload: Mapping[str, Any] | None = None) -> None:
        self.database.log(category, message, json.dumps(payload, sort_keys=True) if payload is not None else None)
