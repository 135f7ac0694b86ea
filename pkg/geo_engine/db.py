"""SQLite run journal: migrations and row helpers."""

from __future__ import annotations

import contextlib
import sqlite3
import threading
from pathlib import Path
from typing import Iterator, Optional

MIGRATIONS: tuple[str, ...] = (
    """
    CREATE TABLE IF NOT EXISTS runs (
        run_id TEXT PRIMARY KEY,
        config_digest TEXT,
        mode TEXT,
        k INTEGER,
        problems INTEGER,
        status TEXT,
        started_at DATETIME DEFAULT CURRENT_TIMESTAMP,
        finished_at DATETIME,
        summary TEXT
    );
    """,
    """
    CREATE TABLE IF NOT EXISTS events (
        id INTEGER PRIMARY KEY AUTOINCREMENT,
        ts DATETIME DEFAULT CURRENT_TIMESTAMP,
        category TEXT,
        message TEXT,
        payload TEXT
    );
    """,
    """
    CREATE TABLE IF NOT EXISTS attempts (
        key TEXT PRIMARY KEY,
        run_id TEXT,
        problem_id TEXT,
        mode TEXT,
        attempt_index INTEGER,
        endpoint TEXT,
        status TEXT,
        error_code TEXT,
        error TEXT,
        retries INTEGER,
        cached INTEGER,
        latency_s REAL,
        recorded_at DATETIME DEFAULT CURRENT_TIMESTAMP
    );
    """,
    """
    CREATE TABLE IF NOT EXISTS cache_stats (
        id INTEGER PRIMARY KEY AUTOINCREMENT,
        run_id TEXT,
        endpoint TEXT,
        invocations INTEGER,
        cache_hits INTEGER,
        retries INTEGER,
        failures INTEGER,
        recorded_at DATETIME DEFAULT CURRENT_TIMESTAMP
    );
    """,
)


class Database:
    """SQLite wrapper with idempotent migrations; writes are serialised across threads."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._conn = sqlite3.connect(self.path, check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        self._lock = threading.Lock()
        self.apply_migrations()

    def apply_migrations(self) -> None:
        with self.connection() as conn:
            for migration in MIGRATIONS:
                conn.executescript(migration)

    @contextlib.contextmanager
    def connection(self) -> Iterator[sqlite3.Connection]:
        with self._lock:
            try:
                yield self._conn
            finally:
                self._conn.commit()

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # ------------------------------------------------------------------ runs
    def start_run(self, *, run_id: str, config_digest: str, mode: str, k: int, problems: int) -> None:
        sql = (
            "INSERT INTO runs (run_id, config_digest, mode, k, problems, status) VALUES (?, ?, ?, ?, ?, 'running') "
            "ON CONFLICT(run_id) DO UPDATE SET status='running', problems=excluded.problems, finished_at=NULL"
        )
        with self.connection() as conn:
            conn.execute(sql, (run_id, config_digest, mode, k, problems))

    def finish_run(self, *, run_id: str, status: str, summary_json: str) -> None:
        sql = "UPDATE runs SET status = ?, summary = ?, finished_at = CURRENT_TIMESTAMP WHERE run_id = ?"
        with self.connection() as conn:
            conn.execute(sql, (status, summary_json, run_id))

    def fetch_run(self, run_id: str) -> Optional[sqlite3.Row]:
        with self.connection() as conn:
            return conn.execute("SELECT * FROM runs WHERE run_id = ?", (run_id,)).fetchone()

    # -------------------------------------------------------------- attempts
    def record_attempt(
        self,
        *,
        key: str,
        run_id: str,
        problem_id: str,
        mode: str,
        attempt_index: int,
        endpoint: str,
        status: str,
        error_code: str | None,
        error: str | None,
        retries: int,
        cached: bool,
        latency_s: float,
    ) -> None:
        sql = (
            "INSERT OR REPLACE INTO attempts (key, run_id, problem_id, mode, attempt_index, endpoint, status, "
            "error_code, error, retries, cached, latency_s) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)"
        )
        with self.connection() as conn:
            conn.execute(
                sql,
                (key, run_id, problem_id, mode, attempt_index, endpoint, status, error_code, error, retries,
                 int(cached), latency_s),
            )

    def fetch_attempts(self, run_id: str, *, status: str | None = None) -> list[sqlite3.Row]:
        query = "SELECT * FROM attempts WHERE run_id = ?"
        params: tuple[object, ...] = (run_id,)
        if status:
            query += " AND status = ?"
            params += (status,)
        with self.connection() as conn:
            return list(conn.execute(query + " ORDER BY key", params).fetchall())

    # ----------------------------------------------------------------- cache
    def record_cache_stats(
        self, *, run_id: str, endpoint: str, invocations: int, cache_hits: int, retries: int, failures: int
    ) -> None:
        sql = (
            "INSERT INTO cache_stats (run_id, endpoint, invocations, cache_hits, retries, failures) "
            "VALUES (?, ?, ?, ?, ?, ?)"
        )
        with self.connection() as conn:
            conn.execute(sql, (run_id, endpoint, invocations, cache_hits, retries, failures))

    # ---------------------------------------------------------------- events
    def log(self, category: str, message: str, payload: str | None = None) -> None:
        with self.connection() as conn:
            conn.execute(
                "INSERT INTO events (category, message, payload) VALUES (?, ?, ?)",
                (category, message, payload),
            )

    def fetch_events(self, category: str | None = None) -> list[sqlite3.Row]:
        query = "SELECT ts, category, message, payload FROM events"
        params: tuple[object, ...] = ()
        if category:
            query += " WHERE category = ?"
            params = (category,)
        with self.connection() as conn:
            return list(conn.execute(query + " ORDER BY id", params).fetchall())
