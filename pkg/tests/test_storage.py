from __future__ import annotations

import json
from pathlib import Path

import pytest

from geo_engine.db import Database
from geo_engine.dsl import parse_program, validate
from geo_engine.errors import ConfigError, FormatError, UnknownRun
from geo_engine.journal import Journal
from geo_engine.models import AlignmentRecord, Answer, Attempt, Mode, Outcome, TaskKind, Verdict
from geo_engine.storage import RunStore


def _interpreter_attempt(digest: str | None = "d1") -> Attempt:
    program, _ = parse_program("Point(A)\nLine(A,B)")
    return Attempt(
        problem_id="2405",
        mode=Mode.INTERPRETER,
        attempt_index=1,
        endpoint="vl",
        prompt={"template": "predicate_generation", "temperature": 0.2},
        raw="PREDICATES:\nPoint(A)\nLine(A,B)",
        program=program,
        validation=validate(program),
        retries=1,
        usage={"prompt_tokens": 10, "completion_tokens": 4},
        config_digest=digest,
    )


def test_run_id_must_be_path_safe(tmp_path: Path) -> None:
    for run_id in ("", "../escape", "a b", "a/b"):
        with pytest.raises(ConfigError):
            RunStore(tmp_path, run_id)


def test_open_unknown_run(tmp_path: Path) -> None:
    with pytest.raises(UnknownRun):
        RunStore.open(tmp_path, "missing")


def test_initialise_and_reopen(tmp_path: Path) -> None:
    store = RunStore(tmp_path, "demo")
    store.initialise({"mode": "both"}, "d1", {"problem_set": "p1"})

    reopened = RunStore.open(tmp_path, "demo")

    assert reopened.config_digest == "d1"
    assert reopened.metadata() == {"run_id": "demo", "config_digest": "d1", "problem_set": "p1"}
    assert reopened.load_config() == {"mode": "both"}
    reopened.initialise({"mode": "both"}, "d1")
    with pytest.raises(ConfigError, match="refusing to mix"):
        reopened.initialise({"mode": "single"}, "d2")


def test_update_metadata(tmp_path: Path) -> None:
    store = RunStore(tmp_path, "demo")
    store.initialise({}, "d1")

    store.update_metadata(status="completed")

    assert store.metadata()["status"] == "completed"
    assert store.metadata()["config_digest"] == "d1"


def test_attempt_round_trip(tmp_path: Path) -> None:
    store = RunStore(tmp_path, "demo")
    store.initialise({}, "d1")
    attempt = _interpreter_attempt()

    path = store.save_attempt(attempt)

    assert path == store.attempt_path("2405__interpreter__1")
    assert store.load_attempt(attempt.key) == attempt
    assert store.attempts() == [attempt]
    assert store.load_attempt("2405__interpreter__2") is None
    assert not list(store.attempts_dir.glob("*.tmp"))


def test_attempt_keys_are_sanitised(tmp_path: Path) -> None:
    store = RunStore(tmp_path, "demo")

    assert store.attempt_path("a/b c__single__0").name == "a_b_c__single__0.json"


def test_unreadable_attempt_is_ignored_on_resume_but_not_when_scoring(tmp_path: Path) -> None:
    store = RunStore(tmp_path, "demo")
    store.initialise({}, "d1")
    store.attempt_path("x__single__0").write_text("{broken", encoding="utf-8")

    assert store.load_attempt("x__single__0") is None
    with pytest.raises(FormatError):
        store.attempts()


def test_attempts_from_another_config_are_rejected(tmp_path: Path) -> None:
    store = RunStore(tmp_path, "demo")
    store.initialise({}, "d1")
    store.save_attempt(_interpreter_attempt(digest="d2"))

    with pytest.raises(ConfigError):
        store.attempts()


def test_verdicts_report_and_alignment(tmp_path: Path) -> None:
    store = RunStore(tmp_path, "demo")
    store.initialise({}, "d1")
    verdict = Verdict("2405", "multi", "geometry3k", TaskKind.FREE_FORM, (Outcome.CORRECT,), 3, 1, 1, config_digest="d1")
    record = AlignmentRecord("2405", "a figure", "line D is parallel", 0.5, {"interpreter": "vl"})

    assert store.load_verdicts() is None
    assert store.load_report() is None
    assert store.load_alignment() == []

    store.save_verdicts([verdict])
    store.save_report({"run_id": "demo"}, "# Run demo\n")
    store.save_alignment([record])

    assert store.load_verdicts() == [verdict]
    assert store.load_report() == {"run_id": "demo"}
    assert (store.directory / "report.md").read_text(encoding="utf-8") == "# Run demo\n"
    assert store.load_alignment() == [record]


def test_bad_verdict_line(tmp_path: Path) -> None:
    store = RunStore(tmp_path, "demo")
    store.initialise({}, "d1")
    store.verdicts_path.write_text("\nnot json\n", encoding="utf-8")

    with pytest.raises(FormatError) as excinfo:
        store.load_verdicts()

    assert excinfo.value.line == 2


# ------------------------------------------------------------------ journal
def test_journal_records_lifecycle(tmp_path: Path) -> None:
    database = Database(tmp_path / "journal.db")
    journal = Journal(database, "demo")
    failed = Attempt("2405", Mode.SINGLE, 0, "vl", answer=Answer.choice("A")).fail("TransportError", "boom")

    journal.run_started(config_digest="d1", mode="both", k=3, problems=3)
    journal.record_attempt(_interpreter_attempt())
    journal.record_attempt(failed)
    journal.record_cache_stats({"vl": {"invocations": 4, "cache_hits": 1}})
    journal.run_finished("completed", {"executed": 2})

    run = database.fetch_run("demo")
    assert run["status"] == "completed"
    assert json.loads(run["summary"]) == {"executed": 2}
    assert [row["key"] for row in database.fetch_attempts("demo")] == ["2405__interpreter__1", "2405__single__0"]
    assert [row["error_code"] for row in database.fetch_attempts("demo", status="failed")] == ["TransportError"]
    assert [row["message"] for row in database.fetch_events("attempt")] == ["2405__single__0 failed: TransportError"]
    assert [row["message"] for row in database.fetch_events("run")] == ["Run started", "Run completed"]
    database.close()


def test_restarting_a_run_resets_status(tmp_path: Path) -> None:
    database = Database(tmp_path / "journal.db")
    journal = Journal(database, "demo")

    journal.run_started(config_digest="d1", mode="single", k=3, problems=3)
    journal.run_finished("interrupted", {})
    journal.run_started(config_digest="d1", mode="single", k=3, problems=3)

    assert database.fetch_run("demo")["status"] == "running"
    assert database.fetch_run("other") is None
    database.close()
