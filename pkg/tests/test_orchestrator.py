from __future__ import annotations

from pathlib import Path
from typing import Callable

import pytest

from geo_engine.config import RunConfig
from geo_engine.db import Database
from geo_engine.errors import ConfigError
from geo_engine.models import Attempt, Mode, Problem
from geo_engine.orchestrator import RunOrchestrator, build_hub, default_run_id, run_grid
from geo_engine.storage import RunStore

from .conftest import JUDGE_RULES, LM_RULES, VL_RULES, mock_endpoint_spec, run_config_data

SINGLE_ROW = "| single | 50.00% | 0.00% | 33.33% |"
MULTI_ROW = "| multi | 100.00% (+50.0) | 100.00% (+100.0) | 100.00% (+66.7) |"


def test_end_to_end_report(make_config: Callable[..., RunConfig]) -> None:
    config = make_config()

    result = RunOrchestrator(config).run()

    markdown = result.report.to_markdown()
    assert SINGLE_ROW in markdown
    assert MULTI_ROW in markdown
    assert result.run_id == default_run_id(config)
    assert result.executed == 27
    assert result.resumed == 0
    assert result.provider_failures == 0
    assert len(list((result.directory / "attempts").glob("*.json"))) == 27
    assert len(result.verdicts) == 6
    assert result.stats["vl"]["invocations"] == 18
    assert result.stats["lm"]["invocations"] == 9
    assert (result.directory / "report.md").read_text(encoding="utf-8") == markdown


def test_run_directory_contents(make_config: Callable[..., RunConfig]) -> None:
    config = make_config(run_id="demo")

    result = RunOrchestrator(config).run()

    store = RunStore.open(config.runs_dir, "demo")
    assert store.config_digest == config.digest()
    assert store.metadata()["problems"] == 3
    assert store.load_config()["run_id"] == "demo"
    assert len(store.load_verdicts()) == 6
    assert store.load_report()["run_id"] == "demo"
    assert Database(store.journal_path).fetch_run("demo")["status"] == "completed"
    assert result.directory == store.directory


def test_runs_are_reproducible(tmp_path: Path) -> None:
    first = RunOrchestrator(RunConfig.from_dict(run_config_data(tmp_path / "a"))).run()
    second = RunOrchestrator(RunConfig.from_dict(run_config_data(tmp_path / "b"))).run()

    assert first.run_id == second.run_id
    assert (first.directory / "report.json").read_bytes() == (second.directory / "report.json").read_bytes()
    assert (first.directory / "verdicts.jsonl").read_bytes() == (second.directory / "verdicts.jsonl").read_bytes()


def test_rerun_reuses_every_attempt(make_config: Callable[..., RunConfig]) -> None:
    config = make_config()
    first = RunOrchestrator(config).run()

    again = RunOrchestrator(config).run()

    assert again.executed == 0
    assert again.resumed == 27
    assert "vl" not in again.stats and "lm" not in again.stats
    assert again.report.to_dict() == first.report.to_dict()


def test_resume_after_deleting_attempts(make_config: Callable[..., RunConfig], problems: list[Problem]) -> None:
    config = make_config()
    first = RunOrchestrator(config).run()
    store = RunStore(config.runs_dir, first.run_id)
    for problem in problems:
        store.attempt_path(f"{problem.id}__solver__2").unlink()

    resumed = RunOrchestrator(config).run()

    assert resumed.executed == 3
    assert resumed.resumed == 24
    assert resumed.stats["lm"] == {"cache_hits": 3}
    assert "vl" not in resumed.stats
    assert resumed.report.to_dict() == first.report.to_dict()


def test_interrupted_run_resumes(make_config: Callable[..., RunConfig], monkeypatch: pytest.MonkeyPatch) -> None:
    config = make_config(mode="single", concurrency={"max_in_flight": 1, "problem_workers": 1})
    orchestrator = RunOrchestrator(config)
    real = orchestrator.pipeline.run_single
    calls = []

    def crash_after_four(*args, **kwargs) -> Attempt:
        calls.append(args)
        if len(calls) > 4:
            raise RuntimeError("worker died")
        return real(*args, **kwargs)

    monkeypatch.setattr(orchestrator.pipeline, "run_single", crash_after_four)

    with pytest.raises(RuntimeError):
        orchestrator.run()

    database = Database(orchestrator.store.journal_path)
    assert database.fetch_run(orchestrator.run_id)["status"] == "interrupted"
    database.close()
    assert len(list(orchestrator.store.attempts_dir.glob("*.json"))) == 4

    result = RunOrchestrator(config).run()

    assert result.executed == 5
    assert result.resumed == 4
    assert SINGLE_ROW in result.report.to_markdown()
    database = Database(orchestrator.store.journal_path)
    assert database.fetch_run(orchestrator.run_id)["status"] == "completed"
    database.close()


def test_failed_attempts_are_final_unless_retried(
    make_config: Callable[..., RunConfig], monkeypatch: pytest.MonkeyPatch
) -> None:
    config = make_config(mode="single")
    outage = RunOrchestrator(config)

    def provider_down(endpoint, problem, attempt_index) -> Attempt:
        return Attempt(problem.id, Mode.SINGLE, attempt_index, endpoint.name).fail("TransportError", "down")

    monkeypatch.setattr(outage.pipeline, "run_single", provider_down)
    assert outage.run().provider_failures == 9

    kept = RunOrchestrator(config).run()
    assert kept.executed == 0
    assert kept.provider_failures == 9

    retried = RunOrchestrator(config, retry_failed=True).run()
    assert retried.executed == 9
    assert retried.provider_failures == 0
    assert SINGLE_ROW in retried.report.to_markdown()


def test_resume_keeps_a_failed_interpreter_attempt(
    make_config: Callable[..., RunConfig], problems: list[Problem], monkeypatch: pytest.MonkeyPatch
) -> None:
    config = make_config(mode="multi")
    outage = RunOrchestrator(config)

    def provider_down(endpoint, problem, attempt_index) -> Attempt:
        return Attempt(problem.id, Mode.INTERPRETER, attempt_index, endpoint.name).fail("TransportError", "down")

    monkeypatch.setattr(outage.pipeline, "run_interpreter", provider_down)
    outage.run()
    store = outage.store
    saved = {problem.id: store.attempt_path(f"{problem.id}__interpreter__2").read_bytes() for problem in problems}
    for problem in problems:
        store.attempt_path(f"{problem.id}__solver__2").unlink()

    resumed = RunOrchestrator(config)

    def must_not_run(*_args, **_kwargs) -> Attempt:
        raise AssertionError("interpreter re-run on resume")

    monkeypatch.setattr(resumed.pipeline, "run_interpreter", must_not_run)
    result = resumed.run()

    assert result.executed == 3
    assert result.resumed == 15
    assert "vl" not in result.stats and "lm" not in result.stats
    for problem in problems:
        assert store.attempt_path(f"{problem.id}__interpreter__2").read_bytes() == saved[problem.id]
        solver = store.load_attempt(f"{problem.id}__solver__2")
        assert solver.error_code == "InterpreterFailed"
        assert solver.source_interpreter == "vl"


def test_mixed_configurations_are_refused(make_config: Callable[..., RunConfig]) -> None:
    RunOrchestrator(make_config(run_id="shared", mode="single")).run()

    with pytest.raises(ConfigError):
        RunOrchestrator(make_config(run_id="shared", mode="single", attempts=2)).run()


def test_free_form_needs_a_judge(make_config: Callable[..., RunConfig]) -> None:
    config = make_config(roles={"interpreter": "vl", "solver": "lm", "single": "vl"})

    with pytest.raises(ConfigError, match="judge"):
        RunOrchestrator(config).run()


def test_alignment_over_interpreter_attempts(make_config: Callable[..., RunConfig]) -> None:
    orchestrator = RunOrchestrator(make_config(mode="multi"))
    orchestrator.run()

    records, table = orchestrator.align(template=True)

    assert [record.problem_id for record in records] == ["2405", "mathverse-328", "right-triangle"]
    assert all(-1.0 <= record.similarity <= 1.0 for record in records)
    assert all(record.config["describe_predicates"] == "template" for record in records)
    assert table.startswith("| Interpreter | Avg. Cosine Similarity |\n| --- | --- |\n| vl | ")
    assert len(orchestrator.store.load_alignment()) == 3
    assert orchestrator.store.metadata()["alignment_records"] == 3


def test_alignment_needs_an_embedding_role(make_config: Callable[..., RunConfig]) -> None:
    orchestrator = RunOrchestrator(make_config(mode="multi", roles={"interpreter": "vl", "solver": "lm", "judge": "judge"}))

    with pytest.raises(ConfigError, match="embedding"):
        orchestrator.align()


def test_grid_shares_interpreter_work(make_config: Callable[..., RunConfig]) -> None:
    config = make_config(
        mode="multi",
        endpoints={
            "vl1": mock_endpoint_spec("vision-language", VL_RULES),
            "vl2": mock_endpoint_spec("vision-language", VL_RULES),
            "lm1": mock_endpoint_spec("text-only", LM_RULES),
            "lm2": mock_endpoint_spec("text-only", LM_RULES),
            "judge": mock_endpoint_spec("text-only", JUDGE_RULES),
        },
        roles={"interpreter": "vl1", "solver": "lm1", "judge": "judge"},
    )
    hub = build_hub(config)

    grid = run_grid(config, ["vl1", "vl2"], ["lm1", "lm2"], hub=hub)

    assert hub.stats["vl1"]["invocations"] == 9
    assert hub.stats["vl2"]["invocations"] == 9
    assert hub.stats["vl1"]["cache_hits"] == 9
    assert hub.stats["lm1"]["invocations"] == 9
    markdown = grid.to_markdown()
    assert markdown.startswith("| Interpreter \\ Solver | lm1 | lm2 |\n| --- | --- | --- |\n")
    assert "| vl1 | 100.00% | 100.00% |" in markdown
    assert "| vl2 | 100.00% | 100.00% |" in markdown
    run_ids = grid.run_ids()
    assert run_ids[0][1].endswith("--vl1--lm2")
    assert len({run_id for row in run_ids for run_id in row}) == 4
