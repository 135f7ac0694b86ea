from __future__ import annotations

import json
from pathlib import Path

import pytest
import yaml

from geo_engine.corpus import FIXTURE_PREDICATES_2405, FIXTURE_PROBLEMS
from geo_engine.main import EXIT_CONFIG, EXIT_DATA, EXIT_OK, EXIT_PROVIDER, main, parse_args

from .conftest import mock_endpoint_spec, run_config_data


def _config_file(tmp_path: Path, **overrides) -> Path:
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(run_config_data(tmp_path / "runs", **overrides)), encoding="utf-8")
    return path


def _run(tmp_path: Path, capsys: pytest.CaptureFixture[str], **overrides) -> str:
    assert main(["run", "--config", str(_config_file(tmp_path, **overrides))]) == EXIT_OK
    return capsys.readouterr().out


def test_run_prints_the_report(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    out = _run(tmp_path, capsys, run_id="cli")

    assert "| multi | 100.00% (+50.0) | 100.00% (+100.0) | 100.00% (+66.7) |" in out
    assert f"Run directory: {tmp_path / 'runs' / 'cli'}" in out


def test_flags_override_the_config(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    config = _config_file(tmp_path)

    code = main(["run", "--config", str(config), "--run-id", "flags", "--mode", "single", "-k", "1"])

    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "| single |" in out and "| multi |" not in out
    assert len(list((tmp_path / "runs" / "flags" / "attempts").glob("*.json"))) == 3


def test_report_formats(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    _run(tmp_path, capsys, run_id="cli")
    runs = str(tmp_path / "runs")

    assert main(["report", "cli", "--runs-dir", runs, "--format", "json"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["run_id"] == "cli"

    assert main(["report", "cli", "--runs-dir", runs, "--format", "csv"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("run_id,mode,stratum,correct,total,first_correct,percent\n")

    assert main(["report", "cli", "--runs-dir", runs, "--compare", "cli"]) == EXIT_OK
    assert "| multi | overall | 100.00% | 100.00% | 0.0 |" in capsys.readouterr().out


def test_score_and_compare(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    _run(tmp_path, capsys, run_id="cli")
    runs = str(tmp_path / "runs")

    assert main(["score", "cli", "--runs-dir", runs]) == EXIT_OK
    assert "| single | 50.00% | 0.00% | 33.33% |" in capsys.readouterr().out

    assert main(["compare", "cli", "cli", "--runs-dir", runs, "--mode-a", "multi", "--mode-b", "single"]) == EXIT_OK
    assert "| multi vs single | overall | 100.00% | 33.33% | +66.7 |" in capsys.readouterr().out

    assert main(["compare", "cli", "cli", "--runs-dir", runs, "--format", "json"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["run_a"] == "cli"


def test_align_command(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    _run(tmp_path, capsys, run_id="cli")

    assert main(["align", "cli", "--runs-dir", str(tmp_path / "runs"), "--template"]) == EXIT_OK
    assert "| Interpreter | Avg. Cosine Similarity |" in capsys.readouterr().out


def test_grid_command(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    config = _config_file(tmp_path)

    assert main(["grid", "--config", str(config), "--interpreters", "vl", "--solvers", "lm"]) == EXIT_OK
    assert "| vl | 100.00% |" in capsys.readouterr().out


def test_provider_failures_exit_three(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    data = run_config_data(tmp_path / "runs", mode="multi")
    data["endpoints"]["lm"] = mock_endpoint_spec("text-only", [{"raise": "TransportError"}], max_retries=0)
    config = tmp_path / "run.yaml"
    config.write_text(yaml.safe_dump(data), encoding="utf-8")

    assert main(["run", "--config", str(config)]) == EXIT_PROVIDER
    assert "| multi | 0.00% | 0.00% | 0.00% |" in capsys.readouterr().out


# ---------------------------------------------------------------- validation
def test_validate_predicates(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["validate-predicates", str(FIXTURE_PREDICATES_2405)]) == EXIT_OK

    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert summary["ok"] is True
    assert summary["predicates"] == 14


def test_validate_predicates_reports_errors(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    path = tmp_path / "bad.txt"
    path.write_text("Here they are:\nFrobnicate(A)\n", encoding="utf-8")

    assert main(["validate-predicates", str(path)]) == EXIT_DATA
    out = capsys.readouterr().out
    assert "line 1: skipped (not a predicate): Here they are:" in out
    assert "[unknown-head]" in out
    assert main(["validate-predicates", str(path), "--strict"]) == EXIT_DATA


def test_validate_predicates_can_drop_duplicates(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    path = tmp_path / "repeats.txt"
    path.write_text("Point(A)\nPoint(B)\nPoint(A)\n", encoding="utf-8")

    assert main(["validate-predicates", str(path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "[duplicate]" in out
    assert json.loads(out.strip().splitlines()[-1])["predicates"] == 3

    assert main(["validate-predicates", str(path), "--dedupe"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "[duplicate]" not in out
    summary = json.loads(out.strip().splitlines()[-1])
    assert summary["predicates"] == 2
    assert summary["duplicates"] == 1


def test_validate_predicates_with_a_custom_registry(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    path = tmp_path / "custom.txt"
    path.write_text("Frobnicate(A)\n", encoding="utf-8")
    registry = tmp_path / "registry.yaml"
    registry.write_text(
        yaml.safe_dump({"predicates": [{"head": "Frobnicate", "category": "Shape", "arity": {"exact": 1}}]}),
        encoding="utf-8",
    )

    assert main(["validate-predicates", str(path), "--registry", str(registry)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out.strip().splitlines()[-1])["ok"] is True
    assert main(["validate-predicates", str(FIXTURE_PREDICATES_2405), "--registry", str(registry)]) == EXIT_DATA
    assert main(["validate-predicates", str(path), "--registry", str(tmp_path / "absent.yaml")]) == EXIT_DATA


def test_validate_data(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["validate-data", str(FIXTURE_PROBLEMS)]) == EXIT_OK
    assert "3 problems: free-form 1, multiple-choice 2" in capsys.readouterr().out


def test_validate_data_flags_bad_records(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    path = tmp_path / "bad.jsonl"
    path.write_text(
        json.dumps({"id": "1", "question": "q", "kind": "mc", "choices": ["1", "2"], "answer": "E"}) + "\n",
        encoding="utf-8",
    )

    assert main(["validate-data", str(path)]) == EXIT_DATA
    assert "[gold-out-of-range]" in capsys.readouterr().out


# ------------------------------------------------------------------- errors
def test_error_exit_codes(tmp_path: Path) -> None:
    assert main(["report", "missing", "--runs-dir", str(tmp_path)]) == EXIT_CONFIG
    assert main(["validate-data", str(tmp_path / "absent.jsonl")]) == EXIT_DATA
    assert main(["run", "--config", str(tmp_path / "absent.yaml")]) == EXIT_CONFIG
    assert main(["run", "--config", str(_config_file(tmp_path, dataset={"path": str(tmp_path / "gone.jsonl")}))]) == EXIT_DATA


def test_usage_errors_exit_one() -> None:
    with pytest.raises(SystemExit) as excinfo:
        parse_args(["run", "--mode", "triple"])

    assert excinfo.value.code == EXIT_CONFIG
