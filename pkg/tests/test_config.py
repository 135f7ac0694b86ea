from __future__ import annotations

from pathlib import Path
from typing import Callable

import pytest
import yaml

from geo_engine.config import DATA_ROOT_ENV, DatasetConfig, RunConfig, load_run_config
from geo_engine.errors import ConfigError
from geo_engine.models import PipelineMode
from geo_engine.providers import EndpointKind

from .conftest import run_config_data


def test_defaults(make_config: Callable[..., RunConfig]) -> None:
    config = make_config()

    assert config.mode is PipelineMode.BOTH
    assert config.k == 3
    assert config.endpoints["vl"].kind is EndpointKind.VISION_LANGUAGE
    assert config.decoding.temperatures() == {"interpreter": 0.2, "solver": 0.0, "single": 0.0}
    assert config.evaluation.choice_epsilon_value is None
    assert config.evaluation.free_form_epsilon == pytest.approx(1e-2)
    assert config.roles.describe_predicates == "template"
    assert config.validate() is config


@pytest.mark.parametrize(
    "overrides",
    [
        {"colour": "blue"},
        {"mode": "triple"},
        {"attempts": 0},
        {"evaluation": {"choice_epsilon": "wide"}},
        {"evaluation": {"choice_epsilon": -1}},
        {"evaluation": {"free_form_epsilon": -0.5}},
        {"concurrency": {"max_in_flight": 0}},
        {"dataset": {"paths": "x"}},
        {"roles": {"narrator": "vl"}},
        {"endpoints": {"x": {"kind": "audio", "dialect": "mock"}}},
        {"endpoints": {"x": {"kind": "text-only", "dialect": "openai"}}},
        {"endpoints": ["vl"]},
    ],
)
def test_invalid_configurations(tmp_path: Path, overrides: dict) -> None:
    with pytest.raises(ConfigError):
        RunConfig.from_dict(run_config_data(tmp_path, **overrides))


def test_numeric_choice_epsilon(make_config: Callable[..., RunConfig]) -> None:
    config = make_config(evaluation={"choice_epsilon": "0.1"})

    assert config.evaluation.choice_epsilon_value == pytest.approx(0.1)


def test_validate_requires_roles_for_the_mode(make_config: Callable[..., RunConfig]) -> None:
    single_only = make_config(mode="single", roles={"single": "vl"})
    assert single_only.required_roles() == ["single"]
    single_only.validate()

    with pytest.raises(ConfigError, match="no endpoint assigned to role 'interpreter'"):
        make_config(mode="multi", roles={"solver": "lm"}).validate()
    with pytest.raises(ConfigError, match="unknown endpoint"):
        make_config(roles={"interpreter": "vl", "solver": "gone", "single": "vl"}).validate()


def test_validate_checks_endpoint_kinds(make_config: Callable[..., RunConfig]) -> None:
    with pytest.raises(ConfigError, match="vision-language"):
        make_config(roles={"interpreter": "lm", "solver": "lm", "single": "vl"}).validate()
    with pytest.raises(ConfigError, match="embedding"):
        make_config(roles={"interpreter": "vl", "solver": "lm", "single": "vl", "embed": "lm"}).validate()


def test_digest_tracks_only_result_fields(make_config: Callable[..., RunConfig], tmp_path: Path) -> None:
    base = make_config()

    same = make_config(run_id="other", concurrency={"max_in_flight": 1, "problem_workers": 1}, cache={"enabled": False})
    moved = RunConfig.from_dict(run_config_data(tmp_path / "elsewhere"))

    assert base.digest() == same.digest() == moved.digest()
    assert base.digest() != make_config(attempts=5).digest()
    assert base.digest() != make_config(decoding={"interpreter": 0.7}).digest()
    assert base.digest() != base.merge({"endpoints": {"lm": {"temperature": 0.3}}}).digest()


def test_merge_keeps_unrelated_fields(make_config: Callable[..., RunConfig]) -> None:
    config = make_config().merge({"attempts": 5, "dataset": {"strict": True}})

    assert config.attempts == 5
    assert config.dataset.strict is True
    assert config.roles.solver == "lm"


def test_cache_directory(make_config: Callable[..., RunConfig], tmp_path: Path) -> None:
    assert make_config().cache_directory() == tmp_path / "runs" / ".cache"
    assert make_config(cache={"directory": str(tmp_path / "c")}).cache_directory() == tmp_path / "c"


def test_data_root_falls_back_to_environment(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    monkeypatch.delenv(DATA_ROOT_ENV, raising=False)
    assert DatasetConfig().resolved_root() is None

    monkeypatch.setenv(DATA_ROOT_ENV, str(tmp_path))
    assert DatasetConfig().resolved_root() == tmp_path
    assert DatasetConfig(data_root="/data").resolved_root() == Path("/data")


# ------------------------------------------------------------------ loading
def test_load_yaml_with_env_overrides(tmp_path: Path) -> None:
    config_file = tmp_path / "run.yaml"
    config_file.write_text(yaml.safe_dump(run_config_data(tmp_path / "runs")), encoding="utf-8")
    env_file = tmp_path / ".env"
    env_file.write_text(
        "# local overrides\nATTEMPTS=5\nEVALUATION__CHOICE_EPSILON=0.01\nDATASET__STRICT=true\nnot a pair\n",
        encoding="utf-8",
    )

    config = load_run_config(config_file, env_file)

    assert config.attempts == 5
    assert config.evaluation.choice_epsilon_value == pytest.approx(0.01)
    assert config.dataset.strict is True
    assert config.roles.interpreter == "vl"
    assert load_run_config(config_file, tmp_path / "absent.env").attempts == 3


def test_load_errors(tmp_path: Path) -> None:
    with pytest.raises(ConfigError, match="not found"):
        load_run_config(tmp_path / "absent.yaml")

    broken = tmp_path / "broken.yaml"
    broken.write_text("mode: [single\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(broken)

    listing = tmp_path / "list.yaml"
    listing.write_text("- single\n- multi\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="mapping"):
        load_run_config(listing)


def test_empty_yaml_gives_defaults(tmp_path: Path) -> None:
    empty = tmp_path / "empty.yaml"
    empty.write_text("", encoding="utf-8")

    config = load_run_config(empty)

    assert config.mode is PipelineMode.BOTH
    assert config.endpoints == {}
