"""Benchmark ingestion into canonical ``Problem`` records, plus bundled fixtures."""

from pathlib import Path

from .loaders import ADAPTERS, load_problems, natural_key, parse_kind, split_choices, validate_problem
from .manifest import MANIFESTS, DatasetManifest, get_manifest

FIXTURES_DIR = Path(__file__).with_name("fixtures")
FIXTURE_PROBLEMS = FIXTURES_DIR / "problems.jsonl"
FIXTURE_PREDICATES_2405 = FIXTURES_DIR / "predicates_2405.txt"

__all__ = [
    "ADAPTERS",
    "DatasetManifest",
    "FIXTURES_DIR",
    "FIXTURE_PREDICATES_2405",
    "FIXTURE_PROBLEMS",
    "MANIFESTS",
    "get_manifest",
    "load_problems",
    "natural_key",
    "parse_kind",
    "split_choices",
    "validate_problem",
]
