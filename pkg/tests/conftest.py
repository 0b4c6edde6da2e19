"""Pytest fixtures for the main suite; helpers live in pipeline_fixtures."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for pipeline_fixtures/reference

from pipeline_fixtures import BENCH, BenchRun, build_bench


@pytest.fixture(scope="session")
def bench(tmp_path_factory) -> BenchRun:
    return build_bench("da", BENCH["gen_seed"], tmp_path_factory.mktemp("bench_a"))


@pytest.fixture(scope="session")
def bench_b(tmp_path_factory) -> BenchRun:
    return build_bench("db", 19, tmp_path_factory.mktemp("bench_b"))
