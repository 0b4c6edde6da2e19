"""Exporter test fixtures; heavy lifting lives in tiny_encoder.py."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for `tiny_encoder`

from tiny_encoder import build_tiny_encoder, write_manifest


@pytest.fixture(scope="session")
def encoder_dir(tmp_path_factory) -> Path:
    return build_tiny_encoder(tmp_path_factory.mktemp("encoder") / "tiny")


@pytest.fixture(scope="session")
def shallow_encoder_dir(tmp_path_factory) -> Path:
    return build_tiny_encoder(tmp_path_factory.mktemp("encoder2") / "shallow", layers=2)


@pytest.fixture()
def manifest_path(tmp_path) -> Path:
    path = tmp_path / "contexts.jsonl"
    write_manifest(path)
    return path
