"""Shared paths for the test suite."""

import pathlib

import pytest

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURE_PATHS = sorted((ROOT / "fixtures").glob("*.json"))
CONFIG_DIR = ROOT / "configs"


@pytest.fixture(scope="session")
def repo_root() -> pathlib.Path:
    return ROOT
