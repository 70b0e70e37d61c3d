"""Pytest configuration for lozvol tests."""

import json
import sys
from pathlib import Path

import pytest

# Add src directory to Python path for imports
src_path = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_path))


@pytest.fixture(autouse=True)
def default_settings():
    """Every test starts from the shipped defaults."""
    from lozvol.defaults import get_settings_manager
    manager = get_settings_manager()
    manager.reset()
    yield manager
    manager.reset()


@pytest.fixture
def write_json(tmp_path):
    """Write a JSON document into the test's tmp dir and return its path."""
    def _write(name: str, data) -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path
    return _write


@pytest.fixture
def l1_instance():
    """l1 on R^3 with E = span{e1 + e2, e3}."""
    return {
        "name": "l1-3",
        "dim": 3,
        "norm": {"kind": "lp", "p": 1, "weights": [1, 1, 1]},
        "subspace": [[1, 1, 0], [0, 0, 1]],
        "seed": 0,
    }
