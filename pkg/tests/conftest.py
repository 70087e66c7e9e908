"""
Pytest configuration for the behavioral game theory bench tests
"""

import os
import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO_ROOT))

from game import Game  # noqa: E402
from models.registry import default_registry  # noqa: E402

FIXTURES_DIR = REPO_ROOT / "fixtures"


def pytest_configure(config):
    """Configure pytest with custom markers"""
    config.addinivalue_line(
        "markers", "unit: Fast tests of a single module"
    )
    config.addinivalue_line(
        "markers", "integration: End-to-end command runs writing reports to a temp directory"
    )
    config.addinivalue_line(
        "markers", "slow: Generate-and-recover experiments taking more than a few seconds"
    )


def pytest_collection_modifyitems(config, items):
    """Modify test collection to add markers automatically"""
    for item in items:
        if "test_commands" in item.nodeid or "integration" in item.nodeid:
            item.add_marker(pytest.mark.integration)
        elif "slow" not in [mark.name for mark in item.iter_markers()]:
            item.add_marker(pytest.mark.unit)


def pytest_runtest_setup(item):
    """Skip slow tests unless BGT_RUN_SLOW=1"""
    if "slow" in [mark.name for mark in item.iter_markers()] and os.getenv("BGT_RUN_SLOW") != "1":
        pytest.skip("slow test - set BGT_RUN_SLOW=1 to run")


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES_DIR


@pytest.fixture(scope="session")
def games():
    """Every fixture game keyed by id"""
    loaded = {}
    for path in sorted((FIXTURES_DIR / "games").glob("*.json")):
        game = Game.from_json(path)
        loaded[game.id] = game
    return loaded


@pytest.fixture(scope="session")
def demo_manifest():
    return FIXTURES_DIR / "demo" / "manifest.json"


@pytest.fixture(scope="session")
def registry():
    return default_registry()
