"""Fixtures for integration tests."""

import pytest

from grsreach.casestudy import DEFAULT_TARGET_ANGLES, run_scenario
from grsreach.run_manager import OUT_ENV


@pytest.fixture(scope="session")
def scenario_runs():
    """Scenario A and B runs at every default target angle."""
    return {
        (sid, angle): run_scenario(sid, angle)
        for sid in ('A', 'B')
        for angle in DEFAULT_TARGET_ANGLES
    }


@pytest.fixture(scope="session")
def deviation_runs(scenario_runs):
    """One run per scenario at 30 degrees."""
    runs = {sid: scenario_runs[(sid, 30.0)] for sid in ('A', 'B')}
    for sid in ('C', 'D'):
        runs[sid] = run_scenario(sid, 30.0)
    return runs


@pytest.fixture
def out_root(tmp_path, monkeypatch):
    """Point GRSREACH_OUT at a temporary directory."""
    root = tmp_path / "runs"
    monkeypatch.setenv(OUT_ENV, str(root))
    return root
