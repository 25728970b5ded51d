"""Pytest configuration and fixtures for grsreach tests."""

from unittest.mock import MagicMock

import numpy as np
import pytest

from grsreach.casestudy import build_identity, build_quadrotor
from grsreach.core import ControlAffineField, Simulator
from grsreach.learner import CycleConfig
from grsreach.proxy import LocalData, derive_proxy, proxy_from_local
from grsreach.run_manager import RunManager
from grsreach.synthesizer import SynthesisConfig, synthesize


@pytest.fixture
def identity_field():
    """x' = u on R^2 with c = 1."""
    return build_identity(2, L_f=0.0, L_G=1.0)


@pytest.fixture
def drift_field():
    """x' = (0.2, 0) + u on R^2."""
    return ControlAffineField(
        d=2, m=2,
        f=lambda x: np.array([0.2, 0.0]),
        G=lambda x: np.eye(2),
        L_f=0.0, L_G=1.0, name='drift',
    )


@pytest.fixture
def underactuated_field():
    """x' = (u, 0): only the first axis is actuated."""
    return ControlAffineField(
        d=2, m=1,
        f=lambda x: np.zeros(2),
        G=lambda x: np.array([[1.0], [0.0]]),
        L_f=0.0, L_G=1.0, name='underactuated',
    )


@pytest.fixture
def quadrotor_field():
    return build_quadrotor()


@pytest.fixture
def unit_proxy():
    """Drift-free proxy with a = 0, b = 1, c = 1."""
    return derive_proxy(np.zeros(2), np.eye(2), 0.5, 0.5)


@pytest.fixture
def quadrotor_local(quadrotor_field):
    return LocalData.from_field(quadrotor_field, np.zeros(2))


@pytest.fixture
def quadrotor_proxy(quadrotor_local):
    return proxy_from_local(quadrotor_local)


@pytest.fixture
def identity_cycle():
    return CycleConfig(dt=0.01, eps=0.1, k=1, m=2)


@pytest.fixture
def identity_local(identity_field):
    return LocalData.from_field(identity_field, np.zeros(2))


@pytest.fixture
def identity_result(identity_field, identity_local, identity_cycle):
    """algorithm1 run from the origin to (0.5, 0) on x' = u."""
    plant = Simulator(identity_field, np.zeros(2), substep=0.0005)
    cfg = SynthesisConfig(
        target=np.array([0.5, 0.0]), T=1.0, cycle=identity_cycle,
    )
    return synthesize(plant, identity_local, cfg)


@pytest.fixture
def manager(tmp_path):
    """RunManager writing under a temporary output root."""
    return RunManager(out_root=tmp_path / "runs")


@pytest.fixture
def mock_args():
    """Create a mock args object."""
    args = MagicMock()
    args.config = None
    args.scenario = None
    args.T = None
    args.samples = None
    args.out = None
    args.angle = None
    args.variant = None
    args.jobs = 1
    args.record_runtime = False
    args.suite = 'all'
    args.tolerance_scale = 1.0
    return args
