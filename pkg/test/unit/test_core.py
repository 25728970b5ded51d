"""Unit tests for vectors, controls, trajectories and the integrator."""

import math

import numpy as np
import pytest

from grsreach.core import (
    ControlAffineField,
    GuardRegion,
    PiecewiseConstantControl,
    Simulator,
    Trajectory,
    as_vector,
    evaluate_velocity,
    integrate,
    lipschitz_ratios,
    substep_times,
)
from grsreach.errors import (
    DimensionError,
    DomainExitError,
    InadmissibleInputError,
    ParameterError,
)


class TestAsVector:
    """Test shape coercion."""

    def test_scalar_for_size_one(self):
        """Test a scalar for a one-entry vector."""
        assert as_vector(2.5, 1).tolist() == [2.5]

    def test_shape_mismatch(self):
        """Test a vector of the wrong size."""
        with pytest.raises(DimensionError, match="expected \\(3,\\)"):
            as_vector([1.0, 2.0], 3)


class TestControlAffineField:
    """Test the black-box field wrapper."""

    def test_rejects_zero_dimension(self):
        """Test a zero dimension."""
        with pytest.raises(DimensionError):
            ControlAffineField(d=0, m=1, f=None, G=None)

    def test_rejects_negative_lipschitz(self):
        """Test a negative Lipschitz bound."""
        with pytest.raises(ParameterError):
            ControlAffineField(d=1, m=1, f=None, G=None, L_f=-1.0)

    def test_velocity(self, identity_field):
        """Test f(x) + G(x)u."""
        v = evaluate_velocity(identity_field, [3.0, 4.0], [0.6, 0.0])
        assert v.tolist() == [0.6, 0.0]

    def test_velocity_rejects_large_input(self, identity_field):
        """Test an input outside the unit ball."""
        with pytest.raises(InadmissibleInputError):
            evaluate_velocity(identity_field, [0.0, 0.0], [1.0, 1.0])

    def test_lipschitz_ratio_of_rotation(self):
        """Test the observed ratios of a rotation field."""
        A = np.array([[0.0, 1.0], [-1.0, 0.0]])
        field = ControlAffineField(
            d=2, m=1, f=lambda x: A @ x, G=lambda x: np.ones((2, 1)),
        )
        points = np.array([[0.0, 0.0], [1.0, 0.0], [0.3, -2.0]])
        ratio_f, ratio_G = lipschitz_ratios(field, points)
        assert ratio_f == pytest.approx(1.0)
        assert ratio_G == 0.0


class TestPiecewiseConstantControl:
    """Test piecewise-constant controls."""

    def test_value_at(self):
        """Test the piece in force at a time."""
        control = PiecewiseConstantControl(
            [0.0, 1.0, 2.0], [[0.5, 0.0], [0.0, -0.5]]
        )
        assert control.value_at(0.5).tolist() == [0.5, 0.0]
        assert control.value_at(1.0).tolist() == [0.0, -0.5]
        assert control.value_at(2.0).tolist() == [0.0, -0.5]

    def test_value_outside_span(self):
        """Test a time outside the control span."""
        control = PiecewiseConstantControl.constant([0.1], 0.0, 1.0)
        with pytest.raises(ParameterError):
            control.value_at(1.5)

    def test_pieces_are_clipped(self):
        """Test pieces clipped to a window."""
        control = PiecewiseConstantControl([0.0, 1.0, 2.0], [[0.1], [0.2]])
        pieces = list(control.pieces(0.5, 1.5))
        assert [(lo, hi) for lo, hi, _ in pieces] == [(0.5, 1.0), (1.0, 1.5)]

    def test_breakpoints_must_increase(self):
        """Test non-increasing breakpoints."""
        with pytest.raises(ParameterError):
            PiecewiseConstantControl([0.0, 0.0], [[0.1]])

    def test_inadmissible_piece(self):
        """Test a piece outside the unit ball."""
        with pytest.raises(InadmissibleInputError, match="piece 1"):
            PiecewiseConstantControl([0.0, 1.0, 2.0], [[0.1], [1.5]])


class TestTrajectory:
    """Test trajectory containers."""

    def test_gap_larger_than_substep(self):
        """Test a sample gap larger than the substep."""
        with pytest.raises(ParameterError, match="gap"):
            Trajectory([0.0, 0.5], [[0.0], [1.0]], [[0.0], [0.0]], 0.1)

    def test_concatenate_keeps_shared_sample_once(self):
        """Test that the shared sample is kept once."""
        first = Trajectory([0.0, 0.1], [[0.0], [1.0]], [[0.1], [0.1]], 0.1)
        second = Trajectory([0.1, 0.2], [[1.0], [2.0]], [[0.2], [0.2]], 0.1)
        joined = Trajectory.concatenate([first, second])
        assert joined.times.tolist() == [0.0, 0.1, 0.2]
        assert joined.controls[:, 0].tolist() == [0.1, 0.2, 0.2]

    def test_window(self):
        """Test slicing a trajectory by time."""
        traj = Trajectory(
            [0.0, 0.1, 0.2, 0.3], np.zeros((4, 1)), np.zeros((4, 1)), 0.1
        )
        assert traj.window(0.1, 0.2).times.tolist() == [0.1, 0.2]


class TestIntegrate:
    """Test the fixed-step integrator."""

    def test_grid_ends_exactly(self):
        """Test that the last step is shortened to end at t1."""
        times = substep_times(0.0, 1.0, 0.3)
        assert len(times) == 5
        assert times[-1] == 1.0

    def test_constant_velocity(self, identity_field):
        """Test a constant velocity field."""
        control = PiecewiseConstantControl.constant([0.5, 0.0], 0.0, 1.0)
        traj = integrate(identity_field, control, [0.0, 0.0], (0.0, 1.0), 0.1)
        assert traj.final_state == pytest.approx([0.5, 0.0], abs=1e-12)
        assert traj.final_time == 1.0

    def test_breakpoints_are_samples(self, identity_field):
        """Test that control breakpoints are samples."""
        control = PiecewiseConstantControl(
            [0.0, 0.25, 1.0], [[0.5, 0.0], [0.0, 0.5]]
        )
        traj = integrate(identity_field, control, [0.0, 0.0], (0.0, 1.0), 0.1)
        assert 0.25 in traj.times.tolist()
        assert traj.final_state == pytest.approx([0.125, 0.375], abs=1e-12)

    def test_exponential_decay(self):
        """Test RK4 accuracy on x' = -x."""
        field = ControlAffineField(
            d=1, m=1, f=lambda x: -x, G=lambda x: np.ones((1, 1)),
        )
        control = PiecewiseConstantControl.constant([0.0], 0.0, 1.0)
        traj = integrate(field, control, [2.0], (0.0, 1.0), 0.01)
        assert traj.final_state[0] == pytest.approx(2.0 * math.exp(-1), abs=1e-8)

    def test_empty_span_is_one_sample(self, identity_field):
        """Test an empty time span."""
        control = PiecewiseConstantControl.constant([0.5, 0.0], 0.0, 1.0)
        traj = integrate(identity_field, control, [1.0, 1.0], (0.0, 0.0), 0.1)
        assert len(traj) == 1

    def test_control_must_cover_span(self, identity_field):
        """Test a control that ends too early."""
        control = PiecewiseConstantControl.constant([0.5, 0.0], 0.0, 1.0)
        with pytest.raises(ParameterError, match="does not cover"):
            integrate(identity_field, control, [0.0, 0.0], (0.0, 2.0), 0.1)

    def test_guard_exit(self, identity_field):
        """Test leaving the guard region."""
        control = PiecewiseConstantControl.constant([1.0, 0.0], 0.0, 1.0)
        guard = GuardRegion(np.zeros(2), 0.55)
        with pytest.raises(DomainExitError) as excinfo:
            integrate(identity_field, control, [0.0, 0.0], (0.0, 1.0), 0.1, guard)
        assert excinfo.value.exit_time == pytest.approx(0.6)
        assert excinfo.value.radius == 0.55


class TestSimulator:
    """Test the plant handle."""

    def test_hold_advances(self, identity_field):
        """Test that hold advances time and state."""
        plant = Simulator(identity_field, [0.0, 0.0], substep=0.01)
        x = plant.hold([0.5, 0.0], 0.1)
        assert x == pytest.approx([0.05, 0.0])
        assert plant.time == 0.1
        assert plant.rk_steps == 10

    def test_state_is_a_copy(self, identity_field):
        """Test that state returns a copy."""
        plant = Simulator(identity_field, [0.0, 0.0], substep=0.01)
        plant.state[0] = 9.0
        assert plant.state.tolist() == [0.0, 0.0]

    def test_records_control_and_trajectory(self, identity_field):
        """Test the recorded control and trajectory."""
        plant = Simulator(identity_field, [0.0, 0.0], substep=0.01)
        assert plant.control() is None
        assert len(plant.trajectory()) == 1
        plant.hold([0.5, 0.0], 0.05)
        plant.hold([0.0, 0.5], 0.1)
        control = plant.control()
        assert control.n_pieces == 2
        assert control.breakpoints.tolist() == [0.0, 0.05, 0.1]
        traj = plant.trajectory()
        assert traj.final_time == 0.1
        assert traj.final_state == pytest.approx([0.025, 0.025])
