"""Unit tests for the proxy system and its reachable-set queries."""

import math

import numpy as np
import pytest

from grsreach.errors import (
    DegenerateActuationError,
    InadmissibleInputError,
    ParameterError,
    ProxyDomainError,
    UnreachableDirectionError,
)
from grsreach.proxy import (
    RadiusVariant,
    collinearity_residual,
    derive_proxy,
    early_arrival_margins,
    grs_boundary,
    integrate_proxy,
    learning_radius,
    min_travel,
    proxy_velocity,
    radial_closed_form,
    scaling_residual,
    sweep_endpoints,
    sweep_paths,
    unique_boundary_control,
    unit_directions,
)


class TestDeriveProxy:
    """Test construction of (a, b, c) from local data."""

    def test_quadrotor_constants(self, quadrotor_proxy):
        """Test a, b and c of the quadrotor."""
        assert quadrotor_proxy.b == pytest.approx(111.11, abs=0.01)
        assert quadrotor_proxy.c == 2.0
        assert quadrotor_proxy.a == pytest.approx([-8.727, 13.090], abs=0.01)
        assert quadrotor_proxy.radius == pytest.approx(55.555, abs=0.01)

    def test_identity(self, unit_proxy):
        """Test the proxy of x' = u."""
        assert unit_proxy.b == pytest.approx(1.0)
        assert unit_proxy.c == 1.0
        assert unit_proxy.drift_free

    def test_b_is_smallest_singular_value(self):
        """Test b against the smallest singular value."""
        p = derive_proxy(np.zeros(2), np.diag([2.0, 0.5]), 1.0, 0.0)
        assert p.b == pytest.approx(0.5)

    def test_zero_actuation(self):
        """Test a zero actuation matrix."""
        with pytest.raises(DegenerateActuationError):
            derive_proxy(np.zeros(2), np.zeros((2, 2)), 1.0, 1.0)

    def test_zero_lipschitz_sum(self):
        """Test L_f + L_G = 0."""
        with pytest.raises(ParameterError, match="positive"):
            derive_proxy(np.zeros(2), np.eye(2), 0.0, 0.0)

    def test_underactuated_image(self):
        """Test the image basis of a single input."""
        p = derive_proxy(np.zeros(2), np.array([[1.0], [0.0]]), 0.0, 1.0)
        assert p.image_basis.shape == (2, 1)
        assert p.project(np.array([3.0, 4.0])) == pytest.approx([3.0, 0.0])


class TestProxyVelocity:
    """Test the proxy right-hand side."""

    def test_at_origin(self, unit_proxy):
        """Test the proxy velocity at x0."""
        assert proxy_velocity(unit_proxy, [0.0, 0.0], [1.0, 0.0]).tolist() == [1.0, 0.0]

    def test_quadrotor_at_origin(self, quadrotor_proxy):
        """Test the quadrotor proxy velocity at x0."""
        v = proxy_velocity(quadrotor_proxy, [0.0, 0.0], [1.0, 0.0])
        assert v == pytest.approx([102.38, 13.09], abs=0.02)

    def test_drift_only_on_edge_of_B(self):
        """Test that only the drift remains on the edge of B."""
        p = derive_proxy(np.array([0.5, 0.0]), np.eye(2), 0.5, 0.5)
        assert proxy_velocity(p, [1.0, 0.0], [0.0, 1.0]).tolist() == [0.5, 0.0]

    def test_outside_B(self, unit_proxy):
        """Test a state outside B."""
        with pytest.raises(ProxyDomainError):
            proxy_velocity(unit_proxy, [1.5, 0.0], [1.0, 0.0])

    def test_direction_outside_image(self):
        """Test a direction outside Im G."""
        p = derive_proxy(np.zeros(2), np.array([[1.0], [0.0]]), 0.0, 1.0)
        with pytest.raises(InadmissibleInputError, match="Im G"):
            proxy_velocity(p, [0.0, 0.0], [0.0, 1.0])


class TestIntegrateProxy:
    """Test proxy flows under constant boundary inputs."""

    def test_unit_horizon(self, unit_proxy):
        """Test the flow at T = 1."""
        traj = integrate_proxy(unit_proxy, [1.0, 0.0], 1.0)
        assert traj.final_state == pytest.approx([1.0 - math.exp(-1.0), 0.0], abs=1e-6)
        assert traj.final_state[0] == pytest.approx(0.632, abs=1e-3)

    def test_long_horizon_approaches_edge(self, unit_proxy):
        """Test that a long flow approaches the edge of B."""
        traj = integrate_proxy(unit_proxy, [0.0, 1.0], 20.0)
        assert traj.final_state[1] == pytest.approx(1.0, abs=1e-8)

    def test_pure_drift_limit(self):
        """Test the drift-only limit."""
        p = derive_proxy(np.array([1.0, 0.0]), 1e-12 * np.eye(2), 0.5, 0.5)
        traj = integrate_proxy(p, [0.0, 1.0], 2.0)
        assert traj.final_state == pytest.approx([2.0, 0.0], abs=1e-9)

    def test_zero_horizon(self, unit_proxy):
        """Test a zero horizon."""
        traj = integrate_proxy(unit_proxy, [1.0, 0.0], 0.0)
        assert len(traj) == 1
        assert traj.final_state.tolist() == [0.0, 0.0]

    def test_boundary_input_needs_unit_norm(self, unit_proxy):
        """Test a boundary input shorter than one."""
        with pytest.raises(InadmissibleInputError, match="unit norm"):
            integrate_proxy(unit_proxy, [0.5, 0.0], 1.0)

    def test_closed_form(self):
        """Test the radial closed form."""
        assert radial_closed_form(2.0, 1.0, math.log(2.0)) == pytest.approx(1.0)
        assert radial_closed_form(2.0, 1.0, 0.0) == 0.0
        assert radial_closed_form(3.0, 1e-15, 1.0) == 3.0

    def test_matches_closed_form(self, unit_proxy):
        """Test the flow against the closed form."""
        traj = integrate_proxy(unit_proxy, [0.6, 0.8], 0.7)
        assert float(np.linalg.norm(traj.final_state)) == pytest.approx(
            radial_closed_form(1.0, 1.0, 0.7), abs=1e-10
        )


class TestGrsBoundary:
    """Test sampling of the reachable-set boundary."""

    def test_drift_free_boundary_is_a_circle(self, unit_proxy):
        """Test a circular boundary without drift."""
        boundary = grs_boundary(unit_proxy, 1.0, n_dirs=8)
        assert len(boundary) == 8
        assert boundary.radii() == pytest.approx(
            np.full(8, 1.0 - math.exp(-1.0)), abs=1e-6
        )
        assert boundary.endpoints[2] == pytest.approx([0.0, 0.632], abs=1e-3)
        assert not boundary.clamped.any()

    def test_too_few_directions(self, unit_proxy):
        """Test fewer than eight directions."""
        with pytest.raises(ParameterError, match="at least 8"):
            grs_boundary(unit_proxy, 1.0, n_dirs=4)

    def test_zero_horizon(self, unit_proxy):
        """Test a zero horizon."""
        boundary = grs_boundary(unit_proxy, 0.0, n_dirs=8)
        assert boundary.radii().tolist() == [0.0] * 8

    def test_quadrotor_boundary(self, quadrotor_proxy):
        """Test the quadrotor boundary at T = 0.25."""
        radii = grs_boundary(quadrotor_proxy, 0.25).radii()
        assert radii.min() > 16.0
        assert radii.max() < 27.0
        assert radii.max() - radii.min() > 1.0

    def test_sweep_matches_single_path(self, quadrotor_proxy):
        """Test that the batched sweep matches one path."""
        u_hat = np.array([0.6, 0.8])
        endpoints, _ = sweep_endpoints(quadrotor_proxy, u_hat.reshape(1, 2), 0.25)
        single = integrate_proxy(quadrotor_proxy, u_hat, 0.25).final_state
        assert endpoints[0] == pytest.approx(single, abs=1e-12)


class TestUnitDirections:
    """Test direction sampling in Im G(x0)."""

    def test_one_dimensional_image(self):
        """Test directions on a one-dimensional image."""
        p = derive_proxy(np.zeros(2), np.array([[2.0], [0.0]]), 0.0, 1.0)
        labels, directions = unit_directions(p, 8)
        assert labels.tolist() == [0.0, 1.0]
        assert directions == pytest.approx(np.array([[1.0, 0.0], [-1.0, 0.0]]))

    def test_three_dimensional_image(self):
        """Test directions on the unit sphere in three dimensions."""
        p = derive_proxy(np.zeros(3), np.eye(3), 0.5, 0.5)
        _, directions = unit_directions(p, 50)
        assert directions.shape == (50, 3)
        assert np.linalg.norm(directions, axis=1) == pytest.approx(np.ones(50))


class TestUniqueBoundaryControl:
    """Test recovery of the boundary input from its endpoint."""

    def test_drift_free(self, unit_proxy):
        """Test the boundary control without drift."""
        assert unique_boundary_control(unit_proxy, [3.0, 0.0], 1.0) == pytest.approx(
            [1.0, 0.0]
        )

    def test_recovers_quadrotor_input(self, quadrotor_proxy):
        """Test recovering the input of a quadrotor boundary point."""
        y = integrate_proxy(quadrotor_proxy, [0.0, 1.0], 0.25).final_state
        u = unique_boundary_control(quadrotor_proxy, y, 0.25)
        assert u == pytest.approx([0.0, 1.0], abs=1e-6)

    def test_drift_endpoint_has_no_direction(self, quadrotor_proxy):
        """Test the point x0 + aT."""
        y = quadrotor_proxy.a * 0.25
        with pytest.raises(UnreachableDirectionError):
            unique_boundary_control(quadrotor_proxy, y, 0.25)

    def test_outside_image(self):
        """Test a target off the image of G."""
        p = derive_proxy(np.zeros(2), np.array([[1.0], [0.0]]), 0.0, 1.0)
        with pytest.raises(UnreachableDirectionError, match="outside"):
            unique_boundary_control(p, [0.0, 1.0], 1.0)


class TestLearningRadius:
    """Test the learning radius r(k, dt)."""

    @pytest.mark.parametrize("variant", list(RadiusVariant))
    def test_drift_free_is_closed_form(self, unit_proxy, variant):
        """Test the radius without drift."""
        r = learning_radius(unit_proxy, 2, 0.01, 2, variant)
        assert r == pytest.approx(radial_closed_form(1.0, 1.0, 0.06), abs=1e-9)

    @pytest.mark.parametrize("k,dt,expected", [
        (5, 1e-4, 0.18),
        (40, 1.5e-3, 18.83),
    ])
    def test_quadrotor_raw_radius(self, quadrotor_proxy, k, dt, expected):
        """Test the raw quadrotor radius."""
        r = learning_radius(quadrotor_proxy, k, dt, 2)
        assert abs(r - expected) <= 0.15 * expected

    def test_drift_subtracted_is_smaller(self, quadrotor_proxy):
        """Test that subtracting drift shrinks the radius."""
        raw = learning_radius(quadrotor_proxy, 5, 1e-4, 2, RadiusVariant.RAW)
        ds = learning_radius(
            quadrotor_proxy, 5, 1e-4, 2, RadiusVariant.DRIFT_SUBTRACTED
        )
        assert ds < raw

    def test_invalid_k(self, unit_proxy):
        """Test k below one."""
        with pytest.raises(ParameterError):
            learning_radius(unit_proxy, 0.5, 0.01, 2)

    def test_min_travel_drift_free(self, unit_proxy):
        """Test the minimum travel without drift."""
        assert min_travel(unit_proxy, 0.03) == pytest.approx(
            radial_closed_form(1.0, 1.0, 0.03)
        )


class TestProxyProperties:
    """Test the structural properties of proxy flows."""

    def test_collinearity(self, quadrotor_proxy):
        """Test that one drift-subtracted path stays on its line."""
        u_hat = np.array([math.cos(0.5), math.sin(0.5)])
        traj = integrate_proxy(quadrotor_proxy, u_hat, 0.25)
        residual = collinearity_residual(
            quadrotor_proxy, traj.times, traj.states, u_hat
        )
        assert residual <= 1e-8

    def test_collinearity_sweep(self, quadrotor_proxy):
        """Test collinearity over a batch of directions."""
        _, directions = unit_directions(quadrotor_proxy, 16)
        times, states = sweep_paths(quadrotor_proxy, directions, 0.25)
        residual = collinearity_residual(
            quadrotor_proxy, times, states, directions
        )
        assert residual <= 1e-8

    def test_scaling_without_drift(self, quadrotor_proxy):
        """Test that gain k equals running k times longer without drift."""
        free = derive_proxy(
            np.zeros(2), quadrotor_proxy.image_basis * quadrotor_proxy.b,
            1.0, 1.0,
        )
        assert scaling_residual(free, [1.0, 0.0], 5.0, 0.25) <= 1e-7

    def test_no_early_arrival(self, quadrotor_proxy):
        """Test that boundary points are not reached before T."""
        rows = early_arrival_margins(quadrotor_proxy, [1.0, 0.0], 0.25)
        assert len(rows) == 9
        for t, gap, margin in rows:
            assert 0 < t < 0.25
            assert gap.shape == (1,)
            assert np.all(gap >= margin)
