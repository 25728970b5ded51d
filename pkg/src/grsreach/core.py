"""Vectors, piecewise-constant controls, trajectories and the fixed-step
integrator shared by the true plant and the proxy system.

All dynamics handled here are control-affine, x' = f(x) + G(x) u, and
autonomous within a control piece, so a piece is integrated as an
autonomous right-hand side.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from grsreach.errors import (
    DimensionError,
    DomainExitError,
    InadmissibleInputError,
    ParameterError,
)

logger = logging.getLogger(__name__)

# Slack on |u| <= 1 for inputs produced by floating point normalisation.
ADMISSIBLE_TOL = 1e-12


def as_vector(value, size: int, what: str = "vector") -> np.ndarray:
    """Return value as a float array of shape (size,)."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0 and size == 1:
        arr = arr.reshape(1)
    if arr.shape != (size,):
        raise DimensionError(
            f"{what} has shape {arr.shape}, expected ({size},)"
        )
    return arr


def check_admissible(u: np.ndarray, what: str = "input") -> None:
    """Raise if u lies outside the closed unit ball."""
    norm = float(np.linalg.norm(u))
    if norm > 1.0 + ADMISSIBLE_TOL:
        raise InadmissibleInputError(f"{what} has norm {norm:.12g} > 1")


@dataclass(frozen=True)
class ControlAffineField:
    """Black-box control-affine dynamics x' = f(x) + G(x) u.

    f maps R^d to R^d and G maps R^d to R^{d x m}; L_f and L_G are the
    declared Lipschitz bounds of f and G.
    """
    d: int
    m: int
    f: Callable[[np.ndarray], np.ndarray]
    G: Callable[[np.ndarray], np.ndarray]
    L_f: float = 0.0
    L_G: float = 0.0
    name: str = ""

    def __post_init__(self):
        if self.d < 1 or self.m < 1:
            raise DimensionError(
                f"field dimensions must be positive, got d={self.d}, m={self.m}"
            )
        if self.L_f < 0 or self.L_G < 0:
            raise ParameterError("Lipschitz bounds must be nonnegative")

    def drift(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.f(x), dtype=float).reshape(self.d)

    def actuation(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.G(x), dtype=float).reshape(self.d, self.m)


def evaluate_velocity(
    field: ControlAffineField,
    x,
    u,
) -> np.ndarray:
    """Return v_x(u) = f(x) + G(x) u."""
    x = as_vector(x, field.d, "state")
    u = as_vector(u, field.m, "input")
    check_admissible(u)
    return field.drift(x) + field.actuation(x) @ u


def lipschitz_ratios(
    field: ControlAffineField,
    points: np.ndarray,
) -> tuple[float, float]:
    """Largest observed |f(x)-f(y)|/|x-y| and ||G(x)-G(y)||/|x-y| over pairs.

    A spot check of the declared bounds on a finite sample of the working
    domain; it can only ever underestimate the true constants.
    """
    points = np.asarray(points, dtype=float)
    fs = [field.drift(p) for p in points]
    Gs = [field.actuation(p) for p in points]
    ratio_f = 0.0
    ratio_G = 0.0
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            dist = float(np.linalg.norm(points[i] - points[j]))
            if dist == 0.0:
                continue
            ratio_f = max(ratio_f, float(np.linalg.norm(fs[i] - fs[j])) / dist)
            ratio_G = max(
                ratio_G, float(np.linalg.norm(Gs[i] - Gs[j], 2)) / dist
            )
    return ratio_f, ratio_G


@dataclass(frozen=True)
class PiecewiseConstantControl:
    """Control holding values[i] on [breakpoints[i], breakpoints[i+1])."""
    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        breakpoints = np.asarray(self.breakpoints, dtype=float).reshape(-1)
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if len(breakpoints) < 2:
            raise ParameterError("a control needs at least one piece")
        if values.shape[0] != len(breakpoints) - 1:
            raise DimensionError(
                f"{len(breakpoints) - 1} pieces but {values.shape[0]} values"
            )
        if np.any(np.diff(breakpoints) <= 0):
            raise ParameterError("breakpoints must be strictly increasing")
        for i, u in enumerate(values):
            check_admissible(u, f"control piece {i}")
        object.__setattr__(self, 'breakpoints', breakpoints)
        object.__setattr__(self, 'values', values)

    @classmethod
    def constant(cls, u, t_start: float, t_end: float):
        u = np.asarray(u, dtype=float).reshape(1, -1)
        return cls(np.array([t_start, t_end]), u)

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def t_start(self) -> float:
        return float(self.breakpoints[0])

    @property
    def t_end(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def n_pieces(self) -> int:
        return self.values.shape[0]

    def value_at(self, t: float) -> np.ndarray:
        """Value in force at t; the right end maps to the last piece."""
        if t < self.t_start or t > self.t_end:
            raise ParameterError(
                f"t={t} outside control span [{self.t_start}, {self.t_end}]"
            )
        idx = int(np.searchsorted(self.breakpoints, t, side='right')) - 1
        return self.values[min(idx, self.n_pieces - 1)]

    def pieces(
        self,
        t_a: float | None = None,
        t_b: float | None = None,
    ) -> Iterator[tuple[float, float, np.ndarray]]:
        """Yield (start, end, value) of every piece clipped to [t_a, t_b]."""
        t_a = self.t_start if t_a is None else t_a
        t_b = self.t_end if t_b is None else t_b
        for i in range(self.n_pieces):
            lo = max(float(self.breakpoints[i]), t_a)
            hi = min(float(self.breakpoints[i + 1]), t_b)
            if hi > lo:
                yield lo, hi, self.values[i]


@dataclass(frozen=True)
class Trajectory:
    """Ordered samples (t_i, x_i) with the input applied from each sample on."""
    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    substep: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        states = np.asarray(self.states, dtype=float)
        controls = np.asarray(self.controls, dtype=float)
        if states.ndim == 1:
            states = states.reshape(len(times), -1)
        if controls.ndim == 1:
            controls = controls.reshape(len(times), -1)
        if states.shape[0] != len(times) or controls.shape[0] != len(times):
            raise DimensionError("times, states and controls differ in length")
        if len(times) > 1:
            gaps = np.diff(times)
            if np.any(gaps <= 0):
                raise ParameterError("trajectory times must strictly increase")
            if float(gaps.max()) > self.substep * (1 + 1e-9):
                raise ParameterError(
                    "trajectory has a gap larger than its substep"
                )
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'states', states)
        object.__setattr__(self, 'controls', controls)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def d(self) -> int:
        return self.states.shape[1]

    @property
    def m(self) -> int:
        return self.controls.shape[1]

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1].copy()

    def window(self, t_a: float, t_b: float) -> 'Trajectory':
        """Samples with t_a <= t <= t_b."""
        mask = (self.times >= t_a) & (self.times <= t_b)
        return Trajectory(
            self.times[mask], self.states[mask], self.controls[mask],
            self.substep,
        )

    @classmethod
    def concatenate(cls, parts: list['Trajectory']) -> 'Trajectory':
        """Join consecutive parts; a shared boundary sample is kept once,
        carrying the input of the part that starts there."""
        if not parts:
            raise ParameterError("nothing to concatenate")
        times = [parts[0].times]
        states = [parts[0].states]
        controls = [parts[0].controls]
        for part in parts[1:]:
            if times[-1][-1] == part.times[0]:
                times[-1] = times[-1][:-1]
                states[-1] = states[-1][:-1]
                controls[-1] = controls[-1][:-1]
            times.append(part.times)
            states.append(part.states)
            controls.append(part.controls)
        return cls(
            np.concatenate(times),
            np.concatenate(states),
            np.concatenate(controls),
            max(p.substep for p in parts),
        )


@dataclass(frozen=True)
class GuardRegion:
    """Closed ball the integrated state must stay in."""
    center: np.ndarray
    radius: float

    def contains(self, x: np.ndarray) -> bool:
        return float(np.linalg.norm(x - self.center)) <= self.radius


def substep_times(t_a: float, t_b: float, h: float) -> np.ndarray:
    """Grid t_a, t_a + h, ... ending exactly at t_b; the last step may be short."""
    if h <= 0:
        raise ParameterError(f"substep must be positive, got {h}")
    n = max(1, math.ceil((t_b - t_a) / h - 1e-9))
    times = t_a + h * np.arange(n + 1, dtype=float)
    times[-1] = t_b
    return times


def rk4_step(rhs: Callable, x: np.ndarray, h: float) -> np.ndarray:
    """One classical Runge-Kutta step of the autonomous system x' = rhs(x)."""
    k1 = rhs(x)
    k2 = rhs(x + 0.5 * h * k1)
    k3 = rhs(x + 0.5 * h * k2)
    k4 = rhs(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_march(
    rhs: Callable,
    x0: np.ndarray,
    t_a: float,
    t_b: float,
    h: float,
    guard: GuardRegion | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate x' = rhs(x) from t_a to t_b on the substep grid.

    x0 may be a single state (d,) or a stack of states (n, d) marched in
    lockstep; the guard applies to single states only.
    """
    times = substep_times(t_a, t_b, h)
    x0 = np.asarray(x0, dtype=float)
    states = np.empty((len(times),) + x0.shape)
    states[0] = x0
    for i in range(1, len(times)):
        states[i] = rk4_step(rhs, states[i - 1], times[i] - times[i - 1])
        if guard is not None and not guard.contains(states[i]):
            raise DomainExitError(float(times[i]), states[i].copy(), guard.radius)
    return times, states


def integrate(
    field: ControlAffineField,
    control: PiecewiseConstantControl,
    x0,
    t_span: tuple[float, float],
    substep: float,
    guard: GuardRegion | None = None,
) -> Trajectory:
    """Integrate the field under a piecewise-constant control over t_span.

    Every substep and every control breakpoint inside t_span is a sample,
    and the final sample sits exactly at t_span[1].
    """
    t_a, t_b = float(t_span[0]), float(t_span[1])
    x = as_vector(x0, field.d, "initial state")
    if control.m != field.m:
        raise DimensionError(
            f"control has {control.m} inputs, field expects {field.m}"
        )
    if substep <= 0:
        raise ParameterError(f"substep must be positive, got {substep}")
    if t_b < t_a:
        raise ParameterError(f"empty span [{t_a}, {t_b}]")
    if t_a < control.t_start or t_b > control.t_end:
        raise ParameterError(
            f"control span [{control.t_start}, {control.t_end}] does not "
            f"cover [{t_a}, {t_b}]"
        )
    if t_b == t_a:
        return Trajectory(
            np.array([t_a]), x.reshape(1, -1),
            control.value_at(t_a).reshape(1, -1), substep,
        )

    parts = []
    for lo, hi, u in control.pieces(t_a, t_b):
        def rhs(state, u=u):
            return field.drift(state) + field.actuation(state) @ u
        times, states = rk4_march(rhs, x, lo, hi, substep, guard)
        controls = np.tile(u, (len(times), 1))
        parts.append(Trajectory(times, states, controls, substep))
        x = states[-1]
    return Trajectory.concatenate(parts)


class Simulator:
    """Handle on the true plant exposing only what an experiment observes.

    The handle advances the plant under held inputs and reports sampled
    states; the plant's f and G are never exposed.
    """

    def __init__(
        self,
        field: ControlAffineField,
        x0,
        substep: float,
        guard: GuardRegion | None = None,
        t0: float = 0.0,
    ):
        self._field = field
        self._state = as_vector(x0, field.d, "initial state").copy()
        self._time = float(t0)
        self._substep = substep
        self._guard = guard
        self._parts: list[Trajectory] = []
        self._breakpoints = [float(t0)]
        self._values: list[np.ndarray] = []
        self.rk_steps = 0

    @property
    def d(self) -> int:
        return self._field.d

    @property
    def m(self) -> int:
        return self._field.m

    @property
    def state(self) -> np.ndarray:
        return self._state.copy()

    @property
    def time(self) -> float:
        return self._time

    @property
    def substep(self) -> float:
        return self._substep

    def hold(self, u, t_end: float) -> np.ndarray:
        """Apply u on [time, t_end] and return the state at t_end."""
        u = as_vector(u, self.m, "input")
        piece = PiecewiseConstantControl.constant(u, self._time, t_end)
        traj = integrate(
            self._field, piece, self._state, (self._time, t_end),
            self._substep, self._guard,
        )
        self.rk_steps += len(traj) - 1
        self._parts.append(traj)
        self._breakpoints.append(float(t_end))
        self._values.append(u.copy())
        self._state = traj.final_state
        self._time = float(t_end)
        return self.state

    def trajectory(self) -> Trajectory:
        if not self._parts:
            return Trajectory(
                np.array([self._time]), self._state.reshape(1, -1),
                np.zeros((1, self.m)), self._substep,
            )
        return Trajectory.concatenate(self._parts)

    def control(self) -> PiecewiseConstantControl | None:
        if not self._values:
            return None
        return PiecewiseConstantControl(
            np.array(self._breakpoints), np.array(self._values)
        )
