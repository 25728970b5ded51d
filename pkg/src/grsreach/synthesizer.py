"""Waypoint-following control synthesis for reaching a GRS point.

The loop alternates learn-control cycles on the plant with a waypoint
update: waypoints z_n = x0 + theta_n y_ref slide along the segment from x0
towards the target, each kept at distance r from the latest anchor state,
and the next base input minimises the estimated derivative of
|anchor - z|^2 over the parameterised inputs of the cycle just run.

algorithm1 tracks the segment x0 -> y and stops once the waypoint is
within r of y. algorithm2 tracks x(t) - a t along x0 -> y - aT and stops at
the horizon T.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from grsreach.core import PiecewiseConstantControl, Simulator, Trajectory, as_vector
from grsreach.errors import (
    DomainExitError,
    ParameterError,
    ProxyDomainError,
    RegressedError,
    TrivialTargetError,
)
from grsreach.learner import (
    BoundConstants,
    CycleConfig,
    CycleRecord,
    argmin_direction,
    bound_C,
    bound_mu,
    run_cycle,
)
from grsreach.proxy import (
    DEFAULT_N_DIRS,
    LocalData,
    ProxyParams,
    RadiusVariant,
    learning_radius,
    min_travel,
    proxy_from_local,
)

logger = logging.getLogger(__name__)

WAYPOINT_TOL = 1e-9


class Variant(str, Enum):
    ALGORITHM1 = 'algorithm1'
    ALGORITHM2 = 'algorithm2'


class Termination(str, Enum):
    TARGET_RADIUS = 'target_radius'
    HORIZON_REACHED = 'horizon_reached'
    MAX_CYCLES = 'max_cycles'
    DOMAIN_EXIT = 'domain_exit'
    REGRESSED = 'regressed'


@dataclass(frozen=True)
class WaypointState:
    """Waypoint in force while cycle n runs, and the anchor it started from."""
    n: int
    theta: float
    z: np.ndarray
    anchor: np.ndarray
    r: float
    t_start: float
    holding: bool = False


@dataclass(frozen=True)
class ConditionCheck:
    holds: bool
    lhs: float
    rhs: float


@dataclass
class CycleDiagnostics:
    n: int
    tau_n: float
    record: CycleRecord
    dist_to_waypoint: float
    accepted: bool
    theta_prev: float
    theta: float
    z_prev: np.ndarray
    z: np.ndarray
    capped: bool = False
    objective: float | None = None
    lam: np.ndarray | None = None
    degenerate: bool = False
    condition: ConditionCheck | None = None
    negative_fraction: float | None = None


@dataclass(frozen=True)
class SynthesisConfig:
    """What to reach, how long, and how each cycle is shaped.

    r defaults to the learning radius of the variant; consts default to the
    Lipschitz extension of the x0 data over B.
    """
    target: np.ndarray
    T: float
    cycle: CycleConfig
    variant: Variant = Variant.ALGORITHM1
    consts: BoundConstants | None = None
    r: float | None = None
    max_cycles: int = 100_000
    max_regressions: int = 3
    check_condition: bool = True
    n_dirs: int = DEFAULT_N_DIRS

    def __post_init__(self):
        if self.max_cycles < 1:
            raise ParameterError("max_cycles must be at least 1")
        if self.T < 0:
            raise ParameterError(f"horizon must be nonnegative, got {self.T}")
        if self.r is not None and not self.r > 0:
            raise ParameterError(f"waypoint radius must be positive, got {self.r}")


@dataclass
class SynthesisResult:
    variant: Variant
    target: np.ndarray
    trajectory: Trajectory
    control: PiecewiseConstantControl | None
    waypoints: list[WaypointState]
    diagnostics: list[CycleDiagnostics]
    final_error: float
    termination: Termination
    r: float
    proxy: ProxyParams
    consts: BoundConstants
    bound_C: float
    bound_mu: float
    cycle: CycleConfig | None = None
    gamma: float | None = None
    runtime_s: float = 0.0
    lyapunov: list['LyapunovCycle'] = field(default_factory=list)

    @property
    def n_cycles(self) -> int:
        return len(self.diagnostics)


@dataclass(frozen=True)
class LyapunovCycle:
    n: int
    samples: int
    negative_fraction: float


def recommend_variant(p: ProxyParams) -> Variant:
    """algorithm1 when the drift is small enough for the condition to hold."""
    if 2.0 * float(np.linalg.norm(p.a)) < p.b:
        return Variant.ALGORITHM1
    return Variant.ALGORITHM2


def initial_control(
    G_x0,
    x0,
    y,
    eps: float,
    variant: Variant = Variant.ALGORITHM1,
    a=None,
    T: float = 0.0,
) -> np.ndarray:
    """(1 - eps) G(x0)^+ w / (||G(x0)^+|| |w|) for the target offset w."""
    G = np.asarray(G_x0, dtype=float)
    if G.ndim == 1:
        G = G.reshape(-1, 1)
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    w = np.asarray(y, dtype=float).reshape(-1) - x0
    if Variant(variant) is Variant.ALGORITHM2 and a is not None:
        w = w - np.asarray(a, dtype=float).reshape(-1) * T
    w_norm = float(np.linalg.norm(w))
    if w_norm == 0.0:
        raise TrivialTargetError("target offset is zero")
    pinv = np.linalg.pinv(G)
    return (1.0 - eps) * (pinv @ w) / (float(np.linalg.norm(pinv, 2)) * w_norm)


def next_waypoint(anchor, y_ref, theta: float, r: float) -> float:
    """Larger root theta of |theta y_ref - anchor| = r.

    anchor and y_ref are taken relative to x0. Raises RegressedError when
    the anchor did not end the cycle strictly within r of theta * y_ref.
    """
    anchor = np.asarray(anchor, dtype=float)
    y_ref = np.asarray(y_ref, dtype=float)
    qa = float(y_ref @ y_ref)
    if qa == 0.0:
        raise TrivialTargetError("reference direction is zero")
    gap = float(np.linalg.norm(theta * y_ref - anchor))
    if gap >= r:
        raise RegressedError(
            f"anchor ended {gap:.12g} from the waypoint, radius is {r:.12g}"
        )
    qb = float(y_ref @ anchor)
    qc = float(anchor @ anchor) - r * r
    disc = qb * qb - qa * qc
    if disc < 0:
        raise RegressedError("no waypoint at distance r on the reference line")
    root = (qb + math.sqrt(disc)) / qa
    if root <= theta:
        raise RegressedError(f"waypoint would move back: {root:.12g} <= {theta:.12g}")
    return root


def check_condition(
    p: ProxyParams,
    cfg: CycleConfig,
    consts: BoundConstants,
    r: float,
    x_norm: float,
) -> ConditionCheck:
    """Sufficient condition for per-cycle decrease; advisory only.

    The right side uses max(r - q, 0), so it is never positive when the
    learning radius is swallowed by the per-cycle spread q = M0 (m+1)^2 dt.
    """
    q = consts.M0 * (cfg.m + 1) ** 2 * cfg.dt
    lhs = 2.0 * (q + r * consts.L_max) * q + bound_mu(cfg, consts)
    slack = p.b - p.c * x_norm - 2.0 * float(np.linalg.norm(p.a))
    rhs = (1.0 - cfg.eps) * max(r - q, 0.0) * slack
    return ConditionCheck(holds=bool(rhs > 0 and lhs <= rhs), lhs=lhs, rhs=rhs)


def gamma_bound(
    p: ProxyParams,
    cfg: CycleConfig,
    consts: BoundConstants,
    r: float,
    N: int,
    n_dirs: int = DEFAULT_N_DIRS,
) -> float:
    """Accuracy radius of the finite-horizon loop after N cycles."""
    if N < 1:
        raise ParameterError(f"N must be at least 1, got {N}")
    q = consts.M0 * (cfg.m + 1) ** 2
    dt = cfg.dt
    r_bar = min_travel(p, cfg.tau, n_dirs)
    nu = q * dt - r_bar
    mu = bound_mu(cfg, consts)
    return (
        N * nu
        + r * p.c * N * nu * dt
        + q * p.b * dt ** 2
        + 2.0 * (q * dt ** 2 + r * consts.L_max) * q * dt ** 2
        + mu ** 2
    )


def lyapunov_diagnostics(
    traj: Trajectory,
    waypoints: list[WaypointState],
    a,
    variant: Variant,
) -> list[LyapunovCycle]:
    """Fraction of samples per cycle where |x - z_n|^2 is decreasing.

    algorithm2 measures the drift-subtracted state x(t) - a t.
    """
    a = np.asarray(a, dtype=float)
    drift = Variant(variant) is Variant.ALGORITHM2
    out = []
    for i, wp in enumerate(waypoints):
        t_end = (
            waypoints[i + 1].t_start if i + 1 < len(waypoints)
            else traj.final_time
        )
        part = traj.window(wp.t_start, t_end)
        if len(part) < 2:
            continue
        states = part.states
        if drift:
            states = states - np.outer(part.times, a)
        dist = np.sum((states - wp.z) ** 2, axis=1)
        rate = np.diff(dist) / np.diff(part.times)
        out.append(LyapunovCycle(
            n=wp.n, samples=len(rate),
            negative_fraction=float(np.mean(rate < 0)),
        ))
    return out


def synthesize(
    plant: Simulator,
    local: LocalData,
    cfg: SynthesisConfig,
) -> SynthesisResult:
    """Run algorithm1 until the waypoint is within r of the target."""
    if Variant(cfg.variant) is not Variant.ALGORITHM1:
        raise ParameterError("synthesize runs algorithm1")
    return _run(plant, local, cfg)


def synthesize_finite_time(
    plant: Simulator,
    local: LocalData,
    cfg: SynthesisConfig,
) -> SynthesisResult:
    """Run algorithm2 with drift-subtracted anchors until the horizon."""
    if Variant(cfg.variant) is not Variant.ALGORITHM2:
        raise ParameterError("synthesize_finite_time runs algorithm2")
    return _run(plant, local, cfg)


def _run(
    plant: Simulator,
    local: LocalData,
    cfg: SynthesisConfig,
) -> SynthesisResult:
    started = time.perf_counter()
    variant = Variant(cfg.variant)
    drift = variant is Variant.ALGORITHM2
    cycle = cfg.cycle
    if cycle.m != plant.m:
        raise ParameterError(f"cycle has m={cycle.m}, plant has m={plant.m}")

    p = proxy_from_local(local)
    x0 = local.x0
    y = as_vector(cfg.target, p.d, "target")
    if float(np.linalg.norm(y - x0)) >= p.radius * (1 - 1e-9):
        raise ProxyDomainError(
            f"target lies on or beyond the edge of B (radius {p.radius:.6g})"
        )
    y_ref = y - x0 - (p.a * cfg.T if drift else 0.0)
    if not np.any(y_ref):
        raise TrivialTargetError("reference segment has zero length")

    if cfg.r is not None:
        r = cfg.r
    else:
        radius_variant = (
            RadiusVariant.DRIFT_SUBTRACTED if drift else RadiusVariant.RAW
        )
        r = learning_radius(
            p, cycle.k, cycle.dt, cycle.m, radius_variant, cfg.n_dirs
        )
    consts = cfg.consts or BoundConstants.defaults(
        local, p, float(np.linalg.norm(y - x0))
    )
    c_val = bound_C(cycle, consts)
    mu_val = bound_mu(cycle, consts)
    if not cycle.eps_advisory_ok:
        logger.warning(
            "eps=%g does not exceed %g * dt^2; initialisation may fail",
            cycle.eps, cycle.eps_init_constant,
        )
    logger.info(
        "%s: |y|=%.6g r=%.6g tau=%.6g C=%.6g mu=%.6g",
        variant.value, float(np.linalg.norm(y - x0)), r, cycle.tau,
        c_val, mu_val,
    )

    u0 = initial_control(local.G_x0, x0, y, cycle.eps, variant, p.a, cfg.T)
    theta = 0.0
    z = x0.copy()
    holding = False
    regressions = 0
    waypoints: list[WaypointState] = []
    diagnostics: list[CycleDiagnostics] = []
    termination = None

    def anchor_of(state: np.ndarray, t: float) -> np.ndarray:
        return state - p.a * t if drift else state

    while termination is None:
        n = len(diagnostics)
        if drift and n * cycle.tau >= cfg.T * (1 - 1e-12):
            termination = Termination.HORIZON_REACHED
            break
        if n >= cfg.max_cycles:
            termination = Termination.MAX_CYCLES
            break

        anchor_start = anchor_of(plant.state, plant.time)
        waypoints.append(WaypointState(
            n=n, theta=theta, z=z.copy(), anchor=anchor_start, r=r,
            t_start=plant.time, holding=holding,
        ))
        condition = None
        if cfg.check_condition:
            condition = check_condition(
                p, cycle, consts, r, float(np.linalg.norm(anchor_start - x0))
            )

        try:
            rec = run_cycle(plant, u0, cycle, n)
        except DomainExitError as exc:
            logger.warning("cycle %d: %s", n, exc)
            termination = Termination.DOMAIN_EXIT
            break

        anchor = anchor_of(rec.anchor, float(rec.times[-1]))
        dist = float(np.linalg.norm(anchor - z))
        theta_prev, z_prev = theta, z.copy()
        diag = CycleDiagnostics(
            n=n, tau_n=rec.tau_n, record=rec, dist_to_waypoint=dist,
            accepted=True, theta_prev=theta_prev, theta=theta_prev,
            z_prev=z_prev, z=z_prev, condition=condition,
        )

        if not holding:
            try:
                theta_new = next_waypoint(anchor - x0, y_ref, theta, r)
            except RegressedError as exc:
                diag.accepted = False
                regressions += 1
                logger.warning(
                    "cycle %d regressed (%d in a row): %s", n, regressions, exc
                )
            else:
                regressions = 0
                if drift and theta_new >= 1.0:
                    theta_new = 1.0
                    holding = True
                    diag.capped = True
                theta = theta_new
                z = x0 + theta * y_ref

        if diag.accepted:
            diag.theta = theta
            diag.z = z.copy()
            g = 2.0 * (anchor - z)
            if np.any(g):
                choice = argmin_direction(rec, g)
                diag.objective = choice.value
                diag.lam = choice.lam
                diag.degenerate = choice.degenerate
                u0 = (
                    rec.inputs[0] if choice.degenerate
                    else (1.0 - cycle.eps) * choice.u
                )
        diagnostics.append(diag)
        logger.debug(
            "cycle %d: theta=%.9g dist=%.6g accepted=%s",
            n, theta, dist, diag.accepted,
        )

        if not diag.accepted and regressions >= cfg.max_regressions:
            termination = Termination.REGRESSED
        elif (
            not drift and diag.accepted
            and float(np.linalg.norm(z - y)) < r
        ):
            termination = Termination.TARGET_RADIUS

    trajectory = plant.trajectory()
    final_error = float(np.linalg.norm(plant.state - y))
    gamma = None
    if drift and diagnostics:
        gamma = gamma_bound(p, cycle, consts, r, len(diagnostics), cfg.n_dirs)
    result = SynthesisResult(
        variant=variant,
        target=y,
        trajectory=trajectory,
        control=plant.control(),
        waypoints=waypoints[:len(diagnostics)],
        diagnostics=diagnostics,
        final_error=final_error,
        termination=termination,
        r=r,
        proxy=p,
        consts=consts,
        bound_C=c_val,
        bound_mu=mu_val,
        cycle=cycle,
        gamma=gamma,
    )
    result.lyapunov = lyapunov_diagnostics(
        trajectory, result.waypoints, p.a, variant
    )
    fractions = {lc.n: lc.negative_fraction for lc in result.lyapunov}
    for diag in diagnostics:
        diag.negative_fraction = fractions.get(diag.n)
    result.runtime_s = time.perf_counter() - started
    logger.info(
        "%s finished: %s after %d cycles, final error %.6g",
        variant.value, termination.value, len(diagnostics), final_error,
    )
    return result
