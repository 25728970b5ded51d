"""Learn-control cycles: perturbed inputs, finite-difference velocity
estimates over parameterised inputs, and the error bounds C and mu.

A cycle of length tau = (m+1) dt holds u_0 and then m inputs
u_j = u_0 + s_j eps e_j, one per dt, sampling the state at every switch.
Affine combinations sum_j lambda_j u_j of those inputs (weights summing to
one, result inside the unit ball) have velocities estimated by the same
combination of the sampled increments.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from grsreach.core import ADMISSIBLE_TOL, Simulator, as_vector
from grsreach.errors import InadmissibleInputError, ParameterError
from grsreach.proxy import LocalData, ProxyParams

logger = logging.getLogger(__name__)

LAMBDA_SUM_TOL = 1e-12


@dataclass(frozen=True)
class CycleConfig:
    """Cycle timing dt, perturbation amplitude eps, radius multiplier k."""
    dt: float
    eps: float
    k: float
    m: int
    eps_init_constant: float = 100.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if not 0 < self.eps < 1:
            raise ParameterError(f"eps must lie in (0, 1), got {self.eps}")
        if self.k < 1:
            raise ParameterError(f"k must be at least 1, got {self.k}")
        if self.m < 1:
            raise ParameterError(f"m must be at least 1, got {self.m}")

    @property
    def tau(self) -> float:
        return (self.m + 1) * self.dt

    @property
    def eps_advisory_ok(self) -> bool:
        """Whether eps exceeds eps_init_constant * dt^2 (initialisation hint)."""
        return self.eps > self.eps_init_constant * self.dt ** 2


@dataclass(frozen=True)
class BoundConstants:
    """M0 bounds |f| and ||G|| on B, L bounds grad d_z on B, M1 enters mu."""
    M0: float
    M1: float
    L: float
    L_max: float

    def __post_init__(self):
        if min(self.M0, self.M1, self.L, self.L_max) < 0:
            raise ParameterError("bound constants must be nonnegative")

    @classmethod
    def defaults(
        cls,
        local: LocalData,
        proxy: ProxyParams,
        target_norm: float,
        M0: float | None = None,
        M1: float | None = None,
        L: float | None = None,
    ) -> 'BoundConstants':
        """Lipschitz extension of the x0 data over B; overrides win."""
        R = proxy.radius
        if M0 is None:
            M0 = max(
                float(np.linalg.norm(local.f_x0)) + local.L_f * R,
                float(np.linalg.norm(local.G_x0, 2)) + local.L_G * R,
            )
        if L is None:
            L = 2.0 * (R + target_norm)
        return cls(
            M0=M0,
            M1=M0 if M1 is None else M1,
            L=L,
            L_max=max(local.L_f, local.L_G),
        )


@dataclass(frozen=True)
class CycleRecord:
    """Inputs held and states sampled during one learn-control cycle."""
    n: int
    tau_n: float
    dt: float
    eps: float
    inputs: np.ndarray
    signs: np.ndarray
    times: np.ndarray
    states: np.ndarray

    @property
    def m(self) -> int:
        return self.inputs.shape[1]

    @property
    def anchor(self) -> np.ndarray:
        """State at the end of the cycle."""
        return self.states[-1].copy()

    @property
    def increments(self) -> np.ndarray:
        """(x_{j+1} - x_j)/dt for j = 0..m."""
        return np.diff(self.states, axis=0) / self.dt


@dataclass(frozen=True)
class ArgminChoice:
    u: np.ndarray
    lam: np.ndarray
    value: float
    degenerate: bool = False
    h: np.ndarray = field(default=None, repr=False)


def perturbation_signs(u0: np.ndarray) -> np.ndarray:
    """s_j = -sign(u0_j), with +1 where u0_j = 0."""
    return np.where(u0 > 0, -1.0, 1.0)


def perturbation_inputs(u0, eps: float) -> np.ndarray:
    """Rows u_0, u_0 + s_1 eps e_1, ..., u_0 + s_m eps e_m."""
    u0 = np.asarray(u0, dtype=float).reshape(-1)
    if float(np.linalg.norm(u0)) > 1.0 - eps + ADMISSIBLE_TOL:
        raise InadmissibleInputError(
            f"base input norm {np.linalg.norm(u0):.12g} exceeds 1 - eps"
        )
    m = len(u0)
    signs = perturbation_signs(u0)
    inputs = np.tile(u0, (m + 1, 1))
    inputs[1:] += eps * np.diag(signs)
    return inputs


def run_cycle(
    plant: Simulator,
    u0,
    cfg: CycleConfig,
    n: int = 0,
) -> CycleRecord:
    """Hold each perturbed input for dt on the plant, sampling at switches."""
    u0 = as_vector(u0, cfg.m, "base input")
    inputs = perturbation_inputs(u0, cfg.eps)
    tau_n = plant.time
    times = tau_n + cfg.dt * np.arange(cfg.m + 2, dtype=float)
    states = [plant.state]
    for j in range(cfg.m + 1):
        states.append(plant.hold(inputs[j], float(times[j + 1])))
    return CycleRecord(
        n=n,
        tau_n=tau_n,
        dt=cfg.dt,
        eps=cfg.eps,
        inputs=inputs,
        signs=perturbation_signs(u0),
        times=times,
        states=np.array(states),
    )


def _check_lambda(rec: CycleRecord, lam) -> np.ndarray:
    lam = as_vector(lam, rec.m + 1, "lambda")
    if abs(float(lam.sum()) - 1.0) > LAMBDA_SUM_TOL:
        raise ParameterError(f"lambda sums to {lam.sum():.15g}, not 1")
    return lam


def velocity_estimate(rec: CycleRecord, lam) -> np.ndarray:
    """sum_j lambda_j (x_{j+1} - x_j)/dt."""
    return _check_lambda(rec, lam) @ rec.increments


def input_of_lambda(rec: CycleRecord, lam) -> np.ndarray:
    return _check_lambda(rec, lam) @ rec.inputs


def lambda_of_input(rec: CycleRecord, u) -> np.ndarray:
    """Affine weights reproducing u from the cycle's inputs."""
    u = as_vector(u, rec.m, "input")
    lam = np.empty(rec.m + 1)
    lam[1:] = rec.signs * (u - rec.inputs[0]) / rec.eps
    lam[0] = 1.0 - lam[1:].sum()
    return lam


def estimated_objective(rec: CycleRecord, g, u) -> float:
    """<g, estimated velocity under u>."""
    return float(np.dot(g, lambda_of_input(rec, u) @ rec.increments))


def argmin_direction(rec: CycleRecord, g) -> ArgminChoice:
    """Minimise <g, estimated velocity> over admissible parameterised inputs.

    The objective is affine in u: <g, w_0> + <h, u - u_0> with
    h_j = s_j <g, w_j - w_0>/eps, so the minimiser is -h/|h|.
    """
    g = np.asarray(g, dtype=float).reshape(-1)
    if not np.any(g):
        raise ParameterError("gradient must be nonzero")
    w = rec.increments
    h = rec.signs * ((w[1:] - w[0]) @ g) / rec.eps
    h_norm = float(np.linalg.norm(h))
    scale = float(np.linalg.norm(g)) * float(np.abs(w).max(initial=0.0))
    if h_norm <= 1e-15 * max(scale, 1.0):
        lam = np.zeros(rec.m + 1)
        lam[0] = 1.0
        logger.debug("cycle %d: flat objective, keeping u_0", rec.n)
        return ArgminChoice(
            u=rec.inputs[0].copy(), lam=lam, value=float(np.dot(g, w[0])),
            degenerate=True, h=h,
        )
    u = -h / h_norm
    lam = lambda_of_input(rec, u)
    return ArgminChoice(u=u, lam=lam, value=float(np.dot(g, lam @ w)), h=h)


def c_bound(dt: float, eps: float, m: int, M0: float, L_max: float) -> float:
    return 2.0 * M0 * L_max * (m + 1) ** 3 * dt * (4.0 * m ** 1.5 + eps) / eps


def mu_bound(
    dt: float,
    eps: float,
    m: int,
    M0: float,
    M1: float,
    L: float,
) -> float:
    return (
        6.0 * L * (M0 + 1) * (M1 + 1) * (m + 1) ** 3
        * (1.0 + 4.0 * m * math.sqrt(m) / eps) * dt
        + L * M0 * (m + 1) * dt
    )


def bound_C(cfg: CycleConfig, consts: BoundConstants) -> float:
    """Velocity-estimate error bound C(dt, eps)."""
    return c_bound(cfg.dt, cfg.eps, cfg.m, consts.M0, consts.L_max)


def bound_mu(cfg: CycleConfig, consts: BoundConstants) -> float:
    """Suboptimality mu(dt, eps) of minimising over parameterised inputs."""
    return mu_bound(cfg.dt, cfg.eps, cfg.m, consts.M0, consts.M1, consts.L)


def precision_bounds(
    cfg: CycleConfig,
    consts: BoundConstants,
) -> tuple[float, float, float]:
    """Per-step state spread, increment error and anchor transfer bounds."""
    m1 = cfg.m + 1
    return (
        consts.M0 * m1 * cfg.dt,
        consts.M0 * consts.L_max * m1 ** 2 * cfg.dt / 2.0,
        consts.M0 * consts.L_max * m1 ** 3 * cfg.dt,
    )
