"""The underapproximating proxy system x' = a + (b - c|x - x0|) u_hat.

Its reachable set from x0 is the guaranteed reachable set (GRS) of every
plant consistent with the local data f(x0), G(x0) and the Lipschitz bounds
L_f, L_G. The proxy is valid on B = {x : |x - x0| <= b/c}; outside B the
controlled term is clamped to zero.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import norm, qmc

from grsreach.core import (
    ADMISSIBLE_TOL,
    ControlAffineField,
    Trajectory,
    as_vector,
    rk4_march,
)
from grsreach.errors import (
    DegenerateActuationError,
    InadmissibleInputError,
    ParameterError,
    ProxyDomainError,
    UnreachableDirectionError,
)

logger = logging.getLogger(__name__)

DEFAULT_N_DIRS = 360
DEFAULT_PROXY_STEPS = 1000
IMAGE_TOL = 1e-9


class RadiusVariant(str, Enum):
    RAW = 'raw'
    DRIFT_SUBTRACTED = 'drift_subtracted'


@dataclass(frozen=True)
class LocalData:
    """Everything the synthesis may know about the plant: data at x0 only."""
    x0: np.ndarray
    f_x0: np.ndarray
    G_x0: np.ndarray
    L_f: float
    L_G: float

    @classmethod
    def from_field(cls, field: ControlAffineField, x0) -> 'LocalData':
        """Sample f and G once at x0."""
        x0 = as_vector(x0, field.d, "x0")
        return cls(
            x0=x0.copy(),
            f_x0=field.drift(x0),
            G_x0=field.actuation(x0),
            L_f=field.L_f,
            L_G=field.L_G,
        )


@dataclass(frozen=True)
class ProxyParams:
    """Proxy triple (a, b, c), the start x0 and an orthonormal basis of Im G(x0)."""
    a: np.ndarray
    b: float
    c: float
    image_basis: np.ndarray
    x0: np.ndarray

    def __post_init__(self):
        if not (self.b > 0 and self.c > 0):
            raise ParameterError(
                f"proxy needs b > 0 and c > 0, got b={self.b}, c={self.c}"
            )

    @property
    def d(self) -> int:
        return len(self.a)

    @property
    def radius(self) -> float:
        """Radius b/c of the validity domain B."""
        return self.b / self.c

    @property
    def drift_free(self) -> bool:
        return not np.any(self.a)

    def project(self, v: np.ndarray) -> np.ndarray:
        """Orthogonal projection onto Im G(x0)."""
        return self.image_basis @ (self.image_basis.T @ v)


def _image_basis(G: np.ndarray) -> np.ndarray:
    d = G.shape[0]
    U, s, _ = np.linalg.svd(G)
    tol = s[0] * max(G.shape) * np.finfo(float).eps
    rank = int(np.sum(s > tol))
    if rank == d:
        return np.eye(d)
    basis = U[:, :rank].copy()
    # Deterministic sign: largest-magnitude entry of each column positive.
    for j in range(rank):
        if basis[np.argmax(np.abs(basis[:, j])), j] < 0:
            basis[:, j] = -basis[:, j]
    return basis


def derive_proxy(
    f_x0,
    G_x0,
    L_f: float,
    L_G: float,
    x0=None,
) -> ProxyParams:
    """Build the proxy from the local data at x0."""
    a = np.asarray(f_x0, dtype=float).reshape(-1)
    G = np.asarray(G_x0, dtype=float)
    if G.ndim == 1:
        G = G.reshape(-1, 1)
    if G.shape[0] != len(a):
        raise ParameterError(
            f"G(x0) has {G.shape[0]} rows but f(x0) has {len(a)} entries"
        )
    if not np.any(G):
        raise DegenerateActuationError("G(x0) is zero: no actuation at x0")
    c = float(L_f) + float(L_G)
    if c <= 0:
        raise ParameterError("L_f + L_G must be positive")
    b = 1.0 / float(np.linalg.norm(np.linalg.pinv(G), 2))
    x0 = np.zeros(len(a)) if x0 is None else as_vector(x0, len(a), "x0")
    return ProxyParams(a=a, b=b, c=c, image_basis=_image_basis(G), x0=x0)


def proxy_from_local(local: LocalData) -> ProxyParams:
    return derive_proxy(local.f_x0, local.G_x0, local.L_f, local.L_G, local.x0)


def _check_direction(p: ProxyParams, u_hat: np.ndarray, boundary: bool) -> None:
    norm_u = float(np.linalg.norm(u_hat))
    if norm_u > 1.0 + ADMISSIBLE_TOL:
        raise InadmissibleInputError(f"proxy input has norm {norm_u:.12g} > 1")
    if boundary and abs(norm_u - 1.0) > IMAGE_TOL:
        raise InadmissibleInputError(
            f"boundary input must have unit norm, got {norm_u:.12g}"
        )
    if float(np.linalg.norm(u_hat - p.project(u_hat))) > IMAGE_TOL:
        raise InadmissibleInputError("proxy input leaves Im G(x0)")


def proxy_velocity(p: ProxyParams, x, u_hat) -> np.ndarray:
    """a + (b - c|x - x0|) u_hat for x in B."""
    x = as_vector(x, p.d, "proxy state")
    u_hat = as_vector(u_hat, p.d, "proxy input")
    _check_direction(p, u_hat, boundary=False)
    rho = float(np.linalg.norm(x - p.x0))
    if rho > p.radius * (1 + 1e-12):
        raise ProxyDomainError(
            f"|x - x0| = {rho:.12g} exceeds b/c = {p.radius:.12g}"
        )
    return p.a + max(p.b - p.c * rho, 0.0) * u_hat


def _proxy_rhs(p: ProxyParams, directions: np.ndarray, gain: float = 1.0):
    """Right-hand side for one direction (d,) or a stack of them (n, d)."""
    def rhs(x):
        rho = np.linalg.norm(x - p.x0, axis=-1, keepdims=True)
        return p.a + gain * np.maximum(p.b - p.c * rho, 0.0) * directions
    return rhs


def integrate_proxy(
    p: ProxyParams,
    u_hat,
    T: float,
    substep: float | None = None,
    gain: float = 1.0,
) -> Trajectory:
    """Proxy flow from x0 under the constant boundary input u_hat.

    gain scales the input, integrating under gain * u_hat from the enlarged
    input set gain * U_hat.
    """
    u_hat = as_vector(u_hat, p.d, "proxy input")
    _check_direction(p, u_hat, boundary=True)
    if T < 0:
        raise ParameterError(f"horizon must be nonnegative, got {T}")
    if T == 0:
        return Trajectory(
            np.array([0.0]), p.x0.reshape(1, -1), u_hat.reshape(1, -1),
            1.0 if substep is None else substep,
        )
    h = T / DEFAULT_PROXY_STEPS if substep is None else substep
    times, states = rk4_march(_proxy_rhs(p, u_hat, gain), p.x0, 0.0, T, h)
    controls = np.tile(gain * u_hat, (len(times), 1))
    return Trajectory(times, states, controls, h)


def radial_closed_form(b: float, c: float, t: float) -> float:
    """(b/c)(1 - exp(-c t)), the drift-free proxy distance travelled by time t."""
    if c * t < 1e-12:
        return b * t
    return (b / c) * -math.expm1(-c * t)


def unit_directions(p: ProxyParams, n_dirs: int) -> tuple[np.ndarray, np.ndarray]:
    """Evenly spread unit directions in Im G(x0).

    Returns (labels, directions): labels are angles in radians for a
    two-dimensional image and point indices otherwise.
    """
    k = p.image_basis.shape[1]
    if k == 1:
        e = p.image_basis[:, 0]
        return np.array([0.0, 1.0]), np.vstack([e, -e])
    if k == 2:
        angles = 2.0 * np.pi * np.arange(n_dirs) / n_dirs
        coords = np.column_stack([np.cos(angles), np.sin(angles)])
        return angles, coords @ p.image_basis.T
    # Halton points skip the origin, then map through the normal quantile
    # to get an evenly spread cloud on the sphere.
    points = qmc.Halton(d=k, scramble=False).random(n_dirs + 1)[1:]
    gauss = norm.ppf(np.clip(points, 1e-12, 1 - 1e-12))
    coords = gauss / np.linalg.norm(gauss, axis=1, keepdims=True)
    return np.arange(n_dirs, dtype=float), coords @ p.image_basis.T


@dataclass(frozen=True)
class GrsBoundary:
    """Sampled boundary of the proxy reachable set at horizon T."""
    T: float
    labels: np.ndarray
    directions: np.ndarray
    endpoints: np.ndarray
    clamped: np.ndarray
    x0: np.ndarray

    def __len__(self) -> int:
        return len(self.labels)

    def radii(self) -> np.ndarray:
        return np.linalg.norm(self.endpoints - self.x0, axis=1)


def sweep_paths(
    p: ProxyParams,
    directions: np.ndarray,
    T: float,
    steps: int = DEFAULT_PROXY_STEPS,
    gain: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Proxy paths for every direction, marched in lockstep.

    Returns times (steps+1,) and states (steps+1, n_dirs, d).
    """
    start = np.tile(p.x0, (len(directions), 1))
    return rk4_march(
        _proxy_rhs(p, directions, gain), start, 0.0, T, T / steps
    )


def sweep_endpoints(
    p: ProxyParams,
    directions: np.ndarray,
    T: float,
    steps: int = DEFAULT_PROXY_STEPS,
) -> tuple[np.ndarray, np.ndarray]:
    """Proxy endpoints at T for every direction.

    Also returns, per direction, whether the path touched the edge of B.
    """
    n = len(directions)
    if T == 0:
        return np.tile(p.x0, (n, 1)), np.zeros(n, dtype=bool)
    _, states = sweep_paths(p, directions, T, steps)
    rho = np.linalg.norm(states - p.x0, axis=-1)
    clamped = np.any(rho >= p.radius * (1 - 1e-12), axis=0)
    return states[-1], clamped


def grs_boundary(
    p: ProxyParams,
    T: float,
    n_dirs: int = DEFAULT_N_DIRS,
    steps: int = DEFAULT_PROXY_STEPS,
) -> GrsBoundary:
    if n_dirs < 8:
        raise ParameterError(f"need at least 8 directions, got {n_dirs}")
    if T < 0:
        raise ParameterError(f"horizon must be nonnegative, got {T}")
    labels, directions = unit_directions(p, n_dirs)
    endpoints, clamped = sweep_endpoints(p, directions, T, steps)
    if np.any(clamped):
        logger.info(
            "%d of %d boundary directions touched the edge of B",
            int(clamped.sum()), len(clamped),
        )
    return GrsBoundary(T, labels, directions, endpoints, clamped, p.x0.copy())


def unique_boundary_control(p: ProxyParams, y, T: float) -> np.ndarray:
    """The constant unit input whose proxy path ends at y at time T."""
    y = as_vector(y, p.d, "target")
    w = y - p.a * T - p.x0
    w_norm = float(np.linalg.norm(w))
    if w_norm <= 1e-12 * max(1.0, float(np.linalg.norm(y))):
        raise UnreachableDirectionError(
            "target equals x0 + aT: no control direction is defined"
        )
    projected = p.project(w)
    if float(np.linalg.norm(w - projected)) > IMAGE_TOL * w_norm:
        raise UnreachableDirectionError(
            "y - aT - x0 has a component outside Im G(x0)"
        )
    return projected / float(np.linalg.norm(projected))


def learning_radius(
    p: ProxyParams,
    k: float,
    dt: float,
    m: int,
    variant: RadiusVariant = RadiusVariant.RAW,
    n_dirs: int = DEFAULT_N_DIRS,
    steps: int = DEFAULT_PROXY_STEPS,
) -> float:
    """r(k, dt): largest displacement of a constant unit input over k(m+1)dt."""
    if k < 1 or dt <= 0 or m < 1:
        raise ParameterError(f"need k >= 1, dt > 0, m >= 1 (k={k}, dt={dt}, m={m})")
    t = k * (m + 1) * dt
    if p.drift_free:
        return radial_closed_form(p.b, p.c, t)
    _, directions = unit_directions(p, n_dirs)
    endpoints, _ = sweep_endpoints(p, directions, t, steps)
    disp = endpoints - p.x0
    if RadiusVariant(variant) is RadiusVariant.DRIFT_SUBTRACTED:
        disp = disp - p.a * t
    return float(np.linalg.norm(disp, axis=1).max())


def min_travel(
    p: ProxyParams,
    tau: float,
    n_dirs: int = DEFAULT_N_DIRS,
    steps: int = DEFAULT_PROXY_STEPS,
) -> float:
    """Smallest drift-subtracted distance a constant unit input covers in tau."""
    if p.drift_free:
        return radial_closed_form(p.b, p.c, tau)
    _, directions = unit_directions(p, n_dirs)
    endpoints, _ = sweep_endpoints(p, directions, tau, steps)
    disp = endpoints - p.a * tau - p.x0
    return float(np.linalg.norm(disp, axis=1).min())


def collinearity_residual(
    p: ProxyParams,
    times: np.ndarray,
    states: np.ndarray,
    directions,
) -> float:
    """Largest relative off-line component of x(t) - a t - x0.

    states is one path (steps+1, d) or a sweep (steps+1, n, d) with one
    direction per path.
    """
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    states = np.asarray(states, dtype=float)
    if states.ndim == 2:
        states = states[:, None, :]
    shifted = states - np.asarray(times)[:, None, None] * p.a - p.x0
    along = np.einsum('tnd,nd->tn', shifted, directions)
    off = shifted - along[..., None] * directions
    sizes = np.linalg.norm(shifted, axis=-1)
    mask = sizes > 0
    if not np.any(mask):
        return 0.0
    return float((np.linalg.norm(off, axis=-1)[mask] / sizes[mask]).max())


def scaling_residual(
    p: ProxyParams,
    directions,
    k: float,
    T: float,
    steps: int = DEFAULT_PROXY_STEPS,
) -> float:
    """Worst |flow under k u_hat to T - (flow under u_hat to kT - a kT + a T)|."""
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    _, scaled = sweep_paths(p, directions, T, steps, gain=k)
    stretched, _ = sweep_endpoints(p, directions, k * T, steps)
    expected = stretched - p.a * k * T + p.a * T
    return float(np.linalg.norm(scaled[-1] - expected, axis=1).max())


def early_arrival_margins(
    p: ProxyParams,
    directions,
    T: float,
    fractions=(0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9),
    steps: int = DEFAULT_PROXY_STEPS,
) -> list[tuple[float, np.ndarray, np.ndarray]]:
    """(t, |phi(t) - y|, required margin) per direction, y = phi(T).

    The required margin is (T - t)(b - c|y - x0|)/2.
    """
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    times, states = sweep_paths(p, directions, T, steps)
    y = states[-1]
    slack = np.maximum(p.b - p.c * np.linalg.norm(y - p.x0, axis=1), 0.0)
    rows = []
    for frac in fractions:
        i = int(round(frac * steps))
        t = float(times[i])
        gap = np.linalg.norm(states[i] - y, axis=1)
        rows.append((t, gap, 0.5 * (T - t) * slack))
    return rows
