"""Property suites run by `grsreach verify`.

Each check compares a measured quantity against a limit and yields a
CheckResult. tolerance_scale multiplies every tolerance; a negative scale
makes every tolerance check fail, which exercises the failure path.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.stats import qmc

from grsreach.casestudy import (
    DEFAULT_TARGET_ANGLES,
    HORIZON,
    QuadrotorParams,
    ScenarioRun,
    affine_lipschitz,
    build_quadrotor,
    run_scenario,
    scenarios,
)
from grsreach.core import evaluate_velocity
from grsreach.learner import (
    CycleConfig,
    precision_bounds,
    velocity_estimate,
)
from grsreach.proxy import (
    DEFAULT_N_DIRS,
    LocalData,
    RadiusVariant,
    collinearity_residual,
    derive_proxy,
    early_arrival_margins,
    learning_radius,
    proxy_from_local,
    radial_closed_form,
    scaling_residual,
    sweep_endpoints,
    sweep_paths,
    unit_directions,
)

logger = logging.getLogger(__name__)

SUITES = ('proxy', 'learner', 'synth', 'casestudy')
ORACLE_SAMPLES = 10_000
ORACLE_CYCLES = 20
EARLY_FRACTIONS = np.arange(1, 10) / 10.0
QUADROTOR_DRIFT = np.array([-8.727, 13.090])


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    value: float
    limit: float
    detail: str = ""


def _le(
    suite: str, name: str, value: float, limit: float, detail: str = ""
) -> CheckResult:
    return CheckResult(
        suite, name, bool(value <= limit), float(value), float(limit), detail
    )


def _ge(
    suite: str, name: str, value: float, limit: float, detail: str = ""
) -> CheckResult:
    return CheckResult(
        suite, name, bool(value >= limit), float(value), float(limit), detail
    )


def _quadrotor_local() -> LocalData:
    return LocalData.from_field(build_quadrotor(), np.zeros(2))


@lru_cache(maxsize=8)
def _scenario_run(scenario_id: str, angle: float) -> ScenarioRun:
    return run_scenario(scenario_id, angle)


def proxy_suite(tolerance_scale: float = 1.0) -> list[CheckResult]:
    """Straight-line, scaling, closed-form and boundary-margin properties."""
    suite = 'proxy'
    p = proxy_from_local(_quadrotor_local())
    _, directions = unit_directions(p, DEFAULT_N_DIRS)
    times, states = sweep_paths(p, directions, HORIZON)
    results = []

    residual = collinearity_residual(p, times, states, directions)
    results.append(_le(suite, 'collinearity', residual, 1e-8 * tolerance_scale))

    free = derive_proxy(np.zeros(2), p.image_basis * p.b, 1.0, 1.0)
    worst = max(
        scaling_residual(free, directions, k, HORIZON) for k in (2.0, 5.0)
    )
    results.append(_le(
        suite, 'scaling', worst, 1e-7 * tolerance_scale, "drift-free proxy"
    ))

    endpoints, _ = sweep_endpoints(free, directions, HORIZON)
    oracle = radial_closed_form(free.b, free.c, HORIZON)
    gap = float(np.abs(np.linalg.norm(endpoints, axis=1) - oracle).max())
    results.append(_le(suite, 'radial closed form', gap, 1e-8 * tolerance_scale))

    rows = early_arrival_margins(p, directions, HORIZON, EARLY_FRACTIONS)
    worst_margin = min(float((dist - need).min()) for _, dist, need in rows)
    results.append(_ge(suite, 'boundary not early', worst_margin, 0.0))

    y = states[-1]
    early, _ = sweep_endpoints(p, directions, HORIZON / 2)
    grow_early = np.linalg.norm(early - p.a * HORIZON / 2 - p.x0, axis=1)
    grow_late = np.linalg.norm(y - p.a * HORIZON - p.x0, axis=1)
    growth = float((grow_late - grow_early).min())
    results.append(_ge(suite, 'monotone growth', growth, 0.0))
    return results


def _learner_checks(
    suite: str, run: ScenarioRun, tolerance_scale: float
) -> list[CheckResult]:
    field = build_quadrotor()
    result = run.result
    scenario = run.scenario
    cfg = CycleConfig(scenario.dt, scenario.eps, scenario.k, m=2)
    spread, increment, transfer = precision_bounds(cfg, result.consts)
    m = cfg.m
    worst = {'spread': 0.0, 'increment': 0.0, 'transfer': 0.0, 'estimate': 0.0}
    for diag in result.diagnostics:
        rec = diag.record
        x = rec.states
        anchor = rec.anchor
        for j in range(m + 2):
            for k in range(j + 1, m + 2):
                excess = np.linalg.norm(x[j] - x[k]) - spread * (k - j)
                worst['spread'] = max(worst['spread'], float(excess))
        for j in range(m + 1):
            v_next = evaluate_velocity(field, x[j + 1], rec.inputs[j])
            v_anchor = evaluate_velocity(field, anchor, rec.inputs[j])
            worst['increment'] = max(
                worst['increment'],
                float(np.linalg.norm(rec.increments[j] - v_next)) - increment,
            )
            worst['transfer'] = max(
                worst['transfer'],
                float(np.linalg.norm(v_next - v_anchor)) - transfer,
            )
        if diag.lam is not None:
            lams = [diag.lam] + list(np.eye(m + 1))
            for lam in lams:
                u = lam @ rec.inputs
                if np.linalg.norm(u) > 1.0 + 1e-9:
                    continue
                err = np.linalg.norm(
                    velocity_estimate(rec, lam) - evaluate_velocity(field, anchor, u)
                )
                worst['estimate'] = max(worst['estimate'], float(err) - result.bound_C)
    scale = tolerance_scale
    return [
        _le(
            suite, 'state spread', worst['spread'], 1e-12 * scale,
            "excess over M0(m+1)|j-k|dt",
        ),
        _le(suite, 'increment precision', worst['increment'], 1e-12 * scale),
        _le(suite, 'anchor transfer', worst['transfer'], 1e-12 * scale),
        _le(suite, 'estimate within C', worst['estimate'], 1e-12 * scale),
    ]


def _argmin_oracle(suite: str, run: ScenarioRun) -> CheckResult:
    # Halton points pushed onto the unit disc with the area-preserving map.
    pts = qmc.Halton(d=2, scramble=False).random(ORACLE_SAMPLES + 1)[1:]
    rad = np.sqrt(pts[:, 0])
    ang = 2.0 * np.pi * pts[:, 1]
    samples = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    worst = -math.inf
    for diag in run.result.diagnostics[:ORACLE_CYCLES]:
        if diag.objective is None or diag.degenerate:
            continue
        rec = diag.record
        g = 2.0 * (rec.anchor - diag.z)
        w = rec.increments
        lam = np.empty((len(samples), rec.m + 1))
        lam[:, 1:] = rec.signs * (samples - rec.inputs[0]) / rec.eps
        lam[:, 0] = 1.0 - lam[:, 1:].sum(axis=1)
        sampled = float((lam @ (w @ g)).min())
        slack = 1e-9 * float(np.linalg.norm(g)) * float(np.abs(w).max())
        worst = max(worst, diag.objective - sampled - slack)
    return _le(suite, 'argmin vs sampled oracle', worst, 0.0)


def suboptimality_gap(run: ScenarioRun) -> float:
    """Worst |argmin value - min over U of <g, f + G u>| across cycles.

    The true minimum over the unit ball is <g, f(x)> - |G(x)^T g|, taken at
    the cycle anchor.
    """
    field = build_quadrotor()
    worst = 0.0
    for diag in run.result.diagnostics:
        if diag.objective is None or diag.degenerate:
            continue
        anchor = diag.record.anchor
        g = 2.0 * (anchor - diag.z)
        exact = float(
            g @ field.drift(anchor)
            - np.linalg.norm(field.actuation(anchor).T @ g)
        )
        worst = max(worst, abs(diag.objective - exact))
    return worst


def learner_suite(tolerance_scale: float = 1.0) -> list[CheckResult]:
    """Precision bounds, estimate error and argmin optimality on scenario A."""
    suite = 'learner'
    run = _scenario_run('A', DEFAULT_TARGET_ANGLES[0])
    results = _learner_checks(suite, run, tolerance_scale)
    results.append(_argmin_oracle(suite, run))
    results.append(_le(
        suite, 'suboptimality within mu', suboptimality_gap(run),
        run.result.bound_mu * tolerance_scale,
    ))
    ranks = {
        int(np.linalg.matrix_rank(np.diff(d.record.inputs, axis=0)))
        for d in run.result.diagnostics
    }
    results.append(CheckResult(
        suite, 'affine independence', ranks == {2}, float(min(ranks)), 2.0,
    ))
    return results


def waypoint_violation(run: ScenarioRun) -> tuple[float, float]:
    """Worst violation of the transition band and of strict theta growth."""
    r = run.result.r
    band = 0.0
    growth = 0.0
    for diag in run.result.diagnostics:
        if not diag.accepted or diag.capped or diag.theta_prev == diag.theta:
            continue
        step = float(np.linalg.norm(diag.z - diag.z_prev))
        band = max(band, (r - diag.dist_to_waypoint) - step, step - 2.0 * r)
        growth = max(growth, diag.theta_prev - diag.theta)
    return band, growth


def synth_suite(tolerance_scale: float = 1.0) -> list[CheckResult]:
    """Waypoint chain, accuracy and Lyapunov decrease on scenarios A and B."""
    suite = 'synth'
    results = []
    for sid in ('A', 'B'):
        run = _scenario_run(sid, DEFAULT_TARGET_ANGLES[0])
        band, growth = waypoint_violation(run)
        result = run.result
        fractions = [lc.negative_fraction for lc in result.lyapunov[1:]]
        results.extend([
            _le(suite, f'{sid} waypoint band', band, 1e-9 * tolerance_scale),
            _le(suite, f'{sid} theta increasing', growth, 0.0),
            _le(suite, f'{sid} final error', result.final_error,
                2.0 * result.r),
            _ge(suite, f'{sid} lyapunov decrease', min(fractions), 0.99),
        ])
    return results


def casestudy_suite(tolerance_scale: float = 1.0) -> list[CheckResult]:
    """Quadrotor constants, learning radii and reachability witnesses."""
    suite = 'casestudy'
    params = QuadrotorParams()
    local = _quadrotor_local()
    p = proxy_from_local(local)
    scale = tolerance_scale
    results = [
        _le(suite, 'J_x', abs(params.J_x - 0.009), 1e-12 * scale),
        _le(suite, 'J_z', abs(params.J_z - 0.014), 1e-12 * scale),
        _le(suite, 'b', abs(p.b - 111.11) / 111.11, 0.01 * scale),
        _le(suite, 'c', abs(p.c - 2.0), 1e-12 * scale),
        _le(suite, 'a', float(np.abs(p.a - QUADROTOR_DRIFT).max()),
            0.02 * scale),
        _le(suite, 'exact L_f', affine_lipschitz(params), 1.0),
    ]
    for scenario in scenarios():
        raw = learning_radius(p, scenario.k, scenario.dt, 2, RadiusVariant.RAW)
        ds = learning_radius(
            p, scenario.k, scenario.dt, 2, RadiusVariant.DRIFT_SUBTRACTED
        )
        logger.info(
            "scenario %s: r raw %.6g, drift-subtracted %.6g",
            scenario.id, raw, ds,
        )
        results.append(_le(
            suite, f'{scenario.id} learning radius',
            abs(raw - scenario.r_expected) / scenario.r_expected, 0.15 * scale,
            f"raw {raw:.4g}, drift-subtracted {ds:.4g}",
        ))
    for sid in ('A', 'B'):
        for angle in DEFAULT_TARGET_ANGLES:
            run = _scenario_run(sid, angle)
            results.append(_le(
                suite, f'{sid} at {angle:g} deg within 2r',
                run.result.final_error, 2.0 * run.result.r,
            ))
    return results


SUITE_RUNNERS: dict[str, Callable[[float], list[CheckResult]]] = {
    'proxy': proxy_suite,
    'learner': learner_suite,
    'synth': synth_suite,
    'casestudy': casestudy_suite,
}


def run_suites(name: str = 'all', tolerance_scale: float = 1.0) -> list[CheckResult]:
    names = SUITES if name == 'all' else (name,)
    results = []
    for suite in names:
        logger.info("running %s suite", suite)
        results.extend(SUITE_RUNNERS[suite](tolerance_scale))
    return results
