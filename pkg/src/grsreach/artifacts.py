"""CSV and JSON writers for run artifacts.

Numbers are written with 16 significant digits so that repeated runs give
byte-identical files and diffs between builds are meaningful.
"""

import csv
import json
from pathlib import Path

import numpy as np

from grsreach.core import PiecewiseConstantControl, Trajectory
from grsreach.proxy import GrsBoundary
from grsreach.synthesizer import CycleDiagnostics, SynthesisResult

FLOAT_FMT = '.16g'


def fmt(value) -> str:
    return format(float(value), FLOAT_FMT)


def _plain(value):
    """JSON-ready copy of value with floats rounded through FLOAT_FMT."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(fmt(value))
    if hasattr(value, 'value'):
        return value.value
    return value


def _write_rows(path: Path, header: list[str], rows) -> Path:
    path = Path(path)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_trajectory_csv(path: Path, traj: Trajectory) -> Path:
    header = (
        ['t']
        + [f'x{i + 1}' for i in range(traj.d)]
        + [f'u{j + 1}' for j in range(traj.m)]
    )
    rows = (
        [fmt(t)] + [fmt(v) for v in x] + [fmt(v) for v in u]
        for t, x, u in zip(traj.times, traj.states, traj.controls)
    )
    return _write_rows(path, header, rows)


def write_reference_csv(path: Path, reference: Trajectory) -> Path:
    header = ['t'] + [f'x{i + 1}' for i in range(reference.d)]
    rows = (
        [fmt(t)] + [fmt(v) for v in x]
        for t, x in zip(reference.times, reference.states)
    )
    return _write_rows(path, header, rows)


def write_grs_csv(path: Path, boundary: GrsBoundary) -> Path:
    """One row per direction: angle (2-d image) or point index, endpoint, flag."""
    d = boundary.endpoints.shape[1]
    header = (
        ['angle_or_index'] + [f'y{i + 1}' for i in range(d)] + ['clamped']
    )
    rows = (
        [fmt(label)] + [fmt(v) for v in y] + [int(clamped)]
        for label, y, clamped in zip(
            boundary.labels, boundary.endpoints, boundary.clamped
        )
    )
    return _write_rows(path, header, rows)


def write_control_csv(path: Path, control: PiecewiseConstantControl) -> Path:
    header = ['t_start', 't_end'] + [f'u{j + 1}' for j in range(control.m)]
    rows = (
        [fmt(lo), fmt(hi)] + [fmt(v) for v in u]
        for lo, hi, u in control.pieces()
    )
    return _write_rows(path, header, rows)


def cycle_entry(diag: CycleDiagnostics) -> dict:
    rec = diag.record
    entry = {
        'n': diag.n,
        'tau_n': diag.tau_n,
        'inputs': rec.inputs,
        'states': rec.states,
        'dist_to_waypoint': diag.dist_to_waypoint,
        'accepted': diag.accepted,
        'theta': diag.theta,
        'z': diag.z,
        'objective': diag.objective,
        'lambda': diag.lam,
        'degenerate': diag.degenerate,
        'negative_fraction': diag.negative_fraction,
    }
    if diag.condition is not None:
        entry['condition'] = {
            'holds': diag.condition.holds,
            'lhs': diag.condition.lhs,
            'rhs': diag.condition.rhs,
        }
    return entry


def write_cycles_jsonl(
    path: Path,
    diagnostics: list[CycleDiagnostics],
    bounds: dict | None = None,
) -> Path:
    """One JSON object per executed cycle; bounds are repeated on each."""
    path = Path(path)
    with open(path, 'w') as f:
        for diag in diagnostics:
            entry = cycle_entry(diag)
            if bounds:
                entry.update(bounds)
            f.write(json.dumps(_plain(entry), sort_keys=True))
            f.write('\n')
    return path


def result_summary(result: SynthesisResult, record_runtime: bool = False) -> dict:
    conditions = [d.condition for d in result.diagnostics if d.condition]
    return {
        'variant': result.variant,
        'termination': result.termination,
        'target': result.target,
        'final_state': result.trajectory.final_state,
        'final_error': result.final_error,
        'cycles': result.n_cycles,
        'accepted_cycles': sum(d.accepted for d in result.diagnostics),
        'r': result.r,
        'proxy': {
            'a': result.proxy.a,
            'b': result.proxy.b,
            'c': result.proxy.c,
            'radius': result.proxy.radius,
        },
        'bounds': {
            'M0': result.consts.M0,
            'M1': result.consts.M1,
            'L': result.consts.L,
            'L_max': result.consts.L_max,
            'C': result.bound_C,
            'mu': result.bound_mu,
        },
        'params': (
            {'dt': result.cycle.dt, 'eps': result.cycle.eps,
             'k': result.cycle.k}
            if result.cycle is not None else None
        ),
        'theta': [d.theta for d in result.diagnostics],
        'condition_per_cycle': [
            d.condition.holds if d.condition else None
            for d in result.diagnostics
        ],
        'gamma': result.gamma,
        'condition_holds': (
            all(c.holds for c in conditions) if conditions else None
        ),
        'condition_first': (
            {'lhs': conditions[0].lhs, 'rhs': conditions[0].rhs}
            if conditions else None
        ),
        'lyapunov_min_negative_fraction': min(
            (lc.negative_fraction for lc in result.lyapunov), default=None
        ),
        'runtime_s': result.runtime_s if record_runtime else None,
    }


def write_diag_json(path: Path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(
        json.dumps(_plain(payload), indent=2, sort_keys=True) + '\n',
        encoding='utf-8',
    )
    return path
