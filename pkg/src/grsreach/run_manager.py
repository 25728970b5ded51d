import logging
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from grsreach import artifacts
from grsreach.casestudy import (
    LITERAL_PROP_MASS,
    QuadrotorParams,
    ScenarioRun,
    boundary_target,
    build_affine,
    build_identity,
    build_quadrotor,
    get_scenario,
)
from grsreach.config import RunConfig
from grsreach.core import ControlAffineField, GuardRegion, Simulator, Trajectory
from grsreach.errors import ConfigError, GrsReachError
from grsreach.learner import BoundConstants, CycleConfig
from grsreach.proxy import (
    GrsBoundary,
    LocalData,
    ProxyParams,
    grs_boundary,
    proxy_from_local,
)
from grsreach.synthesizer import (
    SynthesisConfig,
    SynthesisResult,
    Variant,
    recommend_variant,
    synthesize,
    synthesize_finite_time,
)

logger = logging.getLogger(__name__)

OUT_ENV = 'GRSREACH_OUT'
DEFAULT_OUT = 'runs'
GUARD_FACTOR = 10.0


@dataclass
class Problem:
    """A resolved run: plant, local data, target and synthesis settings."""
    name: str
    config: RunConfig
    field: ControlAffineField
    local: LocalData
    proxy: ProxyParams
    target: np.ndarray
    reference: Trajectory | None
    synthesis: SynthesisConfig

    @property
    def substep(self) -> float:
        return self.config.dt / self.config.substep_divisor


class RunManager:
    """Resolves configurations into runs and owns the output root."""

    def __init__(self, out_root: Path | None = None):
        if out_root is None:
            out_root = Path(os.environ.get(OUT_ENV, DEFAULT_OUT))
        self.out_root = Path(out_root)

    def run_dir(self, *parts: str) -> Path:
        path = self.out_root.joinpath(*parts)
        path.mkdir(parents=True, exist_ok=True)
        return path

    @staticmethod
    def scenario_config(
        scenario_id: str,
        angle: float = 30.0,
        variant: Variant | str = 'auto',
    ) -> RunConfig:
        """Config that replays a quadrotor scenario run.

        algorithm2 leaves r unset so the drift-subtracted learning radius
        is computed.
        """
        scenario = get_scenario(scenario_id)
        variant = getattr(variant, 'value', variant)
        return RunConfig(
            system='quadrotor',
            dt=scenario.dt,
            eps=scenario.eps,
            k=float(scenario.k),
            r=None if variant == Variant.ALGORITHM2.value
            else scenario.r_expected,
            target_angle=float(angle),
            variant=variant,
        )

    def build_field(self, cfg: RunConfig) -> ControlAffineField:
        if cfg.system == 'quadrotor':
            params = QuadrotorParams(
                M=cfg.mass,
                R=cfg.radius,
                m_prop=LITERAL_PROP_MASS if cfg.literal_prop_mass else cfg.prop_mass,
                l=cfg.arm_length,
            )
            field = build_quadrotor(params, cfg.L_f, cfg.L_G)
        elif cfg.system == 'identity':
            field = build_identity(cfg.d, cfg.L_f, cfg.L_G)
        else:
            field = build_affine(
                cfg.affine_A, cfg.affine_f0, cfg.affine_G, cfg.L_f, cfg.L_G
            )
        if cfg.d is not None and cfg.d != field.d:
            raise ConfigError(f"d={cfg.d} but system '{cfg.system}' has d={field.d}")
        if cfg.m is not None and cfg.m != field.m:
            raise ConfigError(f"m={cfg.m} but system '{cfg.system}' has m={field.m}")
        return field

    def local_data(self, cfg: RunConfig, field: ControlAffineField) -> LocalData:
        """Local data at x0: given in the config, or sampled once from the plant."""
        x0 = np.zeros(field.d) if cfg.x0 is None else np.asarray(cfg.x0, dtype=float)
        if x0.shape != (field.d,):
            raise ConfigError(f"x0 must have {field.d} entries")
        sampled = LocalData.from_field(field, x0)
        f_x0 = sampled.f_x0 if cfg.f_x0 is None else np.asarray(cfg.f_x0, dtype=float)
        G_x0 = sampled.G_x0 if cfg.G_x0 is None else np.asarray(cfg.G_x0, dtype=float)
        if f_x0.shape != (field.d,) or G_x0.shape != (field.d, field.m):
            raise ConfigError(
                f"f_x0 must have {field.d} entries and G_x0 shape "
                f"{field.d}x{field.m}"
            )
        return LocalData(x0=x0, f_x0=f_x0, G_x0=G_x0, L_f=cfg.L_f, L_G=cfg.L_G)

    def resolve(self, cfg: RunConfig, name: str = 'custom') -> Problem:
        """Turn a config into a runnable problem; library errors become ConfigError."""
        try:
            field = self.build_field(cfg)
            local = self.local_data(cfg, field)
            p = proxy_from_local(local)
            if cfg.target is not None:
                target = np.asarray(cfg.target, dtype=float)
                if target.shape != (field.d,):
                    raise ConfigError(f"target must have {field.d} entries")
                reference = None
            else:
                target, reference = boundary_target(local, cfg.target_angle, cfg.T)
            if float(np.linalg.norm(target - local.x0)) >= p.radius * (1 - 1e-9):
                raise ConfigError(
                    f"target lies on or beyond the edge of B "
                    f"(radius {p.radius:.6g})"
                )
            variant = (
                recommend_variant(p) if cfg.variant == 'auto'
                else Variant(cfg.variant)
            )
            cycle = CycleConfig(
                dt=cfg.dt, eps=cfg.eps, k=cfg.k, m=field.m,
                eps_init_constant=cfg.eps_init_constant,
            )
            consts = BoundConstants.defaults(
                local, p, float(np.linalg.norm(target - local.x0)),
                M0=cfg.M0, M1=cfg.M1, L=cfg.L,
            )
            synthesis = SynthesisConfig(
                target=target,
                T=cfg.T,
                cycle=cycle,
                variant=variant,
                consts=consts,
                r=cfg.r,
                max_cycles=cfg.max_cycles,
                n_dirs=cfg.n_dirs,
            )
        except ConfigError:
            raise
        except GrsReachError as exc:
            raise ConfigError(str(exc)) from exc
        return Problem(
            name=name, config=cfg, field=field, local=local, proxy=p,
            target=target, reference=reference, synthesis=synthesis,
        )

    def boundary(self, problem: Problem) -> GrsBoundary:
        return grs_boundary(problem.proxy, problem.config.T, problem.config.n_dirs)

    def run(self, problem: Problem) -> SynthesisResult:
        """Synthesize on a fresh simulator guarded at ten times the radius of B."""
        plant = Simulator(
            problem.field,
            problem.local.x0,
            substep=problem.substep,
            guard=GuardRegion(problem.local.x0, GUARD_FACTOR * problem.proxy.radius),
        )
        logger.info(
            "running %s with %s", problem.name, problem.synthesis.variant.value
        )
        if problem.synthesis.variant is Variant.ALGORITHM1:
            return synthesize(plant, problem.local, problem.synthesis)
        return synthesize_finite_time(plant, problem.local, problem.synthesis)

    def write_run(
        self,
        out_dir: Path,
        result: SynthesisResult,
        cfg: RunConfig,
        boundary: GrsBoundary | None = None,
        reference: Trajectory | None = None,
        trajectory_name: str = 'trajectory.csv',
        extra: dict | None = None,
        record_runtime: bool = False,
    ) -> list[Path]:
        """Write every artifact of a synthesis run and return their paths."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = [artifacts.write_trajectory_csv(
            out_dir / trajectory_name, result.trajectory
        )]
        if result.control is not None:
            paths.append(artifacts.write_control_csv(
                out_dir / 'control.csv', result.control
            ))
        if reference is not None:
            paths.append(artifacts.write_reference_csv(
                out_dir / 'reference.csv', reference
            ))
        if boundary is not None:
            paths.append(artifacts.write_grs_csv(out_dir / 'grs.csv', boundary))
        paths.append(artifacts.write_cycles_jsonl(
            out_dir / 'cycles.jsonl', result.diagnostics,
            {'bound_C': result.bound_C, 'bound_mu': result.bound_mu},
        ))
        summary = artifacts.result_summary(result, record_runtime)
        if extra:
            summary.update(extra)
        paths.append(artifacts.write_diag_json(out_dir / 'diag.json', summary))
        config_path = out_dir / 'config.yaml'
        cfg.save(config_path)
        paths.append(config_path)
        return paths

    def write_scenario(
        self,
        run: ScenarioRun,
        out_dir: Path,
        record_runtime: bool = False,
    ) -> list[Path]:
        return self.write_run(
            out_dir,
            run.result,
            self.scenario_config(
                run.scenario.id, run.angle_deg, run.result.variant
            ),
            boundary=run.boundary,
            reference=run.reference,
            trajectory_name='scenario.csv',
            extra={
                'scenario': run.scenario.id,
                'angle_deg': run.angle_deg,
                'r_raw': run.radius_raw,
                'r_drift_subtracted': run.radius_drift_subtracted,
                'path_deviation': run.deviation,
            },
            record_runtime=record_runtime,
        )
