import sys
from pathlib import Path

from grsreach.casestudy import run_batch
from grsreach.config import RunConfig
from grsreach.errors import GrsReachError
from grsreach.run_manager import RunManager
from grsreach.synthesizer import SynthesisResult, Termination

SUCCESS = (Termination.TARGET_RADIUS, Termination.HORIZON_REACHED)


def print_result(title: str, result: SynthesisResult, paths) -> None:
    print(f"\n{title}")
    print(f"  Variant:      {result.variant.value}")
    print(f"  Termination:  {result.termination.value}")
    print(f"  Cycles:       {result.n_cycles}")
    print(f"  r:            {result.r:.12g}")
    print(f"  Final error:  {result.final_error:.12g}")
    if result.gamma is not None:
        print(f"  Gamma:        {result.gamma:.12g}")
    for path in paths:
        print(f"  ✓ Wrote {path}")


def cmd_synth(manager: RunManager, args) -> None:
    """Synthesize a control for a scenario or a config file."""
    if args.out:
        manager.out_root = Path(args.out)
    angles = args.angle or []

    if args.config:
        try:
            cfg = RunConfig.load(args.config).updated(
                variant=args.variant,
                target_angle=angles[0] if angles else None,
            )
            name = Path(args.config).stem
            problem = manager.resolve(cfg, name)
            boundary = manager.boundary(problem)
        except GrsReachError as exc:
            print(f"Error: {exc}")
            sys.exit(2)
        if cfg.out_dir and not args.out:
            out_dir = Path(cfg.out_dir)
        else:
            out_dir = manager.run_dir(name)
        result = manager.run(problem)
        paths = manager.write_run(
            out_dir, result, cfg, boundary=boundary,
            reference=problem.reference, record_runtime=args.record_runtime,
        )
        print_result(f"Config {name}", result, paths)
        results = [result]
    else:
        scenario_ids = [s.upper() for s in (args.scenario or ['A'])]
        try:
            runs = run_batch(
                scenario_ids,
                angles or [30.0],
                jobs=args.jobs,
                variant=args.variant,
            )
        except GrsReachError as exc:
            print(f"Error: {exc}")
            sys.exit(2)
        results = []
        for run in runs:
            out_dir = manager.run_dir(run.scenario.id, f"angle{run.angle_deg:g}")
            paths = manager.write_scenario(run, out_dir, args.record_runtime)
            print_result(
                f"Scenario {run.scenario.id}, target angle {run.angle_deg:g}°",
                run.result, paths,
            )
            results.append(run.result)

    failed = [r for r in results if r.termination not in SUCCESS]
    if failed:
        print(f"\n✗ {len(failed)} run(s) stopped early")
        sys.exit(1)
