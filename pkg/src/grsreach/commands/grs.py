import sys
from pathlib import Path

from grsreach.artifacts import write_grs_csv
from grsreach.config import RunConfig
from grsreach.errors import GrsReachError
from grsreach.proxy import grs_boundary, proxy_from_local
from grsreach.run_manager import RunManager


def load_config(manager: RunManager, args) -> tuple[str, RunConfig]:
    """Config named by --config, or the quadrotor config of --scenario."""
    if args.config:
        return Path(args.config).stem, RunConfig.load(args.config)
    scenario = args.scenario or 'A'
    if isinstance(scenario, list):
        scenario = scenario[0]
    return scenario.upper(), manager.scenario_config(scenario)


def cmd_grs(manager: RunManager, args) -> None:
    """Sample the GRS boundary and write grs.csv."""
    try:
        name, cfg = load_config(manager, args)
        field = manager.build_field(cfg)
        p = proxy_from_local(manager.local_data(cfg, field))
        T = cfg.T if args.T is None else args.T
        samples = cfg.n_dirs if args.samples is None else args.samples
        boundary = grs_boundary(p, T, samples)
    except GrsReachError as exc:
        print(f"Error: {exc}")
        sys.exit(2)

    out_dir = Path(args.out) if args.out else manager.run_dir(name)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = write_grs_csv(out_dir / 'grs.csv', boundary)
    radii = boundary.radii()

    print(f"GRS boundary of {name} at T={T:g} ({len(boundary)} directions)")
    print(f"  Max radius:  {radii.max():.12g}")
    print(f"  Min radius:  {radii.min():.12g}")
    print(f"  Edge of B:   {int(boundary.clamped.sum())} direction(s)")
    print(f"✓ Wrote {path}")
