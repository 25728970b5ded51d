import sys

from grsreach.checks import run_suites
from grsreach.run_manager import RunManager


def cmd_verify(manager: RunManager, args) -> None:
    """Run property suites and print a pass/fail table."""
    print(f"Running {args.suite} suite(s)...\n")
    results = run_suites(args.suite, args.tolerance_scale)

    for check in results:
        mark = "✓" if check.passed else "✗"
        line = (
            f"  {mark} {check.suite:<10} {check.name:<32} "
            f"{check.value:>20.12g} {check.limit:>20.12g}"
        )
        if check.detail:
            line += f"  ({check.detail})"
        print(line)

    failed = [c for c in results if not c.passed]
    if failed:
        print(f"\n✗ {len(failed)} of {len(results)} check(s) failed")
        sys.exit(1)
    print(f"\n✓ All {len(results)} checks passed")
