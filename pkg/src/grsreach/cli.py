#! /usr/bin/env python3
"""
grsreach - reach GRS boundary points of partially unknown control-affine systems

Usage:
    grsreach grs [--config FILE | --scenario ID] [--T T] [--samples N] [--out DIR]
    grsreach synth [--config FILE | --scenario ID [ID ...]] [--angle DEG [DEG ...]]
                   [--variant algorithm1|algorithm2] [--jobs N] [--out DIR]
                   [--record-runtime]
    grsreach verify [--suite proxy|learner|synth|casestudy|all]

Exit codes: 0 success, 1 verification or synthesis failure, 2 usage or
config error. GRSREACH_OUT sets the default output root (runs/).
"""

import argparse
import logging
import sys

from .checks import SUITES
from .commands import cmd_grs, cmd_synth, cmd_verify
from .run_manager import RunManager

MIN_SAMPLES = 8


def _samples(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value}") from None
    if n < MIN_SAMPLES:
        raise argparse.ArgumentTypeError(
            f"need at least {MIN_SAMPLES} samples, got {n}"
        )
    return n


def _positive_int(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {n}")
    return n


def configure_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format='%(levelname)s %(name)s: %(message)s',
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='grsreach',
        description="Guaranteed reachable sets and learn-control synthesis",
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument(
        '-v', '--verbose', action='count', default=0,
        help='-v for progress, -vv for per-cycle detail'
    )

    subparsers = parser.add_subparsers(dest='command', help='Commands')

    # grs
    grs_parser = subparsers.add_parser(
        'grs', help='Sample the GRS boundary'
    )
    grs_source = grs_parser.add_mutually_exclusive_group()
    grs_source.add_argument('--config', help='Run config file')
    grs_source.add_argument('--scenario', help='Quadrotor scenario (A-D)')
    grs_parser.add_argument('--T', type=float, help='Horizon')
    grs_parser.add_argument(
        '--samples', type=_samples, help='Number of boundary directions'
    )
    grs_parser.add_argument('--out', help='Output directory')

    # synth
    synth_parser = subparsers.add_parser(
        'synth', help='Synthesize a control towards a GRS point'
    )
    synth_source = synth_parser.add_mutually_exclusive_group()
    synth_source.add_argument('--config', help='Run config file')
    synth_source.add_argument(
        '--scenario', nargs='+', help='Quadrotor scenario(s) (A-D)'
    )
    synth_parser.add_argument(
        '--angle', type=float, nargs='+', help='Target angle(s) in degrees'
    )
    synth_parser.add_argument(
        '--variant', choices=['algorithm1', 'algorithm2'],
        help='Synthesis variant (default: chosen from the drift)'
    )
    synth_parser.add_argument(
        '--jobs', type=_positive_int, default=1,
        help='Concurrent scenario runs'
    )
    synth_parser.add_argument('--out', help='Output root')
    synth_parser.add_argument(
        '--record-runtime', action='store_true',
        help='Store wall-clock runtime in diag.json'
    )

    # verify
    verify_parser = subparsers.add_parser(
        'verify', help='Run property suites'
    )
    verify_parser.add_argument(
        '--suite', choices=list(SUITES) + ['all'], default='all',
        help='Suite to run'
    )
    verify_parser.add_argument(
        '--tolerance-scale', type=float, default=1.0,
        help=argparse.SUPPRESS
    )

    return parser


def main():
    parser = build_parser()
    args = parser.parse_args()

    if not args.command:
        parser.print_help()
        sys.exit(2)

    configure_logging(args.verbose)

    manager = RunManager()

    # Dispatch to command
    commands = {
        'grs': cmd_grs,
        'synth': cmd_synth,
        'verify': cmd_verify,
    }

    commands[args.command](manager, args)


if __name__ == '__main__':
    main()
