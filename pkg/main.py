#!/usr/bin/env python3
"""
Main entry point for the offloading solver and simulation study.
"""

import argparse
import logging
import os
import sys

from dotenv import load_dotenv

# Set UTF-8 encoding for Windows console
if sys.platform == 'win32':
    import io
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding='utf-8')
    sys.stderr = io.TextIOWrapper(sys.stderr.buffer, encoding='utf-8')

from src.console import print_app_title, print_error, print_warning, setup_rich_logging
from src.core.errors import InstanceValidationError
from src.experiments.orchestrator import (
    EXIT_INVALID_INPUT, CommandResult, ExperimentOrchestrator, parse_seeds, parse_values,
)
from src.schemes import SchemeLabel

SCHEME_NAMES = [label.value for label in SchemeLabel]


def create_argument_parser():
    """Create and configure argument parser."""
    parser = argparse.ArgumentParser(
        description='Latency-minimizing task offloading to multiple helpers',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s generate --seed 3 --out inst.json          # Draw an instance
  %(prog)s solve --instance inst.json --scheme proposed
  %(prog)s compare --seed 3                           # Rank every scheme on one instance
  %(prog)s sweep --preset fig2 --seeds 0..19 --jobs 4
  %(prog)s sweep --axis energy_db --values=-20,-10 --no-timing --out sweep.csv
  %(prog)s verify --seed-count 1
        """
    )
    parser.add_argument(
        '--settings',
        type=str,
        default=os.getenv('MEC_SETTINGS', 'config.yaml'),
        help='Path to the YAML settings file (default: $MEC_SETTINGS or config.yaml)'
    )
    parser.add_argument('--verbose', '-v', action='store_true', help='Enable verbose logging')
    parser.add_argument('--quiet', '-q', action='store_true', help='Suppress non-error output')

    commands = parser.add_subparsers(dest='command', required=True)

    solve = commands.add_parser('solve', help='Run one scheme on an instance file')
    solve.add_argument('--instance', required=True, help='Instance JSON document')
    solve.add_argument('--scheme', default='proposed', choices=SCHEME_NAMES)
    solve.add_argument('--seed', type=int, default=0, help='Seed of the random schemes')
    solve.add_argument('--out', help='Solution document path (default: timestamped output folder)')

    sweep = commands.add_parser('sweep', help='Sweep schemes along one scenario axis')
    sweep.add_argument('--config', help='ScenarioConfig JSON document (default: scenario section of the settings)')
    sweep.add_argument('--preset', help='preset name from the settings (fig2, fig3 and fig4 ship in config.yaml)')
    sweep.add_argument('--axis', choices=['energy_db', 'helper_freq', 'num_tasks'])
    sweep.add_argument('--values', type=parse_values, help="Comma-separated axis values; write --values=-20,-10 for negative ones")
    sweep.add_argument('--scheme', action='append', choices=SCHEME_NAMES, help='Scheme to run; repeatable')
    sweep.add_argument('--seeds', type=parse_seeds, help="Seed range 'A..B' or list 'a,b,c'")
    sweep.add_argument('--jobs', type=int, help='joblib workers')
    sweep.add_argument('--out', help='CSV path (default: timestamped output folder)')
    sweep.add_argument('--no-timing', action='store_true', help='Write wall_ms=0 for reproducible CSVs')

    compare = commands.add_parser('compare', help='Rank schemes on one instance')
    compare.add_argument('--instance', help='Instance JSON document (default: generate from --seed)')
    compare.add_argument('--config', help='ScenarioConfig JSON document used when generating')
    compare.add_argument('--seed', type=int, default=0)
    compare.add_argument('--scheme', action='append', choices=SCHEME_NAMES, help='Scheme to run; repeatable')

    verify = commands.add_parser('verify', help='Run the property checks')
    verify.add_argument('--seed-count', type=int, help='Instances per instance-based check')

    generate = commands.add_parser('generate', help='Write a random instance')
    generate.add_argument('--config', help='ScenarioConfig JSON document')
    generate.add_argument('--seed', type=int, default=0)
    generate.add_argument('--out', help='Instance path (default: timestamped output folder)')

    return parser


def setup_logging(verbose: bool, quiet: bool):
    """Setup logging configuration."""
    if quiet:
        setup_rich_logging(logging.ERROR)
    elif verbose:
        setup_rich_logging(logging.DEBUG)
    else:
        setup_rich_logging(logging.INFO)


def dispatch(orchestrator: ExperimentOrchestrator, args) -> CommandResult:
    """Run the selected subcommand."""
    if args.command == 'solve':
        return orchestrator.cmd_solve(args.instance, args.scheme, args.seed, args.out)
    if args.command == 'sweep':
        return orchestrator.cmd_sweep(
            axis=args.axis,
            values=args.values,
            schemes=args.scheme,
            seeds=args.seeds,
            preset=args.preset,
            scenario_path=args.config,
            jobs=args.jobs,
            output_csv=args.out,
            record_wall_time=False if args.no_timing else None,
        )
    if args.command == 'compare':
        return orchestrator.cmd_compare(args.instance, args.seed, args.scheme, args.config)
    if args.command == 'verify':
        return orchestrator.cmd_verify(args.seed_count)
    return orchestrator.cmd_generate(args.seed, args.out, args.config)


def main(argv=None) -> int:
    """Main function; returns the process exit code."""
    # Load environment variables from .env file
    load_dotenv()

    parser = create_argument_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose, args.quiet)

    if not args.quiet:
        print_app_title()

    try:
        orchestrator = ExperimentOrchestrator(args.settings)
    except InstanceValidationError as e:
        print_error("Settings validation errors:")
        for violation in e.violations:
            print_error(f"  {violation}")
        return EXIT_INVALID_INPUT

    try:
        return dispatch(orchestrator, args).exit_code
    except KeyboardInterrupt:
        print_warning("\nInterrupted by user")
        return 1


if __name__ == '__main__':
    sys.exit(main())
