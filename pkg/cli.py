#!/usr/bin/env python3
"""Run cantilever coupling scenarios.

Usage:
    # List shipped example scenarios
    uv run python cli.py run --list

    # Run a config file
    uv run python cli.py run scenarios/reference_trap.cfg

    # Run a named example into a chosen directory
    uv run python cli.py run --example resonance --output runs/

    # Check a config without running it
    uv run python cli.py validate scenarios/reference_trap.cfg

    # Print every config key with its default and constraint
    uv run python cli.py schema

    # Summarise the runs in a directory
    uv run python cli.py report runs/

Exit codes: 0 success, 1 config error, 2 physics failure, 3 I/O.
"""

import argparse
import logging
import os
import sys
from pathlib import Path

from dotenv import load_dotenv

from cantibec.errors import CantibecError, ConfigError, OutputError
from cantibec.runner import report, run_scenario
from cantibec.scenario import Scenario, config_schema, parse_config, serialize_config
from example_scenarios import SCENARIOS

# Load .env file from current directory
load_dotenv()

LOG_LEVEL_ENV = "CANTIBEC_LOG_LEVEL"
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"


def configure_logging(verbose: int = 0):
    """Log level from -v flags, else CANTIBEC_LOG_LEVEL, else WARNING."""
    if verbose:
        level = logging.DEBUG if verbose > 1 else logging.INFO
    else:
        level = getattr(logging, os.environ.get(LOG_LEVEL_ENV, "WARNING").upper(), logging.WARNING)
    logging.basicConfig(level=level, format=LOG_FORMAT)


def read_config(path: str) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise OutputError(f"cannot read {path}: {e}") from e
    return parse_config(text)


def example_scenario(name: str) -> Scenario:
    if name not in SCENARIOS:
        raise ConfigError(f"unknown example {name!r}; available: {', '.join(SCENARIOS)}")
    return SCENARIOS[name]().build()


def list_examples():
    """Print the shipped example scenarios."""
    print("\nAvailable example scenarios:")
    print("-" * 50)
    for name, scenario_fn in SCENARIOS.items():
        scenario = scenario_fn().build()
        print(f"  {name:22} - {scenario.kind}")
    print()


def cmd_run(args) -> int:
    if args.list:
        list_examples()
        return 0
    if args.example:
        scenario = example_scenario(args.example)
    elif args.config:
        scenario = read_config(args.config)
    else:
        print("run needs a config file, --example NAME or --list", file=sys.stderr)
        return 1

    if args.dry_run:
        print(serialize_config(scenario), end="")
        return 0

    print(f"Running {scenario.name} ({scenario.kind})...")
    outcome = run_scenario(scenario, output_dir=args.output, workers=args.workers)
    for path in outcome.outputs:
        print(f"  wrote {path}")
    return 0


def cmd_validate(args) -> int:
    scenario = read_config(args.config)
    print(f"{args.config}: ok ({scenario.name}, {scenario.kind})")
    return 0


def cmd_schema(args) -> int:
    print(config_schema(), end="")
    return 0


def cmd_report(args) -> int:
    print(report(Path(args.output_dir)), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Simulate a condensate coupled to a cantilever surface")
    parser.add_argument("--verbose", "-v", action="count", default=0, help="More log output (-vv for debug)")
    commands = parser.add_subparsers(dest="command")

    run = commands.add_parser("run", help="Run a scenario")
    run.add_argument("config", nargs="?", help="Scenario config file")
    run.add_argument("--example", "-e", type=str, help="Run a named example scenario")
    run.add_argument("--list", "-l", action="store_true", help="List example scenarios")
    run.add_argument("--output", "-o", type=Path, help="Output directory (overrides the config)")
    run.add_argument("--workers", "-j", type=int, help="Worker processes (capped by CANTIBEC_THREADS)")
    run.add_argument("--dry-run", "-n", action="store_true", help="Print the resolved config without running")
    run.set_defaults(handler=cmd_run)

    validate = commands.add_parser("validate", help="Check a config file")
    validate.add_argument("config", help="Scenario config file")
    validate.set_defaults(handler=cmd_validate)

    schema = commands.add_parser("schema", help="Print all config keys")
    schema.set_defaults(handler=cmd_schema)

    summary = commands.add_parser("report", help="Summarise the runs in a directory")
    summary.add_argument("output_dir", help="Directory with .report files")
    summary.set_defaults(handler=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    if not args.command:
        parser.print_help()
        print("\nExamples:")
        print("  uv run python cli.py run --list")
        print("  uv run python cli.py run --example reference-trap")
        print("  uv run python cli.py schema")
        return 0

    try:
        return args.handler(args)
    except CantibecError as e:
        print(f"error[{e.category}]: {e}", file=sys.stderr)
        return e.exit_code
    except ValueError as e:
        print(f"error[config]: {e}", file=sys.stderr)
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
