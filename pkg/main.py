"""spinmeter entry point.

Usage:
  python main.py run <config>
  python main.py validate <config>
  python main.py list-scenarios

Exit codes: 0 success, 2 config error, 3 numerical-accuracy failure.
"""

import argparse
import logging
import sys
import time

from spinmeter import __version__
from spinmeter.config import SCENARIOS, load_config
from spinmeter.errors import ConfigurationError, NumericalError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

SCENARIO_NOTES = {
    "ring_profile": "radial function F(r|T) of the 2D ring vs the full Bessel integrals",
    "moments_2d": "pointer moments <x>, <y>, <x^2>, <y^2> after a Rashba pulse",
    "density_1d": "1D density and local velocity at fixed t for several widths",
    "spread_1d": "finite-mass spreading: density and sigma_x density per v_sp",
    "trajectory_1d": "<x(t)>, w(t), spin components and purity over time",
    "spiral_1d": "(<sigma_y>, <sigma_perp>) spiral and its steady state",
    "asymptotics": "steady-state spin from strong to weak spin-orbit coupling",
    "trotter_check": "checkerboard path sums and product-formula convergence",
}

log = logging.getLogger("spinmeter")


# ─────────────────────────── Logging ──────────────────────────────────────


class _SpinmeterFormatter(logging.Formatter):
    def format(self, record):
        ts = time.strftime("%H:%M:%S", time.localtime(record.created))
        return f"[{ts}] {record.getMessage()}"


def setup_logging(level: str):
    numeric = getattr(logging, level.upper(), logging.INFO)
    root = logging.getLogger()
    root.setLevel(numeric)
    for old in [h for h in root.handlers if isinstance(h.formatter, _SpinmeterFormatter)]:
        root.removeHandler(old)
    handler = logging.StreamHandler()
    handler.setFormatter(_SpinmeterFormatter())
    root.addHandler(handler)


# ─────────────────────────── Commands ─────────────────────────────────────


def cmd_list_scenarios(args) -> int:
    for name in SCENARIOS:
        print(f"{name:<15} {SCENARIO_NOTES[name]}")
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    print(f"[spinmeter] {args.config}: ok (scenario {cfg.scenario})")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    setup_logging(cfg.log_level)
    log.info(f"spinmeter v{__version__} starting")

    from spinmeter.core.scenarios import run_scenario

    try:
        result = run_scenario(cfg)
    except ConfigurationError as e:
        print(f"[spinmeter] Config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as e:
        print(f"[spinmeter] Numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL

    for path in result.files:
        print(path)
    failed = [name for name, ok in result.checks.items() if not ok]
    if failed and cfg.strict:
        print(f"[spinmeter] Accuracy checks failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


# ─────────────────────────── Entry point ──────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinmeter",
        description="spinmeter: spin measurement through spin-orbit coupling",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run the scenario described by a config file")
    run.add_argument("config", help="Path to a scenario YAML file")
    run.set_defaults(func=cmd_run)

    validate = sub.add_parser("validate", help="Check a config file and exit")
    validate.add_argument("config", help="Path to a scenario YAML file")
    validate.set_defaults(func=cmd_validate)

    scenarios = sub.add_parser("list-scenarios", help="List the available scenarios")
    scenarios.set_defaults(func=cmd_list_scenarios)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
