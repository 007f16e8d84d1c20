"""Command-line entry point.

    cavitysim run <config> [--seed S] [--out DIR] [--rescale F]
                              [--trajectories N] [--format csv,json]
                              [--no-figures]
    cavitysim list-scenarios
    cavitysim validate <config>

Exit codes: 0 success, 2 configuration error, 3 budget error, 4 numerical
non-convergence.  The worker-pool size is read from CAVITYSIM_WORKERS.
"""

from __future__ import annotations

import argparse
import sys

from .errors import (
    BudgetExceededError,
    ConfigError,
    NoConvergenceError,
    StiffnessBudgetError,
)
from .scenarios import SCENARIO_KINDS, load_config, run_scenario
from .scenarios.config import SCENARIO_KINDS as KINDS


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavitysim",
        description="Quantum many-body simulations in coupled cavity arrays")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scenario config")
    run_p.add_argument("config", help="path to a YAML/JSON scenario config")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--out", default=None, help="output directory")
    run_p.add_argument("--rescale", type=float, default=None,
                       help="common frequency rescale factor in (0, 1]")
    run_p.add_argument("--trajectories", type=int, default=None)
    run_p.add_argument("--format", default=None,
                       help="comma-separated output formats (csv,json)")
    run_p.add_argument("--no-figures", action="store_true",
                       help="skip quicklook figure rendering")

    sub.add_parser("list-scenarios", help="print the known scenario kinds")

    val_p = sub.add_parser("validate", help="check a config without running")
    val_p.add_argument("config")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "list-scenarios":
        for kind in KINDS:
            print(kind)
        return 0

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        print(f"ok: scenario={cfg.kind} seed={cfg.seed}")
        return 0

    if args.seed is not None:
        cfg.seed = args.seed
    if args.rescale is not None:
        cfg.rescale = args.rescale
    if args.trajectories is not None:
        cfg.params["trajectories"] = args.trajectories
    if args.format is not None:
        cfg.formats = tuple(f.strip() for f in args.format.split(",")
                            if f.strip())
    if args.no_figures:
        cfg.render_figures = False

    try:
        cfg.validate()
        result, manifest = run_scenario(cfg, out_dir=args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceededError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 3
    except (NoConvergenceError, StiffnessBudgetError) as exc:
        print(f"numerical non-convergence: {exc}", file=sys.stderr)
        return 4

    for key in sorted(result.summary):
        print(f"{key}: {result.summary[key]}")
    if manifest:
        print(f"outputs: {', '.join(sorted(manifest['outputs']))}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
