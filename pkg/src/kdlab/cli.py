"""Command line entry point.

One subcommand per scenario.  Parameters come from the scenario preset,
optionally overridden by a JSON config file.
"""

from __future__ import annotations

import argparse
import sys

from .experiments import (
    SCENARIOS,
    ConfigError,
    ExperimentConfig,
    load_config,
    preset,
    run_scenario,
)

_DESCRIPTIONS = {
    "rabi": "long drive at rest; oscillation time series and period fit",
    "ablation": "full versus same-sign-only coupling time series",
    "scan-p3": "diffraction probability versus detector momentum",
    "channels": "perturbative channel decomposition versus momentum",
    "classical-scan": "point-particle deflection versus initial momentum",
    "convergence": "window and step-size sensitivity report",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kdlab",
        description="Two-photon standing-wave diffraction laboratory.",
    )
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in SCENARIOS:
        p = sub.add_parser(name, help=_DESCRIPTIONS[name])
        p.add_argument(
            "--config",
            metavar="PATH",
            help="JSON file overriding preset parameters",
        )
        p.add_argument(
            "--preset",
            metavar="NAME",
            help="named parameter preset (defaults to the subcommand)",
        )
        p.add_argument(
            "--outdir",
            metavar="DIR",
            default=".",
            help="directory for CSV and summary output (default: .)",
        )
        p.add_argument(
            "--workers",
            metavar="N",
            type=int,
            default=None,
            help="parallel scan workers (default: KDLAB_WORKERS or 1)",
        )
    return parser


def _resolve_config(args) -> ExperimentConfig:
    if args.config is not None:
        config = load_config(args.config)
    elif args.preset is not None:
        config = preset(args.preset)
    else:
        config = preset(args.scenario)
    if config.scenario != args.scenario:
        raise ConfigError(
            f"scenario: config is for {config.scenario!r}, "
            f"but the {args.scenario!r} command was invoked"
        )
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _resolve_config(args)
        summary = run_scenario(config, args.outdir, workers=args.workers)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    flags = summary.get("sanity", {})
    for name in sorted(flags):
        print(f"{name}: {'ok' if flags[name] else 'FAILED'}")
    print(f"wrote output to {args.outdir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
