"""Command-line entry point.

Subcommands: ``run`` (integrate one or more scenarios), ``scan-chi``
(susceptibility scans only), ``list-scenarios`` and ``validate``.  Exit
codes: 0 success, 2 configuration error, 3 numerical failure.  The default
output root is taken from $STATIONARY_LIGHT_OUT (falling back to ./runs).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .mbe import NumericalBlowupError
from .scenarios import (
    ConfigError,
    ScenarioConfig,
    UNITS_BANNER,
    canned_scenario_path,
    list_canned_scenarios,
    load_config,
    run_scenario,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

OUTPUT_ROOT_ENV = "STATIONARY_LIGHT_OUT"


def _resolve_config(ref: str) -> ScenarioConfig:
    path = Path(ref)
    if not path.exists() and not ref.endswith(".toml"):
        path = canned_scenario_path(ref)
    return load_config(path)


def _output_root(arg: str | None) -> Path:
    if arg is not None:
        return Path(arg)
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))


def _run_one(ref: str, out_root: str, snapshots: int | None) -> int:
    try:
        config = _resolve_config(ref)
        if snapshots is not None and config.duration > 0.0:
            config = replace(config, snapshot_every=config.duration / max(snapshots, 1))
        out_dir = Path(out_root) / config.name
        run_scenario(config, out_dir)
        print(f"{config.name}: ok -> {out_dir}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalBlowupError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def cmd_run(args: argparse.Namespace) -> int:
    out_root = str(_output_root(args.out))
    refs = args.config
    if args.jobs > 1 and len(refs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(_run_one, refs,
                                  [out_root] * len(refs),
                                  [args.snapshots] * len(refs)))
        return max(codes)
    code = EXIT_OK
    for ref in refs:
        code = max(code, _run_one(ref, out_root, args.snapshots))
    return code


def cmd_scan_chi(args: argparse.Namespace) -> int:
    try:
        config = _resolve_config(args.config)
        if config.chi_scan is None:
            raise ConfigError(f"{args.config}: no [chi_scan] section")
        config = replace(config, duration=0.0, analyses=())
        out_dir = _output_root(args.out) / config.name
        run_scenario(config, out_dir)
        print(f"{config.name}: chi scan -> {out_dir}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def cmd_list(args: argparse.Namespace) -> int:
    for name, description in list_canned_scenarios():
        print(f"{name:12s} {description}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        config = _resolve_config(args.config)
    except ConfigError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    from .scenarios import _config_echo

    print(json.dumps({"units": UNITS_BANNER, "config": _config_echo(config)},
                     indent=2, default=str, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stationary-light",
        description="1D stationary-light-pulse simulator and analytics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run scenario file(s) or canned scenario name(s)")
    p_run.add_argument("config", nargs="+", help="path to a .toml scenario or a canned name")
    p_run.add_argument("--out", default=None, help="output root directory")
    p_run.add_argument("--snapshots", type=int, default=None,
                       help="target number of snapshots (overrides cadence)")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel scenario workers")
    p_run.set_defaults(func=cmd_run)

    p_chi = sub.add_parser("scan-chi", help="run only the susceptibility scan of a scenario")
    p_chi.add_argument("config")
    p_chi.add_argument("--out", default=None)
    p_chi.set_defaults(func=cmd_scan_chi)

    p_list = sub.add_parser("list-scenarios", help="list canned scenarios")
    p_list.set_defaults(func=cmd_list)

    p_val = sub.add_parser("validate", help="validate a scenario file and echo it")
    p_val.add_argument("config")
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
