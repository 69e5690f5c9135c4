"""Command-line entry point.

Exit codes: 0 on success, 1 on configuration errors, 2 on data errors.
The READABILITY_LAB_THREADS environment variable caps the worker pool.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, DataError
from .experiments import load_config, run_ablation, run_pca_sweep, run_substitution

_COMMANDS = {
    "ablation": run_ablation,
    "substitution": run_substitution,
    "pca-sweep": run_pca_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="readability-lab",
        description="Readability assessment experiments from a TOML config",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        cmd = sub.add_parser(name, help=fn.__doc__.splitlines()[0].strip())
        cmd.add_argument("--config", required=True, help="path to the TOML config")
        cmd.add_argument("--out", default=None, help="output directory override")
        cmd.add_argument("--seed", type=int, default=None, help="seed override")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, overrides={"seed": args.seed})
        paths = _COMMANDS[args.command](config, out_dir=args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    for kind, path in sorted(paths.items()):
        print(f"{kind}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
