"""Command-line interface.

Exit codes: 0 success, 1 configuration error, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import sys

from .harness import (ConfigError, ExperimentConfig, catalog_listing,
                      parse_config_file, run_experiment)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="levelset-gibbs",
        description="Gibbs measures on zero sets: samplers and verification runs")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a named experiment")
    run.add_argument("experiment", help="experiment id (see `catalog`)")
    run.add_argument("--config", help="key/value config file with overrides")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", help="output directory "
                     "(default: $LEVELSET_GIBBS_OUT or the working directory)")
    sub.add_parser("catalog", help="list catalog maps, families and experiments")
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "catalog":
        print(catalog_listing())
        return 0
    try:
        overrides = {}
        if args.config:
            raw = parse_config_file(args.config)
            for key, val in raw.items():
                # section prefix matching the experiment id is optional
                if key.startswith(args.experiment + "."):
                    key = key[len(args.experiment) + 1:]
                overrides[key] = val
        cfg = ExperimentConfig(experiment=args.experiment, seed=args.seed,
                               out_dir=args.out, overrides=overrides)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        manifest = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # numeric failures carry experiment context
        print(f"numeric failure in {args.experiment!r}: {exc}", file=sys.stderr)
        return 2
    for name, digest in manifest.outputs.items():
        print(f"{name}  sha256={digest[:16]}...")
    return 0


if __name__ == "__main__":
    sys.exit(main())
