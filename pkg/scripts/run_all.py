#!/usr/bin/env python3
"""Run every experiment with its default desk-scale configuration.

Outputs land in one subdirectory per experiment under --out
(default: ./out).  Takes a few minutes end to end.
"""

import argparse
import time
from pathlib import Path

from levelset_gibbs.harness import (ExperimentConfig, experiment_ids,
                                    run_experiment)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--only", nargs="*", help="subset of experiment ids")
    args = ap.parse_args()

    ids = args.only or experiment_ids()
    for eid in ids:
        t0 = time.monotonic()
        out_dir = Path(args.out) / eid
        manifest = run_experiment(ExperimentConfig(
            experiment=eid, seed=args.seed, out_dir=str(out_dir)))
        names = ", ".join(sorted(manifest.outputs))
        print(f"{eid:<9} {time.monotonic() - t0:6.1f}s  -> {out_dir}  [{names}]")


if __name__ == "__main__":
    main()
