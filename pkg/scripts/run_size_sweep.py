#!/usr/bin/env python3
"""Finite-sample behavior: accuracy vs training-set size at fixed correlation.

The test set scales with n, matching the generator's defaults.
"""

import argparse
import os
import sys

from dataclasses import replace

from jse.evaluate import ExperimentConfig, run_sweep
from jse.io_files import write_plot_tsv, write_results_csv
from jse.toy import ToyConfig


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="500,1000,2000,5000")
    ap.add_argument("--rho", type=float, default=0.8)
    ap.add_argument("--methods", default="jse,inlp")
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--out", default="results/size_sweep")
    args = ap.parse_args()

    sizes = [float(x) for x in args.sizes.split(",")]
    cfg = ExperimentConfig(
        method="jse", seeds=args.seeds, toy=ToyConfig(rho=args.rho), test_n=None
    )
    methods = [m.strip() for m in args.methods.split(",")]
    result = run_sweep(cfg, methods, "n", sizes, workers=args.workers)

    os.makedirs(args.out, exist_ok=True)
    write_results_csv(os.path.join(args.out, "results.csv"), result.records)
    write_plot_tsv(os.path.join(args.out, "plot.tsv"), result.cells)
    for cell in result.cells:
        print(f"{cell.method:6s} n={int(cell.x_value):5d}: average {cell.mean['average']:6.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
