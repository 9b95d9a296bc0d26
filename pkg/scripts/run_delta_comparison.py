#!/usr/bin/env python3
"""Null-offset comparison when one label is much easier than the other.

Generates data with gamma_sp=6, gamma_mt=2 and runs the subspace estimation
twice per rho: once with the automatic offset heuristic and once with the
offset fixed at zero.
"""

import argparse
import os
import sys

from jse.algorithm import JseConfig
from jse.evaluate import ExperimentConfig, run_sweep
from jse.io_files import write_plot_tsv, write_results_csv
from jse.toy import ToyConfig

import numpy as np


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rhos", default="0.0,0.5,0.8,0.9")
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--out", default="results/delta_comparison")
    args = ap.parse_args()

    rhos = [float(x) for x in args.rhos.split(",")]
    os.makedirs(args.out, exist_ok=True)
    for tag, delta in (("auto", "auto"), ("zero", 0.0)):
        cfg = ExperimentConfig(
            method="jse",
            seeds=args.seeds,
            toy=ToyConfig(gamma_sp=6.0, gamma_mt=2.0),
            jse=JseConfig(delta=delta),
        )
        result = run_sweep(cfg, ["jse"], "rho", rhos, workers=args.workers)
        write_results_csv(os.path.join(args.out, f"results_delta_{tag}.csv"), result.records)
        write_plot_tsv(os.path.join(args.out, f"plot_delta_{tag}.tsv"), result.cells)
        for cell in result.cells:
            se = cell.se["average"]
            print(f"delta={tag:4s} rho={cell.x_value:.1f}: "
                  f"average {cell.mean['average']:6.2f}"
                  + (f" ({se:.2f})" if se is not None else ""))
    return 0


if __name__ == "__main__":
    sys.exit(main())
