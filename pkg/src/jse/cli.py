"""Command-line surface.

Subcommands:
  gen-toy    write train/val/test embedding CSVs for a synthetic configuration
  fit        estimate a removal subspace (jse/inlp/rlace) or a classifier
             (erm/gw-erm) from embedding files and save the artifact
  transform  apply a fitted artifact to an embedding file
  eval       evaluate a fitted linear model on a test file (JSON-lines out)
  sweep      run a (method x grid x seeds) experiment from a config file
  report     render a results CSV as mean (SE) text tables

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jse", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--config", default=None, help="config file (key = value sections)")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument("--out", default=".", help="output directory")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-toy", help="generate synthetic train/val/test CSVs")
    g.add_argument("--n", type=int, default=2000)
    g.add_argument("--d", type=int, default=20)
    g.add_argument("--rho", type=float, default=0.0)
    g.add_argument("--gamma-sp", type=float, default=3.0)
    g.add_argument("--gamma-mt", type=float, default=3.0)
    g.add_argument("--angle-deg", type=float, default=90.0)
    g.add_argument("--test-n", type=int, default=2000)

    f = sub.add_parser("fit", help="fit a method on train/val embedding files")
    f.add_argument("--method", required=True, choices=["jse", "erm", "gw-erm", "inlp", "rlace"])
    f.add_argument("--train", required=True)
    f.add_argument("--val", required=True)
    f.add_argument("--artifact", default=None, help="output path (default <out>/<method>.artifact)")
    f.add_argument("--pca", type=int, default=None, metavar="K",
                   help="reduce to K dims with train-fitted PCA (includes demeaning)")
    f.add_argument("--demean-only", action="store_true",
                   help="subtract the training mean, no PCA")

    t = sub.add_parser("transform", help="apply a fitted artifact to embeddings")
    t.add_argument("--artifact", required=True)
    t.add_argument("--in", dest="input", required=True)
    t.add_argument("--out-file", required=True)
    t.add_argument("--mode", choices=["remove-sp", "keep-mt"], default="remove-sp")

    e = sub.add_parser("eval", help="evaluate a model artifact on a test file")
    e.add_argument("--model", required=True)
    e.add_argument("--test-file", required=True)

    s = sub.add_parser("sweep", help="run the experiment grid from --config")

    r = sub.add_parser("report", help="format a results CSV as text tables")
    r.add_argument("--results", required=True)
    return p


def _cmd_gen_toy(args) -> int:
    from .io_files import save_embeddings
    from .toy import ToyConfig, gen_toy, gen_toy_test

    cfg = ToyConfig(n=args.n, d=args.d, rho=args.rho, gamma_sp=args.gamma_sp,
                    gamma_mt=args.gamma_mt, angle_deg=args.angle_deg, seed=args.seed)
    train, val = gen_toy(cfg)
    test = gen_toy_test(cfg, args.test_n)
    os.makedirs(args.out, exist_ok=True)
    for name, split in (("train", train), ("val", val), ("test", test)):
        save_embeddings(os.path.join(args.out, f"toy_{name}.csv"), split)
    print(f"wrote toy_train.csv, toy_val.csv, toy_test.csv to {args.out}")
    return EXIT_OK


def _experiment_config(args):
    from .config import load_config
    from .evaluate import ExperimentConfig

    base = ExperimentConfig(method="jse", base_seed=args.seed)
    if args.config:
        cfg, sweep = load_config(args.config, base)
    else:
        from .config import SweepSpec

        cfg, sweep = base, SweepSpec(seeds=base.seeds, base_seed=args.seed)
    return cfg, sweep


def _cmd_fit(args) -> int:
    from .algorithm import jse_fit
    from .baselines import erm_fit, gw_erm_fit, inlp_fit, rlace_fit
    from .io_files import Artifact, load_embeddings, save_artifact

    train = load_embeddings(args.train)
    val = load_embeddings(args.val)
    cfg, _ = _experiment_config(args)
    cfg = replace(cfg, method=args.method)
    from .evaluate import _reseed_all

    cfg = _reseed_all(cfg, args.seed)
    pre_mean = pre_components = None
    if args.pca is not None:
        from .pca import pca_apply, pca_fit

        model_pca = pca_fit(train.Z, args.pca)
        pre_mean, pre_components = model_pca.mean, model_pca.components
        train = train.with_Z(pca_apply(train.Z, model_pca))
        val = val.with_Z(pca_apply(val.Z, model_pca))
    elif args.demean_only:
        pre_mean = train.Z.mean(axis=0)
        train = train.with_Z(train.Z - pre_mean)
        val = val.with_Z(val.Z - pre_mean)
    d = train.d
    zero = np.zeros((d, 0))
    if args.method == "jse":
        res = jse_fit(train, val, cfg.jse)
        tests = [r for pair in res.sp_tests + res.mt_tests for r in pair]
        art = Artifact("jse", d, res.sp_basis.V, res.mt_basis.V, tests, None,
                       res.termination, res.delta, pre_mean, pre_components)
        print(f"d_sp_hat={res.d_sp} d_mt_hat={res.d_mt} termination={res.termination}")
    elif args.method == "inlp":
        basis = inlp_fit(train, val, cfg.inlp)
        art = Artifact("inlp", d, basis.V, zero, [], None, pre_mean=pre_mean,
                       pre_components=pre_components)
        print(f"d_sp_hat={basis.k}")
    elif args.method == "rlace":
        res = rlace_fit(train, val, cfg.rlace)
        art = Artifact("rlace", d, res.removed.V, zero, [], None, pre_mean=pre_mean,
                       pre_components=pre_components)
        print(f"rank={res.removed.k} converged={res.converged} val_acc={res.val_accuracy:.4f}")
    else:
        fit = erm_fit if args.method == "erm" else gw_erm_fit
        model = fit(train, val, cfg.downstream)
        art = Artifact(args.method, d, zero, zero, [], model, pre_mean=pre_mean,
                       pre_components=pre_components)
    os.makedirs(args.out, exist_ok=True)
    path = args.artifact or os.path.join(args.out, f"{args.method}.artifact")
    save_artifact(path, art)
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_transform(args) -> int:
    from .data import project_onto, project_out
    from .io_files import load_artifact, load_embeddings, save_embeddings

    art = load_artifact(args.artifact)
    data = load_embeddings(args.input)
    Z = art.preprocess(data.Z)
    if Z.shape[1] != art.d:
        raise ValueError(f"artifact d={art.d} does not match data d={Z.shape[1]}")
    if args.mode == "remove-sp":
        Z = project_out(Z, art.sp_basis)
    else:
        Z = project_onto(Z, art.mt_basis)
    save_embeddings(args.out_file, data.with_Z(Z))
    print(f"wrote {args.out_file}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    from .evaluate import evaluate
    from .io_files import eval_summary_jsonl, load_artifact, load_embeddings

    art = load_artifact(args.model)
    if art.model is None:
        raise ValueError(f"{args.model} holds no linear model; fit erm/gw-erm or compose "
                         "transform + fit")
    test = load_embeddings(args.test_file)
    test = test.with_Z(art.preprocess(test.Z))
    print(eval_summary_jsonl(evaluate(art.model, test)))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    from .evaluate import run_sweep
    from .io_files import write_plot_tsv, write_results_csv

    if not args.config:
        print("sweep requires --config", file=sys.stderr)
        return EXIT_USAGE
    cfg, sweep = _experiment_config(args)
    result = run_sweep(cfg, sweep.methods, sweep.x_name, sweep.x_values, workers=args.workers)
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "results.csv")
    tsv_path = os.path.join(args.out, "plot.tsv")
    write_results_csv(csv_path, result.records)
    write_plot_tsv(tsv_path, result.cells)
    n_failed = sum(1 for r in result.records if r.error)
    print(f"wrote {csv_path} and {tsv_path} ({len(result.records)} runs, {n_failed} failed)")
    return EXIT_OK


def _cmd_report(args) -> int:
    from .io_files import format_report, read_results_csv

    rows = read_results_csv(args.results)
    ok = [r for r in rows if not r.get("error")]
    print(format_report(ok), end="")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    from .config import ConfigError
    from .io_files import DataFormatError

    handlers = {
        "gen-toy": _cmd_gen_toy,
        "fit": _cmd_fit,
        "transform": _cmd_transform,
        "eval": _cmd_eval,
        "sweep": _cmd_sweep,
        "report": _cmd_report,
    }
    try:
        return handlers[args.command](args)
    except (DataFormatError, ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FloatingPointError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
