"""Accuracy evaluation, single experiments, and seed sweeps.

A sweep runs a Cartesian grid of (method, x-value) cells. Every cell draws
its own data: the per-run seeds are derived from (base seed, method, x value,
seed index) through a SeedSequence, so no two cells share a draw and reruns
are reproducible down to the byte.
"""

from __future__ import annotations

import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .algorithm import JseConfig, jse_pipeline
from .baselines import InlpConfig, RlaceConfig, erm_fit, gw_erm_fit, inlp_fit, rlace_fit
from .data import LabeledEmbeddings, project_out
from .sgd import LinearModel, OptimizerConfig, fit_logreg
from .toy import ToyConfig, gen_toy, gen_toy_test

METHODS = ("jse", "erm", "gw-erm", "inlp", "rlace")


@dataclass(frozen=True)
class EvalSummary:
    group_acc: np.ndarray  # 4 accuracies in percent, groups 1..4
    worst_group: float
    average: float
    macro_average: float
    n_per_group: np.ndarray

    def as_dict(self) -> dict:
        return {
            "group_acc": [float(a) for a in self.group_acc],
            "worst_group": float(self.worst_group),
            "average": float(self.average),
            "macro_average": float(self.macro_average),
            "n_per_group": [int(n) for n in self.n_per_group],
        }


def evaluate(
    model: LinearModel,
    test: LabeledEmbeddings,
    transform: np.ndarray | None = None,
) -> EvalSummary:
    """Main-task accuracy at threshold 0.5, per group and overall, in percent.

    ``transform`` is an optional d x d projection applied to the embeddings
    before prediction.
    """
    Z = test.Z if transform is None else test.Z @ transform
    pred = (model.predict(Z) >= 0.5).astype(np.int64)
    correct = pred == test.y_mt
    group_acc = np.empty(4)
    n_per_group = np.empty(4, dtype=np.int64)
    for g in range(1, 5):
        mask = test.group == g
        n_per_group[g - 1] = int(mask.sum())
        if n_per_group[g - 1] == 0:
            raise ValueError(f"empty group {g} in the test data")
        group_acc[g - 1] = 100.0 * float(np.mean(correct[mask]))
    return EvalSummary(
        group_acc,
        float(group_acc.min()),
        100.0 * float(np.mean(correct)),
        float(group_acc.mean()),
        n_per_group,
    )


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one (method, generator) cell over seeds."""

    method: str
    toy: ToyConfig = field(default_factory=ToyConfig)
    seeds: int = 100
    base_seed: int = 0
    test_n: int | None = 2000
    demean: bool = True
    jse: JseConfig = field(default_factory=JseConfig)
    inlp: InlpConfig = field(default_factory=InlpConfig)
    rlace: RlaceConfig = field(default_factory=RlaceConfig)
    downstream: OptimizerConfig = field(
        default_factory=lambda: OptimizerConfig(balance_sampling="class-balanced")
    )

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")


@dataclass(frozen=True)
class RunRecord:
    method: str
    x_name: str
    x_value: float
    seed: int
    summary: EvalSummary | None
    d_sp_hat: int
    d_mt_hat: int
    runtime_ms: float
    error: str = ""


def derive_seed(base_seed: int, method: str, x_value: float, seed_index: int) -> int:
    """Deterministic per-run entropy; distinct across methods, x values, seeds."""
    tag = zlib.crc32(method.encode())
    ss = np.random.SeedSequence([base_seed, tag, int(round(x_value * 10**6)), seed_index])
    return int(ss.generate_state(1)[0])


def _reseed_all(cfg: ExperimentConfig, run_seed: int) -> ExperimentConfig:
    return replace(
        cfg,
        jse=replace(cfg.jse, optimizer=replace(cfg.jse.optimizer, seed=run_seed)),
        inlp=replace(cfg.inlp, optimizer=replace(cfg.inlp.optimizer, seed=run_seed)),
        rlace=replace(cfg.rlace, optimizer=replace(cfg.rlace.optimizer, seed=run_seed)),
        downstream=replace(cfg.downstream, seed=run_seed),
    )


def run_single(cfg: ExperimentConfig, x_name: str, x_value: float, seed_index: int) -> RunRecord:
    """One seeded end-to-end run: generate, fit, transform, train downstream, evaluate."""
    toy = replace(cfg.toy, **{x_name: x_value} if x_name != "none" else {})
    run_seed = derive_seed(cfg.base_seed, cfg.method, x_value, seed_index)
    toy = replace(toy, seed=run_seed, n=int(toy.n))
    cfg = _reseed_all(cfg, run_seed)

    t0 = time.perf_counter()
    try:
        train, val = gen_toy(toy)
        test = gen_toy_test(toy, cfg.test_n)
        if cfg.demean:
            mu = train.Z.mean(axis=0)
            train = train.with_Z(train.Z - mu)
            val = val.with_Z(val.Z - mu)
            test = test.with_Z(test.Z - mu)
        d_sp_hat = d_mt_hat = 0
        if cfg.method == "jse":
            model, summary, result = jse_pipeline(train, val, test, cfg.jse, cfg.downstream)
            d_sp_hat, d_mt_hat = result.d_sp, result.d_mt
        elif cfg.method == "erm":
            model = erm_fit(train, val, cfg.downstream)
            summary = evaluate(model, test)
        elif cfg.method == "gw-erm":
            model = gw_erm_fit(train, val, cfg.downstream)
            summary = evaluate(model, test)
        elif cfg.method == "inlp":
            basis = inlp_fit(train, val, cfg.inlp)
            d_sp_hat = basis.k
            tr, va, te = (s.with_Z(project_out(s.Z, basis.V)) for s in (train, val, test))
            model = fit_logreg(tr, "mt", va, cfg.downstream)
            summary = evaluate(model, te)
        elif cfg.method == "rlace":
            res = rlace_fit(train, val, cfg.rlace)
            d_sp_hat = cfg.rlace.rank
            tr, va, te = (s.with_Z(s.Z @ res.P) for s in (train, val, test))
            model = fit_logreg(tr, "mt", va, cfg.downstream)
            summary = evaluate(model, te)
        else:  # pragma: no cover - guarded by ExperimentConfig
            raise ValueError(cfg.method)
    except Exception as exc:  # noqa: BLE001 - per-seed failures are recorded, not fatal
        ms = 1000.0 * (time.perf_counter() - t0)
        return RunRecord(cfg.method, x_name, x_value, seed_index, None, 0, 0, ms, repr(exc))
    ms = 1000.0 * (time.perf_counter() - t0)
    return RunRecord(cfg.method, x_name, x_value, seed_index, summary, d_sp_hat, d_mt_hat, ms)


@dataclass(frozen=True)
class CellAggregate:
    method: str
    x_name: str
    x_value: float
    n_runs: int
    n_failed: int
    mean: dict  # metric -> mean over successful seeds
    se: dict  # metric -> standard error (None with a single run)

    def ci_halfwidth(self, metric: str) -> float | None:
        se = self.se[metric]
        return None if se is None else 1.96 * se


@dataclass(frozen=True)
class SweepResult:
    records: list[RunRecord]
    cells: list[CellAggregate]


_METRICS = ("average", "worst_group", "macro_average", "acc_g1", "acc_g2", "acc_g3", "acc_g4")


def _metric(summary: EvalSummary, name: str) -> float:
    if name.startswith("acc_g"):
        return float(summary.group_acc[int(name[-1]) - 1])
    return float(getattr(summary, name))


def aggregate_cell(
    method: str, x_name: str, x_value: float, records: list[RunRecord]
) -> CellAggregate:
    ok = [r for r in records if r.summary is not None]
    n_failed = len(records) - len(ok)
    if len(records) and len(ok) / len(records) < 0.9:
        raise RuntimeError(
            f"cell ({method}, {x_name}={x_value}) had {n_failed}/{len(records)} failures; "
            "at least 90% of seeds must succeed for aggregation"
        )
    mean: dict = {}
    se: dict = {}
    for m in _METRICS:
        vals = np.array([_metric(r.summary, m) for r in ok])
        mean[m] = float(vals.mean()) if len(vals) else float("nan")
        se[m] = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else None
    mean["d_sp_hat"] = float(np.mean([r.d_sp_hat for r in ok])) if ok else float("nan")
    se["d_sp_hat"] = None
    return CellAggregate(method, x_name, x_value, len(records), n_failed, mean, se)


def run_experiment(
    cfg: ExperimentConfig, x_name: str = "rho", x_value: float | None = None, workers: int = 1
) -> tuple[list[RunRecord], CellAggregate]:
    """All seeds of a single (method, x) cell."""
    if x_value is None:
        x_value = float(getattr(cfg.toy, x_name))
    records = _run_many([(cfg, x_name, x_value, s) for s in range(cfg.seeds)], workers)
    return records, aggregate_cell(cfg.method, x_name, x_value, records)


def run_sweep(
    base: ExperimentConfig,
    methods: list[str],
    x_name: str,
    x_values: list[float],
    workers: int = 1,
) -> SweepResult:
    """Cartesian sweep over methods and x values with per-cell derived seeds."""
    if not methods:
        raise ValueError("empty method list")
    tasks = [
        (replace(base, method=m), x_name, x, s)
        for m in methods
        for x in x_values
        for s in range(base.seeds)
    ]
    records = _run_many(tasks, workers)
    by_cell: dict[tuple[str, float], list[RunRecord]] = {}
    for r in records:
        by_cell.setdefault((r.method, r.x_value), []).append(r)
    cells = [
        aggregate_cell(m, x_name, x, by_cell[(m, x)])
        for m in methods
        for x in x_values
        if (m, x) in by_cell
    ]
    return SweepResult(records, cells)


def _run_one(task) -> RunRecord:
    return run_single(*task)


def _run_many(tasks, workers: int) -> list[RunRecord]:
    if workers <= 1:
        records = [run_single(*t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_one, tasks, chunksize=4))
    records.sort(key=lambda r: (r.method, r.x_value, r.seed))
    return records
