"""File formats: embedding CSV, fitted-artifact files, results CSV, plot TSV.

Embedding CSV: header ``y_mt,y_sp,z_0,...,z_{d-1}``, one sample per line,
labels as 0/1, coordinates as decimal text with full float64 precision.

Artifact files are line-oriented ``key = value`` headers followed by
bracketed sections holding basis vectors (one vector per line), test-report
CSV rows, and model coefficients. All floats use repr precision so a
round-trip is bit-exact.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .data import LabeledEmbeddings
from .evaluate import CellAggregate, EvalSummary, RunRecord
from .sgd import LinearModel
from .stats import TestReport

SCHEMA_VERSION = 1


class DataFormatError(ValueError):
    """Malformed input file; the message names the offending line."""


def _fmt(x: float) -> str:
    return repr(float(x))


def save_embeddings(path: str, data: LabeledEmbeddings) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("y_mt,y_sp," + ",".join(f"z_{j}" for j in range(data.d)) + "\n")
        for i in range(data.n):
            row = [str(int(data.y_mt[i])), str(int(data.y_sp[i]))]
            row += [_fmt(v) for v in data.Z[i]]
            fh.write(",".join(row) + "\n")


def load_embeddings(path: str) -> LabeledEmbeddings:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        cols = header.split(",")
        if cols[:2] != ["y_mt", "y_sp"] or len(cols) < 3:
            raise DataFormatError(
                f"{path}:1: expected header 'y_mt,y_sp,z_0,...', got {header!r}"
            )
        d = len(cols) - 2
        if cols[2:] != [f"z_{j}" for j in range(d)]:
            raise DataFormatError(f"{path}:1: malformed embedding column names")
        y_mt: list[int] = []
        y_sp: list[int] = []
        rows: list[list[float]] = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != d + 2:
                raise DataFormatError(
                    f"{path}:{lineno}: expected {d + 2} fields, got {len(parts)}"
                )
            if parts[0] not in ("0", "1") or parts[1] not in ("0", "1"):
                raise DataFormatError(
                    f"{path}:{lineno}: labels must be 0 or 1, got {parts[0]!r},{parts[1]!r}"
                )
            try:
                rows.append([float(v) for v in parts[2:]])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
            y_mt.append(int(parts[0]))
            y_sp.append(int(parts[1]))
    if not rows:
        raise DataFormatError(f"{path}: no samples")
    return LabeledEmbeddings(np.array(rows), np.array(y_mt), np.array(y_sp))


@dataclass(frozen=True)
class Artifact:
    """Serialized outcome of a `fit`: preprocessing, bases and/or a linear model."""

    method: str
    d: int
    sp_basis: np.ndarray  # (d, k); k may be 0
    mt_basis: np.ndarray
    tests: list[TestReport]
    model: LinearModel | None
    termination: str = ""
    delta: float = 0.0
    pre_mean: np.ndarray | None = None  # training mean subtracted before everything else
    pre_components: np.ndarray | None = None  # PCA projection applied after demeaning

    def preprocess(self, Z: np.ndarray) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.float64)
        if self.pre_mean is not None:
            Z = Z - self.pre_mean
        if self.pre_components is not None:
            Z = Z @ self.pre_components
        return Z


def save_artifact(path: str, art: Artifact) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"schema_version = {SCHEMA_VERSION}\n")
        fh.write(f"method = {art.method}\n")
        fh.write(f"d = {art.d}\n")
        if art.termination:
            fh.write(f"termination = {art.termination}\n")
        fh.write(f"delta = {_fmt(art.delta)}\n")
        if art.pre_mean is not None:
            fh.write("[pre_mean]\n")
            fh.write(" ".join(_fmt(v) for v in art.pre_mean) + "\n")
        if art.pre_components is not None:
            fh.write("[pre_components]\n")
            for j in range(art.pre_components.shape[1]):
                fh.write(" ".join(_fmt(v) for v in art.pre_components[:, j]) + "\n")
        for name, basis in (("sp_basis", art.sp_basis), ("mt_basis", art.mt_basis)):
            fh.write(f"[{name}]\n")
            for j in range(basis.shape[1]):
                fh.write(" ".join(_fmt(v) for v in basis[:, j]) + "\n")
        fh.write("[tests]\n")
        for rep in art.tests:
            fh.write(rep.csv_row() + "\n")
        if art.model is not None:
            fh.write("[model]\n")
            fh.write("w = " + " ".join(_fmt(v) for v in art.model.w) + "\n")
            fh.write(f"b = {_fmt(art.model.b)}\n")


def load_artifact(path: str) -> Artifact:
    header: dict[str, str] = {}
    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                current = sections.setdefault(line[1:-1], [])
            elif current is None:
                if "=" not in line:
                    raise DataFormatError(f"{path}:{lineno}: expected 'key = value'")
                key, _, value = line.partition("=")
                header[key.strip()] = value.strip()
            else:
                current.append(line)
    try:
        d = int(header["d"])
        method = header["method"]
    except KeyError as exc:
        raise DataFormatError(f"{path}: missing header field {exc}") from exc

    def basis(name: str) -> np.ndarray:
        lines = sections.get(name, [])
        if not lines:
            return np.zeros((d, 0))
        return np.column_stack([np.array([float(v) for v in ln.split()]) for ln in lines])

    tests = []
    for ln in sections.get("tests", []):
        kind, t, thr, alpha, delta, dec = ln.split(",")
        side = "greater" if kind == "sp_vs_mt_on_vmt" else "less"
        tests.append(
            TestReport(kind, float(t), float(thr), float(alpha), float(delta),
                       side, dec == "True")
        )
    model = None
    if "model" in sections:
        fields = dict(ln.partition("=")[::2] for ln in sections["model"])
        fields = {k.strip(): v.strip() for k, v in fields.items()}
        model = LinearModel(
            np.array([float(v) for v in fields["w"].split()]), float(fields["b"])
        )
    pre_mean = None
    if "pre_mean" in sections:
        pre_mean = np.array([float(v) for v in sections["pre_mean"][0].split()])
    pre_components = basis("pre_components") if "pre_components" in sections else None
    return Artifact(
        method,
        d,
        basis("sp_basis"),
        basis("mt_basis"),
        tests,
        model,
        header.get("termination", ""),
        float(header.get("delta", "0.0")),
        pre_mean,
        pre_components,
    )


RESULTS_COLUMNS = [
    "method", "x_name", "x_value", "seed",
    "acc_g1", "acc_g2", "acc_g3", "acc_g4",
    "worst_group", "average", "macro_average",
    "d_sp_hat", "d_mt_hat", "runtime_ms", "error", "schema_version",
]


def write_results_csv(path: str, records: list[RunRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_COLUMNS)
        for r in records:
            if r.summary is None:
                accs = [""] * 7
            else:
                accs = [_fmt(a) for a in r.summary.group_acc] + [
                    _fmt(r.summary.worst_group),
                    _fmt(r.summary.average),
                    _fmt(r.summary.macro_average),
                ]
            writer.writerow(
                [r.method, r.x_name, _fmt(r.x_value), r.seed, *accs,
                 r.d_sp_hat, r.d_mt_hat, _fmt(r.runtime_ms), r.error, SCHEMA_VERSION]
            )


def read_results_csv(path: str) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


PLOT_COLUMNS = ["x", "method", "mean", "ci_low", "ci_high", "metric"]


def write_plot_tsv(path: str, cells: list[CellAggregate],
                   metrics: tuple[str, ...] = ("average", "worst_group")) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(PLOT_COLUMNS) + "\n")
        for cell in cells:
            for metric in metrics:
                m = cell.mean[metric]
                hw = cell.ci_halfwidth(metric)
                lo = "" if hw is None else _fmt(m - hw)
                hi = "" if hw is None else _fmt(m + hw)
                fh.write(
                    f"{_fmt(cell.x_value)}\t{cell.method}\t{_fmt(m)}\t{lo}\t{hi}\t{metric}\n"
                )


def eval_summary_jsonl(summary: EvalSummary) -> str:
    payload = {"schema_version": SCHEMA_VERSION}
    payload.update(summary.as_dict())
    return json.dumps(payload)


def format_report(rows: list[dict]) -> str:
    """Tables 4/5-style text report from results-CSV rows: mean (SE) per cell."""
    methods = sorted({r["method"] for r in rows})
    xs = sorted({float(r["x_value"]) for r in rows})
    x_name = rows[0]["x_name"] if rows else "x"
    metrics = [
        ("acc_g1", "y_mt=0, y_sp=0"), ("acc_g2", "y_mt=0, y_sp=1"),
        ("acc_g3", "y_mt=1, y_sp=0"), ("acc_g4", "y_mt=1, y_sp=1"),
        ("worst_group", "Worst-group"), ("average", "Average"),
    ]
    out = io.StringIO()
    header = f"{'Method':8s} {'Accuracy':16s}" + "".join(f"{x_name}={x:<12g}" for x in xs)
    out.write(header.rstrip() + "\n")
    out.write("-" * len(header) + "\n")
    for method in methods:
        for metric, label in metrics:
            cellstr = []
            for x in xs:
                vals = [
                    float(r[metric])
                    for r in rows
                    if r["method"] == method and float(r["x_value"]) == x and r[metric] != ""
                ]
                if not vals:
                    cellstr.append(f"{'-':<14s}")
                    continue
                mean = np.mean(vals)
                se = np.std(vals, ddof=1) / np.sqrt(len(vals)) if len(vals) > 1 else float("nan")
                cellstr.append(f"{mean:6.2f} ({se:.2f}) ")
            name = method if metric == "acc_g1" else ""
            out.write(f"{name:8s} {label:16s}" + "".join(cellstr).rstrip() + "\n")
        out.write("\n")
    return out.getvalue()
