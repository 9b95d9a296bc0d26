import numpy as np
import pytest

from jse.data import LabeledEmbeddings
from jse.evaluate import EvalSummary, RunRecord
from jse.io_files import (
    Artifact,
    DataFormatError,
    eval_summary_jsonl,
    format_report,
    load_artifact,
    load_embeddings,
    read_results_csv,
    save_artifact,
    save_embeddings,
    write_plot_tsv,
    write_results_csv,
)
from jse.sgd import LinearModel
from jse.stats import TestReport
from jse.toy import ToyConfig, gen_toy


def test_embeddings_round_trip(tmp_path):
    cfg = ToyConfig(n=200, rho=0.6, seed=1)
    train, _ = gen_toy(cfg)
    path = tmp_path / "emb.csv"
    save_embeddings(str(path), train)
    loaded = load_embeddings(str(path))
    np.testing.assert_array_equal(loaded.y_mt, train.y_mt)
    np.testing.assert_array_equal(loaded.y_sp, train.y_sp)
    np.testing.assert_array_equal(loaded.Z, train.Z)  # repr round-trips float64 exactly
    np.testing.assert_array_equal(loaded.group, train.group)


def test_small_file(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("y_mt,y_sp,z_0,z_1\n0,1,0.5,-1.25\n1,0,2.0,3.5\n1,1,0.0,0.0\n")
    data = load_embeddings(str(path))
    assert data.n == 3 and data.d == 2


def test_bad_label_names_line(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("y_mt,y_sp,z_0\n0,1,0.5\n2,0,1.0\n")
    with pytest.raises(DataFormatError, match=":3:"):
        load_embeddings(str(path))


def test_ragged_row_names_line(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("y_mt,y_sp,z_0,z_1\n0,1,0.5,1.0\n0,1,0.5\n")
    with pytest.raises(DataFormatError, match=":3:"):
        load_embeddings(str(path))


def test_bad_header(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("a,b,c\n0,1,0.5\n")
    with pytest.raises(DataFormatError, match=":1:"):
        load_embeddings(str(path))


def test_unparsable_value(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("y_mt,y_sp,z_0\n0,1,zebra\n")
    with pytest.raises(DataFormatError, match=":2:"):
        load_embeddings(str(path))


def test_artifact_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    q, _ = np.linalg.qr(rng.standard_normal((6, 3)))
    tests = [
        TestReport("sp_vs_random", -4.25, 1.6448536269514722, 0.05, 0.0, "less", True),
        TestReport("sp_vs_mt_on_vmt", 2.0, 1.6448536269514722, 0.05, -0.3, "greater", True),
    ]
    art = Artifact(
        "jse", 6, q[:, :2], q[:, 2:3], tests,
        LinearModel(rng.standard_normal(6), -0.75),
        termination="test-rejected", delta=-0.3,
        pre_mean=rng.standard_normal(6),
    )
    path = tmp_path / "a.artifact"
    save_artifact(str(path), art)
    back = load_artifact(str(path))
    assert back.method == "jse" and back.d == 6
    np.testing.assert_array_equal(back.sp_basis, art.sp_basis)
    np.testing.assert_array_equal(back.mt_basis, art.mt_basis)
    np.testing.assert_array_equal(back.model.w, art.model.w)
    assert back.model.b == art.model.b
    np.testing.assert_array_equal(back.pre_mean, art.pre_mean)
    assert back.termination == "test-rejected"
    assert back.delta == -0.3
    assert [t.kind for t in back.tests] == [t.kind for t in tests]
    assert [t.statistic for t in back.tests] == [t.statistic for t in tests]
    assert back.tests[1].side == "greater"


def _records():
    s = EvalSummary(np.array([80.0, 81.0, 82.0, 83.0]), 80.0, 81.5, 81.5,
                    np.array([500, 500, 500, 500]))
    return [
        RunRecord("jse", "rho", 0.8, 0, s, 1, 1, 123.0),
        RunRecord("jse", "rho", 0.8, 1, None, 0, 0, 5.0, "ValueError('x')"),
    ]


def test_results_csv_round_trip(tmp_path):
    path = tmp_path / "results.csv"
    write_results_csv(str(path), _records())
    rows = read_results_csv(str(path))
    assert len(rows) == 2
    assert rows[0]["method"] == "jse"
    assert float(rows[0]["average"]) == 81.5
    assert rows[0]["error"] == ""
    assert rows[1]["error"] != "" and rows[1]["average"] == ""


def test_plot_tsv(tmp_path):
    from jse.evaluate import aggregate_cell

    cell = aggregate_cell("jse", "rho", 0.8, [_records()[0], _records()[0]])
    path = tmp_path / "plot.tsv"
    write_plot_tsv(str(path), [cell])
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "x\tmethod\tmean\tci_low\tci_high\tmetric"
    assert len(lines) == 3  # average and worst_group rows
    fields = lines[1].split("\t")
    assert fields[1] == "jse" and fields[5] in ("average", "worst_group")


def test_eval_summary_jsonl():
    import json

    s = EvalSummary(np.array([1.0, 2.0, 3.0, 4.0]), 1.0, 2.5, 2.5, np.array([1, 1, 1, 1]))
    payload = json.loads(eval_summary_jsonl(s))
    assert payload["schema_version"] == 1
    assert payload["worst_group"] == 1.0
    assert payload["group_acc"] == [1.0, 2.0, 3.0, 4.0]


def test_format_report_smoke(tmp_path):
    path = tmp_path / "results.csv"
    write_results_csv(str(path), [_records()[0]])
    rows = [r for r in read_results_csv(str(path)) if not r["error"]]
    text = format_report(rows)
    assert "Worst-group" in text and "Average" in text and "jse" in text
