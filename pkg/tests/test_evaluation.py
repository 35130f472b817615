import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIXTURES, labeled_stream
from driftlab.adaptation import AdaptiveConfig, AdaptiveModel, technique_config
from driftlab.core import StreamSchema
from driftlab.datasets import load_dataset
from driftlab.errors import IntegrityError, UndefinedMetricError
from driftlab.evaluation import (CellResult, CellTask, MetricTrace, ResultsMatrix, cohen_kappa,
                                 emit_report, format_number, mean_accuracy, median_rank,
                                 parse_rendered_ranks, prequential_run, run_matrix,
                                 running_mean_accuracy, windowed_kappa)

DATASETS = ["EL", "FC", "IA", "II", "KS", "LX", "MR", "NW", "OZ", "RT", "YG"]


def table1():
    rows = list(csv.DictReader(open(FIXTURES / "table1_accuracy.csv")))
    acc = {r["technique"]: {d: float(r[d]) / 100 for d in DATASETS} for r in rows}
    return acc, {r["technique"]: r["MedRank"] for r in rows}


class Oracle:
    """Model stand-in that always predicts the true label."""

    def __init__(self, schema):
        self.schema = schema

    def step(self, inst):
        return type("R", (), {"prediction": inst.y})()


def test_oracle_model_all_correct():
    schema = StreamSchema.anonymous(1, 3)
    stream = labeled_stream(np.zeros((50, 1)), np.arange(50) % 3)
    trace = prequential_run(Oracle(schema), stream)
    assert trace.correct.tolist() == [1] * 50


def test_empty_stream_gives_empty_trace():
    trace = prequential_run(AdaptiveModel(AdaptiveConfig("MC"), StreamSchema.anonymous(1, 2)), [])
    assert trace.n == 0
    with pytest.raises(UndefinedMetricError):
        mean_accuracy(trace)


def test_mc_on_imbalanced_stream():
    g = np.random.default_rng(0)
    y = (g.random(10_000) < 0.3).astype(int)
    schema = StreamSchema.anonymous(1, 2)
    stream = labeled_stream(np.zeros((10_000, 1)), y)
    trace = prequential_run(AdaptiveModel(AdaptiveConfig("MC"), schema), stream)
    assert mean_accuracy(trace) == pytest.approx(0.7, abs=0.02)


def test_same_seed_same_trace():
    schema = StreamSchema.anonymous(2, 2)
    g = np.random.default_rng(0)
    stream = labeled_stream(g.normal(size=(500, 2)), g.integers(0, 2, 500))
    a = prequential_run(AdaptiveModel(AdaptiveConfig("ARF"), schema, 5), stream)
    b = prequential_run(AdaptiveModel(AdaptiveConfig("ARF"), schema, 5), stream)
    assert np.array_equal(a.predictions, b.predictions)


def test_trace_invariants():
    t = MetricTrace(3)
    for y, p in [(0, 0), (1, 2), (2, 2), (1, 1)]:
        t.add(y, p)
    assert t.confusion.sum() == t.n == 4
    assert mean_accuracy(t) == 0.75
    assert mean_accuracy(t) == np.trace(t.confusion) / t.confusion.sum()
    assert running_mean_accuracy(t) == pytest.approx((1 + 0.5 + 2 / 3 + 0.75) / 4)


def test_kappa_examples():
    assert cohen_kappa(np.diag([5, 7, 3])) == 1.0
    assert cohen_kappa([[25, 25], [25, 25]]) == 0.0
    assert cohen_kappa([[40, 10], [20, 30]]) == pytest.approx(0.4)
    assert cohen_kappa([[10, 0], [0, 0]]) == 0.0
    with pytest.raises(UndefinedMetricError):
        cohen_kappa(np.zeros((2, 2)))


@given(st.lists(st.integers(0, 3), min_size=1, max_size=200), st.integers(0, 3))
def test_kappa_of_constant_prediction_is_zero(labels, pred):
    t = MetricTrace(4)
    for y in labels:
        t.add(y, pred)
    assert abs(cohen_kappa(t.confusion)) < 1e-12


def test_windowed_kappa():
    t = MetricTrace(2)
    for i in range(2500):
        t.add(i % 2, i % 2 if i < 1000 else 0)
    assert windowed_kappa(t, 1000) == pytest.approx(0.5)
    assert windowed_kappa(t, 5000) == pytest.approx(cohen_kappa(t.confusion))


def test_rank_total_order_and_ties():
    rm = ResultsMatrix.from_accuracy_table({"A": {"d1": 0.9, "d2": 0.8},
                                            "B": {"d1": 0.5, "d2": 0.7}})
    assert median_rank(rm, ["A", "B"], ["d1", "d2"]) == {"A": 1.0, "B": 2.0}
    tie = ResultsMatrix.from_accuracy_table({"A": {"d": 0.5}, "B": {"d": 0.5}})
    assert median_rank(tie, ["A", "B"], ["d"]) == {"A": 1.5, "B": 1.5}


def test_rank_missing_cell_named():
    rm = ResultsMatrix.from_accuracy_table({"A": {"d1": 0.9}, "B": {"d2": 0.5}})
    with pytest.raises(IntegrityError, match=r"\(A, d2\)"):
        median_rank(rm, ["A", "B"], ["d1", "d2"])


@settings(max_examples=30)
@given(st.lists(st.lists(st.integers(0, 1000), min_size=4, max_size=4), min_size=2, max_size=6))
def test_rank_invariant_under_monotone_map(grid):
    table = [[v / 1000 for v in row] for row in grid]
    techs = [f"t{i}" for i in range(len(table))]
    ds = ["a", "b", "c", "d"]
    rm = ResultsMatrix.from_accuracy_table({t: dict(zip(ds, row)) for t, row in zip(techs, table)})
    mapped = ResultsMatrix.from_accuracy_table(
        {t: {d: float(np.exp(3 * v) - 7) for d, v in zip(ds, row)} for t, row in zip(techs, table)})
    assert median_rank(rm, techs, ds) == median_rank(mapped, techs, ds)


def test_table1_arf_rank():
    acc, _ = table1()
    ranks = median_rank(ResultsMatrix.from_accuracy_table(acc), list(acc), DATASETS)
    assert ranks["ARF"] == 2 and ranks["LC"] == 22


def test_format_locale():
    assert format_number(100 * 0.543, ",") == "54,3"
    assert format_number(100 * 0.543, ".") == "54.3"


def test_one_cell_report(tmp_path):
    rm = ResultsMatrix([CellResult("NB", "EL", accuracy=0.7631, kappa=0.543)])
    paths = emit_report(rm, tmp_path, decimal=".")
    rows = list(csv.DictReader(open(paths["cells"])))
    assert len(rows) == 1 and float(rows[0]["kappa"]) == 0.543
    text = paths["tables"].read_text()
    assert "54.3" in text and "76.3" in text


def test_rendered_medrank_column(tmp_path):
    acc, _ = table1()
    paths = emit_report(ResultsMatrix.from_accuracy_table(acc), tmp_path, list(acc), DATASETS)
    got = parse_rendered_ranks(paths["tables"].read_text())
    assert got["ARF"] == "2" and got["AMF"] == "3" and got["I-RF"] == "3" and got["LC"] == "22"


def test_parallel_equals_serial():
    tasks = [CellTask(t, d, 42) for t in ("MC", "NB", "DDM-NB", "S-RF")
             for d in ("SYN-ABRUPT", "SYN-GAUSS")]
    serial, ev1, f1 = run_matrix(tasks, workers=1)
    parallel, ev2, f2 = run_matrix(tasks, workers=3)
    strip = lambda rm: {k: {**vars(c), "runtime": 0} for k, c in rm.cells.items()}
    assert not f1 and not f2
    assert strip(serial) == strip(parallel) and ev1 == ev2


def test_accuracy_matches_confusion_on_cells():
    stream, schema = load_dataset("SYN-ABRUPT", 1)
    for tid in ("LC", "MC", "NB", "S-RF"):
        model = AdaptiveModel(technique_config(tid, "SYN-ABRUPT"), schema, 1)
        trace = prequential_run(model, stream)
        assert mean_accuracy(trace) == np.trace(trace.confusion) / trace.confusion.sum()


def test_failed_cell_reported(tmp_path):
    res, _, fails = run_matrix([CellTask("NB", "EL", 1, data_root=str(tmp_path))])
    assert len(res) == 0 and fails[0].dataset == "EL" and "not found" in fails[0].message
