import csv
import os

import numpy as np
import pytest

from deltabound.attack import AttackConfig
from deltabound.bench import (
    avg_l2,
    derive_seed,
    emit_traces,
    run_benchmark,
    select_eval_samples,
    split_dataset,
)
from deltabound.data import LabeledDataset
from deltabound.errors import EmptyList, NoCorrectPredictions
from deltabound.models import ModelSpec


def linear_model(d=2):
    # class 1 iff sum of features exceeds 1
    return ModelSpec("logreg", 2, d, {"weights": [[1.0] * d], "bias": [-1.0]})


def toy_dataset(n=60, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 2))
    y = (X.sum(axis=1) > 1.0).astype(int)
    return LabeledDataset(X, y)


# --- avg_l2 ---

def test_avg_l2_345():
    assert avg_l2([((0.0, 0.0), (3.0, 4.0))]) == 5.0


def test_avg_l2_mean():
    pairs = [((0.0, 0.0), (3.0, 4.0)), ((0.0, 0.0), (1.0, 0.0))]
    assert avg_l2(pairs) == 3.0


def test_avg_l2_identity_is_zero():
    assert avg_l2([((1.0, 2.0), (1.0, 2.0))]) == 0.0


def test_avg_l2_empty():
    with pytest.raises(EmptyList):
        avg_l2([])


def test_avg_l2_dimension_mismatch():
    with pytest.raises(ValueError):
        avg_l2([((0.0, 0.0), (1.0, 1.0, 1.0))])


# --- sample selection ---

def test_select_exact_count_and_determinism():
    data = toy_dataset()
    model = linear_model()
    a = select_eval_samples(model, data, 10, seed=3)
    b = select_eval_samples(model, data, 10, seed=3)
    assert len(a) == 10
    assert all(np.array_equal(x, y) for (x, _), (y, _) in zip(a, b))
    for x, label in a:
        assert model.predict(x) == label


def test_select_shortfall():
    data = toy_dataset(n=20)
    got = select_eval_samples(linear_model(), data, 600, seed=0)
    assert 0 < len(got) <= 20


def test_select_no_correct_predictions():
    data = toy_dataset(n=10)
    wrong = ModelSpec("logreg", 2, 2, {"weights": [[0.0, 0.0]], "bias": [1.0]})
    bad = LabeledDataset(data.features, np.zeros(10, dtype=int))
    with pytest.raises(NoCorrectPredictions):
        select_eval_samples(wrong, bad, 5, seed=0)


def test_split_dataset_partitions():
    data = toy_dataset(n=50)
    tr, ev = split_dataset(data, 0.5, seed=1)
    assert tr.n_samples + ev.n_samples == 50
    again_tr, _ = split_dataset(data, 0.5, seed=1)
    assert np.array_equal(tr.features, again_tr.features)


def test_derive_seed_stable_and_distinct():
    assert derive_seed(1, "a", 2) == derive_seed(1, "a", 2)
    assert derive_seed(1, "a", 2) != derive_seed(1, "a", 3)
    assert derive_seed(1, "a") != derive_seed(2, "a")


# --- run_benchmark ---

@pytest.fixture(scope="module")
def small_report():
    data = toy_dataset(n=80, seed=5)
    cfg = AttackConfig(delta_factor=0.1, basis_cap=0)
    return run_benchmark(
        [("linear", linear_model())], data, [("cfg", cfg)],
        n_samples=6, budget=120, seed=9,
    )


def test_benchmark_row_contents(small_report):
    report, runs = small_report
    assert len(report.rows) == 1
    row = report.rows[0]
    assert row.model == "linear"
    assert row.n_samples == 6
    assert row.avg_l2 is not None and row.avg_l2 >= 0
    assert row.success_count + row.failure_count == 6


def test_benchmark_budget_respected(small_report):
    _, runs = small_report
    for run in runs:
        if run.result is not None:
            assert run.result.queries_used <= 120


def test_benchmark_reproducible():
    data = toy_dataset(n=80, seed=5)
    cfg = AttackConfig(delta_factor=0.1, basis_cap=0)
    args = ([("linear", linear_model())], data, [("cfg", cfg)])
    r1, _ = run_benchmark(*args, n_samples=5, budget=100, seed=4)
    r2, _ = run_benchmark(*args, n_samples=5, budget=100, seed=4)
    assert r1.rows[0].avg_l2 == r2.rows[0].avg_l2


def test_benchmark_parallel_matches_serial():
    data = toy_dataset(n=80, seed=5)
    cfg = AttackConfig(delta_factor=0.1, basis_cap=0)
    args = ([("linear", linear_model())], data, [("cfg", cfg)])
    serial, _ = run_benchmark(*args, n_samples=5, budget=100, seed=4, jobs=1)
    parallel, _ = run_benchmark(*args, n_samples=5, budget=100, seed=4, jobs=2)
    assert serial.rows[0].avg_l2 == parallel.rows[0].avg_l2


def test_benchmark_budget_zero_all_fail():
    data = toy_dataset(n=40, seed=5)
    cfg = AttackConfig(delta_factor=0.1)
    report, _ = run_benchmark(
        [("linear", linear_model())], data, [("cfg", cfg)],
        n_samples=4, budget=0, seed=0,
    )
    row = report.rows[0]
    assert row.success_count == 0
    assert row.avg_l2 is None


def test_benchmark_dimension_check():
    data = toy_dataset(n=40)
    with pytest.raises(ValueError):
        run_benchmark(
            [("m", linear_model(d=3))], data,
            [("cfg", AttackConfig())], n_samples=2, budget=10, seed=0,
        )


def test_report_serialization(small_report):
    report, _ = small_report
    doc = report.to_json()
    assert '"avg_l2"' in doc
    table = report.to_table()
    assert "linear" in table


# --- traces ---

def test_emit_traces_files(tmp_path, small_report):
    _, runs = small_report
    written = emit_traces(runs, str(tmp_path))
    per_run = [p for p in written if os.path.basename(p).startswith("run_")]
    assert len(per_run) == sum(1 for r in runs if r.result is not None)
    assert any(p.endswith("aggregate_ratio_by_iteration.csv") for p in written)
    assert any(p.endswith("aggregate_binsearch_by_acceptance.csv") for p in written)

    with open(per_run[0]) as fh:
        rows = list(csv.DictReader(fh))
    run = next(r for r in runs if os.path.basename(per_run[0]) ==
               f"run_{r.model}_{r.config}_{r.sample_index}.csv")
    # trace rows reconcile with the ledger count
    assert int(rows[-1]["queries_used"]) == run.result.queries_used
    accepted = [r for r in rows if r["accepted"] == "1"]
    for row in accepted:
        assert 0.0 < float(row["ratio"]) < 1.0


def test_emit_traces_empty():
    with pytest.raises(EmptyList):
        emit_traces([], "/tmp/nowhere")
