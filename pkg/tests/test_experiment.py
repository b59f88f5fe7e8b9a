import io

import numpy as np
import pytest

from mvnet.experiment import (
    ReportRow,
    SweepGrid,
    SweepResult,
    TrialRecord,
    aggregate,
    emit_report,
    render_report,
    run_sweep,
)
from mvnet.features import DatasetSplits, LabeledExample
from mvnet.metrics import MetricsRecord
from mvnet.network import STOP_DIVERGED, STOP_EARLY, ModelConfig, TrainConfig

DIM = 8


def toy_examples(n, seed, label_flip=False):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        label = i % 2
        center = 1.5 if label == 1 else -1.5
        features = rng.normal(center, 0.6, size=DIM).astype(np.float32)
        out.append(LabeledExample(
            features=features,
            label=(1 - label) if label_flip else label,
            provenance=f"s{seed}e{i}",
            violent_word=("hit", "beat", "attack")[i % 3],
            network=("MSNBC", "CNN", "FOXNEWS")[i % 3],
        ))
    return out


def toy_splits(seed=0):
    return DatasetSplits(
        train=toy_examples(40, seed),
        validation=toy_examples(10, seed + 1),
        test=toy_examples(14, seed + 2),
        seed=seed,
    )


MC = ModelConfig(input_dim=DIM, hidden_width=4, dropout_rate=0.0)
TC = TrainConfig(learning_rate=0.05, max_epochs=4, batch_size=8, patience=4)


def test_grid_validation_and_cells():
    grid = SweepGrid()
    assert grid.cells == [(1, 0.01), (1, 0.1), (2, 0.01), (2, 0.1), (4, 0.01), (4, 0.1)]
    with pytest.raises(ValueError):
        SweepGrid(layer_options=())
    with pytest.raises(ValueError):
        SweepGrid(trials=0)


def test_sweep_shape_3x2x5():
    grid = SweepGrid(layer_options=(1, 2, 4), learning_rates=(0.01, 0.1),
                     trials=5, base_seed=7)
    result = run_sweep(toy_splits(), grid, MC, TC)
    assert len(result.trials) == 30
    cells = result.cells()
    assert len(cells) == 6
    for layers, lr in grid.cells:
        assert len(result.cell_trials(layers, lr)) == 5
    # per-trial seeds are base_seed + trial index
    assert sorted(t.seed for t in result.cell_trials(1, 0.01)) == [7, 8, 9, 10, 11]


def test_single_trial_mean_equals_trial():
    grid = SweepGrid(layer_options=(1,), learning_rates=(0.05,), trials=1, base_seed=3)
    result = run_sweep(toy_splits(), grid, MC, TC)
    (record,) = result.trials
    assert record.converged
    (cell,) = result.cells()
    assert cell.converged == 1
    assert cell.mean_metrics == record.metrics


def test_all_diverged_cell_flagged_without_mean():
    # float32 overflows in the first matmul at this input scale, so every
    # trial must record a non-finite loss or gradient
    splits = toy_splits()
    splits.train = [
        LabeledExample(ex.features * np.float32(1e38), ex.label, ex.provenance)
        for ex in splits.train
    ]
    grid = SweepGrid(layer_options=(2,), learning_rates=(0.05,), trials=3, base_seed=0)
    result = run_sweep(splits, grid, MC, TC)
    assert all(t.stop_reason == STOP_DIVERGED for t in result.trials)
    assert all(t.metrics is None for t in result.trials)
    (cell,) = result.cells()
    assert cell.diverged == 3
    assert cell.converged == 0
    assert cell.mean_metrics == MetricsRecord()
    (row,) = aggregate(result)
    assert row.auc is None and row.sensitivity is None


def test_trial_errors_recorded_not_raised():
    splits = toy_splits()
    # single-class training split: balancing must fail inside each trial
    splits.train = [ex for ex in splits.train if ex.label == 1]
    grid = SweepGrid(layer_options=(1,), learning_rates=(0.05,), trials=2, base_seed=0)
    result = run_sweep(splits, grid, MC, TC)
    assert all(t.error is not None for t in result.trials)
    assert all(not t.converged for t in result.trials)
    (cell,) = result.cells()
    assert cell.errors == 2
    assert cell.mean_metrics == MetricsRecord()


def test_worker_count_invariance():
    grid = SweepGrid(layer_options=(1, 2), learning_rates=(0.02, 0.05),
                     trials=3, base_seed=11)
    serial = run_sweep(toy_splits(), grid, MC, TC, workers=1)
    threaded = run_sweep(toy_splits(), grid, MC, TC, workers=4)
    assert [(t.layers, t.learning_rate, t.trial, t.seed, t.stop_reason, t.metrics)
            for t in serial.trials] == \
           [(t.layers, t.learning_rate, t.trial, t.seed, t.stop_reason, t.metrics)
            for t in threaded.trials]
    assert render_report(aggregate(serial)) == render_report(aggregate(threaded))


def test_rerun_reproducibility():
    grid = SweepGrid(layer_options=(1,), learning_rates=(0.05,), trials=3, base_seed=2)
    a = run_sweep(toy_splits(), grid, MC, TC)
    b = run_sweep(toy_splits(), grid, MC, TC)
    assert [t.metrics for t in a.trials] == [t.metrics for t in b.trials]


def test_cell_mean_within_trial_range():
    grid = SweepGrid(layer_options=(1, 2), learning_rates=(0.05,), trials=4, base_seed=5)
    result = run_sweep(toy_splits(), grid, MC, TC)
    for cell in result.cells():
        converged = [t for t in result.cell_trials(cell.layers, cell.learning_rate)
                     if t.converged]
        for key in ("sensitivity", "specificity", "precision", "auc"):
            values = [getattr(t.metrics, key) for t in converged
                      if getattr(t.metrics, key) is not None]
            mean = getattr(cell.mean_metrics, key)
            if values:
                assert min(values) <= mean <= max(values)
            else:
                assert mean is None


def fabricated_result(aucs):
    grid = SweepGrid(layer_options=(4,), learning_rates=(0.01,),
                     trials=len(aucs), base_seed=0)
    trials = [
        TrialRecord(layers=4, learning_rate=0.01, trial=i, seed=i,
                    metrics=MetricsRecord(sensitivity=0.7, specificity=0.9,
                                          precision=0.8, auc=a, accuracy=0.85),
                    stop_reason=STOP_EARLY)
        for i, a in enumerate(aucs)
    ]
    return SweepResult(grid=grid, trials=trials)


def test_aggregate_mean_and_rounding():
    (row,) = aggregate(fabricated_result([0.90, 0.94]))
    assert row.auc == 0.92
    assert row.layers == 4 and row.learning_rate == 0.01
    (row,) = aggregate(fabricated_result([0.9005, 0.9006]))
    assert row.auc == 0.901


def test_aggregate_row_order():
    grid = SweepGrid(layer_options=(4, 1), learning_rates=(0.1, 0.01), trials=1)
    trials = [
        TrialRecord(layers=l, learning_rate=lr, trial=0, seed=0,
                    metrics=MetricsRecord(auc=0.5), stop_reason=STOP_EARLY)
        for l in (4, 1) for lr in (0.1, 0.01)
    ]
    rows = aggregate(SweepResult(grid=grid, trials=trials))
    assert [(r.layers, r.learning_rate) for r in rows] == \
        [(1, 0.01), (1, 0.1), (4, 0.01), (4, 0.1)]


def test_render_csv():
    rows = [ReportRow(4, 0.01, 0.702, 0.926, 0.816, 0.92)]
    text = render_report(rows, "csv")
    assert text == (
        "layers,learning_rate,sensitivity,specificity,precision,auc\n"
        "4,0.01,0.702,0.926,0.816,0.920\n"
    )


def test_render_csv_empty_and_none():
    assert render_report([], "csv") == \
        "layers,learning_rate,sensitivity,specificity,precision,auc\n"
    text = render_report([ReportRow(6, 0.5, None, None, None, None)], "csv")
    assert text.splitlines()[1] == "6,0.5,,,,"


def test_render_markdown():
    text = render_report([ReportRow(1, 0.01, 0.75, 0.8, 0.5, 0.918)], "markdown")
    lines = text.splitlines()
    assert lines[0] == "| layers | learning_rate | sensitivity | specificity | precision | auc |"
    assert lines[1].startswith("|---:")
    assert lines[2] == "| 1 | 0.01 | 0.750 | 0.800 | 0.500 | 0.918 |"


def test_render_deterministic_and_unknown_format():
    rows = [ReportRow(1, 0.1, 0.1, 0.2, 0.3, 0.4)]
    assert render_report(rows) == render_report(rows)
    with pytest.raises(ValueError, match="format"):
        render_report(rows, "xml")


def test_emit_report_byte_count():
    rows = [ReportRow(2, 0.1, 0.5, 0.6, 0.7, 0.8)]
    sink = io.BytesIO()
    n = emit_report(rows, "csv", sink)
    assert n == len(sink.getvalue())
    assert sink.getvalue().decode("utf-8") == render_report(rows, "csv")
