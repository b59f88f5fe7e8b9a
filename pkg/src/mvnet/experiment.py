"""Hyperparameter sweep over (hidden layers x learning rate) with
multi-trial aggregation and delimited reporting.

Trials are the unit of parallelism. Every (cell, trial) pair gets its
own seed (base_seed + trial index), so results are identical regardless
of execution order or worker count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from .features import DatasetSplits, balance_by_resampling, to_arrays
from .metrics import METRIC_KEYS, MetricsRecord, full_metrics
from .network import (
    STOP_DIVERGED,
    ModelConfig,
    TrainConfig,
    init_network,
    predict,
    train,
)

REPORT_COLUMNS = ("layers", "learning_rate", "sensitivity", "specificity",
                  "precision", "auc")


@dataclass(frozen=True)
class SweepGrid:
    layer_options: tuple[int, ...] = (1, 2, 4)
    learning_rates: tuple[float, ...] = (0.01, 0.1)
    trials: int = 5
    base_seed: int = 0

    def __post_init__(self):
        if not self.layer_options or not self.learning_rates:
            raise ValueError("layer_options and learning_rates must be non-empty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    @property
    def cells(self) -> list[tuple[int, float]]:
        return [(l, lr) for l in self.layer_options for lr in self.learning_rates]


@dataclass
class TrialRecord:
    layers: int
    learning_rate: float
    trial: int
    seed: int
    metrics: MetricsRecord | None
    stop_reason: str
    epochs: int = 0
    error: str | None = None

    @property
    def converged(self) -> bool:
        return self.error is None and self.stop_reason != STOP_DIVERGED


@dataclass
class CellSummary:
    layers: int
    learning_rate: float
    mean_metrics: MetricsRecord
    converged: int
    diverged: int
    errors: int


@dataclass
class SweepResult:
    grid: SweepGrid
    trials: list[TrialRecord] = field(default_factory=list)

    def cell_trials(self, layers: int, lr: float) -> list[TrialRecord]:
        return [t for t in self.trials
                if t.layers == layers and t.learning_rate == lr]

    def cells(self) -> list[CellSummary]:
        out = []
        for layers, lr in self.grid.cells:
            trials = self.cell_trials(layers, lr)
            converged = [t for t in trials if t.converged]
            means = {}
            for key in METRIC_KEYS:
                values = [getattr(t.metrics, key) for t in converged
                          if t.metrics is not None and getattr(t.metrics, key) is not None]
                means[key] = sum(values) / len(values) if values else None
            out.append(CellSummary(
                layers=layers,
                learning_rate=lr,
                mean_metrics=MetricsRecord(**means),
                converged=len(converged),
                diverged=sum(1 for t in trials if t.stop_reason == STOP_DIVERGED),
                errors=sum(1 for t in trials if t.error is not None),
            ))
        return out


def _run_trial(splits: DatasetSplits, layers: int, lr: float, trial: int,
               mc_base: ModelConfig, tc_base: TrainConfig, base_seed: int,
               arrays, threshold: float) -> TrialRecord:
    X_val, y_val, X_test, y_test = arrays
    seed = base_seed + trial
    record = TrialRecord(layers=layers, learning_rate=lr, trial=trial,
                         seed=seed, metrics=None, stop_reason="")
    try:
        balanced = balance_by_resampling(splits.train, seed)
        X_train, y_train = to_arrays(balanced)
        mc = replace(mc_base, hidden_layers=layers, init_seed=seed)
        tc = replace(tc_base, learning_rate=lr, train_seed=seed)
        best, history = train(init_network(mc), X_train, y_train, X_val, y_val, tc)
        record.stop_reason = history.stop_reason
        record.epochs = history.epochs
        if history.stop_reason != STOP_DIVERGED:
            scores = predict(best, X_test)
            record.metrics = full_metrics(scores, y_test, threshold)
    except Exception as exc:  # never abort the sweep for one trial
        record.error = f"{type(exc).__name__}: {exc}"
        record.stop_reason = record.stop_reason or "error"
    return record


def run_sweep(splits: DatasetSplits, grid: SweepGrid,
              mc_base: ModelConfig = ModelConfig(),
              tc_base: TrainConfig = TrainConfig(),
              workers: int = 1, threshold: float = 0.5) -> SweepResult:
    """Train and evaluate every (layers, lr, trial) combination.

    Each trial inits and balances with seed base_seed + trial, trains on
    the balanced training split, and evaluates on the held-out test
    split. Trial errors are recorded, never raised.
    """
    X_val, y_val = to_arrays(splits.validation)
    X_test, y_test = to_arrays(splits.test)
    arrays = (X_val, y_val, X_test, y_test)

    jobs = [(layers, lr, trial)
            for layers, lr in grid.cells
            for trial in range(grid.trials)]
    if workers <= 1:
        records = [
            _run_trial(splits, layers, lr, trial, mc_base, tc_base,
                       grid.base_seed, arrays, threshold)
            for layers, lr, trial in jobs
        ]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_trial, splits, layers, lr, trial, mc_base,
                            tc_base, grid.base_seed, arrays, threshold)
                for layers, lr, trial in jobs
            ]
            records = [f.result() for f in futures]

    records.sort(key=lambda t: (t.layers, t.learning_rate, t.trial))
    return SweepResult(grid=grid, trials=records)


@dataclass(frozen=True)
class ReportRow:
    layers: int
    learning_rate: float
    sensitivity: float | None
    specificity: float | None
    precision: float | None
    auc: float | None


def aggregate(result: SweepResult) -> list[ReportRow]:
    """One row per cell ordered by (layers, lr); means over converged trials."""
    rows = []
    for cell in sorted(result.cells(), key=lambda c: (c.layers, c.learning_rate)):
        m = cell.mean_metrics
        rows.append(ReportRow(
            layers=cell.layers,
            learning_rate=cell.learning_rate,
            sensitivity=None if m.sensitivity is None else round(m.sensitivity, 3),
            specificity=None if m.specificity is None else round(m.specificity, 3),
            precision=None if m.precision is None else round(m.precision, 3),
            auc=None if m.auc is None else round(m.auc, 3),
        ))
    return rows


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.3f}"


def render_report(rows: list[ReportRow], format: str = "csv") -> str:
    """Deterministic text for identical rows; markdown follows the
    sensitivity/specificity/precision/auc column order."""
    if format == "csv":
        lines = [",".join(REPORT_COLUMNS)]
        for r in rows:
            lines.append(",".join([
                str(r.layers), f"{r.learning_rate:g}",
                _fmt(r.sensitivity), _fmt(r.specificity),
                _fmt(r.precision), _fmt(r.auc),
            ]))
        return "\n".join(lines) + "\n"
    if format == "markdown":
        lines = [
            "| " + " | ".join(REPORT_COLUMNS) + " |",
            "|" + "---:|" * len(REPORT_COLUMNS),
        ]
        for r in rows:
            lines.append(
                f"| {r.layers} | {r.learning_rate:g} | {_fmt(r.sensitivity)} | "
                f"{_fmt(r.specificity)} | {_fmt(r.precision)} | {_fmt(r.auc)} |"
            )
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {format!r}")


def emit_report(rows: list[ReportRow], format: str, sink) -> int:
    """Write the rendered report as UTF-8 bytes; returns the byte count."""
    data = render_report(rows, format).encode("utf-8")
    sink.write(data)
    return len(data)
