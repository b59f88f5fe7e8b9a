"""Classification metrics: confusion counts, point metrics, ROC AUC,
and grouped breakdowns.

Undefined metrics (zero denominators, single-class AUC) are flagged as
None rather than coerced to 0, so sweep averages never silently absorb
them. Records serialize to flat JSON objects with lowercase keys.
"""

from dataclasses import dataclass

import numpy as np

METRIC_KEYS = ("sensitivity", "specificity", "precision", "auc", "accuracy")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricsRecord:
    sensitivity: float | None = None
    specificity: float | None = None
    precision: float | None = None
    auc: float | None = None
    accuracy: float | None = None

    def to_dict(self) -> dict:
        return {key: getattr(self, key) for key in METRIC_KEYS}

    @classmethod
    def from_dict(cls, data: dict) -> "MetricsRecord":
        return cls(**{key: data.get(key) for key in METRIC_KEYS})


def confusion(scores, labels, threshold: float = 0.5) -> ConfusionMatrix:
    """Tally counts with `score >= threshold` predicted positive (ties positive)."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError(f"scores {scores.shape} and labels {labels.shape} differ")
    pred = scores >= threshold
    pos = labels == 1
    return ConfusionMatrix(
        tp=int(np.sum(pred & pos)),
        fp=int(np.sum(pred & ~pos)),
        tn=int(np.sum(~pred & ~pos)),
        fn=int(np.sum(~pred & pos)),
    )


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def classification_metrics(cm: ConfusionMatrix, auc: float | None = None) -> MetricsRecord:
    return MetricsRecord(
        sensitivity=_ratio(cm.tp, cm.tp + cm.fn),
        specificity=_ratio(cm.tn, cm.tn + cm.fp),
        precision=_ratio(cm.tp, cm.tp + cm.fp),
        auc=auc,
        accuracy=_ratio(cm.tp + cm.tn, cm.total),
    )


def roc_points(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    """ROC curve (fpr, tpr) with one point per distinct score, from (0,0) to (1,1)."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos_total = int(np.sum(labels == 1))
    neg_total = int(np.sum(labels == 0))
    if pos_total == 0 or neg_total == 0:
        raise ValueError("ROC needs both classes present")

    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]
    # one curve point per distinct score (block of ties ends here)
    block_ends = np.flatnonzero(np.diff(s))
    block_ends = np.append(block_ends, len(s) - 1)
    tpr = np.concatenate(([0.0], np.cumsum(y == 1)[block_ends] / pos_total))
    fpr = np.concatenate(([0.0], np.cumsum(y == 0)[block_ends] / neg_total))
    return fpr, tpr


def roc_auc(scores, labels) -> float:
    """Area under the ROC curve, trapezoidal over distinct score thresholds.

    Equals the pair statistic (#correctly ordered positive-negative pairs
    plus half the ties, over P*N). Raises on single-class input.
    """
    fpr, tpr = roc_points(scores, labels)
    return float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))


def full_metrics(scores, labels, threshold: float = 0.5) -> MetricsRecord:
    """Point metrics at `threshold` plus AUC; AUC flagged None on one class."""
    labels = np.asarray(labels)
    cm = confusion(scores, labels, threshold)
    both_classes = 0 < np.sum(labels == 1) < len(labels)
    auc = roc_auc(scores, labels) if both_classes else None
    return classification_metrics(cm, auc=auc)


def evaluate_subsets(scores, labels, group_keys,
                     threshold: float = 0.5) -> dict[str, MetricsRecord]:
    """Metrics computed independently for each group key."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    keys = np.asarray(group_keys)
    if not (len(scores) == len(labels) == len(keys)):
        raise ValueError("scores, labels, and group_keys must align")
    out = {}
    for key in sorted(set(keys.tolist())):
        sel = keys == key
        out[key] = full_metrics(scores[sel], labels[sel], threshold)
    return out
