"""Figure rendering for the report path: sweep heatmaps, training
curves, and ROC curves, written to files next to the delimited output."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiment import SweepResult
from .metrics import roc_auc, roc_points
from .network import TrainHistory

_SAVE_KW = {"dpi": 120, "bbox_inches": "tight"}


def save_sweep_heatmap(result: SweepResult, path, metric: str = "auc") -> None:
    """Mean value of `metric` per (layers, learning rate) cell."""
    layers = list(result.grid.layer_options)
    lrs = list(result.grid.learning_rates)
    grid = np.full((len(layers), len(lrs)), np.nan)
    for cell in result.cells():
        value = getattr(cell.mean_metrics, metric)
        if value is not None:
            grid[layers.index(cell.layers), lrs.index(cell.learning_rate)] = value

    fig, ax = plt.subplots(figsize=(1.8 + 1.4 * len(lrs), 1.2 + 0.9 * len(layers)))
    im = ax.imshow(grid, cmap="viridis", aspect="auto")
    ax.set_xticks(range(len(lrs)), [f"{lr:g}" for lr in lrs])
    ax.set_yticks(range(len(layers)), [str(n) for n in layers])
    ax.set_xlabel("learning rate")
    ax.set_ylabel("hidden layers")
    ax.set_title(f"mean {metric} per sweep cell")
    for i in range(len(layers)):
        for j in range(len(lrs)):
            text = "n/a" if np.isnan(grid[i, j]) else f"{grid[i, j]:.3f}"
            ax.text(j, i, text, ha="center", va="center", color="white")
    fig.colorbar(im, ax=ax)
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_training_curves(history: TrainHistory, path) -> None:
    epochs = np.arange(1, history.epochs + 1)
    fig, (ax_loss, ax_acc) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax_loss.plot(epochs, history.train_loss, label="train")
    ax_loss.plot(epochs, history.val_loss, label="validation")
    if history.best_epoch:
        ax_loss.axvline(history.best_epoch, color="gray", ls="--", lw=0.8,
                        label=f"best epoch {history.best_epoch}")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("cross-entropy loss")
    ax_loss.legend()
    ax_acc.plot(epochs, history.val_accuracy, color="tab:green")
    ax_acc.set_xlabel("epoch")
    ax_acc.set_ylabel("validation accuracy")
    ax_acc.set_ylim(0, 1.02)
    fig.suptitle(f"training run (stop: {history.stop_reason})")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_roc_curve(scores, labels, path) -> None:
    fpr, tpr = roc_points(scores, labels)
    auc = roc_auc(scores, labels)
    fig, ax = plt.subplots(figsize=(4.5, 4.2))
    ax.plot(fpr, tpr, drawstyle="steps-post")
    ax.plot([0, 1], [0, 1], color="gray", ls=":", lw=0.8)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_title(f"ROC (AUC = {auc:.3f})")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
