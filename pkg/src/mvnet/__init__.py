"""Metaphorical-violence classification toolkit.

Pipeline: word2vec binary embeddings -> 11-token context windows ->
concatenated feature vectors -> feed-forward classifier -> metrics and
hyperparameter sweeps, plus an annotation-suggestion service that turns
reviewed suggestions into new training data.
"""

__version__ = "0.1.0"

from .corpus import GoldRecord, TokenWindow, build_window, parse_gold_csv, tokenize
from .embeddings import EmbeddingTable, LookupPolicy, load_word2vec, lookup, write_word2vec
from .features import (
    DatasetSplits,
    LabeledExample,
    balance_by_resampling,
    featurize,
    split_dataset,
)
from .metrics import ConfusionMatrix, MetricsRecord, confusion, full_metrics, roc_auc
from .network import (
    ModelConfig,
    Network,
    TrainConfig,
    TrainHistory,
    init_network,
    load_model,
    predict,
    save_model,
    train,
)

__all__ = [
    "ConfusionMatrix",
    "DatasetSplits",
    "EmbeddingTable",
    "GoldRecord",
    "LabeledExample",
    "LookupPolicy",
    "MetricsRecord",
    "ModelConfig",
    "Network",
    "TokenWindow",
    "TrainConfig",
    "TrainHistory",
    "balance_by_resampling",
    "build_window",
    "confusion",
    "featurize",
    "full_metrics",
    "init_network",
    "load_model",
    "load_word2vec",
    "lookup",
    "parse_gold_csv",
    "predict",
    "roc_auc",
    "save_model",
    "split_dataset",
    "tokenize",
    "train",
    "write_word2vec",
]
