"""Window featurization, dataset assembly, splitting, and class balancing."""

import struct
from dataclasses import dataclass

import numpy as np

from .corpus import GoldRecord, TokenWindow, build_window, extract_candidates, tokenize
from .embeddings import DEFAULT_POLICY, EmbeddingTable, LookupPolicy, lookup


@dataclass(frozen=True)
class LabeledExample:
    features: np.ndarray          # length 11 * table.dim, float32
    label: int                    # 0 or 1
    provenance: str               # GoldRecord id
    violent_word: str = ""
    network: str = ""

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")


@dataclass
class DatasetSplits:
    train: list[LabeledExample]
    validation: list[LabeledExample]
    test: list[LabeledExample]
    seed: int


def featurize(window: TokenWindow, table: EmbeddingTable,
              policy: LookupPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Concatenate the 11 slot embeddings into one vector.

    Slot i occupies elements [i*dim, (i+1)*dim); padding and OOV slots
    are zero blocks, so the output length is always 11 * table.dim.
    """
    out = np.zeros(TokenWindow.SIZE * table.dim, dtype=np.float32)
    for i, token in enumerate(window.tokens):
        if token:
            out[i * table.dim:(i + 1) * table.dim] = lookup(table, token, policy)
    return out


def example_from_gold(record: GoldRecord, table: EmbeddingTable,
                      policy: LookupPolicy = DEFAULT_POLICY) -> LabeledExample:
    """Featurize the window around the first occurrence of the record's violent word."""
    tokens = tokenize(record.text)
    candidates = extract_candidates(tokens, source_id=record.id)
    matches = [c for c in candidates if c.lemma == record.violent_word]
    if not matches:
        raise ValueError(
            f"record {record.id}: violent_word {record.violent_word!r} not found in text"
        )
    window = build_window(tokens, matches[0].index)
    return LabeledExample(
        features=featurize(window, table, policy),
        label=int(record.label),
        provenance=record.id,
        violent_word=record.violent_word,
        network=record.network,
    )


def examples_from_gold(records: list[GoldRecord], table: EmbeddingTable,
                       policy: LookupPolicy = DEFAULT_POLICY) -> list[LabeledExample]:
    return [example_from_gold(r, table, policy) for r in records]


def to_arrays(examples: list[LabeledExample]) -> tuple[np.ndarray, np.ndarray]:
    """Stack examples into (features, labels) arrays for training."""
    if not examples:
        raise ValueError("no examples to stack")
    X = np.stack([ex.features for ex in examples]).astype(np.float32)
    y = np.array([ex.label for ex in examples], dtype=np.int64)
    return X, y


def split_dataset(examples: list[LabeledExample], seed: int) -> DatasetSplits:
    """Shuffle once with a seeded RNG, then carve test / validation / train.

    test = first floor(0.2 N) of the shuffle; the remainder is split again
    into validation = floor(0.2 * remainder) and train = rest. Deterministic
    for a fixed seed.
    """
    n = len(examples)
    if n < 5:
        raise ValueError(f"need at least 5 examples to form three splits, got {n}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    shuffled = [examples[i] for i in order]

    n_test = int(0.2 * n)
    pretrain = shuffled[n_test:]
    n_val = int(0.2 * len(pretrain))
    if n_test == 0 or n_val == 0:
        raise ValueError(f"cannot form three non-empty splits from {n} examples")
    return DatasetSplits(
        train=pretrain[n_val:],
        validation=pretrain[:n_val],
        test=shuffled[:n_test],
        seed=seed,
    )


def balance_by_resampling(train: list[LabeledExample], seed: int) -> list[LabeledExample]:
    """Append minority rows sampled with replacement until class counts are equal.

    Every original row is retained; only duplicates of existing minority
    rows are added. Whichever class is smaller gets resampled.
    """
    pos = [ex for ex in train if ex.label == 1]
    neg = [ex for ex in train if ex.label == 0]
    if not pos or not neg:
        raise ValueError("both classes must be present to balance the training set")
    if len(pos) == len(neg):
        return list(train)
    minority = pos if len(pos) < len(neg) else neg
    deficit = abs(len(pos) - len(neg))
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, len(minority), size=deficit)
    return list(train) + [minority[i] for i in picks]


# Cached featurized dataset: header (count u32, feature length u32), then
# per example: label byte, provenance id length u32 + UTF-8 bytes,
# features as little-endian float32.

_CACHE_HEADER = struct.Struct("<II")
_CACHE_IDLEN = struct.Struct("<I")


def save_dataset(examples: list[LabeledExample], stream) -> int:
    if examples:
        feat_len = len(examples[0].features)
    else:
        feat_len = 0
    written = 0
    stream.write(_CACHE_HEADER.pack(len(examples), feat_len))
    written += _CACHE_HEADER.size
    for ex in examples:
        if len(ex.features) != feat_len:
            raise ValueError("all examples must share one feature length")
        ident = ex.provenance.encode("utf-8")
        chunk = (bytes([ex.label]) + _CACHE_IDLEN.pack(len(ident)) + ident
                 + np.asarray(ex.features, dtype="<f4").tobytes())
        stream.write(chunk)
        written += len(chunk)
    return written


def load_dataset(stream) -> list[LabeledExample]:
    """Read a cached dataset; group keys are not stored in the cache format."""
    header = stream.read(_CACHE_HEADER.size)
    if len(header) != _CACHE_HEADER.size:
        raise ValueError("truncated dataset cache: missing header")
    count, feat_len = _CACHE_HEADER.unpack(header)
    examples = []
    for i in range(count):
        head = stream.read(1 + _CACHE_IDLEN.size)
        if len(head) != 1 + _CACHE_IDLEN.size:
            raise ValueError(f"truncated dataset cache at example {i}")
        label = head[0]
        (id_len,) = _CACHE_IDLEN.unpack(head[1:])
        ident = stream.read(id_len)
        payload = stream.read(feat_len * 4)
        if len(ident) != id_len or len(payload) != feat_len * 4:
            raise ValueError(f"truncated dataset cache at example {i}")
        examples.append(LabeledExample(
            features=np.frombuffer(payload, dtype="<f4").copy(),
            label=int(label),
            provenance=ident.decode("utf-8"),
        ))
    return examples
