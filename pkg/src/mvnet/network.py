"""Feed-forward classifier: init, forward/backward, SGD with momentum,
dropout, early stopping, and model serialization.

Hidden layers use ReLU; the output is a 2-way softmax trained with mean
cross-entropy. Training arithmetic is float32 by default; gradient
checking uses float64 nets.

Model file layout (little-endian): magic "MVNN", version u32=1, config
(input_dim u32, hidden_layers u32, hidden_width u32, output_classes u32,
dropout_rate float64), then per layer: rows u32, cols u32, weights
row-major float32, biases float32.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

MODEL_MAGIC = b"MVNN"
MODEL_VERSION = 1

_U32 = struct.Struct("<I")
_F64 = struct.Struct("<d")

STOP_EARLY = "early-stop"
STOP_MAX_EPOCHS = "max-epochs"
STOP_DIVERGED = "diverged"


class DivergenceError(FloatingPointError):
    """Raised when losses or gradients go non-finite during optimization."""


class ModelFormatError(ValueError):
    """Bad magic, unsupported version, or truncated model file."""


@dataclass(frozen=True)
class ModelConfig:
    input_dim: int = 3300
    hidden_layers: int = 1
    hidden_width: int = 500
    output_classes: int = 2
    dropout_rate: float = 0.5
    init_seed: int = 0

    def __post_init__(self):
        if min(self.input_dim, self.hidden_layers, self.hidden_width,
               self.output_classes) <= 0:
            raise ValueError("all dimensions must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    momentum: float = 0.9
    batch_size: int = 64
    max_epochs: int = 500
    patience: int = 10
    min_delta: float = 1e-4
    train_seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise ValueError("batch_size and max_epochs must be >= 1")


@dataclass
class Layer:
    W: np.ndarray                 # fan_out x fan_in
    b: np.ndarray                 # fan_out
    vW: np.ndarray = None         # momentum velocities, zero-initialized
    vb: np.ndarray = None

    def __post_init__(self):
        if self.vW is None:
            self.vW = np.zeros_like(self.W)
        if self.vb is None:
            self.vb = np.zeros_like(self.b)


class Network:
    """Parameter container; shapes chain input_dim -> hidden_width^L -> classes."""

    def __init__(self, config: ModelConfig, layers: list[Layer], dtype=np.float32):
        self.config = config
        self.layers = layers
        self.dtype = dtype

    @property
    def input_dim(self) -> int:
        return self.config.input_dim

    def parameter_snapshot(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(layer.W.copy(), layer.b.copy()) for layer in self.layers]

    def load_parameters(self, params: list[tuple[np.ndarray, np.ndarray]]) -> None:
        for layer, (W, b) in zip(self.layers, params):
            layer.W[...] = W
            layer.b[...] = b

    def clone_with_parameters(self, params) -> "Network":
        layers = [Layer(W.copy(), b.copy()) for W, b in params]
        return Network(self.config, layers, dtype=self.dtype)


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)
    best_epoch: int = 0           # 1-indexed; 0 = no finite epoch recorded
    stop_reason: str = ""

    @property
    def epochs(self) -> int:
        return len(self.val_loss)


def init_network(config: ModelConfig, dtype=np.float32) -> Network:
    """Glorot-uniform weights, zero biases, deterministic per init_seed."""
    rng = np.random.default_rng(config.init_seed)
    dims = ([config.input_dim]
            + [config.hidden_width] * config.hidden_layers
            + [config.output_classes])
    layers = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        W = rng.uniform(-limit, limit, size=(fan_out, fan_in)).astype(dtype)
        b = np.zeros(fan_out, dtype=dtype)
        layers.append(Layer(W, b))
    return Network(config, layers, dtype=dtype)


@dataclass
class ForwardCache:
    inputs: list[np.ndarray]      # inputs[i] = activation entering layer i
    zs: list[np.ndarray]          # hidden pre-activations
    masks: list[np.ndarray | None]  # scaled dropout masks (values 0 or 1/keep)
    probs: np.ndarray


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def forward(net: Network, batch: np.ndarray, train: bool = False,
            dropout_rng=None) -> tuple[np.ndarray, ForwardCache | None]:
    """Run the network on a batch (rows = examples).

    Returns (probabilities, cache); the cache is populated only in train
    mode, where inverted dropout masks the hidden activations with keep
    probability 1 - dropout_rate and scales survivors by 1/keep. Eval
    mode applies no dropout.
    """
    batch = np.asarray(batch, dtype=net.dtype)
    if batch.ndim != 2 or batch.shape[1] != net.input_dim:
        raise ValueError(
            f"batch must be (n, {net.input_dim}), got {batch.shape}"
        )
    p = net.config.dropout_rate
    use_dropout = train and p > 0.0
    if use_dropout:
        if dropout_rng is None:
            raise ValueError("train-mode forward with dropout needs an RNG or seed")
        if isinstance(dropout_rng, (int, np.integer)):
            dropout_rng = np.random.default_rng(dropout_rng)

    a = batch
    inputs, zs, masks = [], [], []
    for layer in net.layers[:-1]:
        inputs.append(a)
        z = a @ layer.W.T + layer.b
        h = np.maximum(z, 0.0)
        mask = None
        if use_dropout:
            keep = 1.0 - p
            mask = (dropout_rng.random(h.shape) < keep).astype(net.dtype) / net.dtype(keep)
            h = h * mask
        zs.append(z)
        masks.append(mask)
        a = h
    inputs.append(a)
    out = net.layers[-1]
    probs = _softmax(a @ out.W.T + out.b)
    if not train:
        return probs, None
    return probs, ForwardCache(inputs, zs, masks, probs)


def cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean over the batch of -log p(true class), with p clamped to >= 1e-12."""
    labels = np.asarray(labels)
    p_true = probs[np.arange(len(labels)), labels]
    return float(np.mean(-np.log(np.maximum(p_true, 1e-12))))


def backward(net: Network, cache: ForwardCache,
             labels: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Exact gradients of the mean cross-entropy, honoring the dropout masks.

    Requires the cache from a train-mode forward on the same batch.
    Returns per-layer (dW, db) in layer order.
    """
    if cache is None:
        raise ValueError("backward needs the cache from a train-mode forward pass")
    labels = np.asarray(labels)
    n = cache.probs.shape[0]
    delta = cache.probs.copy()
    delta[np.arange(n), labels] -= 1.0
    delta /= n

    grads: list[tuple[np.ndarray, np.ndarray]] = []
    dz = delta
    for i in range(len(net.layers) - 1, -1, -1):
        grads.append((dz.T @ cache.inputs[i], dz.sum(axis=0)))
        if i == 0:
            break
        da = dz @ net.layers[i].W
        if cache.masks[i - 1] is not None:
            da = da * cache.masks[i - 1]
        dz = da * (cache.zs[i - 1] > 0)
    grads.reverse()
    return grads


def sgd_momentum_step(net: Network, grads, lr: float, momentum: float) -> None:
    """v <- momentum*v - lr*g; w <- w + v, per parameter tensor.

    Non-finite gradients signal divergence and leave the net untouched.
    """
    for _, (dW, db) in zip(net.layers, grads):
        if not (np.isfinite(dW).all() and np.isfinite(db).all()):
            raise DivergenceError("non-finite gradient")
    for layer, (dW, db) in zip(net.layers, grads):
        layer.vW *= momentum
        layer.vW -= lr * dW.astype(net.dtype, copy=False)
        layer.W += layer.vW
        layer.vb *= momentum
        layer.vb -= lr * db.astype(net.dtype, copy=False)
        layer.b += layer.vb


def train(net: Network, train_X: np.ndarray, train_y: np.ndarray,
          val_X: np.ndarray, val_y: np.ndarray,
          tc: TrainConfig) -> tuple[Network, TrainHistory]:
    """Mini-batch SGD with momentum, early stopping on validation loss.

    Each epoch reshuffles the training set from the seeded stream, then
    evaluates validation loss. Training stops when the loss has not
    improved by min_delta for `patience` consecutive epochs, at
    max_epochs, or on divergence. The returned network carries the
    parameters of the epoch with minimal validation loss.
    """
    train_X = np.asarray(train_X, dtype=net.dtype)
    val_X = np.asarray(val_X, dtype=net.dtype)
    train_y = np.asarray(train_y, dtype=np.int64)
    val_y = np.asarray(val_y, dtype=np.int64)
    if len(train_X) == 0 or len(val_X) == 0:
        raise ValueError("training and validation sets must be non-empty")
    if train_X.shape[1] != net.input_dim:
        raise ValueError(
            f"feature length {train_X.shape[1]} != input_dim {net.input_dim}"
        )

    rng = np.random.default_rng(tc.train_seed)
    history = TrainHistory()
    best_loss = np.inf
    best_params = net.parameter_snapshot()
    bad_epochs = 0
    n = len(train_X)

    # Exploding runs are detected by finiteness checks and recorded as a
    # stop reason, so the overflow warnings on the way there are noise.
    err_kw = {"over": "ignore", "invalid": "ignore"}
    for epoch in range(1, tc.max_epochs + 1):
        perm = rng.permutation(n)
        loss_sum = 0.0
        diverged = False
        for start in range(0, n, tc.batch_size):
            idx = perm[start:start + tc.batch_size]
            with np.errstate(**err_kw):
                probs, cache = forward(net, train_X[idx], train=True, dropout_rng=rng)
                batch_loss = cross_entropy(probs, train_y[idx])
            if not np.isfinite(batch_loss):
                diverged = True
                break
            try:
                with np.errstate(**err_kw):
                    sgd_momentum_step(net, backward(net, cache, train_y[idx]),
                                      tc.learning_rate, tc.momentum)
            except DivergenceError:
                diverged = True
                break
            loss_sum += batch_loss * len(idx)

        if diverged:
            history.train_loss.append(float("nan"))
            history.val_loss.append(float("nan"))
            history.val_accuracy.append(float("nan"))
            history.stop_reason = STOP_DIVERGED
            break

        with np.errstate(**err_kw):
            val_probs, _ = forward(net, val_X)
            val_loss = cross_entropy(val_probs, val_y)
        history.train_loss.append(loss_sum / n)
        history.val_loss.append(val_loss)
        history.val_accuracy.append(
            float(np.mean(val_probs.argmax(axis=1) == val_y)))
        if not np.isfinite(val_loss):
            history.stop_reason = STOP_DIVERGED
            break

        if val_loss < best_loss - tc.min_delta:
            bad_epochs = 0
        else:
            bad_epochs += 1
        if val_loss < best_loss:
            best_loss = val_loss
            best_params = net.parameter_snapshot()
            history.best_epoch = epoch
        if bad_epochs >= tc.patience:
            history.stop_reason = STOP_EARLY
            break
    else:
        history.stop_reason = STOP_MAX_EPOCHS

    return net.clone_with_parameters(best_params), history


def predict(net: Network, features: np.ndarray) -> float | np.ndarray:
    """Probability of the metaphor class (index 1), eval mode.

    Accepts a single feature vector or a batch; batched output equals
    the per-row outputs.
    """
    X = np.asarray(features, dtype=net.dtype)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    probs, _ = forward(net, X)
    return float(probs[0, 1]) if single else probs[:, 1]


def save_model(net: Network, stream) -> int:
    """Serialize net (weights as binary32) to the versioned model format."""
    cfg = net.config
    written = 0

    def put(data: bytes):
        nonlocal written
        stream.write(data)
        written += len(data)

    put(MODEL_MAGIC)
    put(_U32.pack(MODEL_VERSION))
    put(_U32.pack(cfg.input_dim))
    put(_U32.pack(cfg.hidden_layers))
    put(_U32.pack(cfg.hidden_width))
    put(_U32.pack(cfg.output_classes))
    put(_F64.pack(cfg.dropout_rate))
    for layer in net.layers:
        rows, cols = layer.W.shape
        put(_U32.pack(rows))
        put(_U32.pack(cols))
        put(np.ascontiguousarray(layer.W, dtype="<f4").tobytes())
        put(np.asarray(layer.b, dtype="<f4").tobytes())
    return written


def _read_exact(stream, n: int) -> bytes:
    data = stream.read(n)
    if len(data) != n:
        raise ModelFormatError(f"truncated model file: wanted {n} bytes, got {len(data)}")
    return data


def load_model(stream) -> tuple[Network, ModelConfig]:
    magic = _read_exact(stream, len(MODEL_MAGIC))
    if magic != MODEL_MAGIC:
        raise ModelFormatError(f"bad magic {magic!r}, expected {MODEL_MAGIC!r}")
    (version,) = _U32.unpack(_read_exact(stream, 4))
    if version != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {version}")
    input_dim, hidden_layers, hidden_width, output_classes = (
        _U32.unpack(_read_exact(stream, 4))[0] for _ in range(4))
    (dropout_rate,) = _F64.unpack(_read_exact(stream, 8))
    config = ModelConfig(
        input_dim=input_dim, hidden_layers=hidden_layers,
        hidden_width=hidden_width, output_classes=output_classes,
        dropout_rate=dropout_rate, init_seed=0,
    )
    layers = []
    for _ in range(hidden_layers + 1):
        (rows,) = _U32.unpack(_read_exact(stream, 4))
        (cols,) = _U32.unpack(_read_exact(stream, 4))
        W = np.frombuffer(_read_exact(stream, rows * cols * 4), dtype="<f4")
        W = W.reshape(rows, cols).copy()
        b = np.frombuffer(_read_exact(stream, rows * 4), dtype="<f4").copy()
        layers.append(Layer(W, b))
    dims = [input_dim] + [hidden_width] * hidden_layers + [output_classes]
    for layer, (fan_in, fan_out) in zip(layers, zip(dims[:-1], dims[1:])):
        if layer.W.shape != (fan_out, fan_in):
            raise ModelFormatError(
                f"layer shape {layer.W.shape} breaks the chain "
                f"({fan_out}, {fan_in})"
            )
    return Network(config, layers), config


def save_model_file(net: Network, path) -> int:
    with open(path, "wb") as f:
        return save_model(net, f)


def load_model_file(path) -> tuple[Network, ModelConfig]:
    with open(path, "rb") as f:
        return load_model(f)
