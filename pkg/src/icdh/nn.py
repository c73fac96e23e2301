"""Fully connected network 67 -> 256 -> 256 -> 256 -> 10 with ReLU, inverted
dropout, softmax output, cross-entropy loss, and Adam. Pure numpy, float64.
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .errors import ModelFormatError, ValidationError
from .features import Dataset, N_FEATURES, TrainingRecord
from .validation import check_labels, check_point_matrix

LAYER_DIMS = (N_FEATURES, 256, 256, 256, 10)
N_OUTPUTS = LAYER_DIMS[-1]

MODEL_MAGIC = b"ICDH-MLP-1"
MODEL_SCHEMA_VERSION = 1


@dataclass
class TrainConfig:
    epochs: int = 200
    learning_rate: float = 0.01
    dropout_rate: float = 0.1
    batch_size: int = 32
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate={self.dropout_rate} outside [0, 1)")
        if self.learning_rate <= 0.0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


@dataclass
class MlpModel:
    dims: tuple[int, ...]
    weights: list[np.ndarray]  # weights[i]: (dims[i], dims[i+1])
    biases: list[np.ndarray]
    init_seed: int = 0
    model_version: int = 1

    def n_layers(self) -> int:
        return len(self.weights)

    def copy(self) -> "MlpModel":
        return MlpModel(
            self.dims,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.init_seed,
            self.model_version,
        )


@dataclass
class AdamState:
    m_w: list[np.ndarray]
    v_w: list[np.ndarray]
    m_b: list[np.ndarray]
    v_b: list[np.ndarray]
    t: int = 0


@dataclass(frozen=True)
class Recommendation:
    """Exactly three (family id, probability) pairs, descending probability."""

    entries: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if len(self.entries) != 3:
            raise ValidationError(f"recommendation needs exactly 3 entries, got {len(self.entries)}")
        ids = [fid for fid, _ in self.entries]
        if len(set(ids)) != 3:
            raise ValidationError(f"recommended families must be distinct, got {ids}")
        probs = [p for _, p in self.entries]
        if any(probs[i] < probs[i + 1] for i in range(2)):
            raise ValidationError(f"probabilities must be non-increasing, got {probs}")

    def family_ids(self) -> tuple[int, ...]:
        return tuple(fid for fid, _ in self.entries)


def init_model(seed: int = 0, dims: tuple[int, ...] = LAYER_DIMS) -> MlpModel:
    """He-scaled weights (std = sqrt(2 / fan_in)), zero biases."""
    rng = np.random.Generator(np.random.PCG64(seed))
    weights = []
    biases = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(tuple(dims), weights, biases, init_seed=seed)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _forward_batch(model: MlpModel, X: np.ndarray, dropout_rate: float = 0.0, rng: np.random.Generator | None = None):
    """Logits plus the per-layer cache needed by the backward pass."""
    a = X
    cache = []
    for W, b in zip(model.weights[:-1], model.biases[:-1]):
        z = a @ W + b
        h = np.maximum(z, 0.0)
        mask = None
        if dropout_rate > 0.0:
            if rng is None:
                raise ValueError("dropout requires an rng")
            mask = (rng.random(h.shape) >= dropout_rate) / (1.0 - dropout_rate)
            h = h * mask
        cache.append((a, z, mask))
        a = h
    logits = a @ model.weights[-1] + model.biases[-1]
    cache.append((a, None, None))
    return logits, cache


def forward(model: MlpModel, x, dropout_rate: float = 0.0, rng: np.random.Generator | None = None) -> np.ndarray:
    """Class probabilities for one feature vector. Eval mode unless dropout is requested."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.dims[0],):
        raise ValidationError(f"input must have shape ({model.dims[0]},), got {x.shape}")
    logits, _ = _forward_batch(model, x[None, :], dropout_rate, rng)
    return softmax(logits)[0]


def hidden_activations(
    model: MlpModel, x, dropout_rate: float = 0.0, rng: np.random.Generator | None = None
) -> list[np.ndarray]:
    """Post-dropout activation of each hidden layer (used by the dropout-expectation check)."""
    x = np.asarray(x, dtype=np.float64)
    logits, cache = _forward_batch(model, x[None, :], dropout_rate, rng)
    # cache[i][0] is the input to layer i, so layer i's activation is cache[i + 1][0]
    return [cache[i + 1][0][0] for i in range(model.n_layers() - 1)]


def predict_proba(model: MlpModel, X) -> np.ndarray:
    X = check_point_matrix(X, n_features=model.dims[0])
    logits, _ = _forward_batch(model, X)
    return softmax(logits)


def loss_and_grad(
    model: MlpModel,
    X,
    y,
    dropout_rate: float = 0.0,
    rng: np.random.Generator | None = None,
) -> tuple[float, tuple[list[np.ndarray], list[np.ndarray]]]:
    """Mean categorical cross-entropy and its gradients by backpropagation."""
    X = check_point_matrix(X, n_features=model.dims[0])
    y = check_labels(y, N_OUTPUTS, n_samples=X.shape[0])
    n = X.shape[0]
    logits, cache = _forward_batch(model, X, dropout_rate, rng)

    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    loss = float(-log_probs[np.arange(n), y].mean())

    d_logits = np.exp(log_probs)
    d_logits[np.arange(n), y] -= 1.0
    d_logits /= n

    grad_w = [np.empty(0)] * model.n_layers()
    grad_b = [np.empty(0)] * model.n_layers()
    a_last = cache[-1][0]
    grad_w[-1] = a_last.T @ d_logits
    grad_b[-1] = d_logits.sum(axis=0)
    da = d_logits @ model.weights[-1].T
    for i in range(model.n_layers() - 2, -1, -1):
        a_in, z, mask = cache[i]
        if mask is not None:
            da = da * mask
        dz = da * (z > 0.0)
        grad_w[i] = a_in.T @ dz
        grad_b[i] = dz.sum(axis=0)
        if i > 0:
            da = dz @ model.weights[i].T
    return loss, (grad_w, grad_b)


def adam_init(model: MlpModel) -> AdamState:
    return AdamState(
        [np.zeros_like(w) for w in model.weights],
        [np.zeros_like(w) for w in model.weights],
        [np.zeros_like(b) for b in model.biases],
        [np.zeros_like(b) for b in model.biases],
    )


def adam_step(
    model: MlpModel,
    grads: tuple[list[np.ndarray], list[np.ndarray]],
    state: AdamState,
    config: TrainConfig,
) -> tuple[MlpModel, AdamState]:
    """Standard Adam update with bias correction; parameters updated in place."""
    grad_w, grad_b = grads
    state.t += 1
    bc1 = 1.0 - config.beta1**state.t
    bc2 = 1.0 - config.beta2**state.t
    for params, grads_, m, v in (
        (model.weights, grad_w, state.m_w, state.v_w),
        (model.biases, grad_b, state.m_b, state.v_b),
    ):
        for i, g in enumerate(grads_):
            m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g
            v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g
            m_hat = m[i] / bc1
            v_hat = v[i] / bc2
            params[i] -= config.learning_rate * m_hat / (np.sqrt(v_hat) + config.eps)
    return model, state


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.train_loss)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("epoch,train_loss,val_accuracy\n")
            for i, (loss, acc) in enumerate(zip(self.train_loss, self.val_accuracy), start=1):
                fh.write(f"{i},{loss:.6f},{acc:.6f}\n")


def accuracy(model: MlpModel, X, y) -> float:
    probs = predict_proba(model, X)
    y = check_labels(y, N_OUTPUTS, n_samples=probs.shape[0])
    return float((probs.argmax(axis=1) == y).mean())


def train(model: MlpModel, train_set: Dataset, val_set: Dataset, config: TrainConfig) -> tuple[MlpModel, TrainHistory]:
    """Mini-batch training with per-epoch seeded shuffling; deterministic given seeds."""
    if len(train_set) == 0 or len(val_set) == 0:
        raise ValidationError("train and validation sets must be nonempty")
    X, y = train_set.X(), train_set.y()
    X_val, y_val = val_set.X(), val_set.y()
    rng = np.random.Generator(np.random.PCG64(config.seed))
    state = adam_init(model)
    history = TrainHistory()
    for _ in range(config.epochs):
        order = rng.permutation(len(X))
        epoch_losses = []
        for start in range(0, len(X), config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, grads = loss_and_grad(model, X[idx], y[idx], config.dropout_rate, rng)
            adam_step(model, grads, state, config)
            epoch_losses.append(loss)
        history.train_loss.append(float(np.mean(epoch_losses)))
        history.val_accuracy.append(accuracy(model, X_val, y_val))
    return model, history


def predict_top3(model: MlpModel, x) -> Recommendation:
    """The three most probable families, descending; exact ties go to the lower id."""
    probs = forward(model, x)
    order = np.argsort(-probs, kind="stable")[:3]
    return Recommendation(tuple((int(i), float(probs[i])) for i in order))


# ---------------------------------------------------------------------------
# Model file: MODEL_MAGIC, then a little-endian payload of
#   uint32 schema | uint32 ndims | ndims*uint32 dims | int64 init_seed
#   | uint32 model_version | per layer: W row-major float64 then b float64
# followed by uint32 crc32 of the payload.
# ---------------------------------------------------------------------------


def save_model(model: MlpModel, path: str | Path) -> None:
    parts = [
        struct.pack("<II", MODEL_SCHEMA_VERSION, len(model.dims)),
        struct.pack(f"<{len(model.dims)}I", *model.dims),
        struct.pack("<qI", model.init_seed, model.model_version),
    ]
    for W, b in zip(model.weights, model.biases):
        parts.append(np.ascontiguousarray(W, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    payload = b"".join(parts)
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(payload)
        fh.write(struct.pack("<I", zlib.crc32(payload)))


def load_model(path: str | Path) -> MlpModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    if not blob.startswith(MODEL_MAGIC):
        raise ModelFormatError(f"{path}: bad magic, not a model file")
    if len(blob) < len(MODEL_MAGIC) + 4:
        raise EOFError(f"{path}: truncated model file")
    payload, (crc,) = blob[len(MODEL_MAGIC) : -4], struct.unpack("<I", blob[-4:])
    if zlib.crc32(payload) != crc:
        raise ModelFormatError(f"{path}: checksum mismatch (corrupt or truncated payload)")
    try:
        offset = 0
        schema, ndims = struct.unpack_from("<II", payload, offset)
        offset += 8
        if schema != MODEL_SCHEMA_VERSION:
            raise ModelFormatError(f"{path}: unsupported schema version {schema}")
        dims = struct.unpack_from(f"<{ndims}I", payload, offset)
        offset += 4 * ndims
        init_seed, model_version = struct.unpack_from("<qI", payload, offset)
        offset += 12
        weights = []
        biases = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            w_bytes = 8 * fan_in * fan_out
            weights.append(np.frombuffer(payload, dtype="<f8", count=fan_in * fan_out, offset=offset).reshape(fan_in, fan_out).copy())
            offset += w_bytes
            biases.append(np.frombuffer(payload, dtype="<f8", count=fan_out, offset=offset).copy())
            offset += 8 * fan_out
    except (struct.error, ValueError) as exc:
        raise EOFError(f"{path}: truncated model file: {exc}") from exc
    if offset != len(payload):
        raise ModelFormatError(f"{path}: {len(payload) - offset} unexpected trailing payload bytes")
    return MlpModel(tuple(dims), weights, biases, init_seed, model_version)


class MlpColorNet(BaseEstimator, ClassifierMixin):
    """Estimator wrapper around the training loop (fit/predict_proba, get_params)."""

    def __init__(
        self,
        epochs=200,
        learning_rate=0.01,
        dropout_rate=0.1,
        batch_size=32,
        beta1=0.9,
        beta2=0.999,
        eps=1e-8,
        seed=0,
        init_seed=0,
    ):
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.dropout_rate = dropout_rate
        self.batch_size = batch_size
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.seed = seed
        self.init_seed = init_seed

    def _config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            dropout_rate=self.dropout_rate,
            batch_size=self.batch_size,
            beta1=self.beta1,
            beta2=self.beta2,
            eps=self.eps,
            seed=self.seed,
        )

    def fit(self, X, y, X_val=None, y_val=None):
        X = check_point_matrix(X, n_features=N_FEATURES)
        y = check_labels(y, N_OUTPUTS, n_samples=X.shape[0])
        if X_val is None:
            X_val, y_val = X, y
        train_set = Dataset([TrainingRecord(f, int(l)) for f, l in zip(X, y)])
        val_set = Dataset(
            [TrainingRecord(f, int(l)) for f, l in zip(check_point_matrix(X_val, N_FEATURES), y_val)]
        )
        self.model_ = init_model(self.init_seed)
        self.model_, self.history_ = train(self.model_, train_set, val_set, self._config())
        self.classes_ = np.arange(N_OUTPUTS)
        return self

    def predict_proba(self, X):
        return predict_proba(self.model_, X)

    def predict(self, X):
        return self.predict_proba(X).argmax(axis=1)

    def predict_top3(self, x) -> Recommendation:
        return predict_top3(self.model_, x)
