"""Baseline scorer: a small numpy MLP trained with mini-batch SGD + momentum."""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

import numpy as np

from fairabstain.data import Dataset
from fairabstain.errors import DomainError, TrainingDivergenceError
from fairabstain.exact import as_fraction

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class MlpConfig:
    hidden_dims: tuple = (100, 100)
    dropout_prob: float = 0.5
    activation: str = "relu"
    epochs: int = 100
    batch_size: int = 64
    learning_rate: float = 0.01
    momentum: float = 0.9
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        if not self.hidden_dims or min(self.hidden_dims) < 1:
            raise DomainError("hidden_dims must be a non-empty list of positive sizes")
        if not 0.0 <= self.dropout_prob < 1.0:
            raise DomainError("dropout_prob must lie in [0, 1)")
        if self.activation != "relu":
            raise DomainError(f"unsupported activation {self.activation!r}")
        if self.epochs < 1 or self.batch_size < 1:
            raise DomainError("epochs and batch_size must be positive")

    def to_dict(self):
        d = asdict(self)
        d["hidden_dims"] = list(self.hidden_dims)
        return d


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class Mlp:
    """ReLU hidden layers, dropout between hidden layers, sigmoid output."""

    weights: List[np.ndarray]
    biases: List[np.ndarray]
    dropout_prob: float = 0.0
    loss_history: List[float] = field(default_factory=list)
    train_accuracy: Optional[float] = None

    @classmethod
    def init(cls, input_dim, config: MlpConfig, rng):
        dims = [input_dim, *config.hidden_dims, 1]
        weights, biases = [], []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            bound = 1.0 / np.sqrt(max(fan_in, 1))
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(rng.uniform(-bound, bound, size=fan_out))
        return cls(weights, biases, config.dropout_prob)

    @property
    def input_dim(self):
        return self.weights[0].shape[0]

    def logits(self, X):
        h = np.asarray(X, dtype=float)
        for W, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.maximum(h @ W + b, 0.0)
        return (h @ self.weights[-1] + self.biases[-1])[:, 0]

    def predict_proba(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.input_dim:
            raise DomainError(f"expected inputs with {self.input_dim} columns, got shape {X.shape}")
        return _sigmoid(self.logits(X))

    def _forward_train(self, X, rng):
        acts, masks = [X], []
        h = X
        n_hidden = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights[:-1], self.biases[:-1])):
            h = np.maximum(h @ W + b, 0.0)
            mask = None
            # dropout sits between consecutive hidden layers
            if self.dropout_prob > 0 and i < n_hidden - 1:
                keep = 1.0 - self.dropout_prob
                mask = (rng.random(h.shape) < keep) / keep
                h = h * mask
            masks.append(mask)
            acts.append(h)
        z = (h @ self.weights[-1] + self.biases[-1])[:, 0]
        return acts, masks, z

    def fit(self, X, y, config: MlpConfig, sample_weight=None, rng=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        n = len(y)
        w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=float)
        rng = rng or np.random.default_rng(config.seed)
        vel_W = [np.zeros_like(W) for W in self.weights]
        vel_b = [np.zeros_like(b) for b in self.biases]
        self.loss_history = []
        for epoch in range(config.epochs):
            order = rng.permutation(n)
            total = 0.0
            for start in range(0, n, config.batch_size):
                idx = order[start:start + config.batch_size]
                acts, masks, z = self._forward_train(X[idx], rng)
                p = _sigmoid(z)
                wb = w[idx]
                yb = y[idx]
                # BCE on logits: log(1+e^z) - y z, stable form
                loss_terms = np.maximum(z, 0) - z * yb + np.log1p(np.exp(-np.abs(z)))
                total += float(np.sum(wb * loss_terms))
                grad = (wb * (p - yb) / len(idx))[:, None]
                for layer in range(len(self.weights) - 1, -1, -1):
                    gW = acts[layer].T @ grad
                    gb = grad.sum(axis=0)
                    if layer > 0:
                        grad = grad @ self.weights[layer].T
                        grad = grad * (acts[layer] > 0)
                        if masks[layer - 1] is not None:
                            grad = grad * masks[layer - 1]
                    vel_W[layer] = config.momentum * vel_W[layer] - config.learning_rate * gW
                    vel_b[layer] = config.momentum * vel_b[layer] - config.learning_rate * gb
                    self.weights[layer] += vel_W[layer]
                    self.biases[layer] += vel_b[layer]
            epoch_loss = total / max(float(w.sum()), 1e-12)
            if not np.isfinite(epoch_loss):
                raise TrainingDivergenceError(epoch, epoch_loss)
            self.loss_history.append(epoch_loss)
        self.train_accuracy = float(np.mean((self.predict_proba(X) >= 0.5) == (y == 1))) if n else None
        return self

    def to_dict(self):
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "layer_shapes": [list(W.shape) for W in self.weights],
            "weights": [W.ravel().tolist() for W in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "dropout_prob": self.dropout_prob,
            "loss_history": list(self.loss_history),
            "train_accuracy": self.train_accuracy,
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format_version") != MODEL_FORMAT_VERSION:
            raise DomainError(f"unsupported model format version {d.get('format_version')!r}")
        weights = [np.array(w, dtype=float).reshape(shape) for w, shape in zip(d["weights"], d["layer_shapes"])]
        biases = [np.array(b, dtype=float) for b in d["biases"]]
        return cls(weights, biases, d.get("dropout_prob", 0.0), list(d.get("loss_history", [])),
                   d.get("train_accuracy"))


@dataclass
class BaselineModel:
    net: Mlp
    t0: float = 0.5
    config: Optional[MlpConfig] = None

    @property
    def train_accuracy(self):
        return self.net.train_accuracy

    def to_dict(self):
        return {"kind": "baseline", "t0": self.t0,
                "config": self.config.to_dict() if self.config else None,
                "net": self.net.to_dict()}

    @classmethod
    def from_dict(cls, d):
        cfg = MlpConfig(**d["config"]) if d.get("config") else None
        return cls(Mlp.from_dict(d["net"]), d["t0"], cfg)

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


def train_baseline(train: Dataset, config: MlpConfig = MlpConfig(), t0: float = 0.5) -> BaselineModel:
    if len(train) == 0:
        raise DomainError("cannot train on an empty dataset")
    if not 0.0 < t0 < 1.0:
        raise DomainError("t0 must lie in (0, 1)")
    if len(np.unique(train.label)) < 2:
        warnings.warn("training labels contain a single class", stacklevel=2)
    rng = np.random.default_rng(config.seed)
    net = Mlp.init(train.feature_dim, config, rng)
    net.fit(train.X, train.label, config, rng=rng)
    return BaselineModel(net, t0, config)


def score(model: BaselineModel, dataset: Dataset) -> np.ndarray:
    """Confidence scores in [0, 1]; dropout is inactive at inference."""
    return model.net.predict_proba(dataset.X)


def predicted_labels(scores, t0: float = 0.5) -> np.ndarray:
    if not 0.0 < t0 < 1.0:
        raise DomainError("t0 must lie in (0, 1)")
    return (np.asarray(scores, dtype=float) >= t0).astype(np.int64)


@dataclass(frozen=True)
class GroupErrorRates:
    """Baseline error rate per group as exact count ratios."""

    errors: tuple
    sizes: tuple

    @property
    def rates(self) -> tuple:
        return tuple(Fraction(e, n) for e, n in zip(self.errors, self.sizes))

    def e(self, z) -> Fraction:
        return Fraction(self.errors[z], self.sizes[z])

    def e_prime(self, z, eta=0) -> Fraction:
        """``(1 + eta) * e_z`` clamped into [0, 1]."""
        val = (1 + as_fraction(eta)) * self.e(z)
        return min(max(val, Fraction(0)), Fraction(1))

    def a_prime(self, z, eta=0) -> Fraction:
        return 1 - self.e_prime(z, eta)

    def to_dict(self):
        return {"errors": list(self.errors), "sizes": list(self.sizes),
                "rates": [str(r) for r in self.rates]}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["errors"]), tuple(d["sizes"]))


def group_error_rates(dataset: Dataset, pred_labels) -> GroupErrorRates:
    pred = np.asarray(pred_labels)
    if len(pred) != len(dataset):
        raise DomainError("predictions and dataset are not aligned")
    errors, sizes = [], []
    for z in range(dataset.n_groups):
        in_z = dataset.group == z
        size = int(in_z.sum())
        if size == 0:
            raise DomainError(f"group {z} is empty")
        errors.append(int(np.sum(pred[in_z] != dataset.label[in_z])))
        sizes.append(size)
    return GroupErrorRates(tuple(errors), tuple(sizes))
