"""Stage II: surrogate blocks that learn the canonical abstain and flip
decisions from (features, baseline score), and the composed FAN rule."""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from fairabstain.baseline import BaselineModel, Mlp, MlpConfig, predicted_labels
from fairabstain.errors import DomainError

BUNDLE_FORMAT_VERSION = 1
THRESHOLD = 0.5


def surrogate_inputs(X, scores) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    s = np.asarray(scores, dtype=float)
    if X.ndim != 2 or len(X) != len(s):
        raise DomainError("features must be 2-D and aligned with scores")
    return np.hstack([X, s[:, None]])


def balanced_weights(labels) -> np.ndarray:
    """Per-sample weights giving each present class equal total weight."""
    y = np.asarray(labels)
    w = np.ones(len(y))
    classes = np.unique(y)
    for c in classes:
        mask = y == c
        w[mask] = len(y) / (len(classes) * mask.sum())
    return w


@dataclass
class SurrogateModel:
    """Binary classifier over ``[x, s]``; ``constant`` replaces the network
    when training saw a single class."""

    net: Optional[Mlp]
    feature_dim: int
    constant: Optional[int] = None
    config: Optional[MlpConfig] = None
    class_weighted: bool = True
    train_accuracy: Optional[float] = None

    def predict_proba(self, X, scores) -> np.ndarray:
        Z = surrogate_inputs(X, scores)
        if Z.shape[1] != self.feature_dim + 1:
            raise DomainError(f"expected {self.feature_dim} features, got {Z.shape[1] - 1}")
        if self.constant is not None:
            return np.full(len(Z), float(self.constant))
        return self.net.predict_proba(Z)

    def predict(self, X, scores) -> np.ndarray:
        return (self.predict_proba(X, scores) >= THRESHOLD).astype(np.int64)

    @property
    def loss_history(self) -> List[float]:
        return [] if self.net is None else list(self.net.loss_history)

    def to_dict(self):
        return {
            "kind": "surrogate",
            "format_version": BUNDLE_FORMAT_VERSION,
            "feature_dim": self.feature_dim,
            "constant": self.constant,
            "class_weighted": self.class_weighted,
            "train_accuracy": self.train_accuracy,
            "config": self.config.to_dict() if self.config else None,
            "net": self.net.to_dict() if self.net is not None else None,
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format_version") != BUNDLE_FORMAT_VERSION:
            raise DomainError(f"unsupported surrogate format version {d.get('format_version')!r}")
        net = Mlp.from_dict(d["net"]) if d.get("net") else None
        cfg = MlpConfig(**d["config"]) if d.get("config") else None
        return cls(net, d["feature_dim"], d.get("constant"), cfg, d.get("class_weighted", True),
                   d.get("train_accuracy"))


def _train(X, scores, labels, config: MlpConfig, class_weighted: bool, what: str) -> SurrogateModel:
    Z = surrogate_inputs(X, scores)
    y = np.asarray(labels, dtype=np.int64)
    if len(y) != len(Z):
        raise DomainError(f"{what} labels are not aligned with the inputs")
    dim = Z.shape[1] - 1
    classes = np.unique(y)
    if len(classes) < 2:
        const = int(classes[0]) if len(classes) else 1
        warnings.warn(f"{what} labels contain a single class; using a constant {const} model", stacklevel=3)
        return SurrogateModel(None, dim, const, config, class_weighted, 1.0 if len(y) else None)
    rng = np.random.default_rng(config.seed)
    net = Mlp.init(Z.shape[1], config, rng)
    net.fit(Z, y, config, sample_weight=balanced_weights(y) if class_weighted else None, rng=rng)
    return SurrogateModel(net, dim, None, config, class_weighted, net.train_accuracy)


def train_ab(X, scores, omega, config: MlpConfig = MlpConfig(), class_weighted: bool = True) -> SurrogateModel:
    """Abstention block: predicts omega (1 = answer, 0 = abstain)."""
    return _train(X, scores, omega, config, class_weighted, "abstention")


def train_fb(X, scores, flip, omega=None, config: MlpConfig = MlpConfig(), class_weighted: bool = True,
             include_abstained: bool = False) -> SurrogateModel:
    """Flip block: predicts f. With ``omega`` given, abstained samples are
    dropped unless ``include_abstained``."""
    X = np.asarray(X, dtype=float)
    scores = np.asarray(scores, dtype=float)
    flip = np.asarray(flip)
    if omega is not None and not include_abstained:
        keep = np.asarray(omega) == 1
        X, scores, flip = X[keep], scores[keep], flip[keep]
    return _train(X, scores, flip, config, class_weighted, "flip")


@dataclass(frozen=True)
class FanOutput:
    abstain: bool
    label: Optional[int] = None

    def __post_init__(self):
        if self.abstain != (self.label is None):
            raise DomainError("a prediction carries a label exactly when it does not abstain")

    def __str__(self):
        return "Abstain" if self.abstain else f"Predict({self.label})"


ABSTAIN = FanOutput(True)


def _digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


@dataclass
class FanModel:
    baseline: BaselineModel
    ab: SurrogateModel
    fb: SurrogateModel

    @property
    def t0(self):
        return self.baseline.t0

    def manifest(self):
        return {
            "format_version": BUNDLE_FORMAT_VERSION,
            "t0": self.t0,
            "files": {"baseline": "baseline.json", "ab": "ab.json", "fb": "fb.json"},
            "config_hashes": {name: _digest(m.config.to_dict() if m.config else None)
                              for name, m in (("baseline", self.baseline), ("ab", self.ab), ("fb", self.fb))},
        }

    def save(self, directory):
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        (d / "baseline.json").write_text(json.dumps(self.baseline.to_dict()))
        (d / "ab.json").write_text(json.dumps(self.ab.to_dict()))
        (d / "fb.json").write_text(json.dumps(self.fb.to_dict()))
        (d / "manifest.json").write_text(json.dumps(self.manifest(), indent=2, sort_keys=True))

    @classmethod
    def load(cls, directory):
        d = Path(directory)
        manifest = json.loads((d / "manifest.json").read_text())
        if manifest.get("format_version") != BUNDLE_FORMAT_VERSION:
            raise DomainError(f"unsupported bundle version {manifest.get('format_version')!r}")
        files = manifest["files"]
        fan = cls(BaselineModel.load(d / files["baseline"]),
                  SurrogateModel.from_dict(json.loads((d / files["ab"]).read_text())),
                  SurrogateModel.from_dict(json.loads((d / files["fb"]).read_text())))
        if fan.t0 != manifest["t0"]:
            raise DomainError("manifest threshold does not match the baseline model")
        return fan


def fan_decisions(fan: FanModel, X):
    """Arrays ``(omega, flip, base_pred)``; flip is 0 wherever omega is 0."""
    X = np.asarray(X, dtype=float)
    s = fan.baseline.net.predict_proba(X)
    base = predicted_labels(s, fan.t0)
    omega = fan.ab.predict(X, s)
    flip = np.zeros(len(X), dtype=np.int64)
    kept = omega == 1
    if kept.any():
        flip[kept] = fan.fb.predict(X[kept], s[kept])
    return omega, flip, base


def fan_predict(fan: FanModel, X) -> List[FanOutput]:
    """Final outcome per row of ``X``: abstain when the abstention block says
    0, otherwise the baseline label, inverted when the flip block says 1."""
    omega, flip, base = fan_decisions(fan, X)
    return [ABSTAIN if w == 0 else FanOutput(False, int(b ^ f)) for w, f, b in zip(omega, flip, base)]


def training_curves(model) -> List[float]:
    """Per-epoch training loss of a surrogate or baseline model."""
    net = getattr(model, "net", None)
    return [] if net is None else list(net.loss_history)


def curve_summary(curves: Sequence[Sequence[float]]):
    """Per-epoch mean and standard deviation across runs of equal length."""
    if len({len(c) for c in curves}) > 1:
        raise DomainError("curves must share the same length")
    arr = np.asarray(curves, dtype=float)
    if arr.ndim != 2:
        raise DomainError("curves must share the same length")
    return arr.mean(axis=0), arr.std(axis=0)
