"""Cell reduction: the IP only sees (group, label, baseline prediction), so
per-cell decision counts are sufficient statistics for every objective and
constraint value."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, NamedTuple, Tuple

import numpy as np

from fairabstain.errors import DomainError

ABSTAIN_FIRST = ("abstain", "flip", "keep")
PSEUDOCODE_ORDER = ("abstain", "keep", "flip")


class CellKey(NamedTuple):
    group: int
    label: int
    pred: int

    @property
    def baseline_wrong(self) -> bool:
        return self.label != self.pred

    def __str__(self):
        return f"z{self.group}_y{self.label}_b{self.pred}"

    @classmethod
    def parse(cls, text):
        z, y, b = text.split("_")
        return cls(int(z[1:]), int(y[1:]), int(b[1:]))


@dataclass(frozen=True)
class CellTable:
    """Non-empty cells in key order; each holds sample indices sorted by
    ascending baseline score, ties broken by original index."""

    cells: Dict[CellKey, Tuple[int, ...]]
    n_samples: int
    n_groups: int

    def keys(self):
        return list(self.cells)

    def size(self, key) -> int:
        return len(self.cells.get(key, ()))

    def __iter__(self):
        return iter(self.cells.items())

    def index_of(self, key) -> int:
        return self.keys().index(key)

    def group_keys(self, z):
        return [k for k in self.cells if k.group == z]

    def group_size(self, z) -> int:
        return sum(len(v) for k, v in self.cells.items() if k.group == z)

    def label_size(self, z, y) -> int:
        return sum(len(v) for k, v in self.cells.items() if k.group == z and k.label == y)


def build_cells(groups, labels, pred_labels, scores, n_groups=None) -> CellTable:
    groups = np.asarray(groups, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    pred = np.asarray(pred_labels, dtype=np.int64)
    scores = np.asarray(scores, dtype=float)
    n = len(groups)
    if not (len(labels) == len(pred) == len(scores) == n):
        raise DomainError("groups, labels, predictions and scores must be aligned")
    if n_groups is None:
        n_groups = int(groups.max()) + 1 if n else 0
    # lexsort: last key is primary
    order = np.lexsort((np.arange(n), scores, pred, labels, groups))
    cells: Dict[CellKey, list] = {}
    for i in order:
        key = CellKey(int(groups[i]), int(labels[i]), int(pred[i]))
        cells.setdefault(key, []).append(int(i))
    ordered = {k: tuple(cells[k]) for k in sorted(cells)}
    return CellTable(ordered, n, n_groups)


def build_cells_for(dataset, pred_labels, scores) -> CellTable:
    return build_cells(dataset.group, dataset.label, pred_labels, scores, dataset.n_groups)


@dataclass(frozen=True)
class Count:
    abstain: int = 0
    keep: int = 0
    flip: int = 0
    abstain_flip: int = 0

    @property
    def total(self):
        return self.abstain + self.keep + self.flip

    @property
    def nonabstained(self):
        return self.keep + self.flip


class CellCounts(dict):
    """Mapping ``CellKey -> Count``; missing cells count as all-zero."""

    def __missing__(self, key):
        return Count()

    def validate(self, cells: CellTable):
        for key, c in self.items():
            if min(c.abstain, c.keep, c.flip, c.abstain_flip) < 0:
                raise DomainError(f"negative count in cell {key}")
            if c.total != cells.size(key):
                raise DomainError(f"cell {key}: counts sum to {c.total}, cell holds {cells.size(key)}")
            if c.abstain_flip > c.abstain:
                raise DomainError(f"cell {key}: abstain_flip exceeds abstain")
        for key in cells.keys():
            if key not in self:
                raise DomainError(f"cell {key} has no counts")
        return self

    def to_dict(self):
        return {str(k): {"abstain": c.abstain, "keep": c.keep, "flip": c.flip,
                         "abstain_flip": c.abstain_flip} for k, c in sorted(self.items())}

    @classmethod
    def from_dict(cls, d):
        return cls({CellKey.parse(k): Count(**v) for k, v in d.items()})


@dataclass(frozen=True)
class DecisionVector:
    """Per-sample abstention (``omega=0`` abstains) and flip indicators."""

    omega: np.ndarray
    flip: np.ndarray
    base_pred: np.ndarray

    def __post_init__(self):
        for name in ("omega", "flip", "base_pred"):
            a = np.array(getattr(self, name), dtype=np.int64, copy=True)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def __len__(self):
        return len(self.omega)

    @property
    def y_hat(self) -> np.ndarray:
        """Label each sample would receive, abstained or not."""
        return self.base_pred ^ self.flip

    def outputs(self):
        """Final outcome per sample: ``None`` for abstain, else 0/1."""
        y = self.y_hat
        return [int(y[i]) if self.omega[i] else None for i in range(len(self))]

    def __eq__(self, other):
        return (isinstance(other, DecisionVector) and np.array_equal(self.omega, other.omega)
                and np.array_equal(self.flip, other.flip) and np.array_equal(self.base_pred, other.base_pred))

    def to_dict(self):
        return {"omega": self.omega.tolist(), "flip": self.flip.tolist(), "base_pred": self.base_pred.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["omega"], d["flip"], d["base_pred"])


def counts_objective(counts: CellCounts, cells: CellTable) -> int:
    """Errors among non-abstained samples: kept mistakes plus flipped hits."""
    counts.validate(cells)
    return sum(c.keep if k.baseline_wrong else c.flip for k, c in counts.items())


def decisions_from_counts(counts: CellCounts, cells: CellTable, order=ABSTAIN_FIRST) -> DecisionVector:
    """Assign decisions within each cell by ascending score in ``order``.

    The lowest-score ``abstain_flip`` abstained samples also get ``f=1``.
    """
    counts.validate(cells)
    if sorted(order) != sorted(ABSTAIN_FIRST):
        raise DomainError(f"order must be a permutation of {ABSTAIN_FIRST}")
    n = cells.n_samples
    omega = np.ones(n, dtype=np.int64)
    flip = np.zeros(n, dtype=np.int64)
    pred = np.zeros(n, dtype=np.int64)
    for key, members in cells:
        c = counts[key]
        pred[list(members)] = key.pred
        start = 0
        for kind in order:
            block = members[start:start + getattr(c, kind)]
            start += len(block)
            if kind == "abstain":
                omega[list(block)] = 0
                flip[list(block[:c.abstain_flip])] = 1
            elif kind == "flip":
                flip[list(block)] = 1
    return DecisionVector(omega, flip, pred)


def counts_from_decisions(decisions: DecisionVector, cells: CellTable) -> CellCounts:
    if len(decisions) != cells.n_samples:
        raise DomainError("decisions and cells are not aligned")
    out = CellCounts()
    for key, members in cells:
        idx = np.array(members, dtype=np.int64)
        w = decisions.omega[idx]
        f = decisions.flip[idx]
        out[key] = Count(
            abstain=int(np.sum(w == 0)),
            keep=int(np.sum((w == 1) & (f == 0))),
            flip=int(np.sum((w == 1) & (f == 1))),
            abstain_flip=int(np.sum((w == 0) & (f == 1))),
        )
    return out
