"""Tabular datasets: CSV loading, synthetic populations and stratified splits."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from fairabstain.errors import DomainError, EmptyInputError, ParseError, SchemaError


class Sample(NamedTuple):
    features: np.ndarray
    group: int
    label: int


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Samples stored column-wise: ``X`` (N x d), ``group`` and ``label`` (N,).

    Arrays are copied and made read-only on construction.
    """

    X: np.ndarray
    group: np.ndarray
    label: np.ndarray
    n_groups: int
    feature_names: tuple = ()
    group_names: tuple = ()

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1) if len(X) else X.reshape(0, 0)
        object.__setattr__(self, "X", _frozen(X, float))
        object.__setattr__(self, "group", _frozen(self.group, np.int64))
        object.__setattr__(self, "label", _frozen(self.label, np.int64))
        n = len(self.group)
        if self.X.shape[0] != n or len(self.label) != n:
            raise DomainError("features, groups and labels must have the same length")
        if n and (self.group.min() < 0 or self.group.max() >= self.n_groups):
            raise DomainError(f"group ids must lie in [0, {self.n_groups})")
        if n and not np.isin(self.label, (0, 1)).all():
            raise DomainError("labels must be 0 or 1")
        if n:
            missing = set(range(self.n_groups)) - set(np.unique(self.group).tolist())
            if missing:
                raise DomainError(f"declared groups without samples: {sorted(missing)}")
        if not self.feature_names:
            object.__setattr__(self, "feature_names", tuple(f"x{i}" for i in range(self.feature_dim)))
        if not self.group_names:
            object.__setattr__(self, "group_names", tuple(str(z) for z in range(self.n_groups)))

    def __len__(self):
        return len(self.group)

    def __getitem__(self, i) -> Sample:
        return Sample(self.X[i], int(self.group[i]), int(self.label[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def feature_dim(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.X[idx], self.group[idx], self.label[idx], self.n_groups,
                       self.feature_names, self.group_names)

    def same_as(self, other: "Dataset") -> bool:
        return (
            self.n_groups == other.n_groups
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.group, other.group)
            and np.array_equal(self.label, other.label)
        )

    def to_bytes(self) -> bytes:
        return self.X.tobytes() + self.group.tobytes() + self.label.tobytes()


@dataclass(frozen=True)
class GroupStats:
    """Exact per-group counts; rates are :class:`Fraction` ratios of counts."""

    sizes: tuple
    label_counts: tuple  # per group: (N_{z,0}, N_{z,1})
    n: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n", sum(self.sizes))

    @property
    def n_groups(self) -> int:
        return len(self.sizes)

    @property
    def qualification_rates(self) -> tuple:
        return tuple(Fraction(c[1], s) for c, s in zip(self.label_counts, self.sizes))

    def tau(self, z) -> Fraction:
        return Fraction(self.label_counts[z][1], self.sizes[z])

    def to_dict(self):
        return {
            "sizes": list(self.sizes),
            "label_counts": [list(c) for c in self.label_counts],
            "qualification_rates": [str(t) for t in self.qualification_rates],
        }


def group_stats(dataset: Dataset) -> GroupStats:
    if len(dataset) == 0:
        raise EmptyInputError("group_stats needs a non-empty dataset")
    sizes, counts = [], []
    for z in range(dataset.n_groups):
        in_z = dataset.group == z
        pos = int(dataset.label[in_z].sum())
        size = int(in_z.sum())
        sizes.append(size)
        counts.append((size - pos, pos))
    return GroupStats(tuple(sizes), tuple(counts))


# -- CSV -------------------------------------------------------------------


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def _category_order(values):
    uniq = set(values)
    if all(_is_number(v) for v in uniq):
        return sorted(uniq, key=lambda v: (float(v), v))
    return sorted(uniq)


def load_csv(path, feature_cols: Sequence[str], group_col: str, label_col: str,
             categorical_cols: Sequence[str] = (), minmax: bool = False) -> Dataset:
    """Read a UTF-8 CSV with a header row.

    Columns listed in ``categorical_cols`` are one-hot encoded with categories
    in lexicographic order; every other feature column must parse as a float.
    Group values are mapped to contiguous ids in sorted order (numeric sort
    when every value parses as a number).
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInputError(f"{path} is empty") from None
        rows = [r for r in reader if r]
    if not rows:
        raise EmptyInputError(f"{path} has a header but no rows")

    col = {name: i for i, name in enumerate(header)}
    for name in [*feature_cols, group_col, label_col, *categorical_cols]:
        if name not in col:
            raise SchemaError(f"column {name!r} not in header {header}")
    categorical = set(categorical_cols)
    if not categorical <= set(feature_cols):
        raise SchemaError("categorical columns must also be feature columns")

    # Row numbers in errors count the header as row 1.
    for r, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise ParseError(r, f"expected {len(header)} cells, got {len(row)}")

    labels = []
    for r, row in enumerate(rows, start=2):
        raw = row[col[label_col]].strip()
        try:
            value = float(raw)
        except ValueError:
            value = None
        if value not in (0.0, 1.0):
            raise ParseError(r, f"label {raw!r} is not 0 or 1")
        labels.append(int(value))

    group_raw = [row[col[group_col]].strip() for row in rows]
    group_levels = _category_order(group_raw)
    group_id = {g: i for i, g in enumerate(group_levels)}
    groups = [group_id[g] for g in group_raw]

    columns, names = [], []
    for name in feature_cols:
        raw = [row[col[name]].strip() for row in rows]
        if name in categorical:
            for level in sorted(set(raw)):
                columns.append(np.array([1.0 if v == level else 0.0 for v in raw]))
                names.append(f"{name}={level}")
            continue
        values = []
        for r, v in enumerate(raw, start=2):
            try:
                values.append(float(v))
            except ValueError:
                raise ParseError(r, f"column {name!r}: cannot parse {v!r} as a number") from None
        columns.append(np.array(values))
        names.append(name)

    X = np.column_stack(columns) if columns else np.zeros((len(rows), 0))
    if minmax and X.size:
        lo, hi = X.min(axis=0), X.max(axis=0)
        span = np.where(hi > lo, hi - lo, 1.0)
        X = (X - lo) / span
    return Dataset(X, groups, labels, len(group_levels), tuple(names), tuple(group_levels))


def write_csv(dataset: Dataset, path) -> None:
    """Write features, ``group`` and ``label`` columns; floats use ``repr`` so
    :func:`load_csv` reads back identical values."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([*dataset.feature_names, "group", "label"])
        for i in range(len(dataset)):
            w.writerow([*(repr(float(v)) for v in dataset.X[i]), int(dataset.group[i]), int(dataset.label[i])])


# -- synthetic ---------------------------------------------------------------


def _half_up(x):
    return int(math.floor(x + 0.5 + 1e-12))


def gen_synthetic(seed: int, n_groups: int, sizes: Sequence[int], tau: Sequence[float],
                  score_noise: float = 1.0, feature_dim: int = 4,
                  group_shift: float = 0.5) -> Dataset:
    """Gaussian class-conditional features with exact per-group label counts.

    Group ``z`` gets exactly ``round(tau[z] * sizes[z])`` positives. The first
    feature direction carries the label signal with unit separation; other
    directions are noise. ``score_noise`` scales the within-class spread, so
    larger values make a learned score less informative. ``group_shift``
    offsets the mean of each group along the second feature.
    """
    if len(sizes) != n_groups or len(tau) != n_groups:
        raise DomainError("sizes and tau need one entry per group")
    for t in tau:
        if not 0.0 <= t <= 1.0:
            raise DomainError(f"qualification rate {t} outside [0, 1]")
    for s in sizes:
        if s < 1:
            raise DomainError("every group needs at least one sample")
    if feature_dim < 1:
        raise DomainError("feature_dim must be positive")

    rng = np.random.default_rng(seed)
    X_parts, g_parts, y_parts = [], [], []
    for z, (size, t) in enumerate(zip(sizes, tau)):
        n_pos = _half_up(t * size)
        y = np.zeros(size, dtype=np.int64)
        y[:n_pos] = 1
        y = y[rng.permutation(size)]
        mean = np.zeros((size, feature_dim))
        mean[:, 0] = np.where(y == 1, 1.0, -1.0)
        if feature_dim > 1:
            mean[:, 1] = group_shift * z
        X = mean + score_noise * rng.standard_normal((size, feature_dim))
        X_parts.append(X)
        g_parts.append(np.full(size, z, dtype=np.int64))
        y_parts.append(y)
    X = np.concatenate(X_parts)
    g = np.concatenate(g_parts)
    y = np.concatenate(y_parts)
    order = rng.permutation(len(g))
    return Dataset(X[order], g[order], y[order], n_groups)


# -- splits ------------------------------------------------------------------


def _largest_remainder(total, fractions):
    raw = [total * f for f in fractions]
    base = [int(math.floor(r + 1e-12)) for r in raw]
    short = total - sum(base)
    order = sorted(range(len(raw)), key=lambda k: (-(raw[k] - base[k]), k))
    for k in order[:short]:
        base[k] += 1
    return base


def split(dataset: Dataset, fractions: Sequence[float], seed: int):
    """Stratified partition by (group, label).

    Split sizes are the largest-remainder rounding of ``N * fraction``; every
    stratum contributes within one sample of its proportional share.
    """
    fractions = [float(f) for f in fractions]
    if any(f <= 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise DomainError("fractions must be positive and sum to 1")
    n = len(dataset)
    K = len(fractions)
    targets = _largest_remainder(n, fractions)

    rng = np.random.default_rng(seed)
    strata = []
    for z in range(dataset.n_groups):
        for y in (0, 1):
            idx = np.flatnonzero((dataset.group == z) & (dataset.label == y))
            if len(idx):
                strata.append(rng.permutation(idx))

    alloc = [[int(math.floor(len(s) * f + 1e-12)) for f in fractions] for s in strata]
    need_split = [targets[k] - sum(a[k] for a in alloc) for k in range(K)]
    need_stratum = [len(s) - sum(a) for s, a in zip(strata, alloc)]
    rem = [[len(s) * f - a[k] for k, f in enumerate(fractions)] for s, a in zip(strata, alloc)]
    # Gale-Ryser style greedy: strata with the largest deficit first, each
    # extra unit to the distinct split with the largest outstanding need.
    for s in sorted(range(len(strata)), key=lambda s: (-need_stratum[s], s)):
        for _ in range(need_stratum[s]):
            candidates = [k for k in range(K) if need_split[k] > 0]
            fresh = [k for k in candidates if alloc[s][k] == math.floor(len(strata[s]) * fractions[k] + 1e-12)]
            pool = fresh or candidates
            k = max(pool, key=lambda k: (need_split[k], rem[s][k], -k))
            alloc[s][k] += 1
            need_split[k] -= 1

    parts = [[] for _ in range(K)]
    for s, a in zip(strata, alloc):
        start = 0
        for k in range(K):
            parts[k].append(s[start:start + a[k]])
            start += a[k]
            if a[k] == 0:
                warnings.warn("a (group, label) stratum is empty in one split", stacklevel=2)
    out = []
    for k in range(K):
        idx = np.sort(np.concatenate(parts[k])) if parts[k] else np.zeros(0, dtype=np.int64)
        out.append(_subset_allow_missing(dataset, idx))
    return tuple(out)


def _subset_allow_missing(dataset, idx):
    # A small split may miss a whole group; keep group ids stable anyway.
    try:
        return dataset.subset(idx)
    except DomainError:
        warnings.warn("a split lacks samples from some group", stacklevel=3)
        obj = object.__new__(Dataset)
        for name, value in (("X", dataset.X[idx]), ("group", dataset.group[idx]), ("label", dataset.label[idx])):
            a = np.array(value, copy=True)
            a.setflags(write=False)
            object.__setattr__(obj, name, a)
        object.__setattr__(obj, "n_groups", dataset.n_groups)
        object.__setattr__(obj, "feature_names", dataset.feature_names)
        object.__setattr__(obj, "group_names", dataset.group_names)
        return obj
