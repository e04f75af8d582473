"""Figures written next to CSV/JSON reports (non-interactive backend)."""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def heatmap(path, rows: Sequence[Dict], x: str, y: str, value: str, title: str = "") -> Path:
    """Grid heatmap of ``value`` over distinct ``x`` and ``y`` entries of
    ``rows`` (dicts, e.g. parsed sweep CSV). Missing cells stay blank."""
    xs = sorted({float(r[x]) for r in rows})
    ys = sorted({float(r[y]) for r in rows})
    grid = np.full((len(ys), len(xs)), np.nan)
    for r in rows:
        v = r.get(value, "")
        if v in ("", None):
            continue
        grid[ys.index(float(r[y])), xs.index(float(r[x]))] = float(v)
    fig, ax = plt.subplots(figsize=(1.2 + 0.8 * max(len(xs), 1), 1.0 + 0.6 * max(len(ys), 1)))
    im = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis")
    ax.set_xticks(range(len(xs)), [f"{v:g}" for v in xs])
    ax.set_yticks(range(len(ys)), [f"{v:g}" for v in ys])
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    ax.set_title(title or value)
    for i in range(len(ys)):
        for j in range(len(xs)):
            if not np.isnan(grid[i, j]):
                ax.text(j, i, f"{grid[i, j]:.3g}", ha="center", va="center", fontsize=7, color="w")
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path)
    plt.close(fig)
    return path


def loss_curves(path, curves: Dict[str, Sequence[Sequence[float]]], title: str = "training loss") -> Path:
    """Mean loss per epoch with a one-std band, one line per named model."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for name, runs in curves.items():
        runs = [r for r in runs if len(r)]
        if not runs:
            continue
        arr = np.asarray(runs, dtype=float)
        mean, std = arr.mean(axis=0), arr.std(axis=0)
        epochs = np.arange(1, len(mean) + 1)
        ax.plot(epochs, mean, label=name)
        ax.fill_between(epochs, mean - std, mean + std, alpha=0.25)
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.set_title(title)
    if ax.lines:
        ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path)
    plt.close(fig)
    return path
