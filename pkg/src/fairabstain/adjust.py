"""Prediction Adjustment: canonical within-cell assignment of decisions by
baseline confidence, plus a duplicate-consistency measure."""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction

import numpy as np

from fairabstain.cells import ABSTAIN_FIRST, PSEUDOCODE_ORDER, CellCounts, CellTable, Count, DecisionVector, \
    counts_from_decisions, decisions_from_counts

__all__ = ["ABSTAIN_FIRST", "PSEUDOCODE_ORDER", "prediction_adjustment", "consistency_rate"]


def prediction_adjustment(decisions: DecisionVector, cells: CellTable, order=ABSTAIN_FIRST) -> DecisionVector:
    """Reassign each cell's abstain/flip/keep counts to samples in ascending
    score order (the order stored in ``cells``).

    Abstained samples end with ``f=0``. With the default order the lowest
    scores abstain, the next ones flip and the rest keep; pass
    ``PSEUDOCODE_ORDER`` to keep before flipping.
    """
    counts = counts_from_decisions(decisions, cells)
    cleared = CellCounts({k: Count(c.abstain, c.keep, c.flip, 0) for k, c in counts.items()})
    return decisions_from_counts(cleared, cells, order)


def consistency_rate(decisions: DecisionVector, X, groups, component: str = "both") -> Fraction:
    """Share of samples in duplicate groups whose decision matches the
    group's majority decision.

    A duplicate group is a set of two or more samples with identical
    features and group. ``component`` chooses what must agree: ``"both"``
    (omega and flip), ``"omega"`` or ``"flip"``. Returns 1 when no
    duplicates exist.
    """
    if component not in ("both", "omega", "flip"):
        raise ValueError("component must be 'both', 'omega' or 'flip'")
    X = np.ascontiguousarray(np.asarray(X, dtype=float))
    groups = np.asarray(groups)
    buckets = defaultdict(list)
    for i in range(len(X)):
        buckets[(X[i].tobytes(), int(groups[i]))].append(i)
    total = agree = 0
    for members in buckets.values():
        if len(members) < 2:
            continue
        tally = defaultdict(int)
        for i in members:
            w, f = int(decisions.omega[i]), int(decisions.flip[i])
            key = {"both": (w, f), "omega": w, "flip": f}[component]
            tally[key] += 1
        total += len(members)
        agree += max(tally.values())
    return Fraction(1) if total == 0 else Fraction(agree, total)
