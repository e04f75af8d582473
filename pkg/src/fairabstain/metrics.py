"""Evaluation of decisions: fairness gaps over full groups, accuracy over
non-abstained samples, abstention rates and no-harm margins.

Everything is computed per sample from final outcomes (abstain / 0 / 1),
without the cell reduction, so it can cross-check the solver.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np

from fairabstain.baseline import GroupErrorRates
from fairabstain.cells import DecisionVector
from fairabstain.errors import DomainError

UNDEFINED = "undefined"
KINDS = ("DP", "TPR", "TNR")


def _outcomes(outputs, n):
    """Per-sample code: -1 abstain, else the predicted label."""
    if isinstance(outputs, DecisionVector):
        codes = np.where(outputs.omega == 1, outputs.y_hat, -1)
    else:
        codes = np.array([-1 if o is None or getattr(o, "abstain", False) else int(getattr(o, "label", o))
                          for o in outputs], dtype=np.int64)
    if len(codes) != n:
        raise DomainError(f"{len(codes)} outputs for {n} samples")
    return codes.astype(np.int64)


def _ratio(num, den):
    return Fraction(num, den) if den else None


@dataclass
class GroupReport:
    size: int
    abstained: int
    errors: int
    accuracy: Optional[Fraction]
    abstention_rate: Fraction
    label_abstention_rate: Dict[int, Optional[Fraction]]
    rates: Dict[str, Optional[Fraction]]
    no_harm_bound: Optional[Fraction] = None

    @property
    def error_rate(self):
        return None if self.accuracy is None else 1 - self.accuracy

    @property
    def no_harm_margin(self):
        """Allowed minus actual error rate among non-abstained samples."""
        if self.no_harm_bound is None or self.accuracy is None:
            return None
        return self.no_harm_bound - self.error_rate


@dataclass
class EvalReport:
    groups: List[GroupReport]
    disparity: Dict[tuple, Optional[Fraction]]  # (kind, z, z') with z < z'
    eod_average: Dict[tuple, Optional[Fraction]] = field(default_factory=dict)  # (z, z')

    def max_disparity(self, kind) -> Optional[Fraction]:
        if kind == "EOd":
            vals = list(self.eod_average.values())
        else:
            vals = [v for (k, *_), v in self.disparity.items() if k == kind]
        if not vals or any(v is None for v in vals):
            return None
        return max(vals)

    def to_dict(self):
        def enc(x):
            return UNDEFINED if x is None else str(x)

        return {
            "groups": [{
                "size": g.size,
                "abstained": g.abstained,
                "errors": g.errors,
                "accuracy": enc(g.accuracy),
                "abstention_rate": enc(g.abstention_rate),
                "label_abstention_rate": {str(y): enc(v) for y, v in g.label_abstention_rate.items()},
                "rates": {k: enc(v) for k, v in g.rates.items()},
                "no_harm_margin": enc(g.no_harm_margin),
            } for g in self.groups],
            "disparity": {f"{k}({z},{w})": enc(v) for (k, z, w), v in sorted(self.disparity.items())},
            "eod_average": {f"({z},{w})": enc(v) for (z, w), v in sorted(self.eod_average.items())},
        }

    def csv_row(self) -> Dict[str, object]:
        """Flat floats for sweep aggregation (blank when undefined)."""
        def num(x):
            return "" if x is None else float(x)

        row = {}
        for kind in ("DP", "TPR", "TNR", "EOd"):
            row[f"max_disparity_{kind}"] = num(self.max_disparity(kind))
        for z, g in enumerate(self.groups):
            row[f"accuracy_{z}"] = num(g.accuracy)
            row[f"abstention_rate_{z}"] = num(g.abstention_rate)
        accs = [g.accuracy for g in self.groups]
        row["min_accuracy"] = "" if any(a is None for a in accs) else float(min(accs))
        return row


def evaluate(groups, labels, outputs, errors: Optional[GroupErrorRates] = None, eta=0,
             n_groups: Optional[int] = None) -> EvalReport:
    """Report for final outcomes.

    ``outputs`` is a :class:`DecisionVector` or a sequence whose entries are
    ``None`` (abstain), 0/1, or objects with a ``label`` attribute. With
    ``errors`` the no-harm bound ``clamp((1+eta_z) e_z)`` is attached per
    group.
    """
    g = np.asarray(groups, dtype=np.int64)
    y = np.asarray(labels, dtype=np.int64)
    if len(g) != len(y):
        raise DomainError("groups and labels are not aligned")
    out = _outcomes(outputs, len(g))
    G = n_groups if n_groups is not None else (int(g.max()) + 1 if len(g) else 0)
    etas = eta if isinstance(eta, (list, tuple)) else [eta] * G

    reports = []
    for z in range(G):
        in_z = g == z
        n = int(in_z.sum())
        if n == 0:
            raise DomainError(f"empty stratum: group {z} has no samples")
        kept = in_z & (out >= 0)
        abst = in_z & (out < 0)
        n_kept = int(kept.sum())
        wrong = int((kept & (out != y)).sum())
        lab_ab = {lab: _ratio(int((abst & (y == lab)).sum()), int((in_z & (y == lab)).sum())) for lab in (0, 1)}
        rates = {
            "DP": _ratio(int((in_z & (out == 1)).sum()), n),
            "TPR": _ratio(int((in_z & (y == 1) & (out == 1)).sum()), int((in_z & (y == 1)).sum())),
            "TNR": _ratio(int((in_z & (y == 0) & (out == 0)).sum()), int((in_z & (y == 0)).sum())),
        }
        bound = errors.e_prime(z, etas[z]) if errors is not None else None
        reports.append(GroupReport(n, int(abst.sum()), wrong, _ratio(n_kept - wrong, n_kept),
                                   Fraction(int(abst.sum()), n), lab_ab, rates, bound))

    disparity = {}
    for kind in KINDS:
        for z, w in itertools.combinations(range(G), 2):
            a, b = reports[z].rates[kind], reports[w].rates[kind]
            disparity[(kind, z, w)] = None if a is None or b is None else abs(a - b)
    eod = {}
    for z, w in itertools.combinations(range(G), 2):
        tp, tn = disparity[("TPR", z, w)], disparity[("TNR", z, w)]
        eod[(z, w)] = None if tp is None or tn is None else (tp + tn) / 2
    return EvalReport(reports, disparity, eod)


def evaluate_dataset(dataset, outputs, errors: Optional[GroupErrorRates] = None, eta=0) -> EvalReport:
    return evaluate(dataset.group, dataset.label, outputs, errors, eta, dataset.n_groups)


@dataclass
class Comparison:
    disparity_reduction: Dict[str, Optional[Fraction]]
    accuracy_increase: List[Optional[Fraction]]

    @property
    def min_accuracy_increase(self) -> Optional[Fraction]:
        if any(a is None for a in self.accuracy_increase) or not self.accuracy_increase:
            return None
        return min(self.accuracy_increase)

    def to_dict(self):
        def enc(x):
            return UNDEFINED if x is None else str(x)
        return {
            "disparity_reduction": {k: enc(v) for k, v in self.disparity_reduction.items()},
            "accuracy_increase": [enc(a) for a in self.accuracy_increase],
            "min_accuracy_increase": enc(self.min_accuracy_increase),
        }

    def csv_row(self):
        row = {f"disparity_reduction_{k}": ("" if v is None else float(v))
               for k, v in self.disparity_reduction.items()}
        for z, a in enumerate(self.accuracy_increase):
            row[f"accuracy_increase_{z}"] = "" if a is None else float(a)
        m = self.min_accuracy_increase
        row["min_accuracy_increase"] = "" if m is None else float(m)
        return row


def compare_to_baseline(report: EvalReport, baseline: EvalReport) -> Comparison:
    """Signed improvements of ``report`` over ``baseline``: positive
    disparity reduction and positive accuracy increase are better."""
    if len(report.groups) != len(baseline.groups):
        raise DomainError("reports cover different groups")
    red = {}
    for kind in ("DP", "TPR", "TNR", "EOd"):
        a, b = report.max_disparity(kind), baseline.max_disparity(kind)
        red[kind] = None if a is None or b is None else b - a
    inc = []
    for r, b in zip(report.groups, baseline.groups):
        inc.append(None if r.accuracy is None or b.accuracy is None else r.accuracy - b.accuracy)
    return Comparison(red, inc)
