"""Closed-form feasibility conditions for the Stage I program, and a grid
sweep comparing them with the solver."""

from __future__ import annotations

import csv
import io
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence

from fairabstain.baseline import GroupErrorRates
from fairabstain.cells import CellTable
from fairabstain.data import GroupStats
from fairabstain.errors import DomainError
from fairabstain.exact import as_fraction, fraction_str


def _clamp01(x: Fraction) -> Fraction:
    return min(Fraction(1), max(Fraction(0), x))


@dataclass(frozen=True)
class FeasibilityInputs:
    """Population-level quantities per group plus global bounds.

    ``eta`` may be negative; the effective error bound ``(1+eta)e`` is
    clamped to [0, 1].
    """

    tau: tuple
    e: tuple
    eta: tuple
    delta: tuple
    eps: Fraction
    sigma1: Optional[Fraction] = None

    def __post_init__(self):
        n = len(self.tau)
        for name in ("e", "eta", "delta"):
            if len(getattr(self, name)) != n:
                raise DomainError(f"{name} needs one entry per group")
        object.__setattr__(self, "tau", tuple(as_fraction(v) for v in self.tau))
        object.__setattr__(self, "e", tuple(as_fraction(v) for v in self.e))
        object.__setattr__(self, "eta", tuple(as_fraction(v) for v in self.eta))
        object.__setattr__(self, "delta", tuple(as_fraction(v) for v in self.delta))
        object.__setattr__(self, "eps", as_fraction(self.eps))
        if self.sigma1 is not None:
            object.__setattr__(self, "sigma1", as_fraction(self.sigma1))
        for v in (*self.tau, *self.e, *self.delta):
            if not 0 <= v <= 1:
                raise DomainError("tau, e and delta must lie in [0, 1]")
        if self.eps < 0 or (self.sigma1 is not None and self.sigma1 < 0):
            raise DomainError("eps and sigma1 must be non-negative")

    @classmethod
    def uniform(cls, tau, e, eta=0, delta=0, eps=0, sigma1=None):
        """Per-group ``tau`` and ``e``; scalar or per-group ``eta``/``delta``."""
        n = len(tau)
        eta = tuple(eta) if isinstance(eta, (list, tuple)) else (eta,) * n
        delta = tuple(delta) if isinstance(delta, (list, tuple)) else (delta,) * n
        return cls(tuple(tau), tuple(e), eta, delta, eps, sigma1)

    @classmethod
    def from_stats(cls, stats: GroupStats, errors: GroupErrorRates, eta=0, delta=0, eps=0, sigma1=None):
        return cls.uniform(stats.qualification_rates, errors.rates, eta, delta, eps, sigma1)

    @property
    def n_groups(self):
        return len(self.tau)

    def e_prime(self, z) -> Fraction:
        return _clamp01((1 + self.eta[z]) * self.e[z])

    def a_prime(self, z) -> Fraction:
        return 1 - self.e_prime(z)

    def ordered_pairs(self):
        """``(hi, lo)`` with ``tau[hi] >= tau[lo]``, every unordered pair
        once (both orders when the rates tie)."""
        for a, b in itertools.permutations(range(self.n_groups), 2):
            if self.tau[a] >= self.tau[b]:
                yield a, b


def dp_min_delta(inputs: FeasibilityInputs, hi: int, lo: int) -> Optional[Fraction]:
    """Smallest abstention budget group ``hi`` needs for a DP-feasible
    program against group ``lo``. ``None`` means the pair never restricts
    ``delta`` (group ``hi`` may err on every kept sample)."""
    if inputs.tau[hi] < inputs.tau[lo]:
        raise DomainError(f"group {hi} must have the higher qualification rate")
    a = inputs.a_prime(hi)
    if a == 0:
        return None
    return 1 - (1 + inputs.eps + inputs.e_prime(lo) - inputs.tau[hi] + inputs.tau[lo]) / a


@dataclass(frozen=True)
class PairVerdict:
    hi: int
    lo: int
    min_delta: Optional[Fraction]
    delta: Fraction

    @property
    def ok(self):
        return self.min_delta is None or self.delta >= self.min_delta

    def describe(self):
        if self.min_delta is None:
            return f"groups ({self.hi},{self.lo}): always feasible"
        need = max(self.min_delta, Fraction(0))
        verdict = "ok" if self.ok else "infeasible"
        return (f"groups ({self.hi},{self.lo}): requires δ_{self.hi} ≥ {float(need):.3f} "
                f"(have {float(self.delta):.3f}, {verdict})")


@dataclass(frozen=True)
class DpReport:
    feasible: bool
    pairs: tuple

    def describe(self):
        return "\n".join(p.describe() for p in self.pairs) or "single group: always feasible"


def dp_feasible(inputs: FeasibilityInputs) -> DpReport:
    pairs = tuple(PairVerdict(hi, lo, dp_min_delta(inputs, hi, lo), inputs.delta[hi])
                  for hi, lo in inputs.ordered_pairs())
    return DpReport(all(p.ok for p in pairs), pairs)


def eop_feasible(inputs: FeasibilityInputs) -> bool:
    # Flipping every mistake gives TPR = 1 in each group with no abstention.
    return True


def eod_feasible(inputs: FeasibilityInputs) -> bool:
    # The same flip-all construction also gives TNR = 1 everywhere.
    return True


def dp_equal_abstention_sufficient(inputs: FeasibilityInputs) -> bool:
    """Sufficient test for DP feasibility with an equal-abstention bound on
    positives. ``False`` does not imply infeasibility.

    Note the first clause caps the lower-qualified group's budget from above.
    """
    if inputs.sigma1 is None:
        raise DomainError("sigma1 is required")
    for hi, lo in inputs.ordered_pairs():
        if inputs.delta[lo] > 2 * inputs.tau[lo] * inputs.sigma1:
            return False
        need = dp_min_delta(inputs, hi, lo)
        if need is not None and inputs.delta[hi] < need:
            return False
    return True


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction
    degenerate: bool = False

    @property
    def empty(self):
        return self.lo > self.hi

    def __contains__(self, x):
        return self.lo <= as_fraction(x) <= self.hi

    def __str__(self):
        if self.empty:
            return "empty"
        return f"[{fraction_str(self.lo)}, {fraction_str(self.hi)}]"


def eop_nontrivial_bounds(tau, e, eta=0) -> Interval:
    """Admissible abstention budgets for one group under EOp with the
    non-triviality floor at the baseline error, clipped to [0, 1].

    When ``(1+eta)e == 1`` the bound with that denominator is dropped and the
    result is flagged ``degenerate``.
    """
    tau, e, eta = as_fraction(tau), as_fraction(e), as_fraction(eta)
    ep = _clamp01((1 + eta) * e)
    extra = ep - e  # eta*e after clamping
    lows = [Fraction(0), e - tau, -extra / (2 - ep)]
    degenerate = ep == 1
    if not degenerate:
        lows.append((tau - extra - 1) / (1 - ep))
    return Interval(max(lows), min(Fraction(1), 1 - tau), degenerate)


# -- sweep --------------------------------------------------------------------------

SWEEP_COLUMNS = ("eps", "delta", "eta", "sigma", "formula_feasible", "solver_status", "objective",
                 "agreement", "error")


@dataclass
class SweepRow:
    eps: Fraction
    delta: Fraction
    eta: Fraction
    sigma: Optional[Fraction]
    formula_feasible: Optional[bool]  # None when the formula is only sufficient and fails
    solver_status: str
    objective: Optional[int]
    agreement: str  # agree | within_margin | disagree | n/a
    error: str = ""

    def as_row(self):
        def fmt(x):
            return "" if x is None else (repr(float(x)) if isinstance(x, Fraction) else str(x))
        return [fmt(self.eps), fmt(self.delta), fmt(self.eta), fmt(self.sigma),
                "" if self.formula_feasible is None else str(self.formula_feasible).lower(),
                self.solver_status, fmt(self.objective), self.agreement, self.error]


def formula_verdict(fairness, inputs: FeasibilityInputs) -> Optional[bool]:
    """Closed-form verdict; ``None`` when only a sufficient test exists and
    it does not fire."""
    if fairness == "EOp":
        return eop_feasible(inputs)
    if fairness == "EOd":
        return eod_feasible(inputs)
    if inputs.sigma1 is not None:
        return True if dp_equal_abstention_sufficient(inputs) else None
    return dp_feasible(inputs).feasible


def _boundary_distance(inputs: FeasibilityInputs) -> Fraction:
    dist = None
    for hi, lo in inputs.ordered_pairs():
        need = dp_min_delta(inputs, hi, lo)
        if need is None:
            continue
        d = abs(inputs.delta[hi] - max(need, Fraction(0)))
        dist = d if dist is None else min(dist, d)
    return dist if dist is not None else Fraction(10 ** 9)


def _sweep_point(args):
    from fairabstain.solver import ConstraintSpec, solve

    cells, stats, errors, fairness, eps, delta, eta, sigma, node_limit = args
    inputs = FeasibilityInputs.from_stats(stats, errors, eta, delta, eps,
                                          sigma if fairness == "DP" else None)
    formula = formula_verdict(fairness, inputs)
    spec = ConstraintSpec(fairness=fairness, eps=eps, delta=delta, eta=eta,
                          equal_abstention=None if sigma is None else {1: sigma})
    try:
        sol = solve(cells, stats, spec, errors, node_limit=node_limit)
    except Exception as exc:  # recorded per row, the sweep goes on
        return SweepRow(eps, delta, eta, sigma, formula, "Error", None, "n/a", str(exc))
    return SweepRow(eps, delta, eta, sigma, formula, sol.status, sol.objective,
                    agreement(fairness, inputs, formula, sol.feasible, stats))


def agreement(fairness, inputs: FeasibilityInputs, formula: Optional[bool], solver_ok: bool,
              stats: GroupStats) -> str:
    """``agree``, ``within_margin`` (DP verdicts differ but delta is within
    one sample of the boundary), ``disagree`` or ``n/a``."""
    if formula is None:
        return "n/a"
    if formula == solver_ok:
        return "agree"
    if fairness == "DP" and _boundary_distance(inputs) <= Fraction(1, min(stats.sizes)):
        return "within_margin"
    return "disagree"


def sweep_feasibility(cells: CellTable, stats: GroupStats, errors: GroupErrorRates, fairness: str,
                      eps_values: Iterable, delta_values: Iterable, eta_values: Iterable = (0,),
                      sigma_values: Iterable = (None,), workers: int = 1,
                      node_limit: int = 20000) -> List[SweepRow]:
    """Formula and solver verdicts at each grid point, in grid order
    (eps outermost, then delta, eta, sigma)."""
    grid = list(itertools.product([as_fraction(v) for v in eps_values],
                                  [as_fraction(v) for v in delta_values],
                                  [as_fraction(v) for v in eta_values],
                                  [None if v is None else as_fraction(v) for v in sigma_values]))
    tasks = [(cells, stats, errors, fairness, e, d, h, s, node_limit) for e, d, h, s in grid]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point, tasks))
    return [_sweep_point(t) for t in tasks]


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow(r.as_row())
    return buf.getvalue()
