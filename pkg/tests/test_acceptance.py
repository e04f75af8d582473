"""End-to-end acceptance checks, one test per criterion.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""

import itertools
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import cell_instance, random_spec, random_tiny_instance
from fairabstain.adjust import consistency_rate, prediction_adjustment
from fairabstain.baseline import MlpConfig, group_error_rates, predicted_labels, score, train_baseline
from fairabstain.cells import build_cells_for, counts_from_decisions, decisions_from_counts
from fairabstain.data import gen_synthetic, group_stats
from fairabstain.feasibility import FeasibilityInputs, Interval, dp_min_delta, eop_nontrivial_bounds
from fairabstain.metrics import compare_to_baseline, evaluate, evaluate_dataset
from fairabstain.solver import ConstraintSpec, brute_force_solve, mccormick_linearize, solve, verify_solution
from fairabstain.surrogate import FanModel, fan_predict, train_ab, train_fb

FAIRNESS = ("DP", "EOp", "EOd")


@pytest.mark.criterion(1, "solver matches exhaustive search on 100 tiny instances")
def test_oracle_equivalence():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    matched = 0
    for i in range(100):
        inst, fair = random_tiny_instance(rng, 4, 12, FAIRNESS[i % 3])
        spec = random_spec(rng, fair, inst)
        ours = solve(inst.cells, inst.stats, spec, inst.errors)
        ref = brute_force_solve(inst.groups, inst.labels, inst.pred, inst.errors, spec)
        matched += (ours.status, ours.objective) == (ref.status, ref.objective)
    elapsed = time.perf_counter() - start
    assert matched == 100
    assert elapsed < 120


@pytest.mark.criterion(2, "closed-form DP abstention budget")
def test_dp_closed_form():
    def pair(gap, eps):
        lo = Fraction(3, 10)
        return FeasibilityInputs.uniform([lo + gap, lo], [Fraction(1, 10)] * 2, eps=eps)

    assert abs(dp_min_delta(pair(Fraction(3, 10), Fraction(5, 100)), 0, 1) - Fraction(1, 18)) < Fraction(1, 10 ** 9)
    assert dp_min_delta(pair(Fraction(3, 10), Fraction(1, 10)), 0, 1) <= 0
    assert dp_min_delta(pair(Fraction(0), Fraction(5, 100)), 0, 1) < 0


def _boundary(inst, eps):
    """Smallest k with the program feasible at delta = k/200 for both groups."""
    def feasible(k):
        spec = ConstraintSpec("DP", eps=eps, delta=Fraction(k, 200), eta=0)
        return solve(inst.cells, inst.stats, spec, inst.errors).feasible

    lo, hi = 0, 200
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid + 1
    return Fraction(lo, 200)


@pytest.mark.criterion(3, "DP feasibility boundary within 1/200 of the closed form")
def test_dp_boundary_agreement():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 20:
        pos = sorted(int(p) for p in rng.integers(20, 181, 2))[::-1]
        fn = [int(rng.integers(0, min(20, p) + 1)) for p in pos]
        fp = [int(rng.integers(0, min(20, 200 - p) + 1)) for p in pos]
        eps = Fraction(int(rng.integers(0, 20)), 200)
        inst = cell_instance([200, 200], pos, fn, fp)
        need = dp_min_delta(FeasibilityInputs.from_stats(inst.stats, inst.errors, 0, 0, eps), 0, 1)
        if need is None or not 0 < need < 1:
            continue
        checked += 1
        assert abs(_boundary(inst, eps) - need) <= Fraction(1, 200), (pos, fn, fp, eps)


@pytest.mark.criterion(4, "EOp and EOd always feasible, zero objective without non-triviality")
def test_eop_eod_always_feasible():
    rng = np.random.default_rng(11)
    for i in range(100):
        inst, fair = random_tiny_instance(rng, 4, 60, ("EOp", "EOd")[i % 2])
        spec = random_spec(rng, fair, inst, extras=False)
        if i < 30:
            spec = spec.with_(eps=0, delta=0)
        sol = solve(inst.cells, inst.stats, spec, inst.errors)
        assert sol.feasible and sol.objective == 0, spec


@pytest.mark.criterion(5, "non-trivial EOp abstention intervals")
def test_eop_intervals():
    assert eop_nontrivial_bounds(0.6, 0.3, 0) == Interval(Fraction(0), Fraction(2, 5))
    assert eop_nontrivial_bounds(0.2, 0.3, 0) == Interval(Fraction(1, 10), Fraction(4, 5))


@pytest.mark.criterion(6, "McCormick rows are exact on binaries")
def test_mccormick_exactness():
    seen = set()
    for yhat, omega in itertools.product((0, 1), repeat=2):
        for b in (0, 1):
            f = b ^ yhat
            system = mccormick_linearize([b])
            feasible_u = [u for u in (0, 1) if system.satisfied([omega, f, u])]
            assert feasible_u == [yhat * omega]
        seen.add((yhat, omega))
    assert len(seen) == 4


@pytest.mark.criterion(7, "prediction adjustment keeps counts, constraints and consistency")
def test_prediction_adjustment():
    rng = np.random.default_rng(21)
    solved = 0
    while solved < 50:
        inst, fair = random_tiny_instance(rng, 8, 60)
        spec = random_spec(rng, fair, inst)
        sol = solve(inst.cells, inst.stats, spec, inst.errors, abstain_flips=False)
        if not sol.feasible:
            continue
        solved += 1
        raw = decisions_from_counts(sol.counts, inst.cells)
        out = prediction_adjustment(raw, inst.cells)
        assert counts_from_decisions(out, inst.cells) == counts_from_decisions(raw, inst.cells)
        assert verify_solution(out, inst.cells, inst.stats, spec, inst.errors) == []
        assert prediction_adjustment(out, inst.cells) == out

    ds = gen_synthetic(0, 2, [1000, 1000], [0.7, 0.4], score_noise=0.5)
    model = train_baseline(ds, MlpConfig())
    pick = np.random.default_rng(0).choice(len(ds), len(ds) // 5, replace=False)
    dup = ds.subset(np.concatenate([np.arange(len(ds)), pick]))
    s = score(model, dup)
    p = predicted_labels(s)
    cells = build_cells_for(dup, p, s)
    errs = group_error_rates(dup, p)
    for fair in ("EOp", "EOd"):
        sol = solve(cells, group_stats(dup), ConstraintSpec(fair, eps=0.05, delta=0.2, eta=0), errs,
                    abstain_flips=False)
        adjusted = prediction_adjustment(decisions_from_counts(sol.counts, cells), cells)
        rate = consistency_rate(adjusted, dup.X, dup.group)
        print(f"{fair} duplicate consistency {float(rate):.4f}")
        assert rate >= Fraction(99, 100)


@pytest.mark.criterion(8, "equal-abstention bound never improves the objective")
def test_worse_performance():
    rng = np.random.default_rng(31)
    compared = 0
    while compared < 50:
        inst, fair = random_tiny_instance(rng, 8, 50)
        spec = random_spec(rng, fair, inst, extras=False)
        labels = [y for y in (0, 1) if all(inst.stats.label_counts[z][y] for z in (0, 1))]
        if not labels:
            continue
        y = labels[int(rng.integers(len(labels)))]
        sigma = (0, 0.1, 0.2, 0.5)[int(rng.integers(4))]
        free = solve(inst.cells, inst.stats, spec, inst.errors)
        bound = solve(inst.cells, inst.stats, spec.with_(equal_abstention={y: sigma}), inst.errors)
        if not (free.feasible and bound.feasible):
            continue
        compared += 1
        assert bound.objective >= free.objective


@pytest.mark.criterion(9, "no abstention on label-0 samples is needed under DP and EOp")
def test_no_negative_abstention():
    rng = np.random.default_rng(41)
    compared = 0
    while compared < 50:
        inst, fair = random_tiny_instance(rng, 8, 50, ("DP", "EOp")[compared % 2])
        spec = random_spec(rng, fair, inst, extras=False)
        sol = solve(inst.cells, inst.stats, spec, inst.errors)
        if not sol.feasible:
            continue
        compared += 1
        pinned = solve(inst.cells, inst.stats, spec, inst.errors, no_negative_abstention=True)
        assert (pinned.status, pinned.objective) == (sol.status, sol.objective), spec


@pytest.mark.criterion(10, "desk-scale run: exact Stage I, surrogate accuracy, FAN fairness")
def test_desk_scale_run():
    ds = gen_synthetic(0, 2, [1000, 1000], [0.7, 0.4], score_noise=0.5)
    config = MlpConfig()
    model = train_baseline(ds, config)
    s = score(model, ds)
    p = predicted_labels(s)
    errs = group_error_rates(ds, p)
    cells = build_cells_for(ds, p, s)
    stats = group_stats(ds)
    spec = ConstraintSpec("EOd", eps=0.05, delta=0.2, eta=0)
    sol = solve(cells, stats, spec, errs, abstain_flips=False)
    assert sol.feasible
    assert verify_solution(sol, cells, stats, spec, errs) == []
    dv = prediction_adjustment(decisions_from_counts(sol.counts, cells), cells)
    assert verify_solution(dv, cells, stats, spec, errs) == []

    ab = train_ab(ds.X, s, dv.omega, config)
    fb = train_fb(ds.X, s, dv.flip, dv.omega, config)
    report = evaluate_dataset(ds, fan_predict(FanModel(model, ab, fb), ds.X), errs)
    cmp = compare_to_baseline(report, evaluate_dataset(ds, list(p), errs))
    print(f"AB {ab.train_accuracy:.4f} FB {fb.train_accuracy:.4f} "
          f"TPR gap {float(report.max_disparity('TPR')):.4f} TNR gap {float(report.max_disparity('TNR')):.4f} "
          f"min accuracy increase {float(cmp.min_accuracy_increase):.4f}")
    assert ab.train_accuracy >= 0.85 and fb.train_accuracy >= 0.85
    assert report.max_disparity("TPR") <= Fraction(1, 10)
    assert report.max_disparity("TNR") <= Fraction(1, 10)
    assert cmp.min_accuracy_increase >= Fraction(-2, 100)


@pytest.mark.criterion(11, "abstaining on rejected samples leaves acceptance at 0.30")
def test_acceptance_metric_convention():
    groups = [0] * 10
    labels = [1, 1, 1, 0, 0, 0, 0, 0, 0, 0]
    before = [1, 1, 1, 0, 0, 0, 0, 0, 0, 0]
    after = [1, 1, 1, None, 0, 0, 0, 0, 0, 0]
    assert evaluate(groups, labels, before).groups[0].rates["DP"] == Fraction(3, 10)
    assert evaluate(groups, labels, after).groups[0].rates["DP"] == Fraction(3, 10)
