from fractions import Fraction

import numpy as np
import pytest

from conftest import random_spec, random_tiny_instance
from fairabstain.baseline import GroupErrorRates
from fairabstain.cells import DecisionVector, decisions_from_counts
from fairabstain.errors import DomainError
from fairabstain.metrics import compare_to_baseline, evaluate
from fairabstain.solver import constraint_values, solve
from fairabstain.surrogate import ABSTAIN, FanOutput


def _scenario():
    # 10 samples per group, 3 accepted; group 0 abstains on one rejected sample
    groups = [0] * 10 + [1] * 10
    labels = [1, 1, 1, 0, 0, 0, 0, 0, 0, 0] * 2
    outputs = [1, 1, 1, None, 0, 0, 0, 0, 0, 0] + [1, 1, 1, 0, 0, 0, 0, 0, 0, 0]
    return groups, labels, outputs


def test_abstaining_rejected_samples_keeps_acceptance():
    report = evaluate(*_scenario())
    assert report.groups[0].rates["DP"] == Fraction(3, 10)
    assert report.groups[0].abstention_rate == Fraction(1, 10)
    assert report.groups[0].label_abstention_rate == {0: Fraction(1, 7), 1: Fraction(0)}
    assert report.disparity[("DP", 0, 1)] == 0


def test_accuracy_counts_only_answered_samples():
    report = evaluate([0, 0, 0, 0], [1, 0, 1, 0], [1, 1, None, 0])
    g = report.groups[0]
    assert g.accuracy == Fraction(2, 3) and g.errors == 1 and g.abstained == 1
    assert evaluate([0, 0], [1, 0], [None, None]).groups[0].accuracy is None


def test_output_encodings_agree():
    groups, labels = [0, 0, 1, 1], [1, 0, 1, 0]
    fan = [FanOutput(False, 1), ABSTAIN, FanOutput(False, 0), FanOutput(False, 0)]
    dv = DecisionVector([1, 0, 1, 1], [0, 0, 1, 0], [1, 1, 1, 0])
    assert evaluate(groups, labels, fan).to_dict() == evaluate(groups, labels, [1, None, 0, 0]).to_dict()
    assert evaluate(groups, labels, dv).to_dict() == evaluate(groups, labels, fan).to_dict()
    with pytest.raises(DomainError):
        evaluate(groups, labels, [1, 0])


def test_swapping_groups_keeps_disparities():
    rng = np.random.default_rng(2)
    g = rng.integers(0, 2, 40)
    y = rng.integers(0, 2, 40)
    out = [None if r < 0.2 else int(r > 0.6) for r in rng.random(40)]
    a = evaluate(g, y, out)
    b = evaluate(1 - g, y, out)
    for kind in ("DP", "TPR", "TNR", "EOd"):
        assert a.max_disparity(kind) == b.max_disparity(kind)


def test_equalized_odds_average():
    # TPR 1 vs 1/2, TNR 1 vs 0
    report = evaluate([0, 0, 1, 1, 1], [1, 0, 1, 1, 0], [1, 0, 1, 0, 1])
    assert report.disparity[("TPR", 0, 1)] == Fraction(1, 2)
    assert report.disparity[("TNR", 0, 1)] == 1
    assert report.max_disparity("EOd") == Fraction(3, 4)


def test_undefined_rates_are_reported():
    report = evaluate([0, 0, 1], [1, 1, 0], [1, 0, 0])
    assert report.groups[0].rates["TNR"] is None
    assert report.max_disparity("TNR") is None
    doc = report.to_dict()
    assert doc["disparity"]["TNR(0,1)"] == "undefined"
    assert report.csv_row()["max_disparity_TNR"] == ""
    with pytest.raises(DomainError):
        evaluate([0, 2], [1, 0], [1, 0])


def test_no_harm_margin():
    errors = GroupErrorRates((1, 1), (4, 4))
    report = evaluate([0] * 4 + [1] * 4, [1, 0, 1, 0] * 2, [1, 0, 1, 1, 1, 0, None, 0], errors, eta=0)
    assert report.groups[0].no_harm_margin == 0
    assert report.groups[1].no_harm_margin == Fraction(1, 4)


def test_matches_solver_constraint_values():
    rng = np.random.default_rng(12)
    checked = 0
    while checked < 20:
        inst, fair = random_tiny_instance(rng, 6, 40, "EOd")
        spec = random_spec(rng, fair, inst, extras=False)
        sol = solve(inst.cells, inst.stats, spec, inst.errors)
        if not sol.feasible:
            continue
        checked += 1
        dv = decisions_from_counts(sol.counts, inst.cells)
        report = evaluate(inst.groups, inst.labels, dv, inst.errors, n_groups=2)
        vals = constraint_values(sol.counts, inst.cells, inst.stats, spec, inst.errors)
        for z in (0, 1):
            for kind in ("DP", "TPR", "TNR"):
                assert report.groups[z].rates[kind] == vals.rates[(kind, z)]
            assert report.groups[z].errors == vals.errors[z]


def test_compare_to_baseline():
    g, y = [0, 0, 1, 1], [1, 0, 1, 0]
    base = evaluate(g, y, [1, 1, 0, 0])
    better = evaluate(g, y, [1, 0, 1, None])
    cmp = compare_to_baseline(better, base)
    assert cmp.accuracy_increase == [Fraction(1, 2), Fraction(1, 2)]
    assert cmp.min_accuracy_increase == Fraction(1, 2)
    assert cmp.disparity_reduction["TPR"] == 1
    silent = evaluate(g, y, [None, None, 1, 0])
    assert compare_to_baseline(silent, base).min_accuracy_increase is None
    with pytest.raises(DomainError):
        compare_to_baseline(evaluate([0], [1], [1]), base)
