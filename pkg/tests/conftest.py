import numpy as np
import pytest

from fairabstain.baseline import GroupErrorRates
from fairabstain.cells import build_cells
from fairabstain.data import GroupStats
from fairabstain.solver import ConstraintSpec


class Instance:
    """Raw arrays plus the derived cell table, stats and baseline errors."""

    def __init__(self, groups, labels, pred, scores=None, n_groups=None):
        self.groups = np.asarray(groups, dtype=np.int64)
        self.labels = np.asarray(labels, dtype=np.int64)
        self.pred = np.asarray(pred, dtype=np.int64)
        n = len(self.groups)
        self.scores = np.linspace(0.0, 1.0, n) if scores is None else np.asarray(scores, dtype=float)
        G = n_groups if n_groups is not None else int(self.groups.max()) + 1
        self.n_groups = G
        self.cells = build_cells(self.groups, self.labels, self.pred, self.scores, G)
        sizes = tuple(int(np.sum(self.groups == z)) for z in range(G))
        self.stats = GroupStats(sizes, tuple(
            (int(np.sum((self.groups == z) & (self.labels == 0))), int(np.sum((self.groups == z) & (self.labels == 1))))
            for z in range(G)))
        self.errors = GroupErrorRates(
            tuple(int(np.sum((self.groups == z) & (self.labels != self.pred))) for z in range(G)), sizes)

    def __len__(self):
        return len(self.groups)


def cell_instance(sizes, pos, fn, fp):
    """Two-or-more-group instance given per-group size, positives, false
    negatives and false positives. Scores increase with index."""
    g, y, b = [], [], []
    for z, n in enumerate(sizes):
        for lab, pred, k in ((1, 1, pos[z] - fn[z]), (1, 0, fn[z]), (0, 1, fp[z]), (0, 0, n - pos[z] - fp[z])):
            g += [z] * k
            y += [lab] * k
            b += [pred] * k
    return Instance(g, y, b, n_groups=len(sizes))


EPS = (0, 0.1, 0.2, 1 / 3, 0.5)
DELTA = (0, 0.2, 1 / 3, 0.5)
ETA = (-0.2, 0, 0.25, 0.5)


def random_tiny_instance(rng, n_min=4, n_max=12, fairness=None):
    """Two groups, random labels/predictions, strata required by the chosen
    fairness notion all present."""
    while True:
        n = int(rng.integers(n_min, n_max + 1))
        g = rng.integers(0, 2, n)
        y = rng.integers(0, 2, n)
        b = rng.integers(0, 2, n)
        fair = fairness or str(rng.choice(["DP", "EOp", "EOd"]))
        need = {"DP": [], "EOp": [1], "EOd": [0, 1]}[fair]
        if all(np.any((g == z) & (y == lab)) for z in (0, 1) for lab in need) and all(np.any(g == z) for z in (0, 1)):
            return Instance(g, y, b, rng.random(n), 2), fair


def random_spec(rng, fairness, inst=None, extras=True):
    def pick(vals):
        return vals[int(rng.integers(len(vals)))]

    kwargs = dict(fairness=fairness, eps=pick(EPS), delta=[pick(DELTA), pick(DELTA)], eta=pick(ETA))
    if extras:
        if rng.random() < 0.25 and inst is not None:
            ys = [lab for lab in (0, 1) if all(inst.stats.label_counts[z][lab] for z in (0, 1))]
            if ys:
                kwargs["equal_abstention"] = {int(pick(ys)): pick((0, 0.2, 0.5))}
        if rng.random() < 0.25:
            kwargs["non_triviality"] = True
            kwargs["non_triviality_scope"] = pick(("all", "non_abstained"))
    return ConstraintSpec(**kwargs)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance summary ----------------------------------------------------------------------

_CRITERIA = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    number, title = props["criterion"]
    if report.when == "call" or report.failed:
        passed = report.passed and _CRITERIA.get(number, (None, True))[1]
        _CRITERIA[number] = (title, passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed = _CRITERIA[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {number:>2}. {title}")
