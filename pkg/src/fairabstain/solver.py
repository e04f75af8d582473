"""Stage I: choose abstain/flip decisions for training samples.

The program minimises errors on non-abstained samples subject to pairwise
group fairness, per-group abstention budgets and per-group no-harm bounds,
optionally with equal-abstention and non-triviality rows. It is solved
exactly over per-cell counts (LP relaxation + branch-and-bound). Two
independent routes exist for cross-checking: an exhaustive per-sample search
for tiny inputs and a per-sample linear IP built with McCormick rows.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np

from fairabstain.baseline import GroupErrorRates
from fairabstain.bnb import branch_and_bound
from fairabstain.cells import CellCounts, CellKey, CellTable, Count, DecisionVector, build_cells, \
    counts_from_decisions, counts_objective
from fairabstain.data import GroupStats
from fairabstain.errors import DomainError, OracleRefusal, SolverError
from fairabstain.exact import as_fraction
from fairabstain.simplex import linprog

FAIRNESS = ("DP", "EOp", "EOd")
OPTIMAL = "Optimal"
BEST_EFFORT = "FeasibleBestEffort"
INFEASIBLE = "Infeasible"


def _per_group(value, n_groups, name):
    if isinstance(value, (list, tuple)):
        if len(value) != n_groups:
            raise DomainError(f"{name} has {len(value)} entries for {n_groups} groups")
        return tuple(as_fraction(v) for v in value)
    return (as_fraction(value),) * n_groups


@dataclass(frozen=True)
class ConstraintSpec:
    """Hyperparameters of the Stage I program.

    ``delta`` and ``eta`` are a scalar or one value per group.
    ``equal_abstention`` maps a label to its bound on pairwise gaps between
    per-(group, label) abstention rates. ``non_triviality`` is ``True`` (floor
    each group's error count at the baseline rate), a per-group sequence of
    floors, or ``None``. With ``non_triviality_scope="all"`` the error count
    also includes abstained samples, whose label is the baseline prediction
    XOR their flip bit; ``"non_abstained"`` restricts it to kept samples.
    """

    fairness: str = "DP"
    eps: object = 0.0
    delta: object = 0.0
    eta: object = 0.0
    equal_abstention: Optional[Dict[int, object]] = None
    non_triviality: object = None
    non_triviality_scope: str = "all"

    def __post_init__(self):
        if self.fairness not in FAIRNESS:
            raise DomainError(f"fairness must be one of {FAIRNESS}, got {self.fairness!r}")
        if as_fraction(self.eps) < 0:
            raise DomainError("eps must be non-negative")
        for d in (self.delta if isinstance(self.delta, (list, tuple)) else [self.delta]):
            if not 0 <= as_fraction(d) <= 1:
                raise DomainError("delta must lie in [0, 1]")
        if self.equal_abstention:
            ea = {int(y): s for y, s in self.equal_abstention.items()}
            if not set(ea) <= {0, 1} or any(as_fraction(s) < 0 for s in ea.values()):
                raise DomainError("equal_abstention maps labels 0/1 to non-negative bounds")
            object.__setattr__(self, "equal_abstention", ea)
        if self.non_triviality_scope not in ("all", "non_abstained"):
            raise DomainError("non_triviality_scope must be 'all' or 'non_abstained'")

    @property
    def eps_exact(self) -> Fraction:
        return as_fraction(self.eps)

    def deltas(self, n_groups):
        return _per_group(self.delta, n_groups, "delta")

    def etas(self, n_groups):
        return _per_group(self.eta, n_groups, "eta")

    def sigma(self, y):
        if not self.equal_abstention or y not in self.equal_abstention:
            return None
        return as_fraction(self.equal_abstention[y])

    def floors(self, errors: GroupErrorRates):
        if self.non_triviality is None or self.non_triviality is False:
            return None
        if self.non_triviality is True:
            return errors.rates
        return _per_group(list(self.non_triviality), len(errors.sizes), "non_triviality")

    def with_(self, **changes) -> "ConstraintSpec":
        d = dict(self.__dict__)
        d.update(changes)
        return ConstraintSpec(**d)

    def to_dict(self):
        def enc(v):
            if isinstance(v, (list, tuple)):
                return [str(as_fraction(x)) for x in v]
            return str(as_fraction(v))
        return {
            "fairness": self.fairness,
            "eps": enc(self.eps),
            "delta": enc(self.delta),
            "eta": enc(self.eta),
            "equal_abstention": ({str(y): enc(s) for y, s in self.equal_abstention.items()}
                                 if self.equal_abstention else None),
            "non_triviality": (self.non_triviality if self.non_triviality in (None, True, False)
                               else enc(self.non_triviality)),
            "non_triviality_scope": self.non_triviality_scope,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for key in ("eps", "delta", "eta"):
            if key in d:
                d[key] = _decode(d[key])
        if d.get("equal_abstention"):
            d["equal_abstention"] = {int(y): _decode(s) for y, s in d["equal_abstention"].items()}
        if isinstance(d.get("non_triviality"), list):
            d["non_triviality"] = _decode(d["non_triviality"])
        return cls(**d)


def _decode(v):
    if isinstance(v, list):
        return [as_fraction(x) for x in v]
    return as_fraction(v)


# -- exact constraint values ---------------------------------------------------


@dataclass
class ConstraintCheck:
    name: str
    family: str
    lhs: Fraction
    rhs: Fraction
    sense: str  # "<=" or ">="

    @property
    def slack(self) -> Fraction:
        return self.rhs - self.lhs if self.sense == "<=" else self.lhs - self.rhs

    @property
    def ok(self) -> bool:
        return self.slack >= 0

    def to_dict(self):
        return {"name": self.name, "family": self.family, "lhs": str(self.lhs), "rhs": str(self.rhs),
                "sense": self.sense, "slack": str(self.slack), "slack_float": float(self.slack)}


@dataclass
class ConstraintValues:
    """Left-hand sides of every constraint as exact rationals."""

    rates: Dict[tuple, Fraction]  # ("DP"|"TPR"|"TNR", z) -> rate
    disparity: Dict[tuple, Fraction]  # (kind, z, z') -> |rate_z - rate_z'|, z < z'
    nonabstention_rate: Dict[int, Fraction]
    errors: Dict[int, int]
    nonabstained: Dict[int, int]
    no_harm_bound: Dict[int, Fraction]
    abstention_gap: Dict[tuple, Fraction] = field(default_factory=dict)  # (y, z, z')
    total_wrong: Dict[int, int] = field(default_factory=dict)
    wrong_floor: Dict[int, Fraction] = field(default_factory=dict)


def _need(count, what):
    if count == 0:
        raise DomainError(f"empty stratum: {what} has no samples")
    return count


def fairness_kinds(fairness):
    return {"DP": ("DP",), "EOp": ("TPR",), "EOd": ("TPR", "TNR")}[fairness]


def _rate_parts(kind, key: CellKey, c: Count):
    """Numerator contribution of one cell to an acceptance-type rate."""
    if kind == "DP":
        return c.keep if key.pred == 1 else c.flip
    if kind == "TPR":
        return (c.keep if key.pred == 1 else c.flip) if key.label == 1 else 0
    # TNR: non-abstained with final label 0 among y = 0
    return (c.keep if key.pred == 0 else c.flip) if key.label == 0 else 0


def _rate_den(kind, stats: GroupStats, z):
    if kind == "DP":
        return _need(stats.sizes[z], f"group {z}")
    y = 1 if kind == "TPR" else 0
    return _need(stats.label_counts[z][y], f"group {z} with label {y}")


def constraint_values(counts: CellCounts, cells: CellTable, stats: GroupStats, spec: ConstraintSpec,
                      errors: GroupErrorRates) -> ConstraintValues:
    counts.validate(cells)
    G = stats.n_groups
    etas = spec.etas(G)
    rates = {}
    kinds = ("DP", "TPR", "TNR")
    required = set(fairness_kinds(spec.fairness))
    for kind in kinds:
        for z in range(G):
            try:
                den = _rate_den(kind, stats, z)
            except DomainError:
                if kind in required:
                    raise
                continue
            num = sum(_rate_parts(kind, k, counts[k]) for k in cells.group_keys(z))
            rates[(kind, z)] = Fraction(num, den)
    disparity = {}
    for kind in kinds:
        for z, w in itertools.combinations(range(G), 2):
            if (kind, z) in rates and (kind, w) in rates:
                disparity[(kind, z, w)] = abs(rates[(kind, z)] - rates[(kind, w)])

    nonab_rate, errs, nonab, bound = {}, {}, {}, {}
    for z in range(G):
        keys = cells.group_keys(z)
        nonab[z] = sum(counts[k].nonabstained for k in keys)
        errs[z] = sum(counts[k].keep if k.baseline_wrong else counts[k].flip for k in keys)
        nonab_rate[z] = Fraction(nonab[z], _need(stats.sizes[z], f"group {z}"))
        bound[z] = errors.e_prime(z, etas[z]) * nonab[z]

    gaps = {}
    for y in (0, 1):
        if spec.sigma(y) is None:
            continue
        per = {}
        for z in range(G):
            den = _need(stats.label_counts[z][y], f"group {z} with label {y}")
            per[z] = Fraction(sum(counts[k].nonabstained for k in cells.group_keys(z) if k.label == y), den)
        for z, w in itertools.combinations(range(G), 2):
            gaps[(y, z, w)] = abs(per[z] - per[w])

    wrong, floor = {}, {}
    floors = spec.floors(errors)
    if floors is not None:
        for z in range(G):
            total = errs[z]
            if spec.non_triviality_scope == "all":
                for k in cells.group_keys(z):
                    c = counts[k]
                    total += (c.abstain - c.abstain_flip) if k.baseline_wrong else c.abstain_flip
            wrong[z] = total
            floor[z] = floors[z] * stats.sizes[z]
    return ConstraintValues(rates, disparity, nonab_rate, errs, nonab, bound, gaps, wrong, floor)


def check_constraints(values: ConstraintValues, stats: GroupStats, spec: ConstraintSpec) -> List[ConstraintCheck]:
    G = stats.n_groups
    deltas = spec.deltas(G)
    eps = spec.eps_exact
    out = []
    for kind in fairness_kinds(spec.fairness):
        for (k, z, w), gap in sorted(values.disparity.items()):
            if k == kind:
                out.append(ConstraintCheck(f"disparity[{kind}]({z},{w})", "disparity", gap, eps, "<="))
    for z in range(G):
        out.append(ConstraintCheck(f"abstention_rate[{z}]", "abstention_rate",
                                   values.nonabstention_rate[z], 1 - deltas[z], ">="))
    for z in range(G):
        out.append(ConstraintCheck(f"no_harm[{z}]", "no_harm", Fraction(values.errors[z]),
                                   values.no_harm_bound[z], "<="))
    for (y, z, w), gap in sorted(values.abstention_gap.items()):
        out.append(ConstraintCheck(f"equal_abstention[y={y}]({z},{w})", "equal_abstention", gap,
                                   spec.sigma(y), "<="))
    for z in sorted(values.total_wrong):
        out.append(ConstraintCheck(f"non_triviality[{z}]", "non_triviality", Fraction(values.total_wrong[z]),
                                   values.wrong_floor[z], ">="))
    return out


def verify_solution(solution, cells: CellTable, stats: GroupStats, spec: ConstraintSpec,
                    errors: GroupErrorRates) -> List[ConstraintCheck]:
    """Violated constraints (empty list iff feasible), recomputed exactly.

    ``solution`` may be an :class:`IpSolution`, :class:`CellCounts` or a
    :class:`DecisionVector`.
    """
    if isinstance(solution, IpSolution):
        counts = solution.counts
    elif isinstance(solution, DecisionVector):
        counts = counts_from_decisions(solution, cells)
    else:
        counts = solution
    checks = check_constraints(constraint_values(counts, cells, stats, spec, errors), stats, spec)
    return [c for c in checks if not c.ok]


# -- count-space program --------------------------------------------------------


class _Lin:
    """Sparse affine expression over integer program variables."""

    __slots__ = ("coef", "const")

    def __init__(self, coef=None, const=0):
        self.coef = dict(coef or {})
        self.const = Fraction(const)

    def __add__(self, other):
        if not isinstance(other, _Lin):
            return _Lin(self.coef, self.const + other)
        coef = dict(self.coef)
        for k, v in other.coef.items():
            coef[k] = coef.get(k, 0) + v
        return _Lin(coef, self.const + other.const)

    __radd__ = __add__

    def __neg__(self):
        return _Lin({k: -v for k, v in self.coef.items()}, -self.const)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, s):
        s = Fraction(s)
        return _Lin({k: v * s for k, v in self.coef.items()}, self.const * s)

    __rmul__ = __mul__


def _var(i):
    return _Lin({i: 1})


@dataclass
class _Program:
    n_vars: int
    names: List[str]
    ub: List[int]
    rows: List[tuple]  # (family, _Lin) meaning expr <= 0
    objective: _Lin
    priority: List[int] = field(default_factory=list)

    def families(self):
        return sorted({f for f, _ in self.rows})

    def dense(self, exclude=()):
        A, b = [], []
        for family, expr in self.rows:
            if family in exclude:
                continue
            coef, rhs = _tighten(expr)
            if coef is None:
                if rhs < 0:
                    A.append(np.zeros(self.n_vars))
                    b.append(-1.0)
                continue
            row = np.zeros(self.n_vars)
            for k, v in coef.items():
                row[k] = float(v)
            A.append(row)
            b.append(float(rhs))
        c = np.zeros(self.n_vars)
        for k, v in self.objective.coef.items():
            c[k] = float(v)
        return c, np.array(A).reshape(-1, self.n_vars), np.array(b)


def _tighten(expr: _Lin):
    """Rewrite ``expr <= 0`` as ``coef @ x <= rhs`` with coprime integer
    coefficients and the right-hand side rounded down (valid for integer x)."""
    coef = {k: v for k, v in expr.coef.items() if v != 0}
    rhs = -expr.const
    if not coef:
        return None, rhs
    den = 1
    for v in [*coef.values(), rhs]:
        den = den * v.denominator // math.gcd(den, v.denominator)
    ints = {k: int(v * den) for k, v in coef.items()}
    g = 0
    for v in ints.values():
        g = math.gcd(g, abs(v))
    scaled = rhs * den / g
    return {k: v // g for k, v in ints.items()}, Fraction(math.floor(scaled))


def _build_program(cells: CellTable, stats: GroupStats, spec: ConstraintSpec, errors: GroupErrorRates,
                   no_negative_abstention=False, abstain_flips=True):
    G = stats.n_groups
    literal_nt = spec.floors(errors) is not None and spec.non_triviality_scope == "all"
    names, ub = [], []
    var = {}
    for key, members in cells:
        m = len(members)
        for kind in ("abstain", "flip") + (("abstain_flip",) if literal_nt else ()):
            var[(key, kind)] = len(names)
            names.append(f"{key}.{kind}")
            cap = 0 if (kind != "flip" and no_negative_abstention and key.label == 0) else m
            if kind == "abstain_flip" and not abstain_flips:
                cap = 0
            ub.append(cap)

    priority = [1] * len(names)
    rows = []

    def aggregate(name, expr, cap):
        """Integer variable tied to ``expr``; branching on these first keeps
        the tree small when group totals, not cell splits, decide
        feasibility."""
        idx = len(names)
        names.append(name)
        ub.append(int(cap))
        priority.append(0)
        rows.append(("link", expr - _var(idx)))
        rows.append(("link", _var(idx) - expr))

    def count(key, kind):
        m = cells.size(key)
        a, f = _var(var[(key, "abstain")]), _var(var[(key, "flip")])
        if kind == "abstain":
            return a
        if kind == "flip":
            return f
        if kind == "keep":
            return m - a - f
        return _var(var[(key, "abstain_flip")]) if literal_nt else _Lin()

    def cell_errors(key):
        return count(key, "keep") if key.baseline_wrong else count(key, "flip")

    for key, members in cells:
        rows.append(("cell", count(key, "abstain") + count(key, "flip") - len(members)))
        if literal_nt:
            rows.append(("cell", count(key, "abstain_flip") - count(key, "abstain")))

    deltas, etas = spec.deltas(G), spec.etas(G)
    for z in range(G):
        keys = cells.group_keys(z)
        abstained = sum((count(k, "abstain") for k in keys), _Lin())
        rows.append(("abstention_rate", abstained - deltas[z] * stats.sizes[z]))
        errs = sum((cell_errors(k) for k in keys), _Lin())
        nonab = stats.sizes[z] - abstained
        rows.append(("no_harm", errs - errors.e_prime(z, etas[z]) * nonab))
        aggregate(f"abstained[{z}]", abstained, stats.sizes[z])
        aggregate(f"errors[{z}]", errs, stats.sizes[z])

    eps = spec.eps_exact
    for kind in fairness_kinds(spec.fairness):
        num, den = {}, {}
        for z in range(G):
            den[z] = _rate_den(kind, stats, z)
            num[z] = sum((_rate_lin(kind, k, count) for k in cells.group_keys(z)), _Lin())
            aggregate(f"{kind}[{z}]", num[z], den[z])
        for z, w in itertools.combinations(range(G), 2):
            diff = num[z] * den[w] - num[w] * den[z]
            lim = eps * den[z] * den[w]
            rows.append(("disparity", diff - lim))
            rows.append(("disparity", -diff - lim))

    for y in (0, 1):
        sigma = spec.sigma(y)
        if sigma is None:
            continue
        num, den = {}, {}
        for z in range(G):
            den[z] = _need(stats.label_counts[z][y], f"group {z} with label {y}")
            num[z] = den[z] - sum((count(k, "abstain") for k in cells.group_keys(z) if k.label == y), _Lin())
            aggregate(f"nonabstained[{z},y={y}]", num[z], den[z])
        for z, w in itertools.combinations(range(G), 2):
            diff = num[z] * den[w] - num[w] * den[z]
            lim = sigma * den[z] * den[w]
            rows.append(("equal_abstention", diff - lim))
            rows.append(("equal_abstention", -diff - lim))

    floors = spec.floors(errors)
    if floors is not None:
        for z in range(G):
            wrong = _Lin()
            for k in cells.group_keys(z):
                wrong = wrong + cell_errors(k)
                if literal_nt:
                    af = count(k, "abstain_flip")
                    wrong = wrong + ((count(k, "abstain") - af) if k.baseline_wrong else af)
            rows.append(("non_triviality", floors[z] * stats.sizes[z] - wrong))
            aggregate(f"wrong[{z}]", wrong, stats.sizes[z])

    objective = sum((cell_errors(k) for k in cells.keys()), _Lin())
    return _Program(len(names), names, ub, rows, objective, priority), var, literal_nt


def _rate_lin(kind, key, count):
    if kind == "TPR" and key.label != 1:
        return _Lin()
    if kind == "TNR" and key.label != 0:
        return _Lin()
    accept_pred = 0 if kind == "TNR" else 1
    return count(key, "keep") if key.pred == accept_pred else count(key, "flip")


@dataclass
class IpSolution:
    status: str
    counts: Optional[CellCounts]
    objective: Optional[int]
    constraint_report: List[ConstraintCheck] = field(default_factory=list)
    bound: Optional[float] = None
    nodes: int = 0
    binding: List[str] = field(default_factory=list)
    decisions: Optional[DecisionVector] = None

    @property
    def feasible(self):
        return self.status != INFEASIBLE

    @property
    def gap(self):
        if self.objective is None or self.bound is None:
            return None
        return self.objective - self.bound

    def to_dict(self):
        return {
            "status": self.status,
            "objective": self.objective,
            "bound": self.bound,
            "gap": self.gap,
            "nodes": self.nodes,
            "binding": list(self.binding),
            "counts": self.counts.to_dict() if self.counts is not None else None,
            "constraints": [c.to_dict() for c in self.constraint_report],
        }

    @classmethod
    def from_dict(cls, d):
        counts = CellCounts.from_dict(d["counts"]) if d.get("counts") is not None else None
        checks = [ConstraintCheck(c["name"], c["family"], Fraction(c["lhs"]), Fraction(c["rhs"]), c["sense"])
                  for c in d.get("constraints", [])]
        return cls(d["status"], counts, d.get("objective"), checks, d.get("bound"), d.get("nodes", 0),
                   list(d.get("binding", [])))


def _diagnose(program: _Program):
    """Constraint families whose removal makes the LP relaxation feasible."""
    binding = []
    for family in program.families():
        if family in ("cell", "link"):
            continue
        c, A, b = program.dense(exclude=(family,))
        A = np.vstack([A, np.eye(program.n_vars)])
        b = np.concatenate([b, np.array(program.ub, dtype=float)])
        if linprog(c, A, b).status == "optimal":
            binding.append(family)
    return binding


def solve(cells: CellTable, stats: GroupStats, spec: ConstraintSpec, errors: GroupErrorRates,
          node_limit: int = 20000, no_negative_abstention: bool = False,
          fewest_changes: bool = True, abstain_flips: bool = True) -> IpSolution:
    """Exact minimum-error decision counts.

    ``no_negative_abstention`` pins abstention counts of label-0 cells at zero.
    ``abstain_flips=False`` forbids flipping abstained samples, which only
    matters for the literal non-triviality form; use it when the solution
    will go through prediction adjustment, which clears those flips.
    With ``fewest_changes`` ties among minimum-error solutions go to the one
    with the fewest abstentions plus flips; the error optimum is unaffected.
    """
    program, var, literal_nt = _build_program(cells, stats, spec, errors, no_negative_abstention, abstain_flips)
    weight = cells.n_samples + 1 if fewest_changes else 1
    if fewest_changes:
        changes = _Lin({var[(k, kind)]: 1 for k in cells.keys() for kind in ("abstain", "flip")})
        program.objective = program.objective * weight + changes

    def to_counts(x):
        out = CellCounts()
        for key, members in cells:
            a = int(x[var[(key, "abstain")]])
            f = int(x[var[(key, "flip")]])
            t = int(x[var[(key, "abstain_flip")]]) if literal_nt else 0
            out[key] = Count(abstain=a, keep=len(members) - a - f, flip=f, abstain_flip=t)
        return out

    def accept(x):
        counts = to_counts(x)
        try:
            counts.validate(cells)
        except DomainError:
            return False, math.inf
        if verify_solution(counts, cells, stats, spec, errors):
            return False, math.inf
        obj = counts_objective(counts, cells) * weight
        if fewest_changes:
            obj += sum(c.abstain + c.flip for c in counts.values())
        return True, obj

    c, A, b = program.dense()
    const = float(program.objective.const)
    res = branch_and_bound(c, A, b, program.ub, accept, const=const, node_limit=node_limit,
                           priority=program.priority)
    if res.status == "infeasible":
        binding = _diagnose(program) if res.root_lp == "infeasible" else ["integrality"]
        return IpSolution(INFEASIBLE, None, None, nodes=res.nodes, binding=binding)
    if res.x is None:
        raise SolverError(f"node limit {node_limit} reached without a feasible point")
    counts = to_counts(res.x)
    report = check_constraints(constraint_values(counts, cells, stats, spec, errors), stats, spec)
    objective = counts_objective(counts, cells)
    bound = None if res.bound is None else math.ceil(res.bound / weight - 1e-9)
    # a closed error gap is optimal even if the tie-break is not settled
    status = OPTIMAL if res.status == "optimal" or bound >= objective else BEST_EFFORT
    return IpSolution(status, counts, objective, report, min(bound, objective), res.nodes)


# -- exhaustive oracle -------------------------------------------------------------


def brute_force_solve(groups, labels, pred_labels, errors: GroupErrorRates, spec: ConstraintSpec,
                      cap: int = 12, n_groups: Optional[int] = None) -> IpSolution:
    """Enumerate every per-sample (omega, f) in {0,1}^(2N) and keep the first
    assignment with minimum error. Independent of the cell reduction."""
    g = np.asarray(groups, dtype=np.int64)
    y = np.asarray(labels, dtype=np.int64)
    b = np.asarray(pred_labels, dtype=np.int64)
    N = len(g)
    if N > cap:
        raise OracleRefusal(f"exhaustive search over {N} samples exceeds cap {cap}")
    if N == 0:
        raise DomainError("nothing to enumerate")
    G = n_groups if n_groups is not None else int(g.max()) + 1
    size = [int(np.sum(g == z)) for z in range(G)]
    label_size = [[int(np.sum((g == z) & (y == lab))) for lab in (0, 1)] for z in range(G)]

    # state s: omega = s >> 1, f = s & 1
    states = np.arange(4)
    omega_s = states >> 1
    flip_s = states & 1

    quantities = {}

    def add(name, per_sample):
        quantities[name] = per_sample  # shape (N, 4)

    yhat = b[:, None] ^ flip_s[None, :]
    kept = np.broadcast_to(omega_s[None, :], (N, 4))
    wrong = (yhat != y[:, None]).astype(np.int64)
    for z in range(G):
        in_z = (g == z)[:, None]
        add(("abst", z), (in_z & (kept == 0)).astype(np.int64))
        add(("err", z), (in_z & (kept == 1) & (wrong == 1)).astype(np.int64))
        add(("DP", z), (in_z & (kept == 1) & (yhat == 1)).astype(np.int64))
        add(("TPR", z), (in_z & (kept == 1) & (yhat == 1) & (y[:, None] == 1)).astype(np.int64))
        add(("TNR", z), (in_z & (kept == 1) & (yhat == 0) & (y[:, None] == 0)).astype(np.int64))
        for lab in (0, 1):
            add(("nonab", z, lab), (in_z & (kept == 1) & (y[:, None] == lab)).astype(np.int64))
        if spec.non_triviality_scope == "all":
            add(("wrong", z), (in_z & (wrong == 1)).astype(np.int64))
        else:
            add(("wrong", z), quantities[("err", z)])

    names = list(quantities)
    table = np.stack([quantities[k] for k in names])  # (Q, N, 4)
    qi = {k: i for i, k in enumerate(names)}

    k_inner = min(N, 8)
    n_outer = N - k_inner
    inner = np.zeros((len(names), 1), dtype=np.int64)
    for n in range(n_outer, N):
        inner = (inner[:, :, None] + table[:, n, None, :]).reshape(len(names), -1)

    deltas = spec.deltas(G)
    etas = spec.etas(G)
    eps = spec.eps_exact
    floors = spec.floors(errors)
    kinds = fairness_kinds(spec.fairness)
    den_of = {"DP": lambda z: size[z], "TPR": lambda z: label_size[z][1], "TNR": lambda z: label_size[z][0]}
    for kind in kinds:
        for z in range(G):
            _need(den_of[kind](z), f"group {z}" if kind == "DP" else
                  f"group {z} with label {1 if kind == 'TPR' else 0}")
    for lab in (0, 1):
        if spec.sigma(lab) is not None:
            for z in range(G):
                _need(label_size[z][lab], f"group {z} with label {lab}")

    def feasible_mask(Q):
        ok = np.ones(Q.shape[1], dtype=bool)
        for z in range(G):
            d = deltas[z]
            ok &= Q[qi[("abst", z)]] * d.denominator <= d.numerator * size[z]
            e = errors.e_prime(z, etas[z])
            ok &= Q[qi[("err", z)]] * e.denominator <= e.numerator * (size[z] - Q[qi[("abst", z)]])
        for kind in kinds:
            for z, w in itertools.combinations(range(G), 2):
                dz, dw = den_of[kind](z), den_of[kind](w)
                diff = Q[qi[(kind, z)]] * dw - Q[qi[(kind, w)]] * dz
                ok &= np.abs(diff) * eps.denominator <= eps.numerator * dz * dw
        for lab in (0, 1):
            sigma = spec.sigma(lab)
            if sigma is None:
                continue
            for z, w in itertools.combinations(range(G), 2):
                dz, dw = label_size[z][lab], label_size[w][lab]
                diff = Q[qi[("nonab", z, lab)]] * dw - Q[qi[("nonab", w, lab)]] * dz
                ok &= np.abs(diff) * sigma.denominator <= sigma.numerator * dz * dw
        if floors is not None:
            for z in range(G):
                fl = floors[z]
                ok &= Q[qi[("wrong", z)]] * fl.denominator >= fl.numerator * size[z]
        return ok

    err_rows = [qi[("err", z)] for z in range(G)]
    best_obj, best_state = None, None
    for outer in itertools.product(range(4), repeat=n_outer):
        offset = np.zeros(len(names), dtype=np.int64)
        for n, s in enumerate(outer):
            offset += table[:, n, s]
        Q = inner + offset[:, None]
        mask = feasible_mask(Q)
        if not mask.any():
            continue
        obj = Q[err_rows].sum(axis=0)
        obj = np.where(mask, obj, np.iinfo(np.int64).max)
        j = int(np.argmin(obj))
        if best_obj is None or obj[j] < best_obj:
            best_obj, best_state = int(obj[j]), (outer, j)

    if best_state is None:
        return IpSolution(INFEASIBLE, None, None)
    outer, j = best_state
    inner_states = []
    for _ in range(k_inner):
        inner_states.append(j % 4)
        j //= 4
    full = list(outer) + inner_states[::-1]
    st = np.array(full, dtype=np.int64)
    decisions = DecisionVector(st >> 1, st & 1, b)
    cells = build_cells(g, y, b, np.zeros(N), G)
    counts = counts_from_decisions(decisions, cells)
    return IpSolution(OPTIMAL, counts, best_obj, decisions=decisions)


# -- McCormick linearisation ---------------------------------------------------------


@dataclass
class LinearizedSystem:
    """Per-sample linear IP with ``u_n = yhat_n * omega_n`` encoded by four
    McCormick rows; ``yhat_n`` is affine in the flip bit ``f_n``.

    Variables are ordered ``omega_0..omega_{N-1}, f_0.., u_0..``. Each row is
    ``(coef, rhs)`` meaning ``coef @ v <= rhs``.
    """

    base_pred: np.ndarray
    rows: List[tuple]

    @property
    def n(self):
        return len(self.base_pred)

    def omega(self, i):
        return i

    def f(self, i):
        return self.n + i

    def u(self, i):
        return 2 * self.n + i

    def yhat_affine(self, i):
        """(constant, coefficient on f_i) of the final label."""
        b = int(self.base_pred[i])
        return b, 1 - 2 * b

    def satisfied(self, v) -> bool:
        v = np.asarray(v, dtype=float)
        return all(coef @ v <= rhs + 1e-12 for coef, rhs in self.rows)


def mccormick_linearize(pred_labels) -> LinearizedSystem:
    b = np.asarray(pred_labels, dtype=np.int64)
    if not np.isin(b, (0, 1)).all():
        raise DomainError("baseline predictions must be binary")
    n = len(b)
    rows = []
    system = LinearizedSystem(b, rows)
    for i in range(n):
        const, fc = system.yhat_affine(i)
        w, f, u = system.omega(i), system.f(i), system.u(i)

        def row(entries, rhs):
            coef = np.zeros(3 * n)
            for k, v in entries:
                coef[k] += v
            rows.append((coef, float(rhs)))

        row([(u, -1)], 0)                               # u >= 0
        row([(u, 1), (w, -1)], 0)                       # u <= omega
        row([(u, 1), (f, -fc)], const)                  # u <= yhat
        row([(u, -1), (f, fc), (w, 1)], 1 - const)      # u >= yhat + omega - 1
    return system


def solve_linearized(groups, labels, pred_labels, errors: GroupErrorRates, spec: ConstraintSpec,
                     n_groups: Optional[int] = None, node_limit: int = 200000) -> IpSolution:
    """Per-sample IP over (omega, f, u) with McCormick rows, solved by the same
    branch-and-bound. Meant for small cross-checks; cost grows with N."""
    g = np.asarray(groups, dtype=np.int64)
    y = np.asarray(labels, dtype=np.int64)
    system = mccormick_linearize(pred_labels)
    N = system.n
    G = n_groups if n_groups is not None else int(g.max()) + 1
    cells = build_cells(g, y, system.base_pred, np.zeros(N), G)
    stats = GroupStats(tuple(int(np.sum(g == z)) for z in range(G)),
                       tuple((int(np.sum((g == z) & (y == 0))), int(np.sum((g == z) & (y == 1))))
                             for z in range(G)))
    nv = 3 * N
    rows = []

    def lin(pairs, const=0):
        return _Lin({k: Fraction(v) for k, v in pairs}, const)

    for coef, rhs in system.rows:
        rows.append(("mccormick", _Lin({k: Fraction(int(v)) for k, v in enumerate(coef) if v}, -int(rhs))))

    def wrong_kept(i):
        # omega * [yhat != y] = y*omega + (1 - 2y) u
        return lin([(system.omega(i), y[i]), (system.u(i), 1 - 2 * y[i])])

    def accepted(i):
        return lin([(system.u(i), 1)])

    def yhat(i):
        const, fc = system.yhat_affine(i)
        return lin([(system.f(i), fc)], const)

    deltas, etas = spec.deltas(G), spec.etas(G)
    members = [np.flatnonzero(g == z) for z in range(G)]
    for z in range(G):
        abst = sum((1 - lin([(system.omega(i), 1)]) for i in members[z]), _Lin())
        rows.append(("abstention_rate", abst - deltas[z] * stats.sizes[z]))
        errs = sum((wrong_kept(i) for i in members[z]), _Lin())
        rows.append(("no_harm", errs - errors.e_prime(z, etas[z]) * (stats.sizes[z] - abst)))
    eps = spec.eps_exact
    for kind in fairness_kinds(spec.fairness):
        num, den = {}, {}
        for z in range(G):
            den[z] = _rate_den(kind, stats, z)
            terms = []
            for i in members[z]:
                if kind == "DP":
                    terms.append(accepted(i))
                elif kind == "TPR" and y[i] == 1:
                    terms.append(accepted(i))
                elif kind == "TNR" and y[i] == 0:
                    terms.append(lin([(system.omega(i), 1), (system.u(i), -1)]))
            num[z] = sum(terms, _Lin())
        for z, w in itertools.combinations(range(G), 2):
            diff = num[z] * den[w] - num[w] * den[z]
            lim = eps * den[z] * den[w]
            rows.append(("disparity", diff - lim))
            rows.append(("disparity", -diff - lim))
    for lab in (0, 1):
        sigma = spec.sigma(lab)
        if sigma is None:
            continue
        num, den = {}, {}
        for z in range(G):
            den[z] = _need(stats.label_counts[z][lab], f"group {z} with label {lab}")
            num[z] = sum((lin([(system.omega(i), 1)]) for i in members[z] if y[i] == lab), _Lin())
        for z, w in itertools.combinations(range(G), 2):
            diff = num[z] * den[w] - num[w] * den[z]
            lim = sigma * den[z] * den[w]
            rows.append(("equal_abstention", diff - lim))
            rows.append(("equal_abstention", -diff - lim))
    floors = spec.floors(errors)
    if floors is not None:
        for z in range(G):
            if spec.non_triviality_scope == "all":
                # [yhat != y] = yhat (1 - 2y) + y
                wrong = sum((yhat(i) * (1 - 2 * int(y[i])) + int(y[i]) for i in members[z]), _Lin())
            else:
                wrong = sum((wrong_kept(i) for i in members[z]), _Lin())
            rows.append(("non_triviality", floors[z] * stats.sizes[z] - wrong))

    objective = sum((wrong_kept(i) for i in range(N)), _Lin())
    program = _Program(nv, [f"v{i}" for i in range(nv)], [1] * nv, rows, objective)

    def to_decisions(v):
        return DecisionVector(v[:N], v[N:2 * N], system.base_pred)

    def accept(v):
        if not system.satisfied(v):
            return False, math.inf
        if not np.array_equal(v[2 * N:], v[:N] * (system.base_pred ^ v[N:2 * N])):
            return False, math.inf
        dv = to_decisions(v)
        counts = counts_from_decisions(dv, cells)
        if verify_solution(counts, cells, stats, spec, errors):
            return False, math.inf
        return True, counts_objective(counts, cells)

    c, A, b = program.dense()
    res = branch_and_bound(c, A, b, program.ub, accept, const=float(objective.const), node_limit=node_limit)
    if res.status == "infeasible":
        return IpSolution(INFEASIBLE, None, None, nodes=res.nodes)
    if res.x is None:
        raise SolverError("node limit reached without a feasible point")
    dv = to_decisions(res.x)
    counts = counts_from_decisions(dv, cells)
    status = OPTIMAL if res.status == "optimal" else BEST_EFFORT
    return IpSolution(status, counts, res.objective, bound=res.bound, nodes=res.nodes, decisions=dv)
