"""Best-first branch-and-bound over bounded integer variables.

LP relaxations are solved in floating point; every candidate integer point is
handed to an exact acceptance callback, so floats only steer the search.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from fairabstain.simplex import linprog

INT_TOL = 1e-6


@dataclass
class BnbResult:
    status: str  # "optimal" | "infeasible" | "node_limit"
    x: Optional[np.ndarray] = None
    objective: Optional[int] = None
    bound: Optional[float] = None
    nodes: int = 0
    root_lp: str = ""
    skipped: int = 0
    log: list = field(default_factory=list)


def _lp(c, A_ub, b_ub, lb, ub):
    n = len(c)
    eye = np.eye(n)
    rows = [A_ub, eye]
    rhs = [b_ub, ub.astype(float)]
    low = lb > 0
    if low.any():
        rows.append(-eye[low])
        rhs.append(-lb[low].astype(float))
    return linprog(c, np.vstack(rows), np.concatenate(rhs))


def branch_and_bound(c, A_ub, b_ub, ub, accept: Callable[[np.ndarray], Tuple[bool, int]],
                     const: float = 0.0, node_limit: int = 20000, priority=None) -> BnbResult:
    """Minimise ``const + c @ x`` over integers ``0 <= x <= ub`` with
    ``A_ub @ x <= b_ub``.

    ``accept(x)`` returns ``(feasible, objective)`` computed exactly. The
    objective is assumed integral, which lets a node be pruned once its LP
    bound rounds up to the incumbent. Branching picks the most fractional
    variable, lowest index on ties, among the fractional variables with the
    smallest ``priority`` value (all equal by default).
    """
    c = np.asarray(c, dtype=float)
    A_ub = np.asarray(A_ub, dtype=float).reshape(-1, len(c))
    b_ub = np.asarray(b_ub, dtype=float)
    ub = np.asarray(ub, dtype=np.int64)
    lb0 = np.zeros_like(ub)
    priority = np.zeros(len(c), dtype=np.int64) if priority is None else np.asarray(priority, dtype=np.int64)

    best_x, best_obj = None, math.inf
    counter = 0
    heap = [(-math.inf, counter, lb0, ub)]
    nodes = 0
    skipped = 0
    root_status = ""
    open_bound = -math.inf

    def prunable(bound):
        if not math.isfinite(bound) or not math.isfinite(best_obj):
            return bound >= best_obj
        return math.ceil(bound - INT_TOL) >= best_obj

    while heap:
        bound, _, lb, hi = heapq.heappop(heap)
        if prunable(bound):
            continue
        if nodes >= node_limit:
            heapq.heappush(heap, (bound, -1, lb, hi))
            break
        nodes += 1
        res = _lp(c, A_ub, b_ub, lb, hi)
        if not root_status:
            root_status = res.status
        if res.status != "optimal":
            continue
        val = const + res.fun
        if prunable(val):
            continue
        x = res.x
        xr = np.clip(np.rint(x), lb, hi).astype(np.int64)
        ok, obj = accept(xr)
        if ok and obj < best_obj:
            best_x, best_obj = xr, obj
            if prunable(val):
                continue
        frac = np.abs(x - np.rint(x))
        fractional = frac > INT_TOL
        if fractional.any():
            level = priority[fractional].min()
            frac = np.where(fractional & (priority == level), frac, 0.0)
        j = int(np.argmax(frac))
        if frac[j] <= INT_TOL:
            if not ok:
                # LP point is integral within tolerance but fails the exact
                # check: a pure rounding artefact, nothing left to branch on.
                skipped += 1
            continue
        down_hi = hi.copy()
        down_hi[j] = math.floor(x[j])
        up_lb = lb.copy()
        up_lb[j] = math.ceil(x[j])
        for child_lb, child_hi in ((lb, down_hi), (up_lb, hi)):
            if (child_lb <= child_hi).all():
                counter += 1
                heapq.heappush(heap, (val, counter, child_lb, child_hi))

    if heap:
        open_bound = min(b for b, *_ in heap)
    if best_x is None:
        if heap:
            return BnbResult("node_limit", nodes=nodes, bound=open_bound, root_lp=root_status, skipped=skipped)
        return BnbResult("infeasible", nodes=nodes, root_lp=root_status, skipped=skipped)
    if heap and not prunable(open_bound):
        return BnbResult("node_limit", best_x, int(best_obj), open_bound, nodes, root_status, skipped)
    return BnbResult("optimal", best_x, int(best_obj), float(best_obj), nodes, root_status, skipped)
