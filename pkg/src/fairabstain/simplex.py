"""Dense two-phase tableau simplex (Bland's rule) for small LPs.

    minimize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                x >= 0
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

PIVOT_TOL = 1e-9


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded" | "iteration_limit"
    x: Optional[np.ndarray] = None
    fun: Optional[float] = None
    iterations: int = 0


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    col_vals = T[:, col].copy()
    col_vals[row] = 0.0
    T -= np.outer(col_vals, T[row])
    basis[row] = col


def _run(T, basis, n_cols, tol, max_iter):
    """Optimise the objective in the last row of ``T`` over the first
    ``n_cols`` columns. Returns (status, iterations)."""
    m = T.shape[0] - 1
    for it in range(max_iter):
        reduced = T[-1, :n_cols]
        candidates = np.flatnonzero(reduced < -tol)
        if len(candidates) == 0:
            return "optimal", it
        col = int(candidates[0])
        column = T[:m, col]
        pos = column > tol
        if not pos.any():
            return "unbounded", it
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / column[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + tol * max(1.0, abs(best)))
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, basis, row, col)
    return "iteration_limit", max_iter


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, tol=PIVOT_TOL, max_iter=5000) -> LpResult:
    c = np.asarray(c, dtype=float)
    n = len(c)
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)

    # Scale every row to unit max coefficient so one tolerance fits all rows.
    def scale(A, b):
        s = np.abs(A).max(axis=1) if len(A) else np.zeros(0)
        s = np.where(s > 0, s, 1.0)
        return A / s[:, None], b / s

    A_ub, b_ub = scale(A_ub, b_ub)
    A_eq, b_eq = scale(A_eq, b_eq)
    m_ub, m_eq = len(A_ub), len(A_eq)
    m = m_ub + m_eq

    # Columns: x (n) | slacks (m_ub) | artificials (m) | rhs
    n_art_start = n + m_ub
    T = np.zeros((m + 1, n + m_ub + m + 1))
    basis = np.zeros(m, dtype=np.int64)
    for i in range(m_ub):
        row, rhs = A_ub[i], b_ub[i]
        sign = 1.0 if rhs >= 0 else -1.0
        T[i, :n] = sign * row
        T[i, n + i] = sign
        T[i, -1] = sign * rhs
        if sign > 0:
            basis[i] = n + i
        else:
            T[i, n_art_start + i] = 1.0
            basis[i] = n_art_start + i
    for j in range(m_eq):
        i = m_ub + j
        sign = 1.0 if b_eq[j] >= 0 else -1.0
        T[i, :n] = sign * A_eq[j]
        T[i, -1] = sign * b_eq[j]
        T[i, n_art_start + i] = 1.0
        basis[i] = n_art_start + i

    artificial_rows = [i for i in range(m) if basis[i] >= n_art_start]
    iterations = 0
    if artificial_rows:
        # Phase 1: minimise the sum of artificials, expressed in reduced form.
        T[-1, :] = 0.0
        for i in artificial_rows:
            T[-1, :] -= T[i, :]
        for i in artificial_rows:
            T[-1, basis[i]] = 0.0
        status, it = _run(T, basis, n_art_start + m, tol, max_iter)
        iterations += it
        if status == "iteration_limit":
            return LpResult("iteration_limit", iterations=iterations)
        if -T[-1, -1] > tol * max(1.0, float(np.abs(T[:m, -1]).max(initial=0.0))) * 10:
            return LpResult("infeasible", iterations=iterations)
        # Drive remaining (zero-level) artificials out of the basis.
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= n_art_start:
                candidates = np.flatnonzero(np.abs(T[i, :n_art_start]) > tol)
                if len(candidates):
                    _pivot(T, basis, i, int(candidates[0]))
                else:
                    keep[i] = False
        if not keep.all():
            T = np.vstack([T[:m][keep], T[-1:]])
            basis = basis[keep]
            m = len(basis)

    # Phase 2 over original + slack columns only.
    T = np.hstack([T[:, :n_art_start], T[:, -1:]])
    T[-1, :] = 0.0
    T[-1, :n] = c
    for i in range(m):
        cb = T[-1, basis[i]]
        if cb != 0.0:
            T[-1, :] -= cb * T[i, :]
    status, it = _run(T, basis, n_art_start, tol, max_iter)
    iterations += it
    if status != "optimal":
        return LpResult(status, iterations=iterations)
    x = np.zeros(n_art_start)
    x[basis] = T[:m, -1]
    x = x[:n]
    return LpResult("optimal", x, float(c @ x), iterations)
