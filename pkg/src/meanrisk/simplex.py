"""Dense two-phase primal simplex kernel.

Every linear program in this package is solved here rather than by an
external solver.  The tableau method with Bland's pivoting rule is slow in
the worst case but terminates without cycling and produces bit-reproducible
pivot sequences, which the dual-theorem cross checks in the test suite rely
on.  Problem sizes are small (tens of variables, occasionally a few
hundred), so a dense float64 tableau is adequate.

``solve_lp`` accepts the general form

    min / max   c.x
    subject to  A_ub x <= b_ub,  A_eq x = b_eq,  lower <= x <= upper

and reduces it to standard form internally (nonnegative variables, equality
rows).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_RCOST_TOL = 1e-9   # reduced cost considered negative below -_RCOST_TOL
_PIVOT_TOL = 1e-10  # smallest admissible pivot magnitude
_PHASE1_TOL = 1e-8  # residual infeasibility treated as zero


class LPError(RuntimeError):
    """Solver failure (iteration budget exhausted or numerical breakdown)."""


@dataclass
class LPResult:
    status: str
    x: np.ndarray | None = None
    value: float | None = None


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] = T[row] / T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])


def _iterate(T: np.ndarray, basis: np.ndarray, cost: np.ndarray,
             ncols: int, max_iter: int) -> str:
    """Run simplex iterations on tableau T (columns 0..ncols-1 + rhs).

    Bland's rule: entering variable is the lowest-index column with a
    negative reduced cost; the leaving row breaks ratio ties by the lowest
    basis index.
    """
    for _ in range(max_iter):
        reduced = cost[:ncols] - cost[basis] @ T[:, :ncols]
        entering = -1
        for j in range(ncols):
            if reduced[j] < -_RCOST_TOL:
                entering = j
                break
        if entering < 0:
            return OPTIMAL
        col = T[:, entering]
        rows = np.where(col > _PIVOT_TOL)[0]
        if rows.size == 0:
            return UNBOUNDED
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12]
        leaving = ties[np.argmin(basis[ties])]
        basis[leaving] = entering
        _pivot(T, leaving, entering)
    raise LPError("simplex iteration budget exhausted")


def _solve_standard(c: np.ndarray, A: np.ndarray, b: np.ndarray,
                    max_iter: int) -> LPResult:
    """min c.x  s.t.  A x = b, x >= 0."""
    m, n = A.shape
    A = A.astype(float).copy()
    b = b.astype(float).copy()
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # Phase 1: artificial basis.
    T = np.hstack([A, np.eye(m), b[:, None]])
    basis = np.arange(n, n + m)
    cost1 = np.concatenate([np.zeros(n), np.ones(m)])
    status = _iterate(T, basis, cost1, n + m, max_iter)
    if status != OPTIMAL:  # pragma: no cover - phase 1 is bounded below
        raise LPError("phase 1 did not terminate at an optimum")
    if cost1[basis] @ T[:, -1] > _PHASE1_TOL:
        return LPResult(INFEASIBLE)

    # Drive leftover artificials out of the basis; drop redundant rows.
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if basis[i] >= n:
            row = T[i, :n]
            nz = np.where(np.abs(row) > _PIVOT_TOL)[0]
            if nz.size == 0:
                keep[i] = False
            else:
                basis[i] = nz[0]
                _pivot(T, i, nz[0])
    T = np.hstack([T[keep][:, :n], T[keep][:, -1:]])
    basis = basis[keep]

    cost2 = np.asarray(c, dtype=float)
    status = _iterate(T, basis, cost2, n, max_iter)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    x = np.zeros(n)
    x[basis] = T[:, -1]
    return LPResult(OPTIMAL, x, float(cost2 @ x))


def solve_lp(c,
             A_ub=None, b_ub=None,
             A_eq=None, b_eq=None,
             lower=None, upper=None,
             maximize: bool = False,
             max_iter: int | None = None) -> LPResult:
    """Solve a general-form LP.  Default bounds are x >= 0.

    Bounds may contain +/-inf entries; free and upper-bounded variables are
    shifted/split to reach standard form.  ``LPResult.x`` is reported in the
    original variables.
    """
    c = np.asarray(c, dtype=float)
    nvar = c.size
    lo = np.full(nvar, 0.0) if lower is None else np.broadcast_to(
        np.asarray(lower, dtype=float), (nvar,)).copy()
    hi = np.full(nvar, np.inf) if upper is None else np.broadcast_to(
        np.asarray(upper, dtype=float), (nvar,)).copy()
    if np.any(lo > hi):
        return LPResult(INFEASIBLE)

    A_ub = np.zeros((0, nvar)) if A_ub is None else np.atleast_2d(
        np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.atleast_1d(
        np.asarray(b_ub, dtype=float))
    A_eq = np.zeros((0, nvar)) if A_eq is None else np.atleast_2d(
        np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.atleast_1d(
        np.asarray(b_eq, dtype=float))

    # x = offset + S y with y >= 0; columns of S are +-e_j (free vars split).
    cols = []          # (orig_index, sign)
    offset = np.zeros(nvar)
    extra_rows = []    # two-sided bounds become y_j <= hi - lo rows
    for j in range(nvar):
        if np.isfinite(lo[j]):
            offset[j] = lo[j]
            cols.append((j, 1.0))
            if np.isfinite(hi[j]):
                extra_rows.append((len(cols) - 1, hi[j] - lo[j]))
        elif np.isfinite(hi[j]):
            offset[j] = hi[j]
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))

    ny = len(cols)

    def transform(M: np.ndarray) -> np.ndarray:
        out = np.zeros((M.shape[0], ny))
        for k, (j, s) in enumerate(cols):
            out[:, k] = s * M[:, j]
        return out

    cy = np.zeros(ny)
    for k, (j, s) in enumerate(cols):
        cy[k] = s * c[j]
    if maximize:
        cy = -cy

    Au = transform(A_ub)
    bu = b_ub - A_ub @ offset
    Ae = transform(A_eq)
    be = b_eq - A_eq @ offset
    for k, rhs in extra_rows:
        row = np.zeros(ny)
        row[k] = 1.0
        Au = np.vstack([Au, row])
        bu = np.append(bu, rhs)

    # Slacks turn inequality rows into equalities.
    mu = Au.shape[0]
    A_std = np.vstack([
        np.hstack([Au, np.eye(mu)]),
        np.hstack([Ae, np.zeros((Ae.shape[0], mu))]),
    ])
    b_std = np.concatenate([bu, be])
    c_std = np.concatenate([cy, np.zeros(mu)])

    if max_iter is None:
        max_iter = 2000 + 200 * (A_std.shape[0] + A_std.shape[1])
    res = _solve_standard(c_std, A_std, b_std, max_iter)
    if res.status != OPTIMAL:
        return LPResult(res.status)

    x = offset.copy()
    for k, (j, s) in enumerate(cols):
        x[j] += s * res.x[k]
    value = float(c @ x)
    return LPResult(OPTIMAL, x, value)
