"""Dense two-phase primal simplex for the small linear programs in this package.

Solves   minimize c.z   subject to   A z = b,  z >= 0   on a full tableau.
Inequality constraints are handled by the caller via slack/surplus columns.
Pivoting uses Dantzig's rule with an automatic switch to Bland's rule after
a long degenerate stall, which guarantees termination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-9


class LPError(RuntimeError):
    """Base class for simplex failures."""


class LPInfeasibleError(LPError):
    pass


class LPUnboundedError(LPError):
    pass


class LPNumericalError(LPError):
    pass


@dataclass(frozen=True)
class LPSolution:
    z: np.ndarray
    value: float
    pivots: int


def _pivot(tab: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    factors = tab[:, col].copy()
    factors[row] = 0.0
    tab -= np.outer(factors, tab[row])
    # kill roundoff in the pivot column so later ratio tests stay clean
    tab[:, col] = 0.0
    tab[row, col] = 1.0
    basis[row] = col


def _run_simplex(tab: np.ndarray, basis: np.ndarray, n_cols: int, max_pivots: int) -> int:
    """Drive the tableau to optimality in place; returns pivot count.

    Layout: tab[:-1, :n_cols] is the constraint matrix, tab[:-1, -1] the rhs,
    tab[-1, :n_cols] the reduced costs, tab[-1, -1] minus the objective.
    """
    m = tab.shape[0] - 1
    pivots = 0
    stall = 0
    bland = False
    best_objective = tab[-1, -1]
    while pivots < max_pivots:
        costs = tab[-1, :n_cols]
        if bland:
            negative = np.flatnonzero(costs < -PIVOT_TOL)
            if negative.size == 0:
                return pivots
            col = int(negative[0])
        else:
            col = int(np.argmin(costs))
            if costs[col] >= -PIVOT_TOL:
                return pivots
        column = tab[:m, col]
        eligible = np.flatnonzero(column > PIVOT_TOL)
        if eligible.size == 0:
            raise LPUnboundedError("objective unbounded below")
        ratios = tab[eligible, -1] / column[eligible]
        best = ratios.min()
        ties = eligible[ratios <= best + 1e-15]
        # smallest basic-variable index among ties resists cycling
        row = int(ties[np.argmin(basis[ties])])
        _pivot(tab, basis, row, col)
        pivots += 1
        if tab[-1, -1] > best_objective + 1e-15:
            best_objective = tab[-1, -1]
            stall = 0
        else:
            stall += 1
            if not bland and stall > 2 * (m + n_cols):
                bland = True
    raise LPNumericalError(f"simplex did not terminate within {max_pivots} pivots")


def solve_standard_form(c, A, b, max_pivots: int | None = None) -> LPSolution:
    """Minimize c.z subject to A z = b, z >= 0 (rows with b < 0 are negated)."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    c = np.array(c, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    m, n = A.shape
    if b.shape != (m,) or c.shape != (n,):
        raise ValueError("inconsistent LP dimensions")
    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0
    if max_pivots is None:
        max_pivots = 200 * (m + n + 10)

    # phase 1: artificial identity basis, minimize the artificial mass
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = A
    tab[:m, n : n + m] = np.eye(m)
    tab[:m, -1] = b
    tab[-1, :n] = -A.sum(axis=0)
    tab[-1, -1] = -b.sum()
    basis = np.arange(n, n + m)
    pivots = _run_simplex(tab, basis, n + m, max_pivots)
    infeasibility = -tab[-1, -1]
    if infeasibility > FEAS_TOL * (1.0 + abs(b).sum()):
        raise LPInfeasibleError(f"phase-1 residual {infeasibility:g}")

    # drive any zero-level artificials out of the basis
    keep = np.ones(m, dtype=bool)
    for row in range(m):
        if basis[row] < n:
            continue
        candidates = np.flatnonzero(np.abs(tab[row, :n]) > PIVOT_TOL)
        if candidates.size:
            _pivot(tab, basis, row, int(candidates[0]))
        else:
            keep[row] = False  # redundant constraint
    if not keep.all():
        tab = np.vstack([tab[:m][keep], tab[-1:]])
        basis = basis[keep]
        m = int(keep.sum())

    # phase 2: real objective over the structural columns
    tab = np.hstack([tab[:, :n], tab[:, -1:]])
    tab[-1, :n] = c
    tab[-1, -1] = 0.0
    for row in range(m):
        coeff = c[basis[row]]
        if coeff != 0.0:
            tab[-1, :n] -= coeff * tab[row, :n]
            tab[-1, -1] -= coeff * tab[row, -1]
    pivots += _run_simplex(tab, basis, n, max_pivots)

    z = np.zeros(n)
    z[basis] = tab[:m, -1]
    z[z < 0] = 0.0  # roundoff only: rhs stays feasible up to 1e-15
    return LPSolution(z=z, value=float(c @ z), pivots=pivots)


def solve_inequality_form(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, maximize: bool = False) -> LPSolution:
    """Optimize c.z subject to A_ub z <= b_ub, A_eq z = b_eq, z >= 0.

    Inequalities get one slack column each; the reported solution drops the
    slacks. Used for the optimal-face probes in the uniqueness check.
    """
    c = np.array(c, dtype=float)
    n = c.size
    blocks = []
    rhs = []
    n_slack = 0
    if A_ub is not None:
        A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
        n_slack = A_ub.shape[0]
        blocks.append(np.hstack([A_ub, np.eye(n_slack)]))
        rhs.append(np.asarray(b_ub, dtype=float))
    if A_eq is not None:
        A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
        pad = np.zeros((A_eq.shape[0], n_slack))
        blocks.append(np.hstack([A_eq, pad]))
        rhs.append(np.asarray(b_eq, dtype=float))
    if not blocks:
        raise ValueError("no constraints")
    A_full = np.vstack(blocks)
    b_full = np.concatenate(rhs)
    c_full = np.concatenate([-c if maximize else c, np.zeros(n_slack)])
    sol = solve_standard_form(c_full, A_full, b_full)
    value = -sol.value if maximize else sol.value
    return LPSolution(z=sol.z[:n], value=value, pivots=sol.pivots)
