"""Exact min-max solutions of matrix games, with cross-validated uniqueness.

Two independent solvers: a simplex-LP route (works at any size) and full
support enumeration (small games). They are kept separate on purpose so each
can serve as ground truth for the other and for every convergence
measurement downstream.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from .game import MatrixGame, SimplexPoint, epsilon_gap, payoff
from .lp import LPNumericalError, solve_inequality_form, solve_standard_form

EQ_GAP_TOL = 1e-9
DEDUP_TOL = 1e-8
MARGIN_TOL = 1e-9
# width of a coordinate range over the optimal face above which the
# equilibrium set is provably not a singleton
WIDTH_UNIQUE = 1e-9
WIDTH_NONUNIQUE = 1e-7
# largest number of bordered systems the enumeration path may solve before
# uniqueness checking falls back to the LP face probes
ENUM_BUDGET = 40_000


class DimensionError(ValueError):
    """Game too large for exhaustive support enumeration."""


class IndeterminateUniquenessError(RuntimeError):
    """Degeneracy beyond tolerance: uniqueness cannot be decided numerically."""


@dataclass(frozen=True)
class Equilibrium:
    """Optimal pair (x*, y*) with the game value and both supports."""

    x_star: SimplexPoint
    y_star: SimplexPoint
    value: float
    support_x: tuple[int, ...]
    support_y: tuple[int, ...]
    unique: bool


def _clean_probs(p: np.ndarray) -> np.ndarray:
    """Zero out solver dust and renormalize to an exact unit sum."""
    q = np.where(p > 1e-11, p, 0.0)
    return q / q.sum()


def _make_equilibrium(game: MatrixGame, x: np.ndarray, y: np.ndarray, unique: bool) -> Equilibrium:
    xs = SimplexPoint(_clean_probs(x))
    ys = SimplexPoint(_clean_probs(y))
    return Equilibrium(
        x_star=xs,
        y_star=ys,
        value=payoff(game, xs, ys),
        support_x=xs.support,
        support_y=ys.support,
        unique=unique,
    )


def _indifference_solve(block: np.ndarray):
    """Solve  B.y = v.1, sum(y) = 1  for (y, v); None when singular.

    ``block`` is the payoff submatrix on a candidate support pair; the same
    bordered system with ``block.T`` recovers the other player.
    """
    k = block.shape[0]
    bordered = np.zeros((k + 1, k + 1))
    bordered[:k, :k] = block
    bordered[:k, k] = -1.0
    bordered[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.solve(bordered, rhs)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(sol)):
        return None
    # reject solutions from nearly singular systems
    if np.abs(bordered @ sol - rhs).max() > 1e-8:
        return None
    return sol[:k], float(sol[k])


def _polish_on_supports(game: MatrixGame, supp_x, supp_y):
    """Re-solve the indifference systems on fixed supports to machine precision."""
    if len(supp_x) != len(supp_y):
        return None
    a = game.payoffs
    block = a[np.ix_(supp_x, supp_y)]
    got_y = _indifference_solve(block)
    got_x = _indifference_solve(block.T)
    if got_y is None or got_x is None:
        return None
    y_s, v_y = got_y
    x_s, v_x = got_x
    if abs(v_x - v_y) > 1e-7 or y_s.min() < -1e-9 or x_s.min() < -1e-9:
        return None
    x = np.zeros(game.n_rows)
    y = np.zeros(game.n_cols)
    x[list(supp_x)] = np.clip(x_s, 0.0, None)
    y[list(supp_y)] = np.clip(y_s, 0.0, None)
    return x / x.sum(), y / y.sum()


def solve_lp(game: MatrixGame, check_unique: bool = True) -> Equilibrium:
    """Solve the game with the simplex method on the classic shifted LP pair.

    The payoffs are shifted positive so the value is positive, each player's
    normalized LP is solved independently, and the two optima must agree
    (minimax duality) to 1e-9. The vertex solution is then polished by
    re-solving the support indifference system.
    """
    a = game.payoffs
    n, m = a.shape
    shift = 1.0 + max(0.0, -float(a.min()))
    pos = a + shift

    # min player: maximize sum(w) s.t. pos.w <= 1  ->  min -sum(w)
    col_lp = solve_standard_form(
        np.concatenate([-np.ones(m), np.zeros(n)]),
        np.hstack([pos, np.eye(n)]),
        np.ones(n),
    )
    # max player: minimize sum(u) s.t. pos^T.u >= 1
    row_lp = solve_standard_form(
        np.concatenate([np.ones(n), np.zeros(m)]),
        np.hstack([pos.T, -np.eye(m)]),
        np.ones(m),
    )
    w_sum = col_lp.z[:m].sum()
    u_sum = row_lp.z[:n].sum()
    if w_sum <= 0 or u_sum <= 0:
        raise LPNumericalError(f"degenerate normalizers: {w_sum:g}, {u_sum:g}")
    gap = abs(1.0 / w_sum - 1.0 / u_sum)
    if gap > 1e-9 * (1.0 + game.max_abs_payoff):
        raise LPNumericalError(f"primal/dual optima differ by {gap:g}")

    x = row_lp.z[:n] / u_sum
    y = col_lp.z[:m] / w_sum
    x = _clean_probs(x)
    y = _clean_probs(y)

    polished = _polish_on_supports(game, np.flatnonzero(x > 0), np.flatnonzero(y > 0))
    if polished is not None:
        px, py = polished
        if epsilon_gap(game, px, py) <= max(EQ_GAP_TOL, epsilon_gap(game, x, y)):
            x, y = px, py

    residual = epsilon_gap(game, x, y)
    if residual > EQ_GAP_TOL * (1.0 + game.max_abs_payoff):
        raise LPNumericalError(
            f"solution fails the equilibrium check: gap {residual:g}, "
            f"duality gap {gap:g}, pivots {col_lp.pivots + row_lp.pivots}"
        )
    eq = _make_equilibrium(game, x, y, unique=False)
    if check_unique:
        eq = replace(eq, unique=_is_unique(game, eq))
    return eq


def _enumeration_workload(n: int, m: int) -> int:
    from math import comb

    return sum(comb(n, k) * comb(m, k) for k in range(1, min(n, m) + 1))


def solve_support_enum(game: MatrixGame, max_dim: int = 12) -> list[Equilibrium]:
    """Enumerate all support pairs and return every extreme equilibrium.

    For each equal-size support pair the two bordered indifference systems
    are solved; candidates must be nonnegative, agree on the value, and
    survive the best-response check against all pure strategies. Results are
    deduplicated at sup-norm distance 1e-8, in lexicographic support order.
    """
    a = game.payoffs
    n, m = a.shape
    if max(n, m) > max_dim:
        raise DimensionError(f"{n}x{m} exceeds max_dim={max_dim}")
    found: list[tuple[np.ndarray, np.ndarray]] = []
    for k in range(1, min(n, m) + 1):
        for supp_x in itertools.combinations(range(n), k):
            rows = a[list(supp_x), :]
            for supp_y in itertools.combinations(range(m), k):
                block = rows[:, list(supp_y)]
                got_y = _indifference_solve(block)
                if got_y is None:
                    continue
                y_s, v = got_y
                if y_s.min() < -1e-9:
                    continue
                got_x = _indifference_solve(block.T)
                if got_x is None:
                    continue
                x_s, v2 = got_x
                if x_s.min() < -1e-9 or abs(v - v2) > 1e-8:
                    continue
                x = np.zeros(n)
                y = np.zeros(m)
                x[list(supp_x)] = np.clip(x_s, 0.0, None)
                y[list(supp_y)] = np.clip(y_s, 0.0, None)
                x /= x.sum()
                y /= y.sum()
                if (a @ y).max() > v + 1e-9 or (a.T @ x).min() < v - 1e-9:
                    continue
                if any(
                    np.abs(x - fx).max() <= DEDUP_TOL and np.abs(y - fy).max() <= DEDUP_TOL
                    for fx, fy in found
                ):
                    continue
                found.append((x, y))
    unique = len(found) == 1
    return [_make_equilibrium(game, x, y, unique) for x, y in found]


def _strict_complementarity(game: MatrixGame, eq: Equilibrium):
    """True/False when the fast certificate decides, None when it cannot.

    Strict complementarity with equal square supports and a well-conditioned
    bordered system pins the equilibrium down uniquely: any optimal x must
    live on supp(x*) and satisfy the same indifference equations.
    """
    a = game.payoffs
    x = eq.x_star.probs
    y = eq.y_star.probs
    scale = 1.0 + game.max_abs_payoff
    ay = a @ y
    atx = a.T @ x
    off_x = np.setdiff1d(np.arange(game.n_rows), eq.support_x)
    off_y = np.setdiff1d(np.arange(game.n_cols), eq.support_y)
    margin = np.inf
    if off_x.size:
        margin = min(margin, (eq.value - ay[off_x]).min())
    if off_y.size:
        margin = min(margin, (atx[off_y] - eq.value).min())
    mass = min(x[list(eq.support_x)].min(), y[list(eq.support_y)].min())
    if len(eq.support_x) != len(eq.support_y):
        return None
    block = a[np.ix_(eq.support_x, eq.support_y)]
    k = block.shape[0]
    bordered = np.zeros((k + 1, k + 1))
    bordered[:k, :k] = block
    bordered[:k, k] = -1.0
    bordered[k, :k] = 1.0
    if np.linalg.matrix_rank(bordered, tol=1e-10 * scale) < k + 1:
        return None
    if margin > MARGIN_TOL * scale and mass > MARGIN_TOL:
        return True
    return None


def _face_widths(game: MatrixGame, eq: Equilibrium):
    """Largest coordinate range over each player's optimal face.

    The max player's optimal set is {x in simplex : A^T x >= v}, the min
    player's is {y in simplex : A y <= v}; both are probed coordinate by
    coordinate with a tiny relaxation of v to absorb roundoff.
    """
    a = game.payoffs
    probes = (
        (-a.T, np.full(game.n_cols, -(eq.value - MARGIN_TOL)), game.n_rows),
        (a, np.full(game.n_rows, eq.value + MARGIN_TOL), game.n_cols),
    )
    widest = 0.0
    for a_ub, b_ub, size in probes:
        a_eq = np.ones((1, size))
        b_eq = np.ones(1)
        for i in range(size):
            c = np.zeros(size)
            c[i] = 1.0
            hi = solve_inequality_form(c, a_ub, b_ub, a_eq, b_eq, maximize=True).value
            lo = solve_inequality_form(c, a_ub, b_ub, a_eq, b_eq, maximize=False).value
            widest = max(widest, hi - lo)
            if widest > WIDTH_NONUNIQUE:
                return widest
    return widest


def _is_unique(game: MatrixGame, eq: Equilibrium) -> bool:
    fast = _strict_complementarity(game, eq)
    if fast is not None:
        return fast
    if _enumeration_workload(game.n_rows, game.n_cols) <= ENUM_BUDGET:
        return len(solve_support_enum(game, max_dim=max(game.n_rows, game.n_cols))) == 1
    width = _face_widths(game, eq)
    if width <= WIDTH_UNIQUE:
        return True
    if width >= WIDTH_NONUNIQUE:
        return False
    raise IndeterminateUniquenessError(
        f"optimal-face coordinate width {width:g} is inside the numerical gray zone"
    )


def check_uniqueness(game: MatrixGame) -> bool:
    """Whether the game's equilibrium set is a singleton.

    Small games are decided by exhaustive support enumeration; larger ones by
    strict complementarity of the LP solution plus coordinate-range probes
    over the optimal face (raising IndeterminateUniquenessError inside the
    degenerate gray zone).
    """
    if _enumeration_workload(game.n_rows, game.n_cols) <= ENUM_BUDGET:
        return len(solve_support_enum(game, max_dim=max(game.n_rows, game.n_cols))) == 1
    return solve_lp(game, check_unique=True).unique
