"""Learning dynamics on the simplex: optimistic MWU, its linear variant, and
plain MWU, plus the iteration driver with KL/closeness instrumentation.

Every step function maps the quadruple (current x, current y, previous x,
previous y) to the next quadruple, so one application is exactly one step of
the underlying two-player update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .game import MatrixGame, alpha_closeness, epsilon_gap
from .oracle import Equilibrium

METHODS = ("omwu", "omwu-linear", "mwu")


class StepSizeTooLargeError(ValueError):
    """A linear-variant weight would be nonpositive at this stepsize."""


@dataclass(frozen=True)
class DynamicsState:
    """Quadruple state (x, y fast slots; previous x, y anchor slots)."""

    x_cur: np.ndarray
    y_cur: np.ndarray
    x_prev: np.ndarray
    y_prev: np.ndarray

    @classmethod
    def uniform(cls, n: int, m: int) -> "DynamicsState":
        x = np.full(n, 1.0 / n)
        y = np.full(m, 1.0 / m)
        return cls(x, y, x.copy(), y.copy())

    @classmethod
    def from_pair(cls, x, y) -> "DynamicsState":
        """Duplicate a starting pair into both time slots."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return cls(x, y, x.copy(), y.copy())

    def components(self):
        return (self.x_cur, self.y_cur, self.x_prev, self.y_prev)

    def as_vector(self) -> np.ndarray:
        return np.concatenate(self.components())

    @classmethod
    def from_vector(cls, vec: np.ndarray, n: int, m: int) -> "DynamicsState":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (2 * (n + m),):
            raise ValueError(f"expected vector of length {2 * (n + m)}, got {vec.shape}")
        return cls(vec[:n], vec[n : n + m], vec[n + m : 2 * n + m], vec[2 * n + m :])

    def validate(self, tol: float = 1e-12) -> None:
        for name, p in zip(("x_cur", "y_cur", "x_prev", "y_prev"), self.components()):
            if np.any(p < 0):
                raise ValueError(f"{name} has a negative coordinate")
            if abs(p.sum() - 1.0) > tol:
                raise ValueError(f"{name} sums to {p.sum()!r}")


# masses below this are flushed to exact zero after renormalization; they are
# invisible at double precision but would otherwise drift into subnormal
# territory, where arithmetic runs an order of magnitude slower
FLUSH_TOL = 1e-306


def _reweight_exp(p: np.ndarray, exponents: np.ndarray):
    """Multiplicative update p_i * exp(e_i), renormalized.

    Exponentials are taken after subtracting the max exponent; the normalized
    update is invariant to the shift, so this never overflows. Returns the
    new vector and the unshifted normalizer sum(p_i * exp(e_i)).
    """
    shift = exponents.max()
    w = p * np.exp(exponents - shift)
    total = w.sum()
    out = w / total
    out[out < FLUSH_TOL] = 0.0
    return out, float(total * math.exp(shift))


def _omwu_arrays(x, y, xp, yp, a, eta):
    ex = 2.0 * eta * (a @ y) - eta * (a @ yp)
    ey = -2.0 * eta * (a.T @ x) + eta * (a.T @ xp)
    x_new, norm_x = _reweight_exp(x, ex)
    y_new, norm_y = _reweight_exp(y, ey)
    return x_new, y_new, norm_x, norm_y


def _mwu_arrays(x, y, a, eta):
    x_new, norm_x = _reweight_exp(x, eta * (a @ y))
    y_new, norm_y = _reweight_exp(y, -eta * (a.T @ x))
    return x_new, y_new, norm_x, norm_y


def _linear_arrays(x, y, xp, yp, a, eta):
    wx = 1.0 + 2.0 * eta * (a @ y) - eta * (a @ yp)
    wy = 1.0 - 2.0 * eta * (a.T @ x) + eta * (a.T @ xp)
    low = min(wx.min(), wy.min())
    if low <= 0.0:
        raise StepSizeTooLargeError(
            f"eta={eta:g} drives a linear-update weight to {low:g}; "
            f"need eta < 1/(3*max|A|)"
        )
    x_new = x * wx
    norm_x = float(x_new.sum())
    y_new = y * wy
    norm_y = float(y_new.sum())
    x_new /= norm_x
    y_new /= norm_y
    x_new[x_new < FLUSH_TOL] = 0.0
    y_new[y_new < FLUSH_TOL] = 0.0
    return x_new, y_new, norm_x, norm_y


def omwu_step(state: DynamicsState, game: MatrixGame, eta: float) -> DynamicsState:
    """One optimistic multiplicative-weights step on the quadruple.

    The new x is proportional to x_i * exp(2*eta*(A y)_i - eta*(A y_prev)_i)
    and symmetrically (with flipped signs) for y; current slots move into the
    anchor slots.
    """
    x, y, _, _ = _omwu_arrays(state.x_cur, state.y_cur, state.x_prev, state.y_prev, game.payoffs, eta)
    return DynamicsState(x, y, state.x_cur, state.y_cur)


def mwu_step(state: DynamicsState, game: MatrixGame, eta: float) -> DynamicsState:
    """Plain multiplicative-weights step; anchor slots mirror the OMWU
    bookkeeping so every method shares one trajectory logger."""
    x, y, _, _ = _mwu_arrays(state.x_cur, state.y_cur, game.payoffs, eta)
    return DynamicsState(x, y, state.x_cur, state.y_cur)


def linear_omwu_step(state: DynamicsState, game: MatrixGame, eta: float) -> DynamicsState:
    """First-order (in eta) variant of the optimistic step.

    Weights are 1 + 2*eta*(A y)_i - eta*(A y_prev)_i; raises
    StepSizeTooLargeError when any weight is nonpositive.
    """
    x, y, _, _ = _linear_arrays(state.x_cur, state.y_cur, state.x_prev, state.y_prev, game.payoffs, eta)
    return DynamicsState(x, y, state.x_cur, state.y_cur)


_STEPS = {"omwu": omwu_step, "omwu-linear": linear_omwu_step, "mwu": mwu_step}


def kl_divergence(eq: Equilibrium, x, y) -> float:
    """Sum of the two KL divergences from the equilibrium to the iterate.

    Coordinates outside the equilibrium support contribute nothing; an
    iterate with zero mass on a support coordinate yields +inf.
    """
    total = 0.0
    for target, probs in ((eq.x_star.probs, np.asarray(x, float)), (eq.y_star.probs, np.asarray(y, float))):
        mask = target > 0
        if np.any(probs[mask] <= 0.0):
            return math.inf
        t = target[mask]
        total += float(t @ (np.log(t) - np.log(probs[mask])))
    return max(total, 0.0)


def l1_to_equilibrium(eq: Equilibrium, x, y) -> float:
    return float(np.abs(eq.x_star.probs - x).sum() + np.abs(eq.y_star.probs - y).sum())


@dataclass(frozen=True)
class RunConfig:
    """Driver settings for a single trajectory."""

    eta: float
    max_iters: int
    target_l1_error: float = 0.0
    method: str = "omwu"
    log_every: int = 1
    seed: int = 0
    stall_constant: float = 1.0
    # sweeps disable per-iteration KL tracking (their CSV has no KL column);
    # stall_iteration is then None and logged decrements are nan
    track_kl: bool = True

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"stepsize must lie in (0, 1), got {self.eta!r}")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.target_l1_error < 0:
            raise ValueError("target_l1_error must be nonnegative")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.log_every < 1:
            raise ValueError("log_every must be >= 1")


@dataclass(frozen=True)
class TrajectoryRecord:
    """Per-iteration diagnostics; the CSV log is these fields in order."""

    iter: int
    kl: float
    l1_error: float
    alpha: float
    epsilon: float
    value: float
    kl_decrement: float
    normalizer_x: float
    normalizer_y: float

    CSV_COLUMNS = ("iter", "kl", "l1_error", "alpha", "epsilon", "value", "kl_decrement", "normalizer_x", "normalizer_y")

    def csv_row(self) -> str:
        cells = [str(self.iter)]
        for name in self.CSV_COLUMNS[1:]:
            cells.append(f"{getattr(self, name):.17g}")
        return ",".join(cells)


@dataclass(frozen=True)
class RunResult:
    iterations: int
    converged: bool
    final: TrajectoryRecord
    stall_iteration: int | None
    method: str
    eta: float
    # first iteration at which each requested l1 threshold was reached
    # (None where never reached); parallel to run()'s l1_thresholds
    threshold_crossings: tuple | None = None


def write_trajectory_csv(path, records) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(TrajectoryRecord.CSV_COLUMNS) + "\n")
        for rec in records:
            fh.write(rec.csv_row() + "\n")


def run(game: MatrixGame, eq: Equilibrium, config: RunConfig, initial=None, l1_thresholds=None, jit=None):
    """Iterate the chosen method from the uniform (or a given interior) start.

    Stops when the l1 distance to the equilibrium reaches the target or
    max_iters is exhausted; hitting the cap is a normal outcome reported via
    converged=False. Returns (RunResult, records); records always include
    iteration 0 and the final iteration, plus every log_every-th one.

    The stall iteration is the first t >= 2 whose KL decrement exceeds
    -stall_constant * eta^3. The very first transition is skipped: starting
    from two identical copies of the initial point it gains
    ~eta^2/2 * sum_i x_i ((A y)_i - x.A y)^2 of divergence before the
    optimistic correction has a past gradient to work with.

    ``l1_thresholds`` optionally records the first iteration at which each
    given error level is reached, all within this single trajectory.

    ``jit`` selects the compiled inner loop (None = use it when available);
    the pure-numpy loop is the reference implementation and both are kept
    behaviorally identical.
    """
    a = np.ascontiguousarray(game.payoffs)
    at = np.ascontiguousarray(a.T)
    eta = config.eta
    method = config.method
    if method == "omwu-linear" and eta >= 1.0 / (3.0 * max(game.max_abs_payoff, 1e-300)):
        raise StepSizeTooLargeError(
            f"eta={eta:g} >= 1/(3*max|A|)={1.0 / (3.0 * game.max_abs_payoff):g}"
        )
    if initial is None:
        state = DynamicsState.uniform(game.n_rows, game.n_cols)
    else:
        state = DynamicsState.from_pair(*initial)
        state.validate()

    from . import _kernels

    use_jit = _kernels.HAVE_NUMBA if jit is None else (bool(jit) and _kernels.HAVE_NUMBA)

    x, y, xp, yp = (np.array(c) for c in state.components())
    ay, ayp = a @ y, a @ yp
    atx, atxp = at @ x, at @ xp
    x_star = eq.x_star.probs
    y_star = eq.y_star.probs
    sup_x = np.flatnonzero(x_star > 0)
    sup_y = np.flatnonzero(y_star > 0)
    tx, ty = x_star[sup_x], y_star[sup_y]
    kl_const = float(tx @ np.log(tx) + ty @ np.log(ty))

    def kl_now():
        xs, ys = x[sup_x], y[sup_y]
        if xs.min() <= 0.0 or ys.min() <= 0.0:
            return math.inf
        return max(kl_const - float(tx @ np.log(xs) + ty @ np.log(ys)), 0.0)

    def l1_now():
        return float(np.abs(x_star - x).sum() + np.abs(y_star - y).sum())

    records: list[TrajectoryRecord] = []

    def snapshot(t, kl, decrement, norm_x, norm_y):
        value = float(x @ ay)
        rec = TrajectoryRecord(
            iter=t,
            kl=kl,
            l1_error=l1_now(),
            alpha=max(
                float(np.minimum(x, np.abs(ay - value)).max()),
                float(np.minimum(y, np.abs(atx - value)).max()),
            ),
            epsilon=max(float(ay.max()) - value, value - float(atx.min()), 0.0),
            value=value,
            kl_decrement=decrement,
            normalizer_x=norm_x,
            normalizer_y=norm_y,
        )
        records.append(rec)
        return rec

    thresholds = [float(e) for e in l1_thresholds] if l1_thresholds is not None else None

    track_kl = config.track_kl
    kl_prev = kl_now()
    l1 = l1_now()
    crossings = None
    if thresholds is not None:
        crossings = [0 if l1 <= level else None for level in thresholds]
    last = snapshot(0, kl_prev, 0.0, 1.0, 1.0)
    converged = l1 <= config.target_l1_error
    done = converged or (crossings is not None and all(c is not None for c in crossings))
    stall: int | None = None
    stall_level = -config.stall_constant * eta**3
    t = 0

    if use_jit and not done and config.max_iters > 0:
        method_code = {"omwu": _kernels.METHOD_OMWU, "mwu": _kernels.METHOD_MWU, "omwu-linear": _kernels.METHOD_LINEAR}[method]
        thr_arr = np.array(thresholds if thresholds is not None else [], dtype=float)
        cross_arr = np.full(thr_arr.shape[0], -1, dtype=np.int64)
        if crossings is not None:
            for k, c in enumerate(crossings):
                if c is not None:
                    cross_arr[k] = c
        stall_code = -1
        while t < config.max_iters and not done:
            t_stop = min(config.max_iters, (t // config.log_every + 1) * config.log_every)
            (t, kl_prev, decrement, stall_code, norm_x, norm_y, converged, done, err) = _kernels.drive_chunk(
                a, x, y, xp, yp, ay, ayp, atx, atxp,
                sup_x, sup_y, tx, ty, kl_const, x_star, y_star,
                eta, method_code, t, t_stop,
                config.target_l1_error, kl_prev, stall_code, stall_level,
                thr_arr, cross_arr, track_kl,
            )
            if err:
                raise StepSizeTooLargeError(
                    f"eta={eta:g} drives a linear-update weight nonpositive at iteration {t}"
                )
            if t % config.log_every == 0 or done or t == config.max_iters:
                if track_kl:
                    last = snapshot(t, kl_prev, decrement, norm_x, norm_y)
                else:
                    last = snapshot(t, kl_now(), math.nan, norm_x, norm_y)
        stall = int(stall_code) if stall_code >= 0 else None
        if crossings is not None:
            crossings = [int(c) if c >= 0 else None for c in cross_arr]
    else:
        def note_crossings(t_now, l1_now_val):
            if crossings is None:
                return
            for k, level in enumerate(thresholds):
                if crossings[k] is None and l1_now_val <= level:
                    crossings[k] = t_now

        while t < config.max_iters and not done:
            if method == "omwu":
                x_new, norm_x = _reweight_exp(x, 2.0 * eta * ay - eta * ayp)
                y_new, norm_y = _reweight_exp(y, -2.0 * eta * atx + eta * atxp)
            elif method == "mwu":
                x_new, norm_x = _reweight_exp(x, eta * ay)
                y_new, norm_y = _reweight_exp(y, -eta * atx)
            else:
                x_new, y_new, norm_x, norm_y = _linear_arrays(x, y, xp, yp, a, eta)
            xp, yp, ayp, atxp = x, y, ay, atx
            x, y = x_new, y_new
            ay = a @ y
            atx = at @ x
            t += 1
            if track_kl:
                kl_cur = kl_now()
                decrement = kl_cur - kl_prev
                kl_prev = kl_cur
                if stall is None and t >= 2 and decrement > stall_level:
                    stall = t
            else:
                kl_cur = math.nan
                decrement = math.nan
            l1 = l1_now()
            note_crossings(t, l1)
            converged = l1 <= config.target_l1_error
            done = converged or (crossings is not None and all(c is not None for c in crossings))
            if t % config.log_every == 0 or done or t == config.max_iters:
                last = snapshot(t, kl_now() if not track_kl else kl_cur, decrement, norm_x, norm_y)

    result = RunResult(
        iterations=t,
        converged=converged,
        final=last,
        stall_iteration=stall,
        method=config.method,
        eta=eta,
        threshold_crossings=tuple(crossings) if crossings is not None else None,
    )
    return result, records


def kl_decrement_bound(state_next: DynamicsState, state: DynamicsState, game: MatrixGame, eta: float) -> float:
    """Leading term of the per-step KL decrease guarantee, for logging only.

    Evaluates -eta^2/2 times the mass-weighted squared optimistic-gradient
    deviations at ``state``; the unspecified higher-order corrections are
    taken as zero. ``state_next`` must be the successor of ``state``.
    """
    if not (
        np.array_equal(state_next.x_prev, state.x_cur)
        and np.array_equal(state_next.y_prev, state.y_cur)
    ):
        raise ValueError("states are not consecutive: anchor slots do not match")
    a = game.payoffs
    x, y, xp, yp = state.components()
    ay = a @ y
    ayp = a @ yp
    atx = a.T @ x
    atxp = a.T @ xp
    value = float(x @ ay)
    dev_x = 2.0 * ay - 2.0 * value - ayp + float(x @ ayp)
    dev_y = 2.0 * atx - 2.0 * value - atxp + float(xp @ ay)
    return -0.5 * eta**2 * (float(x @ dev_x**2) + float(y @ dev_y**2))


@dataclass(frozen=True)
class StepDistanceRow:
    eta: float
    exp_vs_state: float
    linear_vs_state: float
    exp_vs_linear: float


def step_distance_profile(game: MatrixGame, state: DynamicsState, etas) -> list[StepDistanceRow]:
    """l1 step lengths of the exponential and linear updates at each stepsize.

    The exponential and linear steps move O(eta) from the state and O(eta^2)
    from each other; the scaling acceptance test regresses these columns.
    """
    rows = []
    for eta in etas:
        if eta == 0.0:
            rows.append(StepDistanceRow(0.0, 0.0, 0.0, 0.0))
            continue
        s_exp = omwu_step(state, game, eta)
        s_lin = linear_omwu_step(state, game, eta)
        pair = lambda s: np.concatenate([s.x_cur, s.y_cur])
        base = pair(state)
        rows.append(
            StepDistanceRow(
                eta=float(eta),
                exp_vs_state=float(np.abs(pair(s_exp) - base).sum()),
                linear_vs_state=float(np.abs(pair(s_lin) - base).sum()),
                exp_vs_linear=float(np.abs(pair(s_exp) - pair(s_lin)).sum()),
            )
        )
    return rows
