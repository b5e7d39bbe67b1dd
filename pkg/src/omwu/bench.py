"""Random-game generation and the two experiment sweeps.

Games are generated from the Philox 4x64 counter-based generator so a seed
pins the matrix bit-for-bit. Trials are independent jobs run on a bounded
process pool; rows are ordered by (point, trial) before writing, so
parallelism never changes the output.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import RunConfig, run
from .game import MatrixGame
from .lp import LPError
from .oracle import IndeterminateUniquenessError, solve_lp

SWEEP_CSV_COLUMNS = ("point", "trial", "seed", "iterations", "converged", "final_l1_error", "wall_time_seconds")
DEFAULT_MAX_ITERS = 2_000_000


def gen_random_game(n: int, m: int, seed: int) -> MatrixGame:
    """n x m game with entries i.i.d. uniform on [-1, 1].

    Drawn from numpy's Philox (4x64 counter-based) bit generator keyed
    directly by ``seed``: the same seed always yields the identical matrix.
    """
    if n < 1 or m < 1:
        raise ValueError("game dimensions must be positive")
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    return MatrixGame(rng.uniform(-1.0, 1.0, size=(n, m)))


def trial_seed(master_seed: int, point_index: int, trial: int) -> int:
    """Deterministic per-trial seed derived from the sweep's master seed."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(point_index), int(trial)))
    return int(seq.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SweepConfig:
    """Settings shared by both sweeps; ``sizes`` drives the dimension sweep
    and ``errors`` the error sweep (set exactly the one you run)."""

    sizes: tuple = ()
    errors: tuple = ()
    eta: float = 0.01
    trials_per_point: int = 5
    seed: int = 0
    target_error: float = 0.1
    n_fixed: int = 50
    max_iters: int = DEFAULT_MAX_ITERS
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        object.__setattr__(self, "errors", tuple(float(e) for e in self.errors))
        if self.sizes and any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("sizes must be strictly increasing")
        if self.errors and any(b >= a for a, b in zip(self.errors, self.errors[1:])):
            raise ValueError("errors must be strictly decreasing (duplicates rejected)")
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be >= 1")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        if self.max_iters < 0 or self.n_fixed < 1 or self.jobs < 1:
            raise ValueError("max_iters, n_fixed and jobs must be positive")


@dataclass(frozen=True)
class SweepRow:
    point: float
    trial: int
    seed: int
    iterations: int
    converged: bool
    final_l1_error: float
    wall_time_seconds: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple

    def median_iterations_by_point(self) -> dict:
        by_point: dict = {}
        for row in self.rows:
            by_point.setdefault(row.point, []).append(row.iterations)
        return {p: float(np.median(v)) for p, v in sorted(by_point.items())}

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(SWEEP_CSV_COLUMNS) + "\n")
            for row in self.rows:
                point = str(int(row.point)) if float(row.point).is_integer() else f"{row.point:.17g}"
                fh.write(
                    f"{point},{row.trial},{row.seed},{row.iterations},"
                    f"{'true' if row.converged else 'false'},"
                    f"{row.final_l1_error:.17g},{row.wall_time_seconds:.6f}\n"
                )


def _dim_trial(args):
    n, trial, seed, eta, target, max_iters = args
    started = time.perf_counter()
    game = gen_random_game(n, n, seed)
    try:
        eq = solve_lp(game, check_unique=True)
        unique = eq.unique
    except (LPError, IndeterminateUniquenessError):
        unique = False
    if not unique:
        # skipped trial, recorded as data: no iterations, nothing converged
        return SweepRow(n, trial, seed, 0, False, float("nan"), time.perf_counter() - started)
    config = RunConfig(
        eta=eta, max_iters=max_iters, target_l1_error=target,
        log_every=max(max_iters, 1), seed=seed, track_kl=False,
    )
    result, _ = run(game, eq, config)
    return SweepRow(
        n, trial, seed, result.iterations, result.converged,
        result.final.l1_error, time.perf_counter() - started,
    )


def _err_trial(args):
    n, errors, trial, seed, eta, max_iters = args
    started = time.perf_counter()
    game = gen_random_game(n, n, seed)
    try:
        eq = solve_lp(game, check_unique=True)
        unique = eq.unique
    except (LPError, IndeterminateUniquenessError):
        unique = False
    if not unique:
        wall = time.perf_counter() - started
        return [SweepRow(err, trial, seed, 0, False, float("nan"), wall) for err in errors]
    config = RunConfig(
        eta=eta, max_iters=max_iters, target_l1_error=0.0,
        log_every=max(max_iters, 1), seed=seed, track_kl=False,
    )
    result, _ = run(game, eq, config, l1_thresholds=errors)
    wall = time.perf_counter() - started
    rows = []
    for err, crossing in zip(errors, result.threshold_crossings):
        if crossing is None:
            rows.append(SweepRow(err, trial, seed, result.iterations, False, result.final.l1_error, wall))
        else:
            rows.append(SweepRow(err, trial, seed, int(crossing), True, result.final.l1_error, wall))
    return rows


def _run_jobs(worker, jobs_args, n_workers: int):
    if n_workers <= 1 or len(jobs_args) <= 1:
        return [worker(a) for a in jobs_args]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(worker, jobs_args))


def sweep_dimension(config: SweepConfig) -> SweepResult:
    """Iterations-to-target as the square game dimension grows.

    One row per (size, trial): a fresh random game is solved exactly, the
    optimistic dynamics runs from uniform until the l1 target, and the
    iteration count is recorded. Trials whose uniqueness check fails are
    recorded with zero iterations and nan error rather than dropped.
    """
    jobs = [
        (n, trial, trial_seed(config.seed, pi, trial), config.eta, config.target_error, config.max_iters)
        for pi, n in enumerate(config.sizes)
        for trial in range(config.trials_per_point)
    ]
    rows = _run_jobs(_dim_trial, jobs, config.jobs)
    rows.sort(key=lambda r: (r.point, r.trial))
    return SweepResult(rows=tuple(rows))


def sweep_error(config: SweepConfig) -> SweepResult:
    """Iterations until each error level is first reached, per trajectory.

    One run per trial on a fixed-size game; every error level is recorded as
    it is crossed within that single trajectory. Levels never reached before
    max_iters produce non-converged rows carrying the cap.
    """
    if not config.errors:
        raise ValueError("error sweep needs a nonempty errors list")
    jobs = [
        (config.n_fixed, config.errors, trial, trial_seed(config.seed, 0, trial), config.eta, config.max_iters)
        for trial in range(config.trials_per_point)
    ]
    nested = _run_jobs(_err_trial, jobs, config.jobs)
    rows = [row for batch in nested for row in batch]
    rows.sort(key=lambda r: (-r.point, r.trial))
    return SweepResult(rows=tuple(rows))
