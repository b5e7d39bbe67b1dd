import numpy as np
import pytest

from omwu.bench import (
    SWEEP_CSV_COLUMNS,
    SweepConfig,
    gen_random_game,
    sweep_dimension,
    sweep_error,
    trial_seed,
)


class TestGenRandomGame:
    def test_deterministic(self):
        a = gen_random_game(3, 3, 42).payoffs
        b = gen_random_game(3, 3, 42).payoffs
        assert (a == b).all()
        c = gen_random_game(3, 3, 43).payoffs
        assert (a != c).any()

    def test_range_and_shape(self):
        a = gen_random_game(6, 4, 7).payoffs
        assert a.shape == (6, 4)
        assert a.min() >= -1.0 and a.max() <= 1.0

    def test_single_cell(self):
        a = gen_random_game(1, 1, 0).payoffs
        assert a.shape == (1, 1)
        assert -1.0 <= a[0, 0] <= 1.0

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            gen_random_game(0, 3, 1)


def test_trial_seed_deterministic_and_distinct():
    assert trial_seed(7, 0, 0) == trial_seed(7, 0, 0)
    seeds = {trial_seed(7, pi, t) for pi in range(3) for t in range(5)}
    assert len(seeds) == 15


class TestSweepConfig:
    def test_sizes_must_increase(self):
        with pytest.raises(ValueError):
            SweepConfig(sizes=(10, 10))
        with pytest.raises(ValueError):
            SweepConfig(sizes=(25, 10))

    def test_errors_must_decrease(self):
        with pytest.raises(ValueError):
            SweepConfig(errors=(0.5, 0.5))
        with pytest.raises(ValueError):
            SweepConfig(errors=(0.25, 0.5))

    def test_trials_positive(self):
        with pytest.raises(ValueError):
            SweepConfig(sizes=(2,), trials_per_point=0)


class TestSweepDimension:
    @pytest.fixture(scope="class")
    def small_sweep(self):
        config = SweepConfig(sizes=(2, 3), eta=0.05, trials_per_point=2, seed=7,
                             target_error=0.2, max_iters=100_000)
        return config, sweep_dimension(config)

    def test_rows_ordered_and_complete(self, small_sweep):
        _, result = small_sweep
        keys = [(r.point, r.trial) for r in result.rows]
        assert keys == [(2, 0), (2, 1), (3, 0), (3, 1)]
        assert all(r.converged for r in result.rows)
        assert all(r.final_l1_error <= 0.2 for r in result.rows)

    def test_deterministic_rows(self, small_sweep):
        config, result = small_sweep
        again = sweep_dimension(config)
        for a, b in zip(result.rows, again.rows):
            assert (a.point, a.trial, a.seed, a.iterations, a.converged) == (
                b.point, b.trial, b.seed, b.iterations, b.converged,
            )
            assert a.final_l1_error == b.final_l1_error

    def test_parallel_matches_serial(self, small_sweep):
        config, result = small_sweep
        from dataclasses import replace

        parallel = sweep_dimension(replace(config, jobs=2))
        for a, b in zip(result.rows, parallel.rows):
            assert (a.point, a.trial, a.seed, a.iterations, a.converged) == (
                b.point, b.trial, b.seed, b.iterations, b.converged,
            )

    def test_csv_bytes_stable_except_wall_time(self, small_sweep, tmp_path):
        config, result = small_sweep
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        result.write_csv(p1)
        sweep_dimension(config).write_csv(p2)
        lines1 = p1.read_text().splitlines()
        lines2 = p2.read_text().splitlines()
        assert lines1[0] == ",".join(SWEEP_CSV_COLUMNS)
        assert len(lines1) == len(lines2)
        for l1, l2 in zip(lines1[1:], lines2[1:]):
            assert l1.rsplit(",", 1)[0] == l2.rsplit(",", 1)[0]

    def test_empty_sizes_empty_result(self):
        config = SweepConfig(sizes=(), eta=0.05, trials_per_point=1, seed=1, max_iters=10)
        assert sweep_dimension(config).rows == ()


class TestSweepError:
    def test_crossings_ordered_within_trajectory(self):
        config = SweepConfig(errors=(0.5, 0.25, 0.1), eta=0.05, trials_per_point=2,
                             seed=3, n_fixed=3, max_iters=200_000)
        result = sweep_error(config)
        for trial in range(2):
            iters = [r.iterations for r in result.rows if r.trial == trial]
            levels = [r.point for r in result.rows if r.trial == trial]
            assert levels == sorted(levels, reverse=True)
            assert iters == sorted(iters)
            assert all(r.converged for r in result.rows)

    def test_loose_threshold_met_immediately(self, matching_pennies):
        # uniform equilibrium: the uniform start is already inside any level
        config = SweepConfig(errors=(1.0,), eta=0.05, trials_per_point=1, seed=11,
                             n_fixed=2, max_iters=100)
        result = sweep_error(config)
        # the generated 2x2 game is random, so only assert the contract:
        # a level met at iteration zero records zero iterations
        from omwu.dynamics import RunConfig, run
        from omwu.oracle import solve_lp

        eq = solve_lp(matching_pennies)
        res, _ = run(matching_pennies, eq, RunConfig(eta=0.05, max_iters=100, log_every=10**9),
                     l1_thresholds=[1.0])
        assert res.threshold_crossings == (0,)
        assert result.rows[0].iterations >= 0

    def test_cap_records_nonconverged_rows(self):
        config = SweepConfig(errors=(0.5, 1e-6), eta=0.05, trials_per_point=1,
                             seed=3, n_fixed=3, max_iters=500)
        result = sweep_error(config)
        tight = [r for r in result.rows if r.point == 1e-6][0]
        assert not tight.converged
        assert tight.iterations == 500

    def test_requires_errors(self):
        with pytest.raises(ValueError):
            sweep_error(SweepConfig(sizes=(2,), eta=0.05))
