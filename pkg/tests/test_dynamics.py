import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from omwu.dynamics import (
    DynamicsState,
    RunConfig,
    StepSizeTooLargeError,
    TrajectoryRecord,
    kl_decrement_bound,
    kl_divergence,
    l1_to_equilibrium,
    linear_omwu_step,
    mwu_step,
    omwu_step,
    run,
    step_distance_profile,
    write_trajectory_csv,
)
from omwu.game import MatrixGame
from omwu.oracle import solve_lp

IDENTITY2 = MatrixGame([[1.0, 0.0], [0.0, 1.0]])


def equilibrium_quadruple(eq):
    return DynamicsState.from_pair(eq.x_star.probs, eq.y_star.probs)


class TestOmwuStep:
    def test_scalar_reference_value(self):
        # x is uniform and y = y_prev = (0.6, 0.4) on the identity game:
        # the exponent for row i is simply eta*y_i
        state = DynamicsState(
            np.array([0.5, 0.5]), np.array([0.6, 0.4]), np.array([0.5, 0.5]), np.array([0.6, 0.4])
        )
        out = omwu_step(state, IDENTITY2, 0.1)
        expected = math.exp(0.06) / (math.exp(0.06) + math.exp(0.04))
        assert_allclose(out.x_cur[0], expected, rtol=0, atol=1e-15)
        assert (out.x_prev == state.x_cur).all()
        assert (out.y_prev == state.y_cur).all()

    def test_equilibrium_quadruple_is_fixed(self, matching_pennies):
        eq = solve_lp(matching_pennies)
        state = equilibrium_quadruple(eq)
        out = omwu_step(state, matching_pennies, 0.1)
        assert np.abs(out.x_cur - state.x_cur).max() <= 1e-12
        assert np.abs(out.y_cur - state.y_cur).max() <= 1e-12

    def test_zero_stepsize_is_identity(self, anchored_game):
        state = DynamicsState(
            np.array([0.3, 0.7]), np.array([0.2, 0.8]), np.array([0.9, 0.1]), np.array([0.5, 0.5])
        )
        out = omwu_step(state, anchored_game, 0.0)
        assert (out.x_cur == state.x_cur).all()
        assert (out.y_cur == state.y_cur).all()
        # anchor slots always receive the pre-step current iterates
        assert (out.x_prev == state.x_cur).all()
        assert (out.y_prev == state.y_cur).all()

    def test_large_payoffs_do_not_overflow(self):
        game = MatrixGame(1e4 * np.array([[1.0, -1.0], [-1.0, 1.0]]))
        state = DynamicsState.uniform(2, 2)
        out = omwu_step(state, game, 0.9)
        assert np.isfinite(out.x_cur).all()
        assert_allclose(out.x_cur.sum(), 1.0, atol=1e-12)


class TestLinearStep:
    def test_scalar_reference_value(self):
        state = DynamicsState(
            np.array([0.5, 0.5]), np.array([0.6, 0.4]), np.array([0.5, 0.5]), np.array([0.6, 0.4])
        )
        out = linear_omwu_step(state, IDENTITY2, 0.1)
        assert_allclose(out.x_cur[0], 0.53 / 1.05, atol=1e-15)

    def test_zero_stepsize_is_identity(self, anchored_game):
        state = DynamicsState.uniform(2, 2)
        out = linear_omwu_step(state, anchored_game, 0.0)
        assert (out.x_cur == state.x_cur).all()

    def test_equilibrium_quadruple_is_fixed(self, anchored_game):
        eq = solve_lp(anchored_game)
        state = equilibrium_quadruple(eq)
        out = linear_omwu_step(state, anchored_game, 0.05)
        assert np.abs(out.x_cur - state.x_cur).max() <= 1e-12
        assert np.abs(out.y_cur - state.y_cur).max() <= 1e-12

    def test_oversized_stepsize_rejected(self):
        # row 2 pays -4 against this y, so its weight is 1 - 2*0.3*4 + 0.3*4
        game = MatrixGame([[5.0, -5.0], [-5.0, 5.0]])
        skewed = np.array([0.9, 0.1])
        state = DynamicsState(np.array([0.5, 0.5]), skewed, np.array([0.5, 0.5]), skewed)
        with pytest.raises(StepSizeTooLargeError):
            linear_omwu_step(state, game, 0.3)


class TestMwuStep:
    def test_equilibrium_fixed_and_zero_eta(self, anchored_game):
        eq = solve_lp(anchored_game)
        state = equilibrium_quadruple(eq)
        out = mwu_step(state, anchored_game, 0.1)
        assert np.abs(out.x_cur - state.x_cur).max() <= 1e-12
        out0 = mwu_step(state, anchored_game, 0.0)
        assert (out0.x_cur == state.x_cur).all()

    def test_kl_grows_from_off_equilibrium_start(self, matching_pennies):
        eq = solve_lp(matching_pennies)
        config = RunConfig(eta=0.1, max_iters=1000, method="mwu", log_every=10**9)
        result, records = run(matching_pennies, eq, config, initial=(np.array([0.9, 0.1]), np.array([0.5, 0.5])))
        assert result.final.kl >= records[0].kl


class TestSimplexPreservation:
    @pytest.mark.parametrize("step", [omwu_step, linear_omwu_step, mwu_step])
    def test_random_trajectories_stay_on_simplex(self, step):
        rng = np.random.default_rng(23)
        for _ in range(5):
            n, m = rng.integers(2, 6, 2)
            game = MatrixGame(rng.uniform(-1, 1, (n, m)))
            state = DynamicsState(
                rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(m)),
                rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(m)),
            )
            for _ in range(200):
                state = step(state, game, 0.05)
                for comp in state.components():
                    assert comp.min() >= 0.0
                    assert abs(comp.sum() - 1.0) <= 1e-12


class TestKLDivergence:
    def test_zero_at_equilibrium(self, anchored_game):
        eq = solve_lp(anchored_game)
        assert kl_divergence(eq, eq.x_star.probs, eq.y_star.probs) <= 1e-14

    def test_reference_value(self, anchored_game):
        eq = solve_lp(anchored_game)
        expected = 0.25 * math.log(0.25 / 0.5) + 0.75 * math.log(0.75 / 0.5)
        assert_allclose(kl_divergence(eq, [0.5, 0.5], [0.5, 0.5]), expected, atol=1e-12)

    def test_uniform_iterate_bounded_by_log_nm(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            n, m = rng.integers(2, 7, 2)
            game = MatrixGame(rng.uniform(-1, 1, (n, m)))
            eq = solve_lp(game)
            kl = kl_divergence(eq, np.full(n, 1.0 / n), np.full(m, 1.0 / m))
            assert kl <= math.log(n * m) + 1e-12

    def test_missing_support_mass_is_infinite(self, anchored_game):
        eq = solve_lp(anchored_game)
        assert kl_divergence(eq, [1.0, 0.0], [0.25, 0.75]) == math.inf


class TestRun:
    def test_zero_iterations(self, anchored_game):
        eq = solve_lp(anchored_game)
        result, records = run(anchored_game, eq, RunConfig(eta=0.01, max_iters=0, target_l1_error=10.0))
        assert result.iterations == 0
        assert result.converged
        assert len(records) == 1
        result2, _ = run(anchored_game, eq, RunConfig(eta=0.01, max_iters=0, target_l1_error=0.0))
        assert not result2.converged

    def test_converges_on_fixture(self, anchored_game):
        eq = solve_lp(anchored_game)
        config = RunConfig(eta=0.01, max_iters=200_000, target_l1_error=0.1, log_every=10**9)
        result, records = run(anchored_game, eq, config)
        assert result.converged
        assert result.final.l1_error <= 0.1
        assert records[-1].iter == result.iterations
        assert result.stall_iteration is None or result.stall_iteration >= 2

    def test_jit_and_numpy_paths_agree(self, anchored_game):
        eq = solve_lp(anchored_game)
        config = RunConfig(eta=0.01, max_iters=3000, log_every=300)
        res_j, recs_j = run(anchored_game, eq, config, jit=True)
        res_n, recs_n = run(anchored_game, eq, config, jit=False)
        assert res_j.iterations == res_n.iterations
        assert res_j.stall_iteration == res_n.stall_iteration
        assert len(recs_j) == len(recs_n)
        for rj, rn in zip(recs_j, recs_n):
            assert rj.iter == rn.iter
            for field in ("kl", "l1_error", "alpha", "epsilon", "value", "kl_decrement"):
                assert abs(getattr(rj, field) - getattr(rn, field)) <= 1e-12

    def test_threshold_crossings_ordered(self, anchored_game):
        eq = solve_lp(anchored_game)
        config = RunConfig(eta=0.01, max_iters=200_000, log_every=10**9)
        result, _ = run(anchored_game, eq, config, l1_thresholds=[0.5, 0.25, 0.1])
        crossings = result.threshold_crossings
        assert all(c is not None for c in crossings)
        assert list(crossings) == sorted(crossings)
        # a threshold already met at the start records iteration zero
        result0, _ = run(anchored_game, eq, config, l1_thresholds=[3.9])
        assert result0.threshold_crossings == (0,)

    def test_interior_start(self, matching_pennies):
        eq = solve_lp(matching_pennies)
        config = RunConfig(eta=0.01, max_iters=10**6, target_l1_error=0.1, log_every=10**9)
        result, _ = run(matching_pennies, eq, config, initial=(np.array([0.9, 0.1]), np.array([0.5, 0.5])))
        assert result.converged

    def test_run_matches_repeated_steps(self, anchored_game):
        eq = solve_lp(anchored_game)
        config = RunConfig(eta=0.05, max_iters=40, log_every=10**9)
        result, _ = run(anchored_game, eq, config, jit=False)
        state = DynamicsState.uniform(2, 2)
        for _ in range(40):
            state = omwu_step(state, anchored_game, 0.05)
        assert result.final.l1_error == l1_to_equilibrium(eq, state.x_cur, state.y_cur)

    def test_linear_method_stepsize_guard(self, anchored_game):
        eq = solve_lp(anchored_game)
        with pytest.raises(StepSizeTooLargeError):
            run(anchored_game, eq, RunConfig(eta=0.2, max_iters=10, method="omwu-linear"))


class TestRunConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            RunConfig(eta=0.0, max_iters=1)
        with pytest.raises(ValueError):
            RunConfig(eta=1.0, max_iters=1)
        with pytest.raises(ValueError):
            RunConfig(eta=0.1, max_iters=-1)
        with pytest.raises(ValueError):
            RunConfig(eta=0.1, max_iters=1, method="gradient")
        with pytest.raises(ValueError):
            RunConfig(eta=0.1, max_iters=1, log_every=0)


class TestDiagnostics:
    def test_decrement_bound_zero_cases(self, anchored_game):
        eq = solve_lp(anchored_game)
        state = equilibrium_quadruple(eq)
        nxt = omwu_step(state, anchored_game, 0.01)
        assert abs(kl_decrement_bound(nxt, state, anchored_game, 0.01)) <= 1e-24
        uniform = DynamicsState.uniform(2, 2)
        nxt0 = omwu_step(uniform, anchored_game, 0.0)
        assert kl_decrement_bound(nxt0, uniform, anchored_game, 0.0) == 0.0

    def test_decrement_bound_uniform_reference(self, anchored_game):
        # brute-force the mass-weighted squared deviations at the uniform
        # quadruple: rows pay (2,1) against uniform y, columns (1.5,1.5)
        state = DynamicsState.uniform(2, 2)
        nxt = omwu_step(state, anchored_game, 0.01)
        dev_rows = [2 * 2.0 - 2 * 1.5 - 2.0 + 1.5, 2 * 1.0 - 2 * 1.5 - 1.0 + 1.5]
        dev_cols = [2 * 1.5 - 2 * 1.5 - 1.5 + 1.5, 2 * 1.5 - 2 * 1.5 - 1.5 + 1.5]
        total = 0.5 * sum(d * d for d in dev_rows) + 0.5 * sum(d * d for d in dev_cols)
        expected = -0.5 * 0.01**2 * total
        assert_allclose(kl_decrement_bound(nxt, state, anchored_game, 0.01), expected, atol=1e-18)

    def test_decrement_bound_rejects_nonconsecutive(self, anchored_game):
        state = DynamicsState(
            np.array([0.3, 0.7]), np.array([0.6, 0.4]), np.array([0.4, 0.6]), np.array([0.5, 0.5])
        )
        stranger = DynamicsState(
            np.array([0.2, 0.8]), np.array([0.5, 0.5]), np.array([0.9, 0.1]), np.array([0.5, 0.5])
        )
        with pytest.raises(ValueError):
            kl_decrement_bound(stranger, state, anchored_game, 0.01)

    def test_step_distance_profile(self, anchored_game):
        state = DynamicsState(
            np.array([0.3, 0.7]), np.array([0.6, 0.4]), np.array([0.4, 0.6]), np.array([0.5, 0.5])
        )
        rows = step_distance_profile(anchored_game, state, [0.0, 1e-2, 1e-3])
        assert rows[0].exp_vs_state == 0.0
        assert rows[0].linear_vs_state == 0.0
        assert rows[0].exp_vs_linear == 0.0
        # first-order step lengths scale ~eta, the gap between variants ~eta^2
        assert rows[1].exp_vs_state / rows[2].exp_vs_state == pytest.approx(10.0, rel=0.1)
        assert rows[1].exp_vs_linear / rows[2].exp_vs_linear == pytest.approx(100.0, rel=0.2)

    def test_anchor_inequalities_along_trajectory(self, anchored_game):
        eq = solve_lp(anchored_game)
        a = anchored_game.payoffs
        xsa = eq.x_star.probs @ a
        ays = a @ eq.y_star.probs
        state = DynamicsState.uniform(2, 2)
        for t in range(1, 300):
            state = omwu_step(state, anchored_game, 0.01)
            if t >= 2:
                assert xsa @ (2 * state.y_cur - state.y_prev) >= eq.value - 1e-10
                assert (2 * state.x_cur - state.x_prev) @ ays <= eq.value + 1e-10
                doubled = 2 * state.x_cur - state.x_prev
                assert doubled.min() >= -1e-12
                assert abs(doubled.sum() - 1.0) <= 1e-12

    def test_normalizers_within_payoff_bounds(self, anchored_game):
        eq = solve_lp(anchored_game)
        _, records = run(anchored_game, eq, RunConfig(eta=0.05, max_iters=500, log_every=1))
        bound = 3.0 * 0.05 * anchored_game.max_abs_payoff
        for rec in records:
            assert np.exp(-bound) <= rec.normalizer_x <= np.exp(bound)
            assert np.exp(-bound) <= rec.normalizer_y <= np.exp(bound)

    def test_linear_step_within_eta_squared_of_exponential(self, anchored_game):
        state = DynamicsState(
            np.array([0.3, 0.7]), np.array([0.6, 0.4]), np.array([0.4, 0.6]), np.array([0.5, 0.5])
        )
        # fit the quadratic constant at one stepsize, then it must cover all
        # smaller stepsizes with a modest safety factor
        rows = step_distance_profile(anchored_game, state, [1e-2, 3e-3, 1e-3, 3e-4, 1e-4])
        constant = rows[0].exp_vs_linear / rows[0].eta ** 2
        for row in rows[1:]:
            assert row.exp_vs_linear <= 1.25 * constant * row.eta**2

    def test_composed_map_equals_two_steps(self, anchored_game):
        from omwu.spectral import apply_update_map

        state = DynamicsState(
            np.array([0.3, 0.7]), np.array([0.6, 0.4]), np.array([0.4, 0.6]), np.array([0.5, 0.5])
        )
        twice = omwu_step(omwu_step(state, anchored_game, 0.07), anchored_game, 0.07)
        composed = apply_update_map(
            apply_update_map(state.as_vector(), anchored_game, 0.07), anchored_game, 0.07
        )
        assert np.abs(twice.as_vector() - composed).max() <= 1e-12


def test_trajectory_csv_format(tmp_path, anchored_game):
    eq = solve_lp(anchored_game)
    _, records = run(anchored_game, eq, RunConfig(eta=0.01, max_iters=10, log_every=5))
    path = tmp_path / "log.csv"
    write_trajectory_csv(path, records)
    lines = path.read_text().splitlines()
    assert lines[0] == "iter,kl,l1_error,alpha,epsilon,value,kl_decrement,normalizer_x,normalizer_y"
    assert len(lines) == 1 + len(records)
    cells = lines[1].split(",")
    assert cells[0] == "0"
    # floats carry 17 significant digits
    assert float(cells[1]) == records[0].kl
    assert len(lines) >= 3
