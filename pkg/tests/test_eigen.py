import numpy as np
import pytest
from numpy.testing import assert_allclose

from omwu.eigen import (
    EigenConvergenceError,
    balance,
    eigenpairs,
    eigenvalues,
    hessenberg,
)


def multiset_error(mine, ref):
    """Worst greedy nearest-neighbor pairing distance between two spectra."""
    pool = list(ref)
    worst = 0.0
    for z in mine:
        j = int(np.argmin([abs(z - w) for w in pool]))
        worst = max(worst, abs(z - pool[j]))
        pool.pop(j)
    return worst


class TestKnownSpectra:
    def test_diagonal(self):
        got = sorted(eigenvalues(np.diag([1.0, 2.0, 3.0])).real)
        assert_allclose(got, [1.0, 2.0, 3.0], atol=1e-14)

    def test_skew_times_diagonal(self):
        # [[0,3],[-2,0]] has characteristic polynomial z^2 + 6
        got = eigenvalues(np.array([[0.0, 3.0], [-2.0, 0.0]]))
        root = np.sqrt(6.0)
        assert multiset_error(got, [1j * root, -1j * root]) <= 1e-14

    def test_rotation(self):
        got = eigenvalues(np.array([[0.0, 1.0], [-1.0, 0.0]]))
        assert multiset_error(got, [1j, -1j]) <= 1e-15

    def test_trivial_sizes(self):
        assert eigenvalues(np.zeros((0, 0))).size == 0
        assert eigenvalues(np.array([[4.2]]))[0] == 4.2 + 0j

    def test_jordan_block(self):
        jordan = np.array([[2.0, 1.0, 0.0], [0.0, 2.0, 1.0], [0.0, 0.0, 2.0]])
        got = eigenvalues(jordan)
        # defective triple eigenvalue: expect cube-root-of-eps accuracy
        assert np.abs(got - 2.0).max() <= 1e-4

    def test_nilpotent_selector_structure(self):
        # two defective zero blocks: expect sqrt(eps)-level perturbation
        m = np.zeros((4, 4))
        m[2, 0] = 1.0
        m[3, 1] = 1.0
        got = eigenvalues(m)
        assert np.abs(got).max() <= 1e-7


class TestAgainstLapack:
    @pytest.mark.parametrize("kind", ["dense", "skew", "hessenberg", "scaled", "repeated"])
    def test_random_matrices(self, kind):
        seeds = {"dense": 101, "skew": 202, "hessenberg": 303, "scaled": 404, "repeated": 505}
        rng = np.random.default_rng(seeds[kind])
        for _ in range(25):
            n = int(rng.integers(2, 24))
            if kind == "dense":
                a = rng.standard_normal((n, n))
            elif kind == "skew":
                a = rng.standard_normal((n, n))
                a = a - a.T
            elif kind == "hessenberg":
                a = np.triu(rng.standard_normal((n, n)), k=-1)
            elif kind == "scaled":
                a = rng.standard_normal((n, n)) * np.exp(rng.uniform(-6, 6, (n, n)))
            else:
                vals = rng.integers(-2, 3, n).astype(float)
                q, _ = np.linalg.qr(rng.standard_normal((n, n)))
                a = q @ np.diag(vals) @ q.T
            mine = eigenvalues(a)
            ref = np.linalg.eigvals(a)
            scale = max(1.0, float(np.abs(ref).max()))
            # clustered repeated eigenvalues deflate with sqrt(eps)-level error
            tol = 1e-6 if kind == "repeated" else 1e-7
            assert multiset_error(mine, ref) <= tol * scale


class TestHelpers:
    def test_balance_preserves_spectrum(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal((8, 8)) * np.exp(rng.uniform(-9, 9, (8, 8)))
        bal = balance(a)
        assert multiset_error(np.linalg.eigvals(bal), np.linalg.eigvals(a)) <= 1e-6 * max(
            1.0, np.abs(np.linalg.eigvals(a)).max()
        )

    def test_hessenberg_form_and_spectrum(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((10, 10))
        h = hessenberg(a)
        assert np.abs(np.tril(h, k=-2)).max() == 0.0
        assert multiset_error(np.linalg.eigvals(h), np.linalg.eigvals(a)) <= 1e-8


class TestEigenpairs:
    def test_residual_bound(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            n = int(rng.integers(2, 14))
            a = rng.standard_normal((n, n))
            vals, vecs = eigenpairs(a)
            limit = 1e-8 * np.linalg.norm(a)
            for idx in range(n):
                residual = np.linalg.norm(a @ vecs[:, idx] - vals[idx] * vecs[:, idx])
                assert residual <= limit


class TestValidation:
    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            eigenvalues(np.zeros((2, 3)))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            eigenvalues(np.array([[np.nan, 0.0], [0.0, 1.0]]))

    def test_rejects_oversized(self):
        with pytest.raises(ValueError):
            eigenvalues(np.zeros((2001, 2001)))

    def test_convergence_error_type_exists(self):
        assert issubclass(EigenConvergenceError, RuntimeError)
