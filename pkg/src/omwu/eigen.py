"""Self-contained dense nonsymmetric eigensolver.

Balancing (Osborne, radix-2), Householder reduction to Hessenberg form, and
the implicit double-shift QR iteration with ad-hoc exceptional shifts. Written
for the small matrices this package certifies; correctness is what matters,
so the test suite cross-checks every path against LAPACK.
"""

from __future__ import annotations

import numpy as np

_EPS = float(np.finfo(float).eps)
MAX_SIZE = 2000


class EigenConvergenceError(RuntimeError):
    """QR iteration failed to deflate an eigenvalue within the sweep budget."""


def balance(a: np.ndarray, max_sweeps: int = 100) -> np.ndarray:
    """Diagonal similarity scaling equalizing row/column norms (radix 2).

    Powers of two keep the scaling exact in floating point, so the spectrum
    is untouched while conditioning improves.
    """
    h = np.array(a, dtype=float)
    n = h.shape[0]
    radix = 2.0
    for _ in range(max_sweeps):
        stable = True
        for i in range(n):
            row = float(np.abs(h[i]).sum()) - abs(h[i, i])
            col = float(np.abs(h[:, i]).sum()) - abs(h[i, i])
            if row == 0.0 or col == 0.0:
                continue
            factor = 1.0
            total = col + row
            while col < row / radix:
                col *= radix
                row /= radix
                factor *= radix
            while col >= row * radix:
                col /= radix
                row *= radix
                factor /= radix
            if (col + row) < 0.95 * total:
                stable = False
                h[:, i] *= factor
                h[i, :] /= factor
        if stable:
            break
    return h


def hessenberg(a: np.ndarray) -> np.ndarray:
    """Householder reduction to upper Hessenberg form (similarity)."""
    h = np.array(a, dtype=float)
    n = h.shape[0]
    for k in range(n - 2):
        u = _reflector(h[k + 1 :, k])
        if u is None:
            continue
        h[k + 1 :, k:] -= 2.0 * np.outer(u, u @ h[k + 1 :, k:])
        h[:, k + 1 :] -= 2.0 * np.outer(h[:, k + 1 :] @ u, u)
        h[k + 2 :, k] = 0.0
    return h


def _reflector(v: np.ndarray):
    """Unit vector u such that (I - 2 u u^T) v lands on the first axis."""
    norm = float(np.sqrt(v @ v))
    if norm == 0.0:
        return None
    alpha = -norm if v[0] >= 0 else norm
    u = v.astype(float, copy=True)
    u[0] -= alpha
    unorm = float(np.sqrt(u @ u))
    if unorm <= _EPS * norm:
        return None
    return u / unorm


def _eig_2x2(a: float, b: float, c: float, d: float):
    """Eigenvalues of [[a, b], [c, d]], cancellation-safe."""
    half_tr = 0.5 * (a + d)
    p = 0.5 * (a - d)
    disc = p * p + b * c
    if disc >= 0.0:
        z = float(np.sqrt(disc))
        big = half_tr + z if half_tr >= 0 else half_tr - z
        if big == 0.0:
            return 0j, 0j
        other = (a * d - b * c) / big
        return complex(big), complex(other)
    z = float(np.sqrt(-disc))
    return complex(half_tr, z), complex(half_tr, -z)


def _apply_left(h, u, rows, c0, c1):
    block = h[rows, c0:c1]
    block -= 2.0 * np.outer(u, u @ block)


def _apply_right(h, u, r0, r1, cols):
    block = h[r0:r1, cols]
    block -= 2.0 * np.outer(block @ u, u)


def _francis_sweep(h: np.ndarray, lo: int, hi: int, exceptional: bool) -> None:
    """One implicit double-shift sweep on the active window [lo, hi]."""
    if exceptional:
        # ad-hoc shift anchored at the trailing diagonal entry; breaks the
        # ties a symmetric spectrum creates for the regular shift choice
        s = abs(h[hi, hi - 1]) + abs(h[hi - 1, hi - 2])
        anchor = 0.75 * s + h[hi, hi]
        tr = 2.0 * anchor
        det = anchor * anchor + 0.4375 * s * s
    else:
        tr = h[hi - 1, hi - 1] + h[hi, hi]
        det = h[hi - 1, hi - 1] * h[hi, hi] - h[hi - 1, hi] * h[hi, hi - 1]
    # first column of (H - shift1)(H - shift2) has three nonzero entries
    x = h[lo, lo] * h[lo, lo] + h[lo, lo + 1] * h[lo + 1, lo] - tr * h[lo, lo] + det
    y = h[lo + 1, lo] * (h[lo, lo] + h[lo + 1, lo + 1] - tr)
    z = h[lo + 1, lo] * h[lo + 2, lo + 1]

    for j in range(lo, hi - 1):
        if j == lo:
            v = np.array([x, y, z])
            cstart = lo
        else:
            v = h[j : j + 3, j - 1].copy()
            cstart = j - 1
        u = _reflector(v)
        if u is not None:
            _apply_left(h, u, slice(j, j + 3), cstart, hi + 1)
            _apply_right(h, u, lo, min(j + 4, hi + 1), slice(j, j + 3))
        if j > lo:
            h[j + 1, j - 1] = 0.0
            h[j + 2, j - 1] = 0.0

    # trailing two-row reflector finishes the chase
    v = h[hi - 1 : hi + 1, hi - 2].copy()
    u = _reflector(v)
    if u is not None:
        _apply_left(h, u, slice(hi - 1, hi + 1), hi - 2, hi + 1)
        _apply_right(h, u, lo, hi + 1, slice(hi - 1, hi + 1))
    h[hi, hi - 2] = 0.0


def _forced_split(h: np.ndarray, lo: int, hi: int, anorm: float) -> bool:
    """Stall escape for clusters tighter than double precision resolves.

    When |h[i,i-1] * h[i-1,i]| is at roundoff scale, zeroing the subdiagonal
    perturbs the spectrum by about the square root of that product, i.e. no
    more than the cluster's own diameter; split at the best such entry.
    """
    best = None
    best_ratio = np.inf
    for i in range(lo + 1, hi + 1):
        scale = abs(h[i - 1, i - 1]) + abs(h[i, i])
        if scale == 0.0:
            scale = anorm
        if scale == 0.0:
            continue
        ratio = abs(h[i, i - 1]) * abs(h[i - 1, i]) / (scale * scale)
        if ratio < best_ratio:
            best_ratio = ratio
            best = i
    if best is not None and best_ratio <= _EPS:
        h[best, best - 1] = 0.0
        return True
    return False


def _hessenberg_eigenvalues(h: np.ndarray, sweep_budget: int) -> np.ndarray:
    n = h.shape[0]
    eigs = np.empty(n, dtype=complex)
    anorm = float(np.abs(h).sum())
    hi = n - 1
    sweeps_since_deflation = 0
    total_sweeps = 0
    while hi >= 0:
        lo = hi
        while lo > 0:
            s = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if s == 0.0:
                s = anorm
            # a few ulps of slack: converged subdiagonals settle at noise
            # level, occasionally just above eps * s
            if abs(h[lo, lo - 1]) <= 4.0 * _EPS * s:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eigs[hi] = complex(h[hi, hi])
            hi -= 1
            sweeps_since_deflation = 0
        elif lo == hi - 1:
            eigs[hi - 1], eigs[hi] = _eig_2x2(
                h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi]
            )
            hi -= 2
            sweeps_since_deflation = 0
        else:
            window = hi - lo + 1
            if sweeps_since_deflation >= 30 * max(window, 10) or total_sweeps >= sweep_budget:
                raise EigenConvergenceError(
                    f"no deflation after {sweeps_since_deflation} sweeps on a "
                    f"window of size {window} ({total_sweeps} total sweeps)"
                )
            if sweeps_since_deflation > 0 and sweeps_since_deflation % 60 == 0:
                if _forced_split(h, lo, hi, anorm):
                    continue
            if sweeps_since_deflation > 0 and sweeps_since_deflation % 150 == 0:
                # last resort against shift-invariant cycling: a deterministic
                # reflection similarity of the window (spectrum preserved;
                # blocks beyond the window only feed already-deflated parts)
                rng = np.random.Generator(np.random.Philox(key=total_sweeps))
                u = rng.standard_normal(window)
                u /= np.sqrt(u @ u)
                block = h[lo : hi + 1, lo : hi + 1]
                block -= 2.0 * np.outer(u, u @ block)
                block -= 2.0 * np.outer(block @ u, u)
                h[lo : hi + 1, lo : hi + 1] = hessenberg(block)
            # periodic ad-hoc shifts break symmetry for stubborn clusters
            exceptional = sweeps_since_deflation > 0 and sweeps_since_deflation % 10 == 0
            _francis_sweep(h, lo, hi, exceptional)
            sweeps_since_deflation += 1
            total_sweeps += 1
    return eigs


def eigenvalues(m, use_balance: bool = True) -> np.ndarray:
    """Full complex spectrum of a dense real square matrix.

    Raises EigenConvergenceError if the QR iteration exhausts its sweep
    budget (never returns silently wrong partial results).
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    n = a.shape[0]
    if n > MAX_SIZE:
        raise ValueError(f"matrix size {n} exceeds the supported {MAX_SIZE}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if n == 0:
        return np.empty(0, dtype=complex)
    if n == 1:
        return np.array([complex(a[0, 0])])
    if n == 2:
        return np.array(_eig_2x2(a[0, 0], a[0, 1], a[1, 0], a[1, 1]))
    if use_balance:
        a = balance(a)
    h = hessenberg(a)
    return _hessenberg_eigenvalues(h, sweep_budget=max(60 * n, 1000))


def eigenpairs(m, use_balance: bool = True):
    """Spectrum plus eigenvectors via shifted inverse iteration.

    Each returned pair satisfies |M v - lambda v| <= 1e-8 * |M| for a unit
    vector v; near-defective eigenvalues still meet the residual bound even
    though their vectors may nearly coincide.
    """
    a = np.array(m, dtype=float)
    vals = eigenvalues(a, use_balance=use_balance)
    n = a.shape[0]
    scale = max(float(np.abs(a).sum()), 1.0)
    rng = np.random.Generator(np.random.Philox(key=0x0E16))
    vecs = np.empty((n, n), dtype=complex)
    identity = np.eye(n)
    for idx, lam in enumerate(vals):
        jitter = _EPS * scale
        vec = None
        for _ in range(12):
            shifted = a - (lam + jitter) * identity
            try:
                b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
                for _ in range(3):
                    b = np.linalg.solve(shifted, b)
                    b = b / np.linalg.norm(b)
                vec = b
                break
            except np.linalg.LinAlgError:
                jitter *= 32.0
        if vec is None:
            raise EigenConvergenceError(f"inverse iteration failed at eigenvalue {lam}")
        vecs[:, idx] = vec
    return vals, vecs
