"""Compiled inner loops for the trajectory driver.

The kernel advances one chunk of iterations (up to the next logging point)
and reports back; all bookkeeping semantics match the pure-numpy loop in
``dynamics.run``, which remains the reference implementation. Rounding may
differ from numpy by an ulp in exp/matvec, never in control flow thresholds.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency, but stay importable
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap

METHOD_OMWU = 0
METHOD_MWU = 1
METHOD_LINEAR = 2

# masses below this are flushed to exact zero after renormalization: they are
# invisible at double precision but would otherwise decay into subnormal
# territory, where arithmetic runs an order of magnitude slower
FLUSH_TOL = 1e-306


@njit(cache=True)
def drive_chunk(
    a,
    x,
    y,
    xp,
    yp,
    ay,
    ayp,
    atx,
    atxp,
    sup_x,
    sup_y,
    tx,
    ty,
    kl_const,
    x_star,
    y_star,
    eta,
    method,
    t_start,
    t_stop,
    target,
    kl_prev,
    stall_iter,
    stall_level,
    thresholds,
    crossings,
    track_kl,
):
    """Advance from iteration t_start until t_stop, convergence, or all
    thresholds crossed. Arrays are mutated in place; scalars are returned.

    Returns (t, kl, decrement, stall_iter, norm_x, norm_y, converged, done,
    error_flag); error_flag=1 means a nonpositive linear-update weight.
    """
    n = x.shape[0]
    m = y.shape[0]
    xn = np.empty(n)
    yn = np.empty(m)
    t = t_start
    converged = False
    done = False
    decrement = 0.0
    norm_x = 1.0
    norm_y = 1.0
    while t < t_stop and not done:
        if method == METHOD_LINEAR:
            low = 1.0
            for i in range(n):
                w = 1.0 + 2.0 * eta * ay[i] - eta * ayp[i]
                xn[i] = x[i] * w
                if w < low:
                    low = w
            for i in range(m):
                w = 1.0 - 2.0 * eta * atx[i] + eta * atxp[i]
                yn[i] = y[i] * w
                if w < low:
                    low = w
            if low <= 0.0:
                return t, kl_prev, decrement, stall_iter, norm_x, norm_y, converged, done, 1
            sx = 0.0
            for i in range(n):
                sx += xn[i]
            sy = 0.0
            for i in range(m):
                sy += yn[i]
            for i in range(n):
                xn[i] /= sx
                if xn[i] < FLUSH_TOL:
                    xn[i] = 0.0
            for i in range(m):
                yn[i] /= sy
                if yn[i] < FLUSH_TOL:
                    yn[i] = 0.0
            norm_x = sx
            norm_y = sy
        else:
            shift = -np.inf
            for i in range(n):
                if method == METHOD_OMWU:
                    e = 2.0 * eta * ay[i] - eta * ayp[i]
                else:
                    e = eta * ay[i]
                xn[i] = e
                if e > shift:
                    shift = e
            sx = 0.0
            for i in range(n):
                w = x[i] * np.exp(xn[i] - shift)
                xn[i] = w
                sx += w
            for i in range(n):
                xn[i] /= sx
                if xn[i] < FLUSH_TOL:
                    xn[i] = 0.0
            norm_x = sx * np.exp(shift)

            shift = -np.inf
            for i in range(m):
                if method == METHOD_OMWU:
                    e = -2.0 * eta * atx[i] + eta * atxp[i]
                else:
                    e = -eta * atx[i]
                yn[i] = e
                if e > shift:
                    shift = e
            sy = 0.0
            for i in range(m):
                w = y[i] * np.exp(yn[i] - shift)
                yn[i] = w
                sy += w
            for i in range(m):
                yn[i] /= sy
                if yn[i] < FLUSH_TOL:
                    yn[i] = 0.0
            norm_y = sy * np.exp(shift)

        for i in range(n):
            xp[i] = x[i]
            x[i] = xn[i]
        for i in range(m):
            yp[i] = y[i]
            y[i] = yn[i]
        for i in range(n):
            ayp[i] = ay[i]
        for i in range(m):
            atxp[i] = atx[i]
        for i in range(n):
            acc = 0.0
            for j in range(m):
                acc += a[i, j] * y[j]
            ay[i] = acc
        for j in range(m):
            acc = 0.0
            for i in range(n):
                acc += a[i, j] * x[i]
            atx[j] = acc
        t += 1

        if track_kl:
            kl = kl_const
            finite = True
            for idx in range(sup_x.shape[0]):
                v = x[sup_x[idx]]
                if v <= 0.0:
                    finite = False
                    break
                kl -= tx[idx] * np.log(v)
            if finite:
                for idx in range(sup_y.shape[0]):
                    v = y[sup_y[idx]]
                    if v <= 0.0:
                        finite = False
                        break
                    kl -= ty[idx] * np.log(v)
            if not finite:
                kl = np.inf
            elif kl < 0.0:
                kl = 0.0
            decrement = kl - kl_prev
            kl_prev = kl
            if stall_iter < 0 and t >= 2 and decrement > stall_level:
                stall_iter = t

        l1 = 0.0
        for i in range(n):
            l1 += abs(x_star[i] - x[i])
        for i in range(m):
            l1 += abs(y_star[i] - y[i])
        all_crossed = True
        for k in range(thresholds.shape[0]):
            if crossings[k] < 0:
                if l1 <= thresholds[k]:
                    crossings[k] = t
                else:
                    all_crossed = False
        converged = l1 <= target
        done = converged or (thresholds.shape[0] > 0 and all_crossed)
    return t, kl_prev, decrement, stall_iter, norm_x, norm_y, converged, done, 0
