"""Compiled RK4 kernels for the first-order-in-g lattice dynamics."""
import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def first_order_rates(y, live, indptr, indices, growth, g, alpha, out):
    n = y.shape[0]
    for i in range(n):
        if not live[i]:
            out[i] = 0.0
            continue
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            m = indices[k]
            if live[m]:
                acc += 1.0 / y[m] - alpha * y[m]
        out[i] = (growth + g * acc) * y[i] - 1.0 / y[i]


@njit(cache=True, nogil=True)
def _drop_invalid(y, live, eps):
    for i in range(y.shape[0]):
        # nan/+inf stay live so the overflow surfaces as an error, not a death
        if live[i] and y[i] < eps:
            live[i] = False


@njit(cache=True, nogil=True)
def _stage(x, k, h, y):
    for i in range(x.shape[0]):
        y[i] = x[i] + h * k[i]


@njit(cache=True, nogil=True)
def rk4_step(x, alive, indptr, indices, growth, g, alpha, ds, eps, k1, k2, k3, k4, y, live):
    """One classical RK4 step in place. Returns the number of new bankruptcies.

    A site whose stage value drops below ``eps`` is treated as dead for the
    remaining stages and is bankrupt at the end of the step. If a site's new
    wealth is nan or +inf the return value is ``-(site + 1)``.
    """
    live[:] = alive
    first_order_rates(x, live, indptr, indices, growth, g, alpha, k1)
    _stage(x, k1, 0.5 * ds, y)
    _drop_invalid(y, live, eps)
    first_order_rates(y, live, indptr, indices, growth, g, alpha, k2)
    _stage(x, k2, 0.5 * ds, y)
    _drop_invalid(y, live, eps)
    first_order_rates(y, live, indptr, indices, growth, g, alpha, k3)
    _stage(x, k3, ds, y)
    _drop_invalid(y, live, eps)
    first_order_rates(y, live, indptr, indices, growth, g, alpha, k4)
    deaths = 0
    bad = -1
    sixth = ds / 6.0
    for i in range(x.shape[0]):
        if not alive[i]:
            continue
        if live[i]:
            xn = x[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if xn >= eps and xn < math.inf:
                x[i] = xn
                continue
            if not xn < math.inf:
                x[i] = xn
                if bad < 0:
                    bad = i
                continue
        x[i] = 0.0
        alive[i] = False
        deaths += 1
    if bad >= 0:
        return -(bad + 1)
    return deaths


@njit(cache=True, nogil=True)
def advance(x, alive, indptr, indices, growth, g, alpha, ds, eps, max_steps,
            k1, k2, k3, k4, y, live):
    """Take up to ``max_steps`` steps, stopping right after a step with deaths.

    Returns (steps_taken, deaths_in_last_step); a negative count flags a
    non-finite site as in ``rk4_step``.
    """
    for step in range(max_steps):
        d = rk4_step(x, alive, indptr, indices, growth, g, alpha, ds, eps,
                     k1, k2, k3, k4, y, live)
        if d != 0:
            return step + 1, d
    return max_steps, 0


def workspace(n):
    return [np.empty(n) for _ in range(5)] + [np.empty(n, dtype=np.bool_)]
