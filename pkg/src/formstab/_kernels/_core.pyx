# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernels.

Mirrors _ref.py operation-for-operation (same per-element arithmetic and
ordering; the build disables FP contraction) so results match the NumPy
fallback exactly.
"""

import numpy as np

BACKEND = "compiled"


def advance_linear(double[::1] rp, double[::1] rm, double nu,
                   double k0, double k1,
                   double g00, double g01, double g10, double g11,
                   Py_ssize_t n_steps):
    """Advance the closed-loop linear Riemann system n_steps in place."""
    cdef Py_ssize_t n = rp.shape[0]
    cdef Py_ssize_t i, step
    cdef double one_minus_nu = 1.0 - nu
    cdef double gp, gm, a, b
    for step in range(n_steps):
        gp = k0 * rm[0]
        gm = k1 * rp[n - 1]
        # upwind transport; rp sweeps backward so rp[i-1] is the old value
        for i in range(n - 1, 0, -1):
            rp[i] = one_minus_nu * rp[i] + nu * rp[i - 1]
        rp[0] = one_minus_nu * rp[0] + nu * gp
        for i in range(n - 1):
            rm[i] = one_minus_nu * rm[i] + nu * rm[i + 1]
        rm[n - 1] = one_minus_nu * rm[n - 1] + nu * gm
        # cellwise source map G = exp(-B dt)
        for i in range(n):
            a = rp[i]
            b = rm[i]
            rp[i] = g00 * a + g01 * b
            rm[i] = g10 * a + g11 * b


def wave_step(double[::1] v, double[::1] sigma, double c, double nu,
              double v_left, double v_right):
    """One upwind step of the homogeneous elastic wave system in place."""
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i
    cdef double one_minus_nu = 1.0 - nu
    cdef double inv_2c = 0.5 / c
    cdef double gp, gm
    rp_arr = np.empty(n, dtype=np.float64)
    rm_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] rp = rp_arr
    cdef double[::1] rm = rm_arr
    for i in range(n):
        rp[i] = sigma[i] * inv_2c - 0.5 * v[i]
        rm[i] = sigma[i] * inv_2c + 0.5 * v[i]
    gp = rm[0] - v_left
    gm = rp[n - 1] + v_right
    for i in range(n - 1, 0, -1):
        rp[i] = one_minus_nu * rp[i] + nu * rp[i - 1]
    rp[0] = one_minus_nu * rp[0] + nu * gp
    for i in range(n - 1):
        rm[i] = one_minus_nu * rm[i] + nu * rm[i + 1]
    rm[n - 1] = one_minus_nu * rm[n - 1] + nu * gm
    for i in range(n):
        v[i] = rm[i] - rp[i]
        sigma[i] = c * (rp[i] + rm[i])
