"""Pure-NumPy reference implementation of the stepping kernels.

This is the fallback backend selected when the compiled extension is not
available.  The compiled kernels in _core.pyx perform the same operations
in the same per-element order, so both backends produce identical results.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def advance_linear(rp: np.ndarray, rm: np.ndarray, nu: float,
                   k0: float, k1: float,
                   g00: float, g01: float, g10: float, g11: float,
                   n_steps: int) -> None:
    """Advance the closed-loop linear Riemann system n_steps in place.

    Per step: first-order upwind transport at CFL number nu with ghost
    inflow from the local reflection conditions
        rp_ghost = k0 * rm[0],   rm_ghost = k1 * rp[-1]
    (old time level), then the cellwise source map G = exp(-B dt):
        (rp, rm) <- (g00 rp + g01 rm, g10 rp + g11 rm).
    """
    one_minus_nu = 1.0 - nu
    for _ in range(n_steps):
        gp = k0 * rm[0]
        gm = k1 * rp[-1]
        rp[1:] = one_minus_nu * rp[1:] + nu * rp[:-1]
        rp[0] = one_minus_nu * rp[0] + nu * gp
        rm[:-1] = one_minus_nu * rm[:-1] + nu * rm[1:]
        rm[-1] = one_minus_nu * rm[-1] + nu * gm
        rp_new = g00 * rp + g01 * rm
        rm_new = g10 * rp + g11 * rm
        rp[:] = rp_new
        rm[:] = rm_new


def wave_step(v: np.ndarray, sigma: np.ndarray, c: float, nu: float,
              v_left: float, v_right: float) -> None:
    """One upwind step of the homogeneous elastic wave system in place.

    Velocities are prescribed at both boundaries; the incoming Riemann
    ghost values follow from v = rm - rp using the outgoing component of
    the old time level.
    """
    one_minus_nu = 1.0 - nu
    inv_2c = 0.5 / c
    rp = sigma * inv_2c - 0.5 * v
    rm = sigma * inv_2c + 0.5 * v
    gp = rm[0] - v_left
    gm = rp[-1] + v_right
    rp[1:] = one_minus_nu * rp[1:] + nu * rp[:-1]
    rp[0] = one_minus_nu * rp[0] + nu * gp
    rm[:-1] = one_minus_nu * rm[:-1] + nu * rm[1:]
    rm[-1] = one_minus_nu * rm[-1] + nu * gm
    v[:] = rm - rp
    sigma[:] = c * (rp + rm)
