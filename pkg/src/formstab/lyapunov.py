"""Exponential weights, Lyapunov functional, decay rates and gain synthesis.

The weighted energy

    L(t) = int_0^L w_plus(x) r_plus^2 + w_minus(x) r_minus^2 dx,
    w_plus(x) = exp(-(mu_hat/c) x),  w_minus(x) = exp(-(mu_hat/c) (L - x)),

decays like exp(-mu(mu_hat) t) when both certificate conditions hold:

    (1)  mu(mu_hat) = mu_hat + min_x lambda_min[W B + B^T W] > 0,
    (2)  exp(mu_hat L / (2 c)) * max(|K0|, |K1|) < 1,

with c = sqrt(E).  lambda_min is the signed minimal eigenvalue of the
symmetric 2x2 matrix, evaluated in closed form from trace and determinant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hyperbolics import HyperbolicSystem
from .material import MaterialError, MaterialParams

__all__ = [
    "WeightProfile",
    "GainPair",
    "DecayCertificate",
    "weight_profile",
    "decay_rate",
    "decay_rate_lower_bound",
    "synthesize_gains",
    "check_conditions",
    "search_mu_hat",
    "lyapunov_functional",
    "norm_equivalence_constant",
]


@dataclass(frozen=True)
class WeightProfile:
    """Exponential weights on [0, L] for a given mu_hat and wave speed."""

    mu_hat: float
    E: float
    L: float

    @property
    def wave_speed(self) -> float:
        return math.sqrt(self.E)

    def w_plus(self, x):
        return np.exp(-(self.mu_hat / self.wave_speed) * np.asarray(x, dtype=float))

    def w_minus(self, x):
        return np.exp(-(self.mu_hat / self.wave_speed) * (self.L - np.asarray(x, dtype=float)))

    def on_grid(self, cell_centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.w_plus(cell_centers), self.w_minus(cell_centers)


def weight_profile(sys: HyperbolicSystem, L: float, mu_hat: float) -> WeightProfile:
    if mu_hat < 0:
        raise MaterialError("mu_hat must be >= 0")
    if L <= 0:
        raise MaterialError("L must be > 0")
    return WeightProfile(mu_hat=float(mu_hat), E=sys.E, L=float(L))


@dataclass(frozen=True)
class GainPair:
    """Boundary reflection gains r_plus(0) = K0 r_minus(0),
    r_minus(L) = K1 r_plus(L)."""

    K0: float
    K1: float

    @property
    def max_abs(self) -> float:
        return max(abs(self.K0), abs(self.K1))


@dataclass(frozen=True)
class DecayCertificate:
    """Certified decay data: L(t) <= L(0) exp(-mu t) when valid."""

    mu_hat: float
    mu: float
    gains: GainPair
    condition1_ok: bool
    condition2_ok: bool

    @property
    def valid(self) -> bool:
        return self.condition1_ok and self.condition2_ok

    def to_json_dict(self) -> dict:
        return {
            "mu_hat": self.mu_hat,
            "mu": self.mu,
            "K0": self.gains.K0,
            "K1": self.gains.K1,
            "condition1_ok": self.condition1_ok,
            "condition2_ok": self.condition2_ok,
            "valid": self.valid,
        }


def _source_penalty(sys: HyperbolicSystem, weights: WeightProfile, x):
    """Signed minimal eigenvalue of W B + B^T W at positions x.

    With B = (S*/2) ones the matrix is S* [[wp, s/2], [s/2, wm]] with
    s = wp + wm; eigenvalues follow from trace and determinant.
    """
    wp = weights.w_plus(x)
    wm = weights.w_minus(x)
    s_star = sys.S_star
    tr = s_star * (wp + wm)
    disc = np.hypot(s_star * (wp - wm), s_star * (wp + wm))
    return 0.5 * (tr - disc)


def _golden_min(f, a: float, b: float, tol: float = 1e-10, max_iter: int = 200) -> float:
    """Golden-section minimum of a scalar function on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    it = 0
    while (b - a) > tol and it < max_iter:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
        it += 1
    return min(f(a), f1, f2, f(b))


def decay_rate(sys: HyperbolicSystem, L: float, mu_hat: float,
               n_grid: int = 1025) -> float:
    """mu(mu_hat) = mu_hat + min over x in [0, L] of the source penalty.

    The minimum is taken on a uniform grid including both endpoints and
    refined by a golden-section search on the bracketing interval.  (For
    this closed-form penalty the extremum sits at an endpoint, which the
    grid contains exactly.)
    """
    if mu_hat < 0:
        raise MaterialError("mu_hat must be >= 0")
    if n_grid < 2:
        raise MaterialError("n_grid must be >= 2")
    weights = weight_profile(sys, L, mu_hat)
    x = np.linspace(0.0, L, n_grid)
    vals = _source_penalty(sys, weights, x)
    i = int(np.argmin(vals))
    best = float(vals[i])
    lo = x[max(i - 1, 0)]
    hi = x[min(i + 1, n_grid - 1)]
    if hi > lo:
        refined = _golden_min(lambda xx: float(_source_penalty(sys, weights, xx)), lo, hi,
                              tol=1e-10 * max(L, 1.0))
        best = min(best, refined)
    return mu_hat + best


def decay_rate_lower_bound(sys: HyperbolicSystem, mu_hat: float) -> float:
    """Analytic estimate mu(mu_hat) >= mu_hat - 2 |S*|."""
    return mu_hat - 2.0 * abs(sys.S_star)


def synthesize_gains(sys: HyperbolicSystem, params: MaterialParams) -> GainPair:
    """Feedback gains K0 = K1 = exp(-(L / sqrt(E)) |S*|), always in (0, 1]."""
    k = math.exp(-(params.length / sys.wave_speed) * abs(sys.S_star))
    return GainPair(K0=k, K1=k)


def check_conditions(sys: HyperbolicSystem, params: MaterialParams,
                     gains: GainPair, mu_hat: float) -> DecayCertificate:
    """Evaluate both decay conditions and return the certificate."""
    if mu_hat < 0:
        raise MaterialError("mu_hat must be >= 0")
    mu = decay_rate(sys, params.length, mu_hat)
    cond1 = mu > 0.0
    cond2 = math.exp(mu_hat * params.length / (2.0 * sys.wave_speed)) * gains.max_abs < 1.0
    return DecayCertificate(mu_hat=mu_hat, mu=mu, gains=gains,
                            condition1_ok=cond1, condition2_ok=cond2)


def _violation(sys: HyperbolicSystem, params: MaterialParams,
               gains: GainPair, cert: DecayCertificate) -> float:
    """Non-negative measure of how far a certificate is from validity."""
    v1 = max(0.0, -cert.mu)
    c2 = math.exp(cert.mu_hat * params.length / (2.0 * sys.wave_speed)) * gains.max_abs
    v2 = max(0.0, c2 - 1.0)
    return v1 + v2


def search_mu_hat(sys: HyperbolicSystem, params: MaterialParams,
                  gains: GainPair, mu_hat_max: float,
                  n_scan: int = 256) -> DecayCertificate:
    """Scan mu_hat over a uniform grid in (0, mu_hat_max] and return the
    valid certificate with the largest mu; if none is valid, return the
    least-violating certificate (flagged invalid)."""
    if mu_hat_max <= 0:
        raise MaterialError("mu_hat_max must be > 0")
    if n_scan < 2:
        raise MaterialError("n_scan must be >= 2")
    best_valid: DecayCertificate | None = None
    least_bad: DecayCertificate | None = None
    least_bad_v = math.inf
    for j in range(1, n_scan + 1):
        mu_hat = mu_hat_max * j / n_scan
        cert = check_conditions(sys, params, gains, mu_hat)
        if cert.valid:
            if best_valid is None or cert.mu > best_valid.mu:
                best_valid = cert
        else:
            v = _violation(sys, params, gains, cert)
            if v < least_bad_v:
                least_bad_v = v
                least_bad = cert
    return best_valid if best_valid is not None else least_bad


def lyapunov_functional(weights: WeightProfile, cell_centers: np.ndarray,
                        dx: float, r_plus: np.ndarray,
                        r_minus: np.ndarray) -> float:
    """Midpoint-rule quadrature of the weighted energy over cell centers."""
    wp, wm = weights.on_grid(cell_centers)
    return float(dx * np.sum(wp * np.square(r_plus) + wm * np.square(r_minus)))


def norm_equivalence_constant(sys: HyperbolicSystem, L: float, mu_hat: float) -> float:
    """Constant C with C ||U||^2 <= L(t) <= (1/C) ||U||^2 on grid states.

    Built from the singular values of T (sigma^2 in {2E, 2}) and the weight
    floor exp(-mu_hat L / c): cellwise,
        w_min ||r||^2 <= wp rp^2 + wm rm^2 <= ||r||^2
    and sigma_min(T)^-2 ||u||^2 <= ... so
        C = min(w_min / sigma_max(T)^2, sigma_min(T)^2).
    """
    c = sys.wave_speed
    w_min = math.exp(-mu_hat * L / c)
    smax_sq = 2.0 * max(sys.E, 1.0)
    smin_sq = 2.0 * min(sys.E, 1.0)
    return min(w_min / smax_sq, smin_sq)
