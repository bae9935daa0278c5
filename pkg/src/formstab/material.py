"""Material parameters, desired states and viscoplastic constitutive laws.

Units are fixed repo-wide: stress in MPa, length in mm, time in s, force
in N (consistent because 1 MPa * 1 mm^2 = 1 N).  The material density is
normalized to 1, so the elastic wave speed is sqrt(E) in mm/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "MaterialError",
    "MaterialParams",
    "DesiredState",
    "InternalState",
    "ViscoplasticLaw",
    "NortonLaw",
    "HybridLaw",
    "norton_law",
    "hybrid_law",
    "compute_S_star",
]


class MaterialError(ValueError):
    """Invalid material parameter or constitutive coefficient."""


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise MaterialError(message)


@dataclass(frozen=True)
class MaterialParams:
    """Physical constants of the workpiece.

    elastic_modulus : E > 0 [MPa]
    length          : domain length L > 0 [mm]
    area            : cross-section A > 0 [mm^2]
    density         : normalized, must be 1
    """

    elastic_modulus: float
    length: float
    area: float
    density: float = 1.0

    def __post_init__(self):
        _require(math.isfinite(self.elastic_modulus) and self.elastic_modulus > 0,
                 "elastic_modulus must be finite and > 0")
        _require(math.isfinite(self.length) and self.length > 0,
                 "length must be finite and > 0")
        _require(math.isfinite(self.area) and self.area > 0,
                 "area must be finite and > 0")
        _require(self.density == 1.0, "density is normalized to 1")

    @property
    def wave_speed(self) -> float:
        """Elastic wave speed sqrt(E) (density normalized to 1)."""
        return math.sqrt(self.elastic_modulus)


@dataclass(frozen=True)
class DesiredState:
    """Target stress and target velocity profile v*(x) on [0, L]."""

    sigma_star: float
    v_star: Callable[[float], float]

    def __post_init__(self):
        _require(math.isfinite(self.sigma_star), "sigma_star must be finite")

    @staticmethod
    def linear_profile(sigma_star: float, v_left: float, v_right: float,
                       length: float) -> "DesiredState":
        """Desired state with v*(x) interpolating v_left at 0 to v_right at L.

        The linear profile is the steady velocity field when the plastic
        strain rate at sigma_star equals (v_right - v_left) / L.
        """
        _require(length > 0, "length must be > 0")
        _require(math.isfinite(v_left) and math.isfinite(v_right),
                 "boundary velocities must be finite")
        slope = (v_right - v_left) / length

        def v_star(x):
            return v_left + slope * x

        return DesiredState(sigma_star=sigma_star, v_star=v_star)

    def validate_on(self, length: float) -> None:
        """Check that v* is finite on a sample of [0, L]."""
        for x in np.linspace(0.0, length, 5):
            v = self.v_star(float(x))
            _require(np.all(np.isfinite(v)), f"v_star({x}) is not finite")


@dataclass
class InternalState:
    """Microstructure state: globularized fraction X in [0, 1] and
    dislocation density rho_bar >= 0 [1/mm^2]; temperature is a fixed
    label per run (no heat equation)."""

    X: float | np.ndarray = 0.0
    rho_bar: float | np.ndarray = 0.0
    temperature: float = 20.0

    def __post_init__(self):
        _require(bool(np.all((np.asarray(self.X) >= 0.0) & (np.asarray(self.X) <= 1.0))),
                 "X must lie in [0, 1]")
        _require(bool(np.all(np.asarray(self.rho_bar) >= 0.0)),
                 "rho_bar must be >= 0")

    def copy(self) -> "InternalState":
        return InternalState(X=np.array(self.X, copy=True) if isinstance(self.X, np.ndarray) else self.X,
                             rho_bar=np.array(self.rho_bar, copy=True) if isinstance(self.rho_bar, np.ndarray) else self.rho_bar,
                             temperature=self.temperature)


class ViscoplasticLaw:
    """Base interface for constitutive laws.

    Implementations must be vectorized: sigma and the state components may
    be scalars or same-shaped arrays.  plastic_strain_rate must be monotone
    non-decreasing in sigma for sigma >= 0 so that the linearization S* is
    non-negative at admissible desired states.
    """

    name = "base"

    def plastic_strain_rate(self, sigma, state: InternalState):
        """Viscoplastic strain rate [1/s] at stress sigma and given state."""
        raise NotImplementedError

    def internal_state_rate(self, sigma, state: InternalState, eps_p=0.0):
        """Rates (dX/dt, drho_bar/dt).  eps_p is the accumulated plastic
        strain, needed by strain-driven kinetics (Avrami)."""
        raise NotImplementedError


@dataclass(frozen=True)
class NortonLaw(ViscoplasticLaw):
    """Power-law creep: rate = (sigma / sigma_ref)^n / t_ref for sigma >= 0,
    zero otherwise.  No internal-state evolution."""

    sigma_ref: float
    n: float
    t_ref: float
    name: str = field(default="norton", init=False)

    def plastic_strain_rate(self, sigma, state: InternalState = None):
        s = np.asarray(sigma, dtype=float)
        rate = np.where(s > 0.0, (np.maximum(s, 0.0) / self.sigma_ref) ** self.n / self.t_ref, 0.0)
        return rate if rate.ndim else float(rate)

    def internal_state_rate(self, sigma, state: InternalState, eps_p=0.0):
        z = np.zeros_like(np.asarray(sigma, dtype=float))
        return (z if z.ndim else 0.0), (z if z.ndim else 0.0)

    def rate_derivative(self, sigma) -> float:
        """Closed-form d(rate)/d(sigma), used by tests as an oracle."""
        s = float(sigma)
        if s <= 0.0:
            return 0.0
        return self.n * (s / self.sigma_ref) ** (self.n - 1.0) / (self.sigma_ref * self.t_ref)


def norton_law(sigma_ref: float, n: float, t_ref: float) -> NortonLaw:
    """Construct a Norton power law; validates coefficients."""
    _require(math.isfinite(sigma_ref) and sigma_ref > 0, "sigma_ref must be > 0")
    _require(math.isfinite(n) and n >= 1.0, "exponent n must be >= 1")
    _require(math.isfinite(t_ref) and t_ref > 0, "t_ref must be > 0")
    return NortonLaw(sigma_ref=sigma_ref, n=n, t_ref=t_ref)


@dataclass(frozen=True)
class HybridLaw(ViscoplasticLaw):
    """Strain hardening/softening law combining:

    - Kocks-Mecking dislocation kinetics:
        drho/dt = k1 * sqrt(rho) * |ep_rate| - k2 * rho * |ep_rate|
    - Taylor flow resistance per phase:
        sigma_phase = sigma0_phase + taylor_prefactor * sqrt(rho)
      (taylor_prefactor bundles alpha * M * G * b)
    - Avrami globularization, rate form of X = 1 - exp(-k * eps_p^m):
        dX/dt = k * m * eps_p^(m-1) * (1 - X) * |ep_rate|
    - mixture flow stress  sigma_mix = X * sigma_glob + (1 - X) * sigma_lam
    - Norton-type overstress driving the plastic rate:
        ep_rate = ((sigma - sigma_mix) / sigma_ref)^n / t_ref  for
        sigma > sigma_mix, else 0.
    """

    km_k1: float
    km_k2: float
    avrami_k: float
    avrami_m: float
    sigma0_lam: float
    sigma0_glob: float
    taylor_prefactor: float
    sigma_ref: float
    n: float
    t_ref: float
    name: str = field(default="hybrid", init=False)

    def mixture_stress(self, state: InternalState):
        rho = np.asarray(state.rho_bar, dtype=float)
        hard = self.taylor_prefactor * np.sqrt(np.maximum(rho, 0.0))
        sig_lam = self.sigma0_lam + hard
        sig_glob = self.sigma0_glob + hard
        X = np.asarray(state.X, dtype=float)
        mix = X * sig_glob + (1.0 - X) * sig_lam
        return mix if mix.ndim else float(mix)

    def plastic_strain_rate(self, sigma, state: InternalState):
        over = np.asarray(sigma, dtype=float) - self.mixture_stress(state)
        rate = np.where(over > 0.0, (np.maximum(over, 0.0) / self.sigma_ref) ** self.n / self.t_ref, 0.0)
        return rate if rate.ndim else float(rate)

    def internal_state_rate(self, sigma, state: InternalState, eps_p=0.0):
        ep_rate = np.abs(np.asarray(self.plastic_strain_rate(sigma, state), dtype=float))
        rho = np.asarray(state.rho_bar, dtype=float)
        drho = self.km_k1 * np.sqrt(np.maximum(rho, 0.0)) * ep_rate - self.km_k2 * rho * ep_rate
        ep = np.asarray(eps_p, dtype=float)
        X = np.asarray(state.X, dtype=float)
        # eps_p^(m-1) diverges at 0 for m < 1; kinetics only act once
        # plastic strain has accumulated.
        safe = np.where(ep > 0.0, ep, 1.0)
        dX = np.where(ep > 0.0,
                      self.avrami_k * self.avrami_m * safe ** (self.avrami_m - 1.0)
                      * (1.0 - X) * ep_rate,
                      0.0)
        if drho.ndim == 0:
            return float(dX), float(drho)
        return dX, drho


def hybrid_law(kocks_mecking: dict, avrami: dict, taylor: dict,
               overstress: dict | None = None) -> HybridLaw:
    """Construct the hybrid hardening/softening law from coefficient dicts.

    kocks_mecking: {"k1", "k2"}; avrami: {"k", "m"};
    taylor: {"sigma0_lam", "sigma0_glob", "prefactor"};
    overstress (optional): {"sigma_ref", "n", "t_ref"} for the Norton-type
    overstress rate (defaults sigma_ref=1, n=1, t_ref=1).
    """
    over = {"sigma_ref": 1.0, "n": 1.0, "t_ref": 1.0}
    if overstress:
        over.update(overstress)
    law = HybridLaw(
        km_k1=float(kocks_mecking["k1"]),
        km_k2=float(kocks_mecking["k2"]),
        avrami_k=float(avrami["k"]),
        avrami_m=float(avrami["m"]),
        sigma0_lam=float(taylor["sigma0_lam"]),
        sigma0_glob=float(taylor["sigma0_glob"]),
        taylor_prefactor=float(taylor["prefactor"]),
        sigma_ref=float(over["sigma_ref"]),
        n=float(over["n"]),
        t_ref=float(over["t_ref"]),
    )
    for fname in ("km_k1", "km_k2", "avrami_k", "avrami_m", "sigma0_lam",
                  "sigma0_glob", "taylor_prefactor", "sigma_ref", "n", "t_ref"):
        _require(math.isfinite(getattr(law, fname)), f"coefficient {fname} must be finite")
    _require(law.km_k2 >= 0.0, "annihilation coefficient k2 must be >= 0")
    _require(law.sigma_ref > 0 and law.t_ref > 0 and law.n >= 1.0,
             "overstress coefficients must satisfy sigma_ref > 0, t_ref > 0, n >= 1")
    return law


def compute_S_star(law: ViscoplasticLaw, params: MaterialParams,
                   desired: DesiredState, state: InternalState,
                   fd_step: float | None = None) -> float:
    """Linearization constant of the plastic source at the desired state:

        S* = E * d/dsigma [ plastic_strain_rate ](sigma*),

    by central finite differences with the internal state frozen.  The
    default step is max(1e-6 * |sigma*|, 1e-8) MPa.
    """
    sigma_star = desired.sigma_star
    if fd_step is None:
        fd_step = max(1e-6 * abs(sigma_star), 1e-8)
    _require(fd_step > 0, "fd_step must be > 0")
    hi = law.plastic_strain_rate(sigma_star + fd_step, state)
    lo = law.plastic_strain_rate(sigma_star - fd_step, state)
    s_star = params.elastic_modulus * (float(hi) - float(lo)) / (2.0 * fd_step)
    if not math.isfinite(s_star):
        raise MaterialError(
            f"plastic strain rate is not finite near sigma* = {sigma_star}")
    return s_star
