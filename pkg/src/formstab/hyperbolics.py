"""Linearized 2x2 hyperbolic system and Riemann-invariant transforms.

The perturbation U = (dv, dsigma) around the desired state satisfies

    d/dt U + A d/dx U = -S U,   A = [[0, -1], [-E, 0]],  S = [[0, 0], [0, S*]].

A diagonalizes with eigenvalues +-sqrt(E); all matrices are stored in
closed form so the transform identities hold to machine precision:

    T = [[-1, 1], [sqrt(E), sqrt(E)]],      Lambda = diag(+sqrt(E), -sqrt(E)),
    T^-1 = [[-1/2, 1/(2 sqrt(E))], [1/2, 1/(2 sqrt(E))]],
    B = T^-1 S T = (S*/2) * ones(2, 2).

The first Riemann component r_plus pairs with +sqrt(E) and is transported
rightward; r_minus moves leftward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .material import MaterialError

__all__ = [
    "HyperbolicSystem",
    "PerturbationState",
    "RiemannState",
    "build_system",
    "to_riemann",
    "to_physical",
]


class PerturbationState(NamedTuple):
    """Physical perturbation (dv, dsigma); entries may be grid arrays."""

    delta_v: float | np.ndarray
    delta_sigma: float | np.ndarray


class RiemannState(NamedTuple):
    """Characteristic variables (r_plus, r_minus) = T^-1 (dv, dsigma)."""

    r_plus: float | np.ndarray
    r_minus: float | np.ndarray


@dataclass(frozen=True)
class HyperbolicSystem:
    E: float
    S_star: float

    @property
    def wave_speed(self) -> float:
        return math.sqrt(self.E)

    @property
    def A(self) -> np.ndarray:
        return np.array([[0.0, -1.0], [-self.E, 0.0]])

    @property
    def S(self) -> np.ndarray:
        return np.array([[0.0, 0.0], [0.0, self.S_star]])

    @property
    def T(self) -> np.ndarray:
        c = self.wave_speed
        return np.array([[-1.0, 1.0], [c, c]])

    @property
    def T_inv(self) -> np.ndarray:
        c = self.wave_speed
        return np.array([[-0.5, 0.5 / c], [0.5, 0.5 / c]])

    @property
    def Lambda(self) -> np.ndarray:
        c = self.wave_speed
        return np.array([[c, 0.0], [0.0, -c]])

    @property
    def B(self) -> np.ndarray:
        return 0.5 * self.S_star * np.ones((2, 2))


def build_system(E: float, S_star: float) -> HyperbolicSystem:
    """Assemble the closed-form system matrices; requires E > 0."""
    if not (math.isfinite(E) and E > 0.0):
        raise MaterialError("elastic modulus E must be finite and > 0")
    if not math.isfinite(S_star):
        raise MaterialError("S_star must be finite")
    return HyperbolicSystem(E=float(E), S_star=float(S_star))


def to_riemann(sys: HyperbolicSystem, u: PerturbationState) -> RiemannState:
    """r = T^-1 u: r_plus = -dv/2 + dsigma/(2c), r_minus = dv/2 + dsigma/(2c)."""
    c = sys.wave_speed
    half_sig = np.multiply(u.delta_sigma, 0.5 / c)
    r_plus = half_sig - np.multiply(u.delta_v, 0.5)
    r_minus = half_sig + np.multiply(u.delta_v, 0.5)
    return RiemannState(r_plus=r_plus, r_minus=r_minus)


def to_physical(sys: HyperbolicSystem, r: RiemannState) -> PerturbationState:
    """u = T r: dv = r_minus - r_plus, dsigma = c (r_plus + r_minus)."""
    c = sys.wave_speed
    delta_v = np.subtract(r.r_minus, r.r_plus)
    delta_sigma = np.multiply(np.add(r.r_plus, r.r_minus), c)
    return PerturbationState(delta_v=delta_v, delta_sigma=delta_sigma)
