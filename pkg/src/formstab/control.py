"""Boundary feedback laws in physical variables and the plant-facing
controller protocol.

Both law variants are affine in the measured stress.  With gains K0, K1
the reflection conditions r_plus(0) = K0 r_minus(0) and
r_minus(L) = K1 r_plus(L) translate into velocity commands

    v(t, 0) = v*(0) + (1 - K0) / (sqrt(E) (1 + K0)) * (sigma(t, 0) - sigma*)
    v(t, L) = v*(L) + (K1 - 1) / (sqrt(E) (1 + K1)) * (sigma(t, L) - sigma*)

(the "riemann-gain" variant; the coefficient magnitude equals
tanh(a / 2) / sqrt(E) with a = (L / sqrt(E)) |S*| when the gains come from
the synthesis formula).  The "coth-closed-form" variant uses the
coefficient +-coth(a) / sqrt(E) instead and is kept for comparison runs;
it is undefined at S* = 0.

Enforcing a velocity command v = v* + coef * (sigma - sigma*) at a
boundary is equivalent to a constant effective reflection gain,

    left:  K_eff = (1 - coef c) / (1 + coef c),
    right: K_eff = (1 + coef c) / (1 - coef c),   c = sqrt(E),

which is what the linear closed-loop runner uses; the decay test in the
acceptance suite adjudicates the variants on exactly these gains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .lyapunov import GainPair
from .material import DesiredState, MaterialParams

__all__ = [
    "ControlError",
    "FeedbackController",
    "BoundarySample",
    "force_to_stress",
    "feedback_velocity_left",
    "feedback_velocity_right",
    "controller_step",
    "boundary_coefficients",
    "effective_gains",
]

LAW_VARIANTS = ("riemann-gain", "coth-closed-form")
BOUNDARY_MODES = ("feedback", "wall")


class ControlError(ValueError):
    """Invalid controller construction or sample."""


class BoundarySample(NamedTuple):
    """Boundary stress measurements at the end of a step (MPa)."""

    t: float
    sigma_left: float
    sigma_right: float

    @staticmethod
    def from_forces(t: float, force_left: float, force_right: float,
                    area: float) -> "BoundarySample":
        return BoundarySample(t=t,
                              sigma_left=force_to_stress(force_left, area),
                              sigma_right=force_to_stress(force_right, area))


@dataclass(frozen=True)
class FeedbackController:
    """Immutable boundary feedback law; controller_step is a pure function.

    A side in "wall" mode commands v = 0 (symmetry plane) regardless of
    the measured stress.
    """

    params: MaterialParams
    desired: DesiredState
    gains: GainPair
    s_star: float
    law_variant: str = "riemann-gain"
    left_mode: str = "feedback"
    right_mode: str = "feedback"

    def __post_init__(self):
        if self.law_variant not in LAW_VARIANTS:
            raise ControlError(f"unknown law_variant '{self.law_variant}'")
        for mode in (self.left_mode, self.right_mode):
            if mode not in BOUNDARY_MODES:
                raise ControlError(f"unknown boundary mode '{mode}'")
        if self.law_variant == "coth-closed-form" and self.s_star == 0.0:
            raise ControlError(
                "coth-closed-form law is undefined at S* = 0 (coth(0) diverges)")
        if not (math.isfinite(self.gains.K0) and math.isfinite(self.gains.K1)):
            raise ControlError("gains must be finite")


def force_to_stress(force: float, area: float) -> float:
    """sigma = F / A; the plant measures force, the control law uses stress."""
    if not (math.isfinite(area) and area > 0.0):
        raise ControlError("area must be finite and > 0")
    return force / area


def boundary_coefficients(ctrl: FeedbackController) -> tuple[float, float]:
    """Affine slopes (coef_left, coef_right) of the velocity commands with
    respect to the measured stress; zero for a wall side."""
    c = ctrl.params.wave_speed
    if ctrl.law_variant == "riemann-gain":
        k0, k1 = ctrl.gains.K0, ctrl.gains.K1
        coef_left = (1.0 - k0) / (c * (1.0 + k0))
        coef_right = (k1 - 1.0) / (c * (1.0 + k1))
    else:
        a = (ctrl.params.length / c) * abs(ctrl.s_star)
        coef_left = (1.0 / c) / math.tanh(a)
        coef_right = -coef_left
    if ctrl.left_mode == "wall":
        coef_left = 0.0
    if ctrl.right_mode == "wall":
        coef_right = 0.0
    return coef_left, coef_right


def feedback_velocity_left(ctrl: FeedbackController, sigma_measured: float) -> float:
    """Velocity command at x = 0 for a measured boundary stress."""
    if ctrl.left_mode == "wall":
        return 0.0
    coef, _ = boundary_coefficients(ctrl)
    v_star0 = float(ctrl.desired.v_star(0.0))
    return v_star0 + coef * (sigma_measured - ctrl.desired.sigma_star)


def feedback_velocity_right(ctrl: FeedbackController, sigma_measured: float) -> float:
    """Velocity command at x = L for a measured boundary stress."""
    if ctrl.right_mode == "wall":
        return 0.0
    _, coef = boundary_coefficients(ctrl)
    v_star_l = float(ctrl.desired.v_star(ctrl.params.length))
    return v_star_l + coef * (sigma_measured - ctrl.desired.sigma_star)


def controller_step(ctrl: FeedbackController,
                    sample: BoundarySample) -> tuple[float, float]:
    """Velocity commands (v_left, v_right) for the next step, computed from
    the boundary stresses measured at the end of the previous step."""
    if not (math.isfinite(sample.sigma_left) and math.isfinite(sample.sigma_right)):
        raise ControlError("boundary sample stresses must be finite")
    return (feedback_velocity_left(ctrl, sample.sigma_left),
            feedback_velocity_right(ctrl, sample.sigma_right))


def effective_gains(ctrl: FeedbackController) -> GainPair:
    """Constant reflection gains equivalent to the affine velocity laws.

    A wall side (coefficient 0) reflects neutrally with gain 1; the
    riemann-gain variant reproduces the synthesized (K0, K1) and the coth
    variant yields -K^2 when the gains come from the synthesis formula.
    """
    c = ctrl.params.wave_speed
    coef_left, coef_right = boundary_coefficients(ctrl)
    k_left = (1.0 - coef_left * c) / (1.0 + coef_left * c)
    k_right = (1.0 + coef_right * c) / (1.0 - coef_right * c)
    return GainPair(K0=k_left, K1=k_right)
