"""formstab: Lyapunov-based boundary feedback for 1D viscoplastic forming.

Synthesizes feedback gains from material parameters, certifies an
exponential decay rate for the linearized closed loop, and simulates both
the linear Riemann-invariant system and the nonlinear viscoplastic system
with a finite-volume upwind scheme.

Units repo-wide: MPa, mm, s, N (1 MPa * mm^2 = 1 N; density normalized
to 1, wave speed sqrt(E) mm/s).
"""

from ._kernels import BACKEND as kernel_backend
from .control import (BoundarySample, ControlError, FeedbackController,
                      boundary_coefficients, controller_step, effective_gains,
                      feedback_velocity_left, feedback_velocity_right,
                      force_to_stress)
from .hyperbolics import (HyperbolicSystem, PerturbationState, RiemannState,
                          build_system, to_physical, to_riemann)
from .lyapunov import (DecayCertificate, GainPair, WeightProfile,
                       check_conditions, decay_rate, decay_rate_lower_bound,
                       lyapunov_functional, norm_equivalence_constant,
                       search_mu_hat, synthesize_gains, weight_profile)
from .material import (DesiredState, InternalState, MaterialError,
                       MaterialParams, NortonLaw, HybridLaw, ViscoplasticLaw,
                       compute_S_star, hybrid_law, norton_law)
from .solver import (CflError, Grid, InsufficientDataError, NonFiniteFieldError,
                     NonlinearFields, SolverConfig, TimeSeries, advance_linear,
                     cosine_bump, fit_decay_rate, run_linear, run_nonlinear,
                     step_linear, step_nonlinear)

__version__ = "0.1.0"
