"""Finite-volume upwind integrator for the linearized Riemann system and,
via operator splitting, for the nonlinear viscoplastic system.

The linear closed loop (constant reflection gains) is advanced by the
stepping kernel in batches between records; the nonlinear scheme steps one
outer dt at a time because the controller is queried each step with the
boundary trace from the end of the previous step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .control import BoundarySample, FeedbackController, controller_step
from .hyperbolics import HyperbolicSystem, PerturbationState, RiemannState, to_riemann
from .lyapunov import GainPair, weight_profile
from .material import InternalState, MaterialError, MaterialParams, DesiredState, ViscoplasticLaw

__all__ = [
    "CflError",
    "NonFiniteFieldError",
    "InsufficientDataError",
    "Grid",
    "SolverConfig",
    "TimeSeries",
    "NonlinearFields",
    "cosine_bump",
    "step_linear",
    "advance_linear",
    "run_linear",
    "step_nonlinear",
    "run_nonlinear",
    "fit_decay_rate",
]

CSV_COLUMNS = ("t", "lyapunov", "l2_norm_U", "v_left", "v_right",
               "sigma_left", "sigma_right", "displacement", "force")


class CflError(RuntimeError):
    """Time step exceeds the CFL bound dt <= dx / sqrt(E)."""


class NonFiniteFieldError(RuntimeError):
    """A field became NaN or infinite during time stepping."""


class InsufficientDataError(ValueError):
    """Not enough usable records for a decay-rate fit."""


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid on [0, L]."""

    n_cells: int
    length: float

    def __post_init__(self):
        if self.n_cells < 2:
            raise MaterialError("n_cells must be >= 2")
        if not (math.isfinite(self.length) and self.length > 0):
            raise MaterialError("grid length must be finite and > 0")

    @property
    def dx(self) -> float:
        return self.length / self.n_cells

    @property
    def cell_centers(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dx


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping configuration; dt = cfl * dx / sqrt(E)."""

    t_end: float
    cfl: float = 0.95
    record_every: int = 1
    scheme: str = "linear-riemann"

    def __post_init__(self):
        if not (0.0 < self.cfl <= 1.0):
            raise MaterialError("cfl must lie in (0, 1]")
        if self.t_end <= 0.0:
            raise MaterialError("t_end must be > 0")
        if self.record_every < 1:
            raise MaterialError("record_every must be >= 1")
        if self.scheme not in ("linear-riemann", "nonlinear-split"):
            raise MaterialError(f"unknown scheme '{self.scheme}'")


@dataclass
class TimeSeries:
    """Recorded diagnostics; one entry per record instant.

    The CSV export writes the fixed column set t, lyapunov, l2_norm_U,
    v_left, v_right, sigma_left, sigma_right, displacement, force with 12
    significant digits.  sigma_mean (domain-average stress) is carried for
    transient metrics but is not part of the CSV contract.
    """

    t: np.ndarray
    lyapunov: np.ndarray
    l2_norm_u: np.ndarray
    v_left: np.ndarray
    v_right: np.ndarray
    sigma_left: np.ndarray
    sigma_right: np.ndarray
    displacement: np.ndarray
    force: np.ndarray
    sigma_mean: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.t) <= 0.0):
            raise MaterialError("record times must be strictly increasing")

    def to_csv(self, path) -> None:
        cols = (self.t, self.lyapunov, self.l2_norm_u, self.v_left,
                self.v_right, self.sigma_left, self.sigma_right,
                self.displacement, self.force)
        lines = [",".join(CSV_COLUMNS)]
        for row in zip(*cols):
            lines.append(",".join(f"{x:.12g}" for x in row))
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("\n".join(lines) + "\n")


class _Recorder:
    def __init__(self):
        self.rows = {name: [] for name in
                     ("t", "lyapunov", "l2_norm_u", "v_left", "v_right",
                      "sigma_left", "sigma_right", "displacement", "force",
                      "sigma_mean")}

    def add(self, **kw):
        for name, value in kw.items():
            self.rows[name].append(float(value))

    def freeze(self) -> TimeSeries:
        return TimeSeries(**{name: np.asarray(vals)
                             for name, vals in self.rows.items()})


def cosine_bump(x: np.ndarray, center: float, width: float,
                amplitude: float = 1.0) -> np.ndarray:
    """Smooth compactly supported hump: amp/2 * (1 + cos(2 pi (x-c)/w))
    inside |x - c| <= w/2, zero outside."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x - center) <= 0.5 * width
    return np.where(inside,
                    0.5 * amplitude * (1.0 + np.cos(2.0 * np.pi * (x - center) / width)),
                    0.0)


def _check_dt(dt: float, grid: Grid, wave_speed: float) -> float:
    bound = grid.dx / wave_speed
    if dt > bound * (1.0 + 1e-12):
        raise CflError(f"dt = {dt} exceeds the CFL bound dx/sqrt(E) = {bound}")
    return dt * wave_speed / grid.dx  # CFL number


def _source_exponential(s_star: float, dt: float) -> tuple[float, float, float, float]:
    """Entries of exp(-B dt) for B = (S*/2) ones: B/S* is idempotent, so
    exp(-B dt) = I + (ones/2) (exp(-S* dt) - 1)."""
    if s_star == 0.0:
        return 1.0, 0.0, 0.0, 1.0
    f = 0.5 * (math.exp(-s_star * dt) - 1.0)
    return 1.0 + f, f, f, 1.0 + f


def advance_linear(sys: HyperbolicSystem, gains: GainPair, grid: Grid,
                   state: RiemannState, dt: float,
                   n_steps: int) -> RiemannState:
    """Advance the closed-loop linear system n_steps and return the new
    Riemann fields; raises CflError when dt exceeds dx / sqrt(E)."""
    nu = _check_dt(dt, grid, sys.wave_speed)
    rp = np.array(state.r_plus, dtype=float, copy=True)
    rm = np.array(state.r_minus, dtype=float, copy=True)
    g00, g01, g10, g11 = _source_exponential(sys.S_star, dt)
    _kernels.advance_linear(rp, rm, nu, gains.K0, gains.K1,
                            g00, g01, g10, g11, n_steps)
    return RiemannState(r_plus=rp, r_minus=rm)


def step_linear(sys: HyperbolicSystem, gains: GainPair, grid: Grid,
                state: RiemannState, dt: float) -> RiemannState:
    """One upwind step of the closed-loop linear system: transport at
    speeds +-sqrt(E) with ghost inflow from the local reflection
    conditions, then the exact source exponential."""
    return advance_linear(sys, gains, grid, state, dt, 1)


def run_linear(sys: HyperbolicSystem, params: MaterialParams, grid: Grid,
               gains: GainPair, mu_hat: float, config: SolverConfig,
               initial: RiemannState) -> TimeSeries:
    """Advance the closed-loop linear system to t_end, recording the
    Lyapunov value, grid L2 norm of U and boundary traces.

    Boundary traces are perturbation quantities (dv, dsigma at the first
    and last cell); force is area * dsigma_right and displacement is the
    record-cadence trapezoid of the right-boundary dv trace.
    """
    c = sys.wave_speed
    dt = config.cfl * grid.dx / c
    nu = config.cfl
    n_steps = int(math.ceil(config.t_end / dt - 1e-12))
    weights = weight_profile(sys, grid.length, mu_hat)
    wp, wm = weights.on_grid(grid.cell_centers)
    g00, g01, g10, g11 = _source_exponential(sys.S_star, dt)

    rp = np.array(initial.r_plus, dtype=float, copy=True)
    rm = np.array(initial.r_minus, dtype=float, copy=True)
    if rp.shape != (grid.n_cells,) or rm.shape != (grid.n_cells,):
        raise MaterialError("initial Riemann fields must match the grid")

    rec = _Recorder()
    displacement = 0.0
    prev_t = 0.0
    prev_dv_right: float | None = None

    def record(step: int):
        nonlocal displacement, prev_t, prev_dv_right
        t = step * dt
        lyap = float(grid.dx * np.sum(wp * rp * rp + wm * rm * rm))
        dv = rm - rp
        dsig = c * (rp + rm)
        l2 = math.sqrt(grid.dx * float(np.sum(dv * dv + dsig * dsig)))
        dv_right = float(dv[-1])
        if prev_dv_right is not None and t > prev_t:
            displacement += 0.5 * (prev_dv_right + dv_right) * (t - prev_t)
        prev_t, prev_dv_right = t, dv_right
        rec.add(t=t, lyapunov=lyap, l2_norm_u=l2,
                v_left=dv[0], v_right=dv_right,
                sigma_left=dsig[0], sigma_right=dsig[-1],
                displacement=displacement, force=params.area * dsig[-1],
                sigma_mean=float(np.mean(dsig)))

    record(0)
    step = 0
    while step < n_steps:
        block = min(config.record_every, n_steps - step)
        _kernels.advance_linear(rp, rm, nu, gains.K0, gains.K1,
                                g00, g01, g10, g11, block)
        step += block
        if not (np.all(np.isfinite(rp)) and np.all(np.isfinite(rm))):
            bad = int(np.argmax(~(np.isfinite(rp) & np.isfinite(rm))))
            exc = NonFiniteFieldError(
                f"non-finite Riemann field at cell {bad} after step {step}")
            exc.partial_series = rec.freeze()
            raise exc
        record(step)
    return rec.freeze()


@dataclass
class NonlinearFields:
    """Cell-centered physical fields of the nonlinear system."""

    v: np.ndarray
    sigma: np.ndarray
    eps_p: np.ndarray
    state: InternalState

    @staticmethod
    def quiescent(grid: Grid, sigma0: float = 0.0, v0: float = 0.0,
                  X0: float = 0.0, rho0: float = 0.0,
                  temperature: float = 20.0) -> "NonlinearFields":
        n = grid.n_cells
        return NonlinearFields(
            v=np.full(n, v0, dtype=float),
            sigma=np.full(n, sigma0, dtype=float),
            eps_p=np.zeros(n),
            state=InternalState(X=np.full(n, X0, dtype=float),
                                rho_bar=np.full(n, rho0, dtype=float),
                                temperature=temperature))


def _relax_rates(law: ViscoplasticLaw, E: float, sigma, eps_p, X, rho,
                 temperature: float):
    state = InternalState(X=np.clip(X, 0.0, 1.0),
                          rho_bar=np.maximum(rho, 0.0),
                          temperature=temperature)
    ep_rate = np.asarray(law.plastic_strain_rate(sigma, state), dtype=float)
    dX, drho = law.internal_state_rate(sigma, state, eps_p)
    return -E * ep_rate, ep_rate, np.asarray(dX, dtype=float), np.asarray(drho, dtype=float)


def _relax_substep(law: ViscoplasticLaw, E: float, fields: NonlinearFields,
                   dt: float) -> None:
    """Cellwise relaxation of the stiff source over dt (classical RK4),
    sub-cycled when the initial rates would move a state by more than 10%
    of its magnitude in one step (at most 100 substeps)."""
    temperature = fields.state.temperature
    sig = fields.sigma
    epp = fields.eps_p
    X = np.asarray(fields.state.X, dtype=float)
    rho = np.asarray(fields.state.rho_bar, dtype=float)

    dsig, depp, dX, drho = _relax_rates(law, E, sig, epp, X, rho, temperature)
    rel = 0.0
    if dsig.size:
        rel = max(
            float(np.max(np.abs(dsig) * dt / (np.abs(sig) + 1.0))),
            float(np.max(np.abs(dX) * dt)),
            float(np.max(np.abs(drho) * dt / (np.abs(rho) + 1.0))),
        )
    if rel <= 0.1:
        n_sub = 1
    elif not math.isfinite(rel):
        n_sub = 100
    else:
        n_sub = min(100, int(math.ceil(rel / 0.1)))
    h = dt / n_sub

    for _ in range(n_sub):
        k1 = _relax_rates(law, E, sig, epp, X, rho, temperature)
        k2 = _relax_rates(law, E, sig + 0.5 * h * k1[0], epp + 0.5 * h * k1[1],
                          X + 0.5 * h * k1[2], rho + 0.5 * h * k1[3], temperature)
        k3 = _relax_rates(law, E, sig + 0.5 * h * k2[0], epp + 0.5 * h * k2[1],
                          X + 0.5 * h * k2[2], rho + 0.5 * h * k2[3], temperature)
        k4 = _relax_rates(law, E, sig + h * k3[0], epp + h * k3[1],
                          X + h * k3[2], rho + h * k3[3], temperature)
        sig = sig + (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        epp = epp + (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        X = np.clip(X + (h / 6.0) * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]), 0.0, 1.0)
        rho = np.maximum(rho + (h / 6.0) * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]), 0.0)

    fields.sigma[:] = sig
    fields.eps_p[:] = epp
    fields.state.X[:] = X
    fields.state.rho_bar[:] = rho


def step_nonlinear(params: MaterialParams, law: ViscoplasticLaw, grid: Grid,
                   fields: NonlinearFields, dt: float,
                   v_left: float, v_right: float) -> None:
    """One split step: homogeneous elastic wave substep with prescribed
    boundary velocities, then the cellwise relaxation substep.  Updates
    fields in place."""
    if not (math.isfinite(v_left) and math.isfinite(v_right)):
        raise MaterialError("boundary velocities must be finite")
    c = params.wave_speed
    nu = _check_dt(dt, grid, c)
    _kernels.wave_step(fields.v, fields.sigma, c, nu, v_left, v_right)
    with np.errstate(over="ignore", invalid="ignore"):
        # overflowing laws are caught by the finiteness check below
        _relax_substep(law, params.elastic_modulus, fields, dt)
    for name, arr in (("v", fields.v), ("sigma", fields.sigma)):
        finite = np.isfinite(arr)
        if not finite.all():
            raise NonFiniteFieldError(
                f"non-finite {name} at cell {int(np.argmax(~finite))}")


def run_nonlinear(params: MaterialParams, desired: DesiredState,
                  law: ViscoplasticLaw, controller: FeedbackController,
                  sys: HyperbolicSystem, grid: Grid, config: SolverConfig,
                  fields: NonlinearFields, mu_hat: float = 0.0) -> TimeSeries:
    """Closed-loop nonlinear run.

    Each step the controller is queried with the boundary stresses from
    the end of the previous step (one-step-delayed explicit coupling) and
    the returned velocity commands are applied as boundary conditions of
    the wave substep.  The Lyapunov value and L2 norm are those of the
    perturbation (v - v*, sigma - sigma*).
    """
    c = params.wave_speed
    dt = config.cfl * grid.dx / c
    n_steps = int(math.ceil(config.t_end / dt - 1e-12))
    centers = grid.cell_centers
    v_star = np.asarray(desired.v_star(centers), dtype=float)
    if v_star.shape != centers.shape:
        v_star = np.array([float(desired.v_star(float(x))) for x in centers])
    weights = weight_profile(sys, grid.length, mu_hat)
    wp, wm = weights.on_grid(centers)
    die_right = controller.right_mode == "feedback" or controller.left_mode != "feedback"

    rec = _Recorder()
    displacement = 0.0

    def record(step: int, v_l: float, v_r: float):
        t = step * dt
        dv = fields.v - v_star
        dsig = fields.sigma - desired.sigma_star
        r = to_riemann(sys, PerturbationState(dv, dsig))
        lyap = float(grid.dx * np.sum(wp * r.r_plus ** 2 + wm * r.r_minus ** 2))
        l2 = math.sqrt(grid.dx * float(np.sum(dv * dv + dsig * dsig)))
        sig_die = fields.sigma[-1] if die_right else fields.sigma[0]
        rec.add(t=t, lyapunov=lyap, l2_norm_u=l2, v_left=v_l, v_right=v_r,
                sigma_left=fields.sigma[0], sigma_right=fields.sigma[-1],
                displacement=displacement, force=params.area * sig_die,
                sigma_mean=float(np.mean(fields.sigma)))

    sample = BoundarySample(t=0.0, sigma_left=float(fields.sigma[0]),
                            sigma_right=float(fields.sigma[-1]))
    v_l, v_r = controller_step(controller, sample)
    record(0, v_l, v_r)
    for k in range(1, n_steps + 1):
        try:
            step_nonlinear(params, law, grid, fields, dt, v_l, v_r)
        except NonFiniteFieldError as exc:
            exc.partial_series = rec.freeze()
            raise
        displacement += dt * (v_r if die_right else v_l)
        if k % config.record_every == 0 or k == n_steps:
            record(k, v_l, v_r)
        sample = BoundarySample(t=k * dt, sigma_left=float(fields.sigma[0]),
                                sigma_right=float(fields.sigma[-1]))
        v_l, v_r = controller_step(controller, sample)
    return rec.freeze()


def fit_decay_rate(series: TimeSeries, t_start: float = 0.0) -> float:
    """Least-squares slope of -ln L(t) versus t over records with
    t >= t_start, ignoring values below the 1e-30 floating-point floor."""
    mask = (series.t >= t_start) & (series.lyapunov > 1e-30)
    if int(mask.sum()) < 3:
        raise InsufficientDataError(
            "need at least 3 records with positive Lyapunov values after t_start")
    t = series.t[mask]
    y = -np.log(series.lyapunov[mask])
    slope, _ = np.polyfit(t, y, 1)
    return float(slope)
