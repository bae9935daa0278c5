"""Command-line front end.

Subcommands:
    certify   -- synthesize gains and a decay certificate, write JSON
    simulate  -- run the configured closed-loop simulation, write CSV + JSON
    sweep     -- rerun simulate over a list of values for one config key
    refine    -- grid-refinement study of the pure-transport scheme

Common flags: --config PATH (required), --out DIR, --quiet.
Exit codes: 0 success, 2 config error, 3 certification failed,
4 runtime failure.

All outputs are written atomically (write-then-rename), embed the fully
resolved configuration and contain nothing run-dependent besides the
configured values, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import control, lyapunov, solver
from .config import ConfigError, RunConfig, load_config, load_config_dict, set_by_path
from .hyperbolics import PerturbationState, build_system, to_riemann
from .material import InternalState, MaterialError, compute_S_star
from .solver import NonFiniteFieldError, TimeSeries

__all__ = ["main", "cmd_certify", "cmd_simulate", "cmd_sweep", "cmd_refine"]


# --- deterministic, atomic output helpers ---

def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv_atomic(series: TimeSeries, path: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    os.close(fd)
    try:
        series.to_csv(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- shared pipeline -------------------------------------------------------

class _Pipeline:
    """Everything derivable from a validated config before time stepping."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.params = cfg.material_params()
        self.desired = cfg.desired_state()
        self.desired.validate_on(self.params.length)
        self.law = cfg.law_instance()
        state = InternalState(X=cfg.initial["X0"], rho_bar=cfg.initial["rho0"],
                              temperature=cfg.initial["temperature"])
        if self.law is None:
            self.s_star = 0.0
        else:
            self.s_star = compute_S_star(self.law, self.params, self.desired, state)
        self.sys = build_system(self.params.elastic_modulus, self.s_star)
        self.gains = lyapunov.synthesize_gains(self.sys, self.params)
        self.certificate = self._certificate()

    def _certificate(self) -> lyapunov.DecayCertificate:
        ly = self.cfg.lyapunov
        policy = ly["mu_hat_policy"]
        if policy == "fixed":
            return lyapunov.check_conditions(self.sys, self.params, self.gains,
                                             ly["mu_hat"])
        if policy == "paper-default":
            cert = lyapunov.check_conditions(self.sys, self.params, self.gains,
                                             abs(self.s_star))
            if cert.valid:
                return cert
            # fall through to a scan when mu_hat = |S*| does not certify
        mu_max = ly["mu_hat_max"]
        if mu_max <= 0.0:
            mu_max = 2.0 * abs(self.s_star) if self.s_star != 0.0 \
                else self.sys.wave_speed / self.params.length
        return lyapunov.search_mu_hat(self.sys, self.params, self.gains,
                                      mu_max, ly["n_scan"])

    def controller(self, law_variant: str | None = None) -> control.FeedbackController:
        ctl = self.cfg.control
        return control.FeedbackController(
            params=self.params, desired=self.desired, gains=self.gains,
            s_star=self.s_star,
            law_variant=law_variant or ctl["law_variant"],
            left_mode=ctl["left"], right_mode=ctl["right"])


def _lyapunov_nonincreasing(series: TimeSeries, rtol: float = 1e-12) -> bool:
    lyap = series.lyapunov
    floor = 1e-300
    return bool(np.all(lyap[1:] <= lyap[:-1] * (1.0 + rtol) + floor))


def _initial_riemann(pipe: _Pipeline, grid: solver.Grid):
    """Default linear test profile: a smooth cosine hump in delta-sigma."""
    amp = pipe.cfg.initial["bump_amplitude"]
    x = grid.cell_centers
    dsig = solver.cosine_bump(x, center=0.5 * grid.length,
                              width=0.5 * grid.length, amplitude=amp)
    return to_riemann(pipe.sys, PerturbationState(np.zeros_like(dsig), dsig))


def _run_linear(pipe: _Pipeline, law_variant: str | None = None) -> TimeSeries:
    grid = pipe.cfg.grid()
    ctrl = pipe.controller(law_variant)
    gains_eff = control.effective_gains(ctrl)
    return solver.run_linear(pipe.sys, pipe.params, grid, gains_eff,
                             pipe.certificate.mu_hat, pipe.cfg.solver_config(),
                             _initial_riemann(pipe, grid))


def _run_nonlinear(pipe: _Pipeline) -> TimeSeries:
    if pipe.law is None:
        raise ConfigError("law.variant: nonlinear-split needs a constitutive law")
    cfg = pipe.cfg
    grid = cfg.grid()
    fields = solver.NonlinearFields.quiescent(
        grid, sigma0=cfg.initial["sigma0"], v0=cfg.initial["v0"],
        X0=cfg.initial["X0"], rho0=cfg.initial["rho0"],
        temperature=cfg.initial["temperature"])
    return solver.run_nonlinear(pipe.params, pipe.desired, pipe.law,
                                pipe.controller(), pipe.sys, grid,
                                cfg.solver_config(), fields,
                                mu_hat=pipe.certificate.mu_hat)


def _series_finals(series: TimeSeries) -> dict:
    return {
        "t": series.t[-1],
        "v_left": series.v_left[-1],
        "v_right": series.v_right[-1],
        "sigma_left": series.sigma_left[-1],
        "sigma_right": series.sigma_right[-1],
        "sigma_mean": series.sigma_mean[-1],
        "displacement": series.displacement[-1],
        "force": series.force[-1],
        "lyapunov": series.lyapunov[-1],
    }


def time_to_99(series: TimeSeries, sigma_star: float) -> float | None:
    """First recorded time at which the domain-mean stress reaches 99% of
    the target.  The mean (the cumulative force over the domain) rises
    smoothly, unlike the boundary trace, whose first crossing is quantized
    by wave arrivals."""
    target = 0.99 * abs(sigma_star)
    hit = np.abs(series.sigma_mean) >= target
    if not hit.any():
        return None
    return float(series.t[int(np.argmax(hit))])


# --- subcommands -----------------------------------------------------------

def cmd_certify(cfg: RunConfig, out_dir: str, quiet: bool = False) -> int:
    pipe = _Pipeline(cfg)
    cert = pipe.certificate
    payload = {
        "s_star": pipe.s_star,
        "certificate": cert.to_json_dict(),
        "decay_rate_lower_bound": lyapunov.decay_rate_lower_bound(pipe.sys, cert.mu_hat),
        "norm_equivalence_constant": lyapunov.norm_equivalence_constant(
            pipe.sys, pipe.params.length, cert.mu_hat),
        "config": cfg.to_json_dict(),
    }
    path = os.path.join(out_dir, cfg.output["summary"])
    _atomic_write(path, _json_text(payload))
    if not quiet:
        status = "valid" if cert.valid else "INVALID"
        print(f"certificate {status}: S*={pipe.s_star:.6g} mu_hat={cert.mu_hat:.6g} "
              f"mu={cert.mu:.6g} K0=K1={cert.gains.K0:.6g} -> {path}")
    return 0 if cert.valid else 3


def _simulate_payload(pipe: _Pipeline) -> tuple[TimeSeries, dict]:
    scheme = pipe.cfg.solver["scheme"]
    if scheme == "linear-riemann":
        series = _run_linear(pipe)
        try:
            fitted = solver.fit_decay_rate(series)
        except solver.InsufficientDataError:
            fitted = None
        adjudication = {"riemann-gain": _lyapunov_nonincreasing(_run_linear(pipe, "riemann-gain"))}
        if pipe.s_star != 0.0:
            adjudication["coth-closed-form"] = _lyapunov_nonincreasing(
                _run_linear(pipe, "coth-closed-form"))
        else:
            adjudication["coth-closed-form"] = None
        extra = {"fitted_rate": fitted, "variant_adjudication": adjudication}
    else:
        series = _run_nonlinear(pipe)
        extra = {
            "fitted_rate": None,
            "time_to_99": time_to_99(series, pipe.desired.sigma_star),
        }
    payload = {
        "status": "ok",
        "s_star": pipe.s_star,
        "certificate": pipe.certificate.to_json_dict(),
        "final": _series_finals(series),
        "config": pipe.cfg.to_json_dict(),
    }
    payload.update(extra)
    return series, payload


def cmd_simulate(cfg: RunConfig, out_dir: str, quiet: bool = False) -> int:
    pipe = _Pipeline(cfg)
    csv_path = os.path.join(out_dir, cfg.output["csv"])
    summary_path = os.path.join(out_dir, cfg.output["summary"])
    try:
        series, payload = _simulate_payload(pipe)
    except (NonFiniteFieldError, solver.CflError, MaterialError) as exc:
        payload = {
            "status": "failed",
            "error": str(exc),
            "s_star": pipe.s_star,
            "certificate": pipe.certificate.to_json_dict(),
            "config": cfg.to_json_dict(),
        }
        partial = getattr(exc, "partial_series", None)
        if partial is not None:
            _write_csv_atomic(partial, csv_path)
        _atomic_write(summary_path, _json_text(payload))
        if not quiet:
            print(f"simulation failed: {exc}", file=sys.stderr)
        return 4
    _write_csv_atomic(series, csv_path)
    _atomic_write(summary_path, _json_text(payload))
    if not quiet:
        final = payload["final"]
        print(f"simulated {series.t[-1]:.6g} s, {len(series.t)} records; "
              f"final sigma_right={final['sigma_right']:.6g} MPa, "
              f"force={final['force']:.6g} N -> {csv_path}")
    return 0


def cmd_sweep(cfg: RunConfig, out_dir: str, quiet: bool = False) -> int:
    path = cfg.sweep["path"]
    values = cfg.sweep["values"]
    if not path or not values:
        raise ConfigError("sweep.path and sweep.values are required for the sweep command")
    base = cfg.to_json_dict()
    columns = ("value", "status", "s_star", "mu_hat", "mu", "K0", "cert_valid",
               "fitted_rate", "final_sigma_right", "final_sigma_mean",
               "final_force", "final_v_right", "time_to_99", "final_l2_norm")
    rows = []
    for value in values:
        row = {name: "" for name in columns}
        row["value"] = value
        try:
            variant_cfg = load_config_dict(set_by_path(base, path, value))
            pipe = _Pipeline(variant_cfg)
            series, payload = _simulate_payload(pipe)
            cert = payload["certificate"]
            row.update(status="ok", s_star=payload["s_star"],
                       mu_hat=cert["mu_hat"], mu=cert["mu"], K0=cert["K0"],
                       cert_valid=cert["valid"],
                       fitted_rate=payload.get("fitted_rate"),
                       final_sigma_right=payload["final"]["sigma_right"],
                       final_sigma_mean=payload["final"]["sigma_mean"],
                       final_force=payload["final"]["force"],
                       final_v_right=payload["final"]["v_right"],
                       time_to_99=payload.get("time_to_99"),
                       final_l2_norm=series.l2_norm_u[-1])
        except (ConfigError, MaterialError, NonFiniteFieldError, solver.CflError) as exc:
            row.update(status="failed")
            row["error"] = str(exc)
        rows.append(row)

    def cell(v) -> str:
        if v is None or v == "":
            return ""
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            return f"{v:.12g}"
        return str(v)

    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(cell(row.get(name)) for name in columns))
    csv_path = os.path.join(out_dir, cfg.output["sweep_csv"])
    _atomic_write(csv_path, "\n".join(lines) + "\n")
    summary = {"sweep_path": path, "rows": rows, "config": base}
    _atomic_write(os.path.join(out_dir, cfg.output["summary"]), _json_text(summary))
    if not quiet:
        n_ok = sum(1 for r in rows if r["status"] == "ok")
        print(f"sweep over {path}: {n_ok}/{len(rows)} variants ok -> {csv_path}")
    return 0


def cmd_refine(cfg: RunConfig, out_dir: str, quiet: bool = False) -> int:
    """Pure-transport convergence study: a smooth pulse in r_plus with
    absorbing boundaries (S* = 0, K = 0) against the characteristics
    solution; reports L2 errors and observed orders."""
    if cfg.solver["cfl"] >= 1.0:
        raise ConfigError("solver.cfl: refine requires cfl < 1 "
                          "(at cfl = 1 upwind transport is an exact shift)")
    E = cfg.material["E"]
    L = cfg.material["L"]
    sys_ = build_system(E, 0.0)
    c = sys_.wave_speed
    gains = lyapunov.GainPair(K0=0.0, K1=0.0)
    t_end = cfg.refine["t_fraction"] * L / c
    center, width = 0.25 * L, 0.25 * L

    levels = list(cfg.refine["levels"])
    errors = []
    for n_cells in levels:
        grid = solver.Grid(n_cells=n_cells, length=L)
        dt = cfg.solver["cfl"] * grid.dx / c
        n_steps = int(math.ceil(t_end / dt - 1e-12))
        x = grid.cell_centers
        initial = solver.RiemannState(
            r_plus=solver.cosine_bump(x, center, width),
            r_minus=np.zeros(n_cells))
        final = solver.advance_linear(sys_, gains, grid, initial, dt, n_steps)
        t_fin = n_steps * dt
        exact = solver.cosine_bump(x - c * t_fin, center, width)
        err = math.sqrt(grid.dx * float(
            np.sum((final.r_plus - exact) ** 2 + final.r_minus ** 2)))
        errors.append(err)
    orders = [math.log2(errors[i] / errors[i + 1]) if errors[i + 1] > 0 else None
              for i in range(len(errors) - 1)]
    report = {
        "levels": levels,
        "l2_errors": errors,
        "observed_orders": orders,
        "t_end": t_end,
        "config": cfg.to_json_dict(),
    }
    path = os.path.join(out_dir, cfg.output["refine_report"])
    _atomic_write(path, _json_text(report))
    if not quiet:
        order_txt = ", ".join("n/a" if o is None else f"{o:.3f}" for o in orders)
        print(f"refinement over {levels}: observed orders [{order_txt}] -> {path}")
    return 0


# --- entry point -----------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="formstab",
        description="Boundary feedback stabilization of 1D viscoplastic forming")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("certify", cmd_certify), ("simulate", cmd_simulate),
                     ("sweep", cmd_sweep), ("refine", cmd_refine)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="TOML run configuration")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--quiet", action="store_true")
        p.set_defaults(fn=fn)
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        return args.fn(cfg, args.out, args.quiet)
    except (ConfigError, MaterialError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NonFiniteFieldError, solver.CflError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
