"""Run configuration: a single TOML file with one section per module.

Every module precondition that can be checked at load time is checked
here, and violations report the failing key path (e.g. "material.E").
The resolved configuration (defaults included) is echoed into every
output JSON for provenance.
"""

from __future__ import annotations

import copy
import math
import sys
from dataclasses import dataclass
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .control import BOUNDARY_MODES, LAW_VARIANTS
from .material import (DesiredState, InternalState, MaterialParams,
                       ViscoplasticLaw, hybrid_law, norton_law)
from .solver import Grid, SolverConfig

__all__ = ["ConfigError", "RunConfig", "load_config", "load_config_dict",
           "set_by_path"]

_REQUIRED = object()


class ConfigError(ValueError):
    """Invalid or missing configuration value; message names the key path."""


class _Section:
    def __init__(self, data: dict, path: str):
        self.data = data if data is not None else {}
        self.path = path
        if not isinstance(self.data, dict):
            raise ConfigError(f"{path}: expected a table")

    def child(self, key: str) -> "_Section":
        return _Section(self.data.get(key, {}), f"{self.path}.{key}" if self.path else key)

    def get(self, key: str, kind, default=_REQUIRED, check=None, what: str = ""):
        path = f"{self.path}.{key}" if self.path else key
        if key not in self.data:
            if default is _REQUIRED:
                raise ConfigError(f"{path}: required key is missing")
            return default
        value = self.data[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if kind is not None and not isinstance(value, kind):
            raise ConfigError(f"{path}: expected {kind.__name__}, got {type(value).__name__}")
        if kind is float and not math.isfinite(value):
            raise ConfigError(f"{path}: must be finite")
        if check is not None and not check(value):
            raise ConfigError(f"{path}: {what}")
        return value


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration."""

    material: dict
    desired: dict
    law: dict
    solver: dict
    control: dict
    lyapunov: dict
    initial: dict
    output: dict
    sweep: dict
    refine: dict

    def to_json_dict(self) -> dict:
        return {
            "material": dict(self.material),
            "desired": dict(self.desired),
            "law": copy.deepcopy(self.law),
            "solver": dict(self.solver),
            "control": dict(self.control),
            "lyapunov": dict(self.lyapunov),
            "initial": dict(self.initial),
            "output": dict(self.output),
            "sweep": copy.deepcopy(self.sweep),
            "refine": copy.deepcopy(self.refine),
        }

    # --- factory views onto the validated values ---

    def material_params(self) -> MaterialParams:
        m = self.material
        return MaterialParams(elastic_modulus=m["E"], length=m["L"], area=m["A"])

    def desired_state(self) -> DesiredState:
        d = self.desired
        return DesiredState.linear_profile(
            sigma_star=d["sigma_star"], v_left=d["v_star_left"],
            v_right=d["v_star_right"], length=self.material["L"])

    def law_instance(self) -> ViscoplasticLaw | None:
        lw = self.law
        if lw["variant"] == "none":
            return None
        if lw["variant"] == "norton":
            return norton_law(lw["sigma_ref"], lw["n"], lw["t_ref"])
        return hybrid_law(lw["kocks_mecking"], lw["avrami"], lw["taylor"],
                          lw.get("overstress"))

    def grid(self) -> Grid:
        return Grid(n_cells=self.solver["n_cells"], length=self.material["L"])

    def solver_config(self) -> SolverConfig:
        s = self.solver
        return SolverConfig(t_end=s["t_end"], cfl=s["cfl"],
                            record_every=s["record_every"], scheme=s["scheme"])

    def initial_internal_state(self, n_cells: int) -> InternalState:
        ini = self.initial
        return InternalState(X=np.full(n_cells, ini["X0"]),
                             rho_bar=np.full(n_cells, ini["rho0"]),
                             temperature=ini["temperature"])


def load_config(path) -> RunConfig:
    """Parse and validate a TOML run configuration file."""
    try:
        with open(path, "rb") as f:
            data = _toml.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc
    return load_config_dict(data)


def load_config_dict(data: dict) -> RunConfig:
    """Validate a configuration given as a (possibly nested) dict."""
    root = _Section(data, "")

    m = root.child("material")
    material = {
        "E": m.get("E", float, check=lambda v: v > 0, what="must be > 0"),
        "L": m.get("L", float, check=lambda v: v > 0, what="must be > 0"),
        "A": m.get("A", float, default=1.0, check=lambda v: v > 0, what="must be > 0"),
        "temperature": m.get("temperature", str, default=""),
    }

    d = root.child("desired")
    desired = {
        "sigma_star": d.get("sigma_star", float, default=0.0),
        "v_star_left": d.get("v_star_left", float, default=0.0),
    }
    desired["v_star_right"] = d.get("v_star_right", float,
                                    default=desired["v_star_left"])

    lw = root.child("law")
    variant = lw.get("variant", str, default="none",
                     check=lambda v: v in ("none", "norton", "hybrid"),
                     what="must be one of none, norton, hybrid")
    law: dict[str, Any] = {"variant": variant}
    if variant == "norton":
        law["sigma_ref"] = lw.get("sigma_ref", float, check=lambda v: v > 0, what="must be > 0")
        law["n"] = lw.get("n", float, check=lambda v: v >= 1.0, what="must be >= 1")
        law["t_ref"] = lw.get("t_ref", float, check=lambda v: v > 0, what="must be > 0")
    elif variant == "hybrid":
        km = lw.child("kocks_mecking")
        law["kocks_mecking"] = {
            "k1": km.get("k1", float),
            "k2": km.get("k2", float, check=lambda v: v >= 0, what="must be >= 0"),
        }
        av = lw.child("avrami")
        law["avrami"] = {"k": av.get("k", float), "m": av.get("m", float)}
        ty = lw.child("taylor")
        law["taylor"] = {
            "sigma0_lam": ty.get("sigma0_lam", float),
            "sigma0_glob": ty.get("sigma0_glob", float),
            "prefactor": ty.get("prefactor", float),
        }
        ov = lw.child("overstress")
        law["overstress"] = {
            "sigma_ref": ov.get("sigma_ref", float, default=1.0,
                                check=lambda v: v > 0, what="must be > 0"),
            "n": ov.get("n", float, default=1.0,
                        check=lambda v: v >= 1.0, what="must be >= 1"),
            "t_ref": ov.get("t_ref", float, default=1.0,
                            check=lambda v: v > 0, what="must be > 0"),
        }

    s = root.child("solver")
    solver = {
        "scheme": s.get("scheme", str, default="linear-riemann",
                        check=lambda v: v in ("linear-riemann", "nonlinear-split"),
                        what="must be linear-riemann or nonlinear-split"),
        "n_cells": s.get("n_cells", int, default=256,
                         check=lambda v: v >= 2, what="must be >= 2"),
        "cfl": s.get("cfl", float, default=0.95,
                     check=lambda v: 0.0 < v <= 1.0, what="must lie in (0, 1]"),
        "t_end": s.get("t_end", float, check=lambda v: v > 0, what="must be > 0"),
        "record_every": s.get("record_every", int, default=1,
                              check=lambda v: v >= 1, what="must be >= 1"),
    }

    ctl = root.child("control")
    control = {
        "law_variant": ctl.get("law_variant", str, default="riemann-gain",
                               check=lambda v: v in LAW_VARIANTS,
                               what=f"must be one of {', '.join(LAW_VARIANTS)}"),
        "left": ctl.get("left", str, default="feedback",
                        check=lambda v: v in BOUNDARY_MODES,
                        what=f"must be one of {', '.join(BOUNDARY_MODES)}"),
        "right": ctl.get("right", str, default="feedback",
                         check=lambda v: v in BOUNDARY_MODES,
                         what=f"must be one of {', '.join(BOUNDARY_MODES)}"),
    }

    ly = root.child("lyapunov")
    lyap = {
        "mu_hat_policy": ly.get("mu_hat_policy", str, default="paper-default",
                                check=lambda v: v in ("fixed", "paper-default", "search"),
                                what="must be fixed, paper-default or search"),
        "mu_hat": ly.get("mu_hat", float, default=0.0,
                         check=lambda v: v >= 0, what="must be >= 0"),
        "mu_hat_max": ly.get("mu_hat_max", float, default=0.0,
                             check=lambda v: v >= 0, what="must be >= 0"),
        "n_scan": ly.get("n_scan", int, default=256,
                         check=lambda v: v >= 2, what="must be >= 2"),
        "n_grid": ly.get("n_grid", int, default=1025,
                         check=lambda v: v >= 2, what="must be >= 2"),
    }

    ini = root.child("initial")
    initial = {
        "bump_amplitude": ini.get("bump_amplitude", float, default=1.0),
        "sigma0": ini.get("sigma0", float, default=0.0),
        "v0": ini.get("v0", float, default=0.0),
        "X0": ini.get("X0", float, default=0.0,
                      check=lambda v: 0.0 <= v <= 1.0, what="must lie in [0, 1]"),
        "rho0": ini.get("rho0", float, default=0.0,
                        check=lambda v: v >= 0, what="must be >= 0"),
        "temperature": ini.get("temperature", float, default=20.0),
    }

    out = root.child("output")
    output = {
        "csv": out.get("csv", str, default="series.csv"),
        "summary": out.get("summary", str, default="summary.json"),
        "sweep_csv": out.get("sweep_csv", str, default="sweep.csv"),
        "refine_report": out.get("refine_report", str, default="refine.json"),
    }

    sw = root.child("sweep")
    sweep = {
        "path": sw.get("path", str, default=""),
        "values": sw.get("values", list, default=[]),
    }

    rf = root.child("refine")
    refine = {
        "levels": rf.get("levels", list, default=[64, 128, 256]),
        "t_fraction": rf.get("t_fraction", float, default=0.4,
                             check=lambda v: 0 < v < 1, what="must lie in (0, 1)"),
    }
    if len(refine["levels"]) < 3:
        raise ConfigError("refine.levels: need at least 3 grid levels")
    for lev in refine["levels"]:
        if not isinstance(lev, int) or lev < 2:
            raise ConfigError("refine.levels: entries must be integers >= 2")

    return RunConfig(material=material, desired=desired, law=law,
                     solver=solver, control=control, lyapunov=lyap,
                     initial=initial, output=output, sweep=sweep,
                     refine=refine)


def set_by_path(data: dict, path: str, value) -> dict:
    """Return a deep copy of a raw config dict with one dotted key replaced."""
    new = copy.deepcopy(data)
    keys = path.split(".")
    node = new
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            raise ConfigError(f"sweep.path: '{path}' does not name a config key")
        node = node[key]
    if keys[-1] not in node:
        raise ConfigError(f"sweep.path: '{path}' does not name a config key")
    if isinstance(node[keys[-1]], (dict, list)):
        raise ConfigError(f"sweep.path: '{path}' must name a scalar key")
    node[keys[-1]] = value
    return new
