"""Configuration ingestion: strict key = value files with [section] headers.

Unknown sections or keys are rejected with their line number, as are type
mismatches and constraint violations.  Everything except the [physics]
block carries defaults; the generated reference (``config_reference()``)
documents them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Grid, PhysicalParams
from .exceptions import ConfigurationError
from .outflow import PressureSpec
from .picard import SolverConfig

__all__ = ["RunSetup", "parse_config", "parse_config_text", "config_reference"]

# schema: section -> key -> (type tag, default or REQUIRED)
_REQUIRED = object()
_SCHEMA = {
    "physics": {
        "a": ("float", _REQUIRED),
        "gamma": ("float", _REQUIRED),
        "mu": ("float", _REQUIRED),
        "mu_prime": ("float", _REQUIRED),
        "zeta": ("float", _REQUIRED),
        "sigma": ("float", _REQUIRED),
        "delta": ("float", _REQUIRED),
    },
    "grid": {
        "nx": ("int", 32),
        "ny": ("int", 65),
        "ybar_max": ("float", 20.0),
    },
    "pressure": {
        "family": ("str", "constant"),
        "p0": ("float", 2.0),
        "eps": ("float", 0.0),
        "kx": ("int", 1),
        "omega": ("float", 0.0),
        "path": ("str", ""),
    },
    "outflow": {
        "u0_amp": ("float", 0.1),
        "i0_amp": ("float", 0.05),
        "h0": ("float", 1.0),
        "filter_coef": ("float", 0.01),
    },
    "initial": {
        "q_amp": ("float", 0.2),
        "shape": ("str", "one_minus_exp"),
    },
    "solver": {
        "t_window": ("float", 0.2),
        "dt": ("float", 2.5e-3),
        "picard_tol": ("float", 1e-8),
        "picard_max_iters": ("int", 25),
        "taylor_order": ("int", 1),
        "k_order": ("int", 4),
        "cfl_safety": ("float", 0.8),
        "integrator": ("str", "first"),
        "snapshot_every": ("int", 1),
        "auto_window": ("bool", False),
    },
    "output": {
        "outdir": ("str", "out"),
    },
}


@dataclass(frozen=True)
class RunSetup:
    """Fully validated run description assembled from a config file."""

    params: PhysicalParams
    grid: Grid
    pressure: PressureSpec
    solver: SolverConfig
    u0_amp: float
    i0_amp: float
    h0: float
    filter_coef: float
    q_amp: float
    initial_shape: str
    outdir: str
    auto_window: bool
    raw: dict = field(repr=False, default=None)

    def initial_profiles(self):
        """Initial (u1, w1, q1) on the transformed grid before homogenization."""
        x = self.grid.x_nodes
        Y = self.grid.y_nodes[None, :]
        shape_fn = 1.0 - np.exp(-Y)
        u10 = (self.u0_amp * np.sin(x))[:, None] * shape_fn
        w10 = (self.i0_amp * np.cos(x))[:, None] * shape_fn
        q10 = (0.5 * self.h0**2
               + self.q_amp * np.exp(-(Y**2)) * np.ones((self.grid.nx, 1)))
        return u10, w10, q10

    def initial_outflow(self):
        """(U, I, H) at t = 0 on the x nodes."""
        x = self.grid.x_nodes
        return (self.u0_amp * np.sin(x), self.i0_amp * np.cos(x),
                self.h0 * np.ones_like(x))


def _convert(token: str, kind: str, lineno: int, key: str):
    try:
        if kind == "int":
            return int(token)
        if kind == "float":
            return float(token)
        if kind == "bool":
            if token.lower() in ("true", "yes", "1", "on"):
                return True
            if token.lower() in ("false", "no", "0", "off"):
                return False
            raise ValueError(token)
        return token
    except ValueError:
        raise ConfigurationError(
            f"line {lineno}: value '{token}' for key '{key}' is not a {kind}")


def parse_config_text(text: str, source: str = "<config>") -> RunSetup:
    values = {sec: {} for sec in _SCHEMA}
    section = None
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigurationError(
                    f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigurationError(
                f"line {lineno}: expected 'key = value', got '{line}'")
        if section is None:
            raise ConfigurationError(
                f"line {lineno}: key outside any [section]")
        key, _, token = line.partition("=")
        key = key.strip()
        token = token.strip()
        if key not in _SCHEMA[section]:
            raise ConfigurationError(
                f"line {lineno}: unknown key '{key}' in [{section}]")
        kind, _ = _SCHEMA[section][key]
        values[section][key] = _convert(token, kind, lineno, key)

    # fill defaults, check requireds
    for sec, keys in _SCHEMA.items():
        for key, (kind, default) in keys.items():
            if key not in values[sec]:
                if default is _REQUIRED:
                    raise ConfigurationError(
                        f"{source}: missing mandatory key '{key}' in [{sec}]")
                values[sec][key] = default

    ph = values["physics"]
    if ph["gamma"] <= 1:
        raise ConfigurationError("gamma must exceed 1")
    params = PhysicalParams(a=ph["a"], gamma=ph["gamma"], mu=ph["mu"],
                            mu_prime=ph["mu_prime"], zeta=ph["zeta"],
                            sigma=ph["sigma"], delta=ph["delta"])
    gr = values["grid"]
    grid = Grid(nx=gr["nx"], ny=gr["ny"], y_max=gr["ybar_max"])
    pr = values["pressure"]
    pressure = PressureSpec(family=pr["family"], p0=pr["p0"], eps=pr["eps"],
                            kx=pr["kx"], omega=pr["omega"],
                            path=pr["path"] or None)
    so = values["solver"]
    solver = SolverConfig(t_window=so["t_window"], dt=so["dt"],
                          picard_tol=so["picard_tol"],
                          picard_max_iters=so["picard_max_iters"],
                          taylor_order=so["taylor_order"],
                          k_order=so["k_order"], cfl_safety=so["cfl_safety"],
                          integrator=so["integrator"],
                          snapshot_every=so["snapshot_every"])
    of = values["outflow"]
    ini = values["initial"]
    if ini["shape"] != "one_minus_exp":
        raise ConfigurationError(
            f"unknown initial shape '{ini['shape']}'")
    return RunSetup(params=params, grid=grid, pressure=pressure, solver=solver,
                    u0_amp=of["u0_amp"], i0_amp=of["i0_amp"], h0=of["h0"],
                    filter_coef=of["filter_coef"], q_amp=ini["q_amp"],
                    initial_shape=ini["shape"], outdir=values["output"]["outdir"],
                    auto_window=so["auto_window"], raw=values)


def parse_config(path: str) -> RunSetup:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise ConfigurationError(f"config not found: {path}")
    return parse_config_text(text, source=path)


def config_reference() -> str:
    """Generated reference of every key with its type and default."""
    lines = ["# configuration reference (key: type, default; REQUIRED if none)"]
    for sec, keys in _SCHEMA.items():
        lines.append(f"[{sec}]")
        for key, (kind, default) in keys.items():
            d = "REQUIRED" if default is _REQUIRED else repr(default)
            lines.append(f"{key} = <{kind}>  # default: {d}")
        lines.append("")
    return "\n".join(lines)


def canonical_config_lines(setup: RunSetup) -> list:
    """Deterministic key = value echo of a parsed setup (for certificates)."""
    out = []
    for sec in sorted(setup.raw):
        for key in sorted(setup.raw[sec]):
            val = setup.raw[sec][key]
            if isinstance(val, float):
                out.append(f"{sec}.{key} = {val!r}")
            else:
                out.append(f"{sec}.{key} = {val}")
    return out
