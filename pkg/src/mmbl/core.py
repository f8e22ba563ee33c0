"""Physical parameters, grids, fields, and the shared state types.

The solver evolves the homogenized unknown v = (u, w, q): tangential
velocity, micro-rotation, and half-squared tangential magnetic field with
the far-field outflow values removed through a smooth cutoff lift

    u1 = u + U(t,x) phi(y),   w1 = w + I(t,x) phi(y),   q1 = q + (H^2/2)(t,x) phi(y).

The cutoff phi vanishes identically near the wall and equals one from y = 2
on, so every wall boundary condition of the homogenized problem coincides
with the physical one while v -> 0 in the far field.

All types here are immutable value objects after construction and safe to
share read-only across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import AdmissibilityError, ConfigurationError
from . import fd

__all__ = [
    "PhysicalParams",
    "Grid",
    "Field",
    "CutoffProfile",
    "TransformedState",
    "LiftedState",
    "PhysicalState",
    "make_cutoff",
    "lift",
    "density_pressure",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Fluid constants and the admissibility margin.

    a         pressure-law coefficient, > 0
    gamma     adiabatic exponent, > 1
    mu        shear viscosity, > 0
    mu_prime  angular viscosity, > 0
    zeta      microrotation viscosity, >= 0
    sigma     magnetic resistivity, > 0
    delta     admissibility margin delta <= q1 <= P - delta, > 0
    """

    a: float
    gamma: float
    mu: float
    mu_prime: float
    zeta: float
    sigma: float
    delta: float

    def __post_init__(self):
        checks = [
            (self.a > 0, "a must be positive"),
            (self.gamma > 1, "gamma must exceed 1"),
            (self.mu > 0, "mu must be positive"),
            (self.mu_prime > 0, "mu_prime must be positive"),
            (self.zeta >= 0, "zeta must be nonnegative"),
            (self.sigma > 0, "sigma must be positive"),
            (self.delta > 0, "delta must be positive"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigurationError(msg)


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Grid:
    """Tensor grid: Nx periodic x nodes on [0, Lx), Ny wall-normal nodes on [0, y_max].

    Serves both the physical y coordinate and the transformed ybar
    coordinate; nothing here cares which one it is.
    """

    nx: int
    ny: int
    y_max: float
    lx: float = 2.0 * np.pi
    y_nodes: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.nx < 8 or self.nx % 2 != 0:
            raise ConfigurationError("nx must be even and >= 8")
        if self.ny < 8:
            raise ConfigurationError("ny must be >= 8")
        if self.y_nodes is None:
            nodes = np.linspace(0.0, self.y_max, self.ny)
        else:
            nodes = np.asarray(self.y_nodes, dtype=float)
        if nodes.shape != (self.ny,):
            raise ConfigurationError("y_nodes must have length ny")
        if nodes[0] != 0.0 or not np.isclose(nodes[-1], self.y_max):
            raise ConfigurationError("y_nodes must run from 0 to y_max")
        if np.any(np.diff(nodes) <= 0):
            raise ConfigurationError("y_nodes must be strictly increasing")
        object.__setattr__(self, "y_nodes", _readonly(nodes))

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def x_nodes(self) -> np.ndarray:
        return np.arange(self.nx) * self.dx

    @property
    def dy(self) -> float:
        # uniform spacing; the implicit stencils require it
        d = np.diff(self.y_nodes)
        if not np.allclose(d, d[0], rtol=1e-12, atol=0.0):
            raise ConfigurationError("operation requires a uniform y grid")
        return float(d[0])

    @property
    def is_uniform(self) -> bool:
        d = np.diff(self.y_nodes)
        return bool(np.allclose(d, d[0], rtol=1e-12, atol=0.0))

    def mesh(self):
        """(X, Y) coordinate arrays shaped (nx, ny)."""
        return np.meshgrid(self.x_nodes, self.y_nodes, indexing="ij")

    def quad_weights(self) -> np.ndarray:
        """Quadrature weights (nx, ny) for the discrete L2 inner product."""
        wy = fd.trapezoid_weights(self.y_nodes)
        return np.full((self.nx, 1), self.dx) * wy[None, :]


@dataclass(frozen=True)
class Field:
    """A scalar field on a Grid; values are frozen after construction."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.nx, self.grid.ny):
            raise ValueError(
                f"field shape {vals.shape} does not match grid "
                f"({self.grid.nx}, {self.grid.ny})"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", _readonly(vals))


@dataclass(frozen=True)
class CutoffProfile:
    """The cutoff phi(y) together with its discrete y-derivatives.

    d_phi and d2_phi are produced by the same difference operators the
    stepper applies to states, so homogenization is exact at the discrete
    level: lifting a state and subtracting the lift commutes with the
    scheme to round-off.
    """

    grid: Grid
    phi: np.ndarray
    d_phi: np.ndarray
    d2_phi: np.ndarray


def make_cutoff(grid: Grid) -> CutoffProfile:
    """Smooth monotone cutoff: 0 on [0,1], 1 on [2, y_max], smoothstep between.

    The blend is p(s) = s^2 (3 - 2s) on s = y - 1, monotone with vanishing
    slope at both joints.  The wall-row derivatives use the mirror (even
    extension) convention of the scheme's Neumann row, so lifted steady
    states balance the discrete equations exactly.
    """
    if grid.y_max < 3.0:
        raise ConfigurationError("cutoff has no room: y_max must be at least 3")
    dy = grid.dy
    if dy > 0.5:
        raise ConfigurationError(
            f"cutoff blend unresolved: y spacing {dy:g} exceeds 0.5")
    y = grid.y_nodes
    s = np.clip(y - 1.0, 0.0, 1.0)
    phi = s * s * (3.0 - 2.0 * s)
    row = phi[None, :]
    d_phi = fd.dy_central(row, dy)[0].copy()
    d2_phi = fd.dyy_central(row, dy)[0].copy()
    d_phi[0] = 0.0
    d2_phi[0] = (2.0 * phi[1] - 2.0 * phi[0]) / dy**2
    return CutoffProfile(grid=grid, phi=_readonly(phi), d_phi=_readonly(d_phi),
                         d2_phi=_readonly(d2_phi))


def cutoff_value(y):
    """Pointwise analytic cutoff value (reference; the solver uses grid profiles)."""
    s = np.clip(np.asarray(y, dtype=float) - 1.0, 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


@dataclass(frozen=True)
class TransformedState:
    """Homogenized unknown v = (u, w, q) at one time level."""

    u: Field
    w: Field
    q: Field
    time: float

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def as_array(self) -> np.ndarray:
        """Stack (3, nx, ny); component order (u, w, q)."""
        return np.stack([self.u.values, self.w.values, self.q.values])

    @classmethod
    def from_array(cls, grid: Grid, arr: np.ndarray, time: float) -> "TransformedState":
        return cls(u=Field(grid, arr[0]), w=Field(grid, arr[1]),
                   q=Field(grid, arr[2]), time=time)


@dataclass(frozen=True)
class LiftedState:
    """Lifted unknown v1 = (u1, w1, q1) plus the admissibility margins.

    margin_low  = min(q1 - delta), margin_high = min(P - delta - q1); a
    negative margin flags a band violation (reported, not fatal here).
    """

    u1: Field
    w1: Field
    q1: Field
    time: float
    margin_low: float = np.nan
    margin_high: float = np.nan

    @property
    def grid(self) -> Grid:
        return self.u1.grid

    @property
    def band_ok(self) -> bool:
        return bool(self.margin_low >= 0.0 and self.margin_high >= 0.0)

    def as_array(self) -> np.ndarray:
        return np.stack([self.u1.values, self.w1.values, self.q1.values])


@dataclass(frozen=True)
class PhysicalState:
    """Recovered physical-variable fields at one time level."""

    u1: Field
    u2: Field
    w1: Field
    h1: Field
    h2: Field
    psi: Field
    rho: Field
    p: Field
    time: float

    @property
    def grid(self) -> Grid:
        return self.u1.grid


def lift(state: TransformedState, trace, cutoff: CutoffProfile,
         delta: Optional[float] = None) -> LiftedState:
    """Lift the homogenized state back to (u1, w1, q1) with the cutoff.

    ``trace`` is an outflow level carrying arrays U, I, H, P on the x grid;
    the q component is lifted by H^2/2.  A band violation is recorded in the
    margins, not raised.
    """
    if trace.U.shape != (state.grid.nx,):
        raise ValueError("trace and state x grids do not match")
    phi = cutoff.phi[None, :]
    u1 = state.u.values + trace.U[:, None] * phi
    w1 = state.w.values + trace.I[:, None] * phi
    q1 = state.q.values + (0.5 * trace.H**2)[:, None] * phi
    if delta is None:
        mlo = mhi = np.nan
    else:
        mlo = float(np.min(q1) - delta)
        mhi = float(np.min(trace.P[:, None] - q1) - delta)
    g = state.grid
    return LiftedState(u1=Field(g, u1), w1=Field(g, w1), q1=Field(g, q1),
                       time=state.time, margin_low=mlo, margin_high=mhi)


def density_pressure(q1: np.ndarray, P: np.ndarray, params: PhysicalParams):
    """Pressure p = P - q1 and density rho = (p/a)^(1/gamma).

    rho equals the reciprocal of the specific-volume coefficient used in
    the coefficient assembly.  Raises if the pressure degenerates.
    """
    q1 = np.asarray(q1, dtype=float)
    P = np.asarray(P, dtype=float)
    p = P - q1
    if np.any(p <= 0.0):
        bad = np.unravel_index(int(np.argmin(p)), p.shape) if p.ndim else ()
        raise AdmissibilityError(
            f"nonpositive pressure P - q1 at index {bad}", ix=bad[0] if bad else None,
            iy=bad[1] if len(bad) > 1 else None)
    rho = np.exp(np.log(p / params.a) / params.gamma)
    return rho, p
