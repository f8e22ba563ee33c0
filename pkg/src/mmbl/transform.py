"""Stream-function coordinate change and recovery of the normal components.

The tangential magnetic field defines a stream function

    h1 = d(psi)/dy,   h2 = -d(psi)/dx,   psi(t, x, 0) = 0,

strictly increasing in y while h1 >= delta, so ybar = psi(t, x, y) is an
invertible change of the wall-normal coordinate per x column.  The forward
map integrates h1 by composite trapezoid; the inverse integrates 1/h1_hat
over the transformed grid and inverts the monotone map with shape-preserving
piecewise cubics (plain splines can overshoot and break invertibility near
steep profiles).  The normal velocity and magnetic components are recovered
from psi,

    u2 = -(psi_t + u1 psi_x - sigma psi_yy) / h1,    h2 = -psi_x.

Every operation is column-independent: it parallelizes over x with no
cross-column coupling.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import PchipInterpolator

from .core import Field, Grid, PhysicalParams
from .exceptions import DegeneracyError, MmblError, TransformRangeError
from . import fd

__all__ = [
    "stream_forward",
    "inverse_y_of_psi",
    "pushforward",
    "pullback",
    "recover_secondary",
    "divergence_residual",
    "psi_time_derivative_quadrature",
]


def _require_min(h1: np.ndarray, delta: float, what: str):
    if np.any(h1 < delta):
        idx = np.unravel_index(int(np.argmin(h1)), h1.shape)
        raise DegeneracyError(
            f"{what} dropped below delta={delta:g} at node {idx} "
            f"(value {h1[idx]:.6g}); transform not invertible")


def stream_forward(h1: Field, delta: float) -> Field:
    """psi(t,x,y) = integral of h1 dy from the wall, per column."""
    _require_min(h1.values, delta, "h1")
    psi = cumulative_trapezoid(h1.values, h1.grid.y_nodes, axis=1, initial=0.0)
    return Field(h1.grid, psi)


def inverse_y_of_psi(h1_hat: Field, delta: float,
                     y_phys_nodes: np.ndarray | None = None):
    """Invert the stream map given h1_hat on the transformed grid.

    Returns (y_of_ybar, psi_at_phys): the physical height of each
    transformed node, y(ybar) = integral of 1/h1_hat d(ybar), and - when
    ``y_phys_nodes`` is given - psi evaluated at those physical nodes by
    monotone piecewise-cubic inversion, shaped (nx, len(y_phys_nodes)).
    """
    _require_min(h1_hat.values, delta, "h1_hat")
    ybar = h1_hat.grid.y_nodes
    y_of_ybar = cumulative_trapezoid(1.0 / h1_hat.values, ybar, axis=1, initial=0.0)
    if np.any(np.diff(y_of_ybar, axis=1) <= 0):
        raise MmblError("inverse map lost monotonicity; corrupted input data")
    if y_phys_nodes is None:
        return y_of_ybar, None
    y_phys = np.asarray(y_phys_nodes, dtype=float)
    nx = h1_hat.grid.nx
    psi_at = np.empty((nx, len(y_phys)))
    for i in range(nx):
        if y_phys[-1] > y_of_ybar[i, -1] * (1.0 + 1e-12):
            raise TransformRangeError(
                f"physical node y={y_phys[-1]:g} beyond column image "
                f"{y_of_ybar[i, -1]:g}; clip the physical grid below the image")
        psi_at[i] = PchipInterpolator(y_of_ybar[i], ybar)(
            np.minimum(y_phys, y_of_ybar[i, -1]))
    return y_of_ybar, psi_at


def pushforward(fields, psi: Field, ybar_nodes: np.ndarray):
    """Sample physical-grid fields at the stream coordinate: f_hat(ybar) = f(y(ybar)).

    ``fields`` is a sequence of Field objects sharing psi's grid.  Each
    column interpolates f as a function of psi(y) at the ybar targets with
    a monotone cubic.  Targets beyond psi(y_max) raise a range error
    suggesting the grid be clipped.
    """
    ybar = np.asarray(ybar_nodes, dtype=float)
    pv = psi.values
    if np.any(np.diff(pv, axis=1) <= 0):
        raise MmblError("psi is not strictly increasing in y")
    nx = psi.grid.nx
    outs = [np.empty((nx, len(ybar))) for _ in fields]
    for i in range(nx):
        top = pv[i, -1]
        if ybar[-1] > top * (1.0 + 1e-12):
            raise TransformRangeError(
                f"target ybar={ybar[-1]:g} beyond psi(y_max)={top:g} in column {i}; "
                "clip the transformed grid to the image of psi")
        targets = np.minimum(ybar, top)
        for f, out in zip(fields, outs):
            out[i] = PchipInterpolator(pv[i], f.values[i])(targets)
    return outs


def pullback(fields_hat, y_of_ybar: np.ndarray, ybar_grid: Grid,
             y_phys_nodes: np.ndarray):
    """Sample transformed-grid fields at physical heights: f(y) = f_hat(ybar(y))."""
    y_phys = np.asarray(y_phys_nodes, dtype=float)
    nx = ybar_grid.nx
    outs = [np.empty((nx, len(y_phys))) for _ in fields_hat]
    for i in range(nx):
        if y_phys[-1] > y_of_ybar[i, -1] * (1.0 + 1e-12):
            raise TransformRangeError(
                f"physical node beyond column image {y_of_ybar[i, -1]:g}; "
                "clip the physical grid below the image")
        ybar_at = PchipInterpolator(y_of_ybar[i], ybar_grid.y_nodes)(
            np.minimum(y_phys, y_of_ybar[i, -1]))
        for f, out in zip(fields_hat, outs):
            out[i] = PchipInterpolator(ybar_grid.y_nodes, f.values[i])(ybar_at)
    return outs


def recover_secondary(grid: Grid, psi_series, times, u1_series, h1_series,
                      params: PhysicalParams):
    """Normal components (u2, h2) from the stream function series.

    ``psi_series`` etc. are (nt, nx, ny) stacks on one physical grid.
    psi_t uses central differences inside the stored window and one-sided
    stencils at the first/last level; the wall rows vanish to scheme order
    because psi = 0 at y = 0 for all (t, x).  Division by h1 is guarded by
    the delta bound.
    """
    psi = np.asarray(psi_series, dtype=float)
    u1 = np.asarray(u1_series, dtype=float)
    h1 = np.asarray(h1_series, dtype=float)
    if psi.ndim != 3:
        raise ValueError("psi_series must be (nt, nx, ny)")
    _require_min(h1, params.delta, "h1")
    times = np.asarray(times, dtype=float)
    dt = float(times[1] - times[0])
    if not np.allclose(np.diff(times), dt, rtol=1e-9):
        raise ValueError("recover_secondary expects uniformly spaced levels")
    psi_t = fd.dt_series(psi, dt)
    u2 = np.empty_like(psi)
    h2 = np.empty_like(psi)
    for m in range(psi.shape[0]):
        psi_x = fd.dx_periodic(psi[m], grid.dx)
        psi_yy = fd.dyy_central(psi[m], grid.dy)
        h2[m] = -psi_x
        u2[m] = -(psi_t[m] + u1[m] * psi_x - params.sigma * psi_yy) / h1[m]
    return u2, h2


def divergence_residual(grid: Grid, psi: np.ndarray, h1: np.ndarray | None = None):
    """Discrete div-free residual d(h1)/dx + d(h2)/dy of the magnetic pair.

    ``h1 is None``: commuting route, h1 := Dy psi and h2 := -Dx psi from one
    discrete psi - the mixed partials commute, so the residual is round-off.
    Otherwise the mixed route: the given h1 (from the solve) against
    h2 = -Dx psi; residual converges at scheme order.
    """
    h2 = -fd.dx_periodic(psi, grid.dx)
    if h1 is None:
        h1 = fd.dy_central(psi, grid.dy)
    res = fd.dx_periodic(h1, grid.dx) + fd.dy_central(h2, grid.dy)
    w = grid.quad_weights()
    return float(np.sqrt(np.sum(res**2 * w)))


def psi_time_derivative_quadrature(h1_hat_series, times, ybar_grid: Grid,
                                   y_of_ybar: np.ndarray, psi_at_phys: np.ndarray):
    """Optional cross-check route for psi_t via the transformed field.

    psi_t(t,x,y) = h1_hat(t,x,psi) * integral_0^psi  h1_hat_t / h1_hat^2 d(ybar).
    ``h1_hat_series`` is (nt, nx, nybar); returns psi_t at the physical nodes
    of ``psi_at_phys`` for the interior time levels.
    """
    hh = np.asarray(h1_hat_series, dtype=float)
    times = np.asarray(times, dtype=float)
    dt = float(times[1] - times[0])
    hh_t = fd.dt_series(hh, dt)
    ybar = ybar_grid.y_nodes
    nt, nx, _ = hh.shape
    out = np.empty((nt,) + psi_at_phys.shape)
    for m in range(nt):
        integ = cumulative_trapezoid(hh_t[m] / hh[m] ** 2, ybar, axis=1, initial=0.0)
        for i in range(nx):
            at_psi = PchipInterpolator(ybar, integ[i])(psi_at_phys[i])
            h_at_psi = PchipInterpolator(ybar, hh[m, i])(psi_at_phys[i])
            out[m, i] = h_at_psi * at_psi
    return out
