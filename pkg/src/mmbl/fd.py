"""Finite-difference stencils on the periodic-x / truncated-half-line-y tensor grid.

All field arrays are shaped (Nx, Ny): axis 0 is the periodic x direction,
axis 1 the wall-normal y direction.  Interior stencils are second-order
central; y-boundary rows use second-order one-sided stencils so every
operator is uniformly second-order on smooth data.  The same operators are
applied to states and to the cutoff profile, which keeps homogenized
quantities exactly consistent at the discrete level.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "dx_periodic",
    "dy_central",
    "dyy_central",
    "dt_series",
    "trapezoid_weights",
]


def dx_periodic(f: np.ndarray, dx: float) -> np.ndarray:
    """Second-order central x-derivative with periodic wraparound."""
    return (np.roll(f, -1, axis=0) - np.roll(f, 1, axis=0)) / (2.0 * dx)


def dy_central(f: np.ndarray, dy: float) -> np.ndarray:
    """Second-order y-derivative: central inside, one-sided at the walls."""
    out = np.empty_like(f)
    out[:, 1:-1] = (f[:, 2:] - f[:, :-2]) / (2.0 * dy)
    out[:, 0] = (-3.0 * f[:, 0] + 4.0 * f[:, 1] - f[:, 2]) / (2.0 * dy)
    out[:, -1] = (3.0 * f[:, -1] - 4.0 * f[:, -2] + f[:, -3]) / (2.0 * dy)
    return out


def dyy_central(f: np.ndarray, dy: float) -> np.ndarray:
    """Second y-derivative: 3-point inside, second-order one-sided at the walls."""
    out = np.empty_like(f)
    out[:, 1:-1] = (f[:, 2:] - 2.0 * f[:, 1:-1] + f[:, :-2]) / dy**2
    out[:, 0] = (2.0 * f[:, 0] - 5.0 * f[:, 1] + 4.0 * f[:, 2] - f[:, 3]) / dy**2
    out[:, -1] = (2.0 * f[:, -1] - 5.0 * f[:, -2] + 4.0 * f[:, -3] - f[:, -4]) / dy**2
    return out


def dt_series(series: np.ndarray, dt: float) -> np.ndarray:
    """Time derivative of a stored series, axis 0 = time level.

    Central differences inside; second-order one-sided stencils at the first
    and last level.  Series with fewer than three levels fall back to the
    first-order two-point difference.
    """
    nt = series.shape[0]
    out = np.empty_like(series)
    if nt < 2:
        raise ValueError("need at least two time levels for a time derivative")
    if nt == 2:
        out[0] = out[1] = (series[1] - series[0]) / dt
        return out
    out[1:-1] = (series[2:] - series[:-2]) / (2.0 * dt)
    out[0] = (-3.0 * series[0] + 4.0 * series[1] - series[2]) / (2.0 * dt)
    out[-1] = (3.0 * series[-1] - 4.0 * series[-2] + series[-3]) / (2.0 * dt)
    return out


def trapezoid_weights(y_nodes: np.ndarray) -> np.ndarray:
    """Composite-trapezoid quadrature weights for the (possibly nonuniform) y grid."""
    y = np.asarray(y_nodes, dtype=float)
    w = np.zeros_like(y)
    d = np.diff(y)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w
