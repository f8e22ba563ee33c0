"""Far-field outflow traces (U, I, H) on the periodic x circle.

The boundary-layer edge values evolve by a 1D hyperbolic system driven by
the prescribed pressure P(t, x): a Burgers-type equation for the tangential
velocity U forced by the pressure and magnetic-tension gradients, pure
transport for the micro-rotation trace I, and a stretched transport law for
the tangential magnetic trace H.  The same algebraic factors as in the
interior solve appear,

    Acal_H = (a / (P - H^2/2))^(1/gamma),   Q_H = gamma (P - H^2/2) + H^2.

Scheme: second-order central differences in x, explicit Heun (RK2) in time,
plus an optional fourth-difference filter to suppress odd-even decoupling.
Run windows are meant to stay pre-shock; there is no shock capturing here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import PhysicalParams
from .exceptions import AdmissibilityError, ConfigurationError, SchemaError
from . import fd

__all__ = [
    "PressureSpec",
    "OutflowLevel",
    "TraceSeries",
    "solve_bernoulli",
    "bernoulli_residual",
]


@dataclass(frozen=True)
class PressureSpec:
    """Prescribed outer pressure P(t, x).

    family = "constant":  P = p0
    family = "cosine":    P = p0 + eps * cos(kx * x) * cos(omega * t)
    family = "tabulated": P read from a plain-text table, header "t x P",
                          row-major; x nodes must match the run grid, t is
                          interpolated linearly.
    """

    family: str = "constant"
    p0: float = 1.0
    eps: float = 0.0
    kx: int = 1
    omega: float = 0.0
    path: Optional[str] = None
    _table: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in ("constant", "cosine", "tabulated"):
            raise ConfigurationError(f"unknown pressure family '{self.family}'")
        if self.family == "tabulated":
            if self.path is None:
                raise ConfigurationError("tabulated pressure needs a path")
            object.__setattr__(self, "_table", _load_pressure_table(self.path))

    def evaluate(self, t: float, x: np.ndarray):
        """Return (P, P_t, P_x) on the x nodes at time t."""
        if self.family == "constant":
            P = np.full_like(x, self.p0)
            z = np.zeros_like(x)
            return P, z, z
        if self.family == "cosine":
            cx = np.cos(self.kx * x)
            sx = np.sin(self.kx * x)
            ct, st = np.cos(self.omega * t), np.sin(self.omega * t)
            P = self.p0 + self.eps * cx * ct
            P_t = -self.eps * self.omega * cx * st
            P_x = -self.eps * self.kx * sx * ct
            return P, P_t, P_x
        return _interp_pressure_table(self._table, t, x)


def _load_pressure_table(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if header != ["t", "x", "P"]:
            raise SchemaError(f"pressure table {path}: expected header 't x P'")
        data = np.loadtxt(fh)
    if data.ndim != 2 or data.shape[1] != 3:
        raise SchemaError(f"pressure table {path}: expected three columns")
    t_vals = np.unique(data[:, 0])
    x_vals = np.unique(data[:, 1])
    nt, nx = len(t_vals), len(x_vals)
    if nt * nx != data.shape[0]:
        raise SchemaError(f"pressure table {path}: not a full (t, x) product grid")
    order = np.lexsort((data[:, 1], data[:, 0]))
    P = data[order, 2].reshape(nt, nx)
    return t_vals, x_vals, P


def _interp_pressure_table(table, t: float, x: np.ndarray):
    t_vals, x_vals, P = table
    if len(x_vals) != len(x) or not np.allclose(x_vals, x, atol=1e-10):
        raise ConfigurationError("tabulated pressure x nodes do not match the run grid")
    if t < t_vals[0] - 1e-12 or t > t_vals[-1] + 1e-12:
        raise ConfigurationError(
            f"tabulated pressure does not cover t={t:g} "
            f"(table spans [{t_vals[0]:g}, {t_vals[-1]:g}])")
    dx = x[1] - x[0]
    if len(t_vals) == 1:
        row = P[0]
        return row.copy(), np.zeros_like(row), fd.dx_periodic(row[:, None], dx)[:, 0]
    dts = np.diff(t_vals)
    P_t_tab = fd.dt_series(P, dts[0]) if np.allclose(dts, dts[0]) else np.gradient(P, t_vals, axis=0)
    j = int(np.clip(np.searchsorted(t_vals, t) - 1, 0, len(t_vals) - 2))
    s = (t - t_vals[j]) / (t_vals[j + 1] - t_vals[j])
    row = (1 - s) * P[j] + s * P[j + 1]
    row_t = (1 - s) * P_t_tab[j] + s * P_t_tab[j + 1]
    row_x = fd.dx_periodic(row[:, None], dx)[:, 0]
    return row, row_t, row_x


@dataclass(frozen=True)
class OutflowLevel:
    """One time level of the outflow trace with every derivative the solver needs."""

    time: float
    U: np.ndarray
    I: np.ndarray
    H: np.ndarray
    P: np.ndarray
    U_x: np.ndarray
    I_x: np.ndarray
    H_x: np.ndarray
    P_x: np.ndarray
    U_t: np.ndarray
    I_t: np.ndarray
    H_t: np.ndarray
    P_t: np.ndarray


@dataclass(frozen=True)
class TraceSeries:
    """Stored outflow levels: arrays shaped (nt, nx), times shaped (nt,)."""

    times: np.ndarray
    x_nodes: np.ndarray
    U: np.ndarray
    I: np.ndarray
    H: np.ndarray
    P: np.ndarray
    P_t: np.ndarray
    P_x: np.ndarray

    @property
    def nt(self) -> int:
        return len(self.times)

    @property
    def dx(self) -> float:
        return float(self.x_nodes[1] - self.x_nodes[0])

    def level(self, m: int, params: PhysicalParams) -> OutflowLevel:
        """Single level with x derivatives and RHS-consistent time derivatives."""
        dx = self.dx
        U, I, H, P = self.U[m], self.I[m], self.H[m], self.P[m]
        dU, dI, dH = _bernoulli_rhs(U, I, H, P, self.P_t[m], self.P_x[m], dx, params)
        col = lambda f: fd.dx_periodic(f[:, None], dx)[:, 0]
        return OutflowLevel(
            time=float(self.times[m]), U=U, I=I, H=H, P=P,
            U_x=col(U), I_x=col(I), H_x=col(H), P_x=self.P_x[m],
            U_t=dU, I_t=dI, H_t=dH, P_t=self.P_t[m])


def _bernoulli_rhs(U, I, H, P, P_t, P_x, dx, params: PhysicalParams):
    """Right-hand sides of the three outflow equations."""
    col = lambda f: fd.dx_periodic(f[:, None], dx)[:, 0]
    U_x, I_x, H_x = col(U), col(I), col(H)
    pm = P - 0.5 * H**2
    Acal = np.exp(np.log(params.a / pm) / params.gamma)
    Q = params.gamma * pm + H**2
    dU = -U * U_x - Acal * (P_x - H * H_x)
    dI = -U * I_x
    dH = -U * H_x + H * (P_t + P_x * U) / Q + params.gamma * pm * H * U_x / Q
    return dU, dI, dH


def _filter4(f: np.ndarray, coef: float) -> np.ndarray:
    """Periodic fourth-difference smoothing; exact on constants and linears."""
    d4 = (np.roll(f, 2) - 4.0 * np.roll(f, 1) + 6.0 * f
          - 4.0 * np.roll(f, -1) + np.roll(f, -2))
    return f - coef * d4


def solve_bernoulli(pspec: PressureSpec, U0, I0, H0, params: PhysicalParams,
                    t_end: float, dt: float, x_nodes: np.ndarray,
                    filter_coef: float = 0.01,
                    cfl_safety: float = 0.8) -> TraceSeries:
    """March the outflow system with Heun's method; store every level.

    Preconditions: the initial trace is periodic and admissible,
    2 delta <= H0^2/2 <= P(0) - 2 delta.  The run aborts at the first
    (t, x) where the delta band delta <= H^2/2 <= P - delta is lost.
    """
    x = np.asarray(x_nodes, dtype=float)
    dx = float(x[1] - x[0])
    U = np.array(U0, dtype=float)
    I = np.array(I0, dtype=float)
    H = np.array(H0, dtype=float)
    d = params.delta

    P, P_t, P_x = pspec.evaluate(0.0, x)
    q_edge = 0.5 * H**2
    if np.any(q_edge < 2.0 * d) or np.any(q_edge > P - 2.0 * d):
        ix = int(np.argmin(np.minimum(q_edge - 2 * d, P - 2 * d - q_edge)))
        raise AdmissibilityError(
            f"initial outflow violates 2-delta band at x index {ix}", time=0.0, ix=ix)

    umax = float(np.max(np.abs(U)))
    if umax > 0 and dt > cfl_safety * dx / umax:
        raise ConfigurationError(
            f"outflow dt={dt:g} violates CFL bound {cfl_safety * dx / umax:g}")

    n_steps = int(round(t_end / dt))
    if not np.isclose(n_steps * dt, t_end, rtol=1e-9, atol=1e-12):
        raise ConfigurationError("t_end must be an integer multiple of dt")

    times = np.empty(n_steps + 1)
    Us = np.empty((n_steps + 1, len(x)))
    Is = np.empty_like(Us)
    Hs = np.empty_like(Us)
    Ps = np.empty_like(Us)
    Pts = np.empty_like(Us)
    Pxs = np.empty_like(Us)

    def store(m, t):
        times[m] = t
        Us[m], Is[m], Hs[m] = U, I, H
        Ps[m], Pts[m], Pxs[m] = pspec.evaluate(t, x)

    store(0, 0.0)
    for m in range(n_steps):
        t = m * dt
        P, P_t, P_x = pspec.evaluate(t, x)
        k1 = _bernoulli_rhs(U, I, H, P, P_t, P_x, dx, params)
        Us_, Is_, Hs_ = U + dt * k1[0], I + dt * k1[1], H + dt * k1[2]
        P2, P2_t, P2_x = pspec.evaluate(t + dt, x)
        k2 = _bernoulli_rhs(Us_, Is_, Hs_, P2, P2_t, P2_x, dx, params)
        U = U + 0.5 * dt * (k1[0] + k2[0])
        I = I + 0.5 * dt * (k1[1] + k2[1])
        H = H + 0.5 * dt * (k1[2] + k2[2])
        if filter_coef:
            U = _filter4(U, filter_coef)
            I = _filter4(I, filter_coef)
            H = _filter4(H, filter_coef)
        q_edge = 0.5 * H**2
        if np.any(q_edge < d) or np.any(q_edge > P2 - d):
            ix = int(np.argmin(np.minimum(q_edge - d, P2 - d - q_edge)))
            raise AdmissibilityError(
                f"outflow left the delta band at t={t + dt:.6g}, x index {ix}",
                time=t + dt, ix=ix)
        store(m + 1, t + dt)

    return TraceSeries(times=times, x_nodes=x, U=Us, I=Is, H=Hs,
                       P=Ps, P_t=Pts, P_x=Pxs)


def constant_trace_series(times, x_nodes, U0=0.0, I0=0.0, H0=1.0, P0=2.0):
    """Trace series with (U, I, H, P) constant in x and t; handy for tests."""
    times = np.asarray(times, dtype=float)
    x = np.asarray(x_nodes, dtype=float)
    shape = (len(times), len(x))
    const = lambda c: np.full(shape, float(c))
    zero = np.zeros(shape)
    return TraceSeries(times=times, x_nodes=x, U=const(U0), I=const(I0),
                       H=const(H0), P=const(P0), P_t=zero, P_x=zero)


def bernoulli_residual(series: TraceSeries, params: PhysicalParams):
    """Discrete residual L2 norms of the three outflow equations.

    Time derivatives are re-formed by central differences on the stored
    levels (independent of the RHS used while marching), so this is a
    genuine a-posteriori check.  Returns (times, residuals) with residuals
    shaped (3, nt - 2): interior levels only.
    """
    if series.nt < 3:
        raise ValueError("need at least three stored levels")
    dt = float(series.times[1] - series.times[0])
    dx = series.dx
    wx = np.sqrt(dx)
    U_t = (series.U[2:] - series.U[:-2]) / (2 * dt)
    I_t = (series.I[2:] - series.I[:-2]) / (2 * dt)
    H_t = (series.H[2:] - series.H[:-2]) / (2 * dt)
    res = np.empty((3, series.nt - 2))
    for k, m in enumerate(range(1, series.nt - 1)):
        U, I, H, P = series.U[m], series.I[m], series.H[m], series.P[m]
        P_t, P_x = series.P_t[m], series.P_x[m]
        col = lambda f: fd.dx_periodic(f[:, None], dx)[:, 0]
        U_x, I_x, H_x = col(U), col(I), col(H)
        pm = P - 0.5 * H**2
        Acal = np.exp(np.log(params.a / pm) / params.gamma)
        Q = params.gamma * pm + H**2
        r1 = U_t[k] + U * U_x + Acal * (P_x - H * H_x)
        r2 = I_t[k] + U * I_x
        r3 = H_t[k] + U * H_x - H * (P_t + P_x * U) / Q - params.gamma * pm * H * U_x / Q
        res[0, k] = np.linalg.norm(r1) * wx
        res[1, k] = np.linalg.norm(r2) * wx
        res[2, k] = np.linalg.norm(r3) * wx
    return series.times[1:-1], res
