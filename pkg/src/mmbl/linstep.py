"""One time step of the linear problem with frozen coefficients.

IMEX splitting: the stiff wall-normal diffusion B d2/dy2 is implicit
(backward Euler by default, Crank-Nicolson in the second-order variant),
while advection A d/dx, the lower-order term F d(v1)/dy and the source g
are explicit.  S and B are diagonal, so the implicit solve is one scalar
tridiagonal system per component per x column; the columns are solved as a
single batched Thomas sweep.

Boundary rows: u and w are Dirichlet-eliminated at both walls; q gets a
second-order mirror-ghost Neumann row at y = 0 and a Dirichlet row at
y_max.  The step is pure - inputs in, new state out - and the per-column
solves are data-parallel over x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coefficients import (CoefficientBundle, advective_spectral_radius,
                           assemble_bundle)
from .core import CutoffProfile, Grid, PhysicalParams, TransformedState, lift
from .exceptions import AdmissibilityError, ConfigurationError, SingularOperatorError
from .outflow import OutflowLevel
from . import fd

__all__ = [
    "FrozenCoefficients",
    "freeze_coefficients",
    "cfl_bound",
    "step",
    "SecondOrderMarcher",
    "solve_batched_tridiagonal",
]


@dataclass(frozen=True)
class FrozenCoefficients:
    """Coefficient bundle frozen at the lifted previous iterate at one level.

    ``lift_grad`` is the y-gradient of the lift itself, (U phi', I phi',
    (H^2/2) phi'), added to Dy(v) wherever the system differentiates the
    lifted unknown.  ``rho_max`` caches max over nodes of the advective
    spectral radius for the CFL bound.
    """

    grid: Grid
    bundle: CoefficientBundle
    lift_grad: np.ndarray
    rho_max: float
    time: float


def freeze_coefficients(prev: TransformedState, trace: OutflowLevel,
                        cutoff: CutoffProfile, params: PhysicalParams,
                        iteration: int | None = None) -> FrozenCoefficients:
    """Lift the previous iterate and assemble every coefficient at it.

    Refuses to run (raises) when the admissibility band fails on the lifted
    state.
    """
    lifted = lift(prev, trace, cutoff, params.delta)
    if not lifted.band_ok:
        raise AdmissibilityError(
            f"frozen state leaves the band at t={prev.time:.6g} "
            f"(margins {lifted.margin_low:.3e}, {lifted.margin_high:.3e})",
            time=prev.time, iteration=iteration)
    u1 = lifted.u1.values
    w1 = lifted.w1.values
    q1 = lifted.q1.values
    dy_q1 = fd.dy_central(q1, prev.grid.dy)
    bundle = assemble_bundle(u1, w1, q1, dy_q1, trace, cutoff, params,
                             time=prev.time)
    dphi = cutoff.d_phi[None, :]
    R = 0.5 * trace.H**2
    lift_grad = np.stack([trace.U[:, None] * dphi,
                          trace.I[:, None] * dphi,
                          R[:, None] * dphi])
    rho = advective_spectral_radius(u1, q1, trace.P[:, None], params)
    return FrozenCoefficients(grid=prev.grid, bundle=bundle,
                              lift_grad=lift_grad, rho_max=float(np.max(rho)),
                              time=prev.time)


def cfl_bound(coeffs: FrozenCoefficients, grid: Grid,
              cfl_safety: float = 0.8) -> float:
    """Largest stable-by-policy dt: cfl_safety * dx / max rho(S^-1 A)."""
    return cfl_safety * grid.dx / coeffs.rho_max


def solve_batched_tridiagonal(lower, diag, upper, rhs, pivot_tol=1e-14):
    """Thomas algorithm over a batch of independent systems.

    All arrays are (batch, n); row j couples x[j-1] (lower), x[j] (diag)
    and x[j+1] (upper).  A pivot below ``pivot_tol`` raises - with the
    S/dt-dominated diagonals built here that signals admissibility loss.
    """
    n = diag.shape[-1]
    cp = np.empty_like(diag)
    dp = np.empty_like(diag)
    beta = diag[:, 0].copy()
    if np.any(np.abs(beta) < pivot_tol):
        raise SingularOperatorError("tridiagonal pivot below threshold at row 0")
    cp[:, 0] = upper[:, 0] / beta
    dp[:, 0] = rhs[:, 0] / beta
    for j in range(1, n):
        beta = diag[:, j] - lower[:, j] * cp[:, j - 1]
        if np.any(np.abs(beta) < pivot_tol):
            raise SingularOperatorError(
                f"tridiagonal pivot below threshold at row {j}")
        cp[:, j] = upper[:, j] / beta
        dp[:, j] = (rhs[:, j] - lower[:, j] * dp[:, j - 1]) / beta
    x = np.empty_like(diag)
    x[:, -1] = dp[:, -1]
    for j in range(n - 2, -1, -1):
        x[:, j] = dp[:, j] - cp[:, j] * x[:, j + 1]
    return x


def explicit_terms(v_arr: np.ndarray, coeffs: FrozenCoefficients,
                   forcing: np.ndarray | None = None) -> np.ndarray:
    """E(v) = A Dx v + F (Dy v + lift') - g - forcing, all at one level."""
    grid = coeffs.grid
    dxv = np.stack([fd.dx_periodic(v_arr[c], grid.dx) for c in range(3)])
    dyv1 = np.stack([fd.dy_central(v_arr[c], grid.dy) for c in range(3)])
    dyv1 += coeffs.lift_grad
    adv = np.einsum("abxy,bxy->axy", coeffs.bundle.A, dxv)
    low = np.einsum("abxy,bxy->axy", coeffs.bundle.F, dyv1)
    E = adv + low - coeffs.bundle.g
    if forcing is not None:
        E -= forcing
    return E


def _dyy_with_bc(v_arr: np.ndarray, grid: Grid) -> np.ndarray:
    """Second y-derivative matching the implicit stencil rows.

    Interior 3-point; mirror ghost for the q component at the wall;
    Dirichlet rows are irrelevant (overwritten) and set to zero.
    """
    dy2 = grid.dy**2
    out = np.zeros_like(v_arr)
    out[:, :, 1:-1] = (v_arr[:, :, 2:] - 2.0 * v_arr[:, :, 1:-1]
                       + v_arr[:, :, :-2]) / dy2
    out[2, :, 0] = (2.0 * v_arr[2, :, 1] - 2.0 * v_arr[2, :, 0]) / dy2
    return out


def _implicit_solve(rhs: np.ndarray, coeffs: FrozenCoefficients, dt: float,
                    theta: float) -> np.ndarray:
    """Solve (S/dt + theta * (-B d2/dy2)) v = rhs with the boundary rows."""
    grid = coeffs.grid
    ny = grid.ny
    dy2 = grid.dy**2
    Sd = coeffs.bundle.S_diag
    Bd = coeffs.bundle.B_diag
    k = theta / dy2
    diag = Sd / dt + 2.0 * k * Bd
    lower = -k * Bd
    upper = -k * Bd.copy()
    rhs = rhs.copy()

    # Dirichlet rows: u, w at both walls, q at y_max
    for c in (0, 1):
        for j in (0, ny - 1):
            diag[c, :, j] = 1.0
            lower[c, :, j] = 0.0
            upper[c, :, j] = 0.0
            rhs[c, :, j] = 0.0
    diag[2, :, ny - 1] = 1.0
    lower[2, :, ny - 1] = 0.0
    upper[2, :, ny - 1] = 0.0
    rhs[2, :, ny - 1] = 0.0
    # Neumann mirror row for q at the wall: ghost q[-1] = q[1]
    upper[2, :, 0] = -2.0 * k * Bd[2, :, 0]
    lower[2, :, 0] = 0.0

    nb = 3 * grid.nx
    x = solve_batched_tridiagonal(lower.reshape(nb, ny), diag.reshape(nb, ny),
                                  upper.reshape(nb, ny), rhs.reshape(nb, ny))
    return x.reshape(3, grid.nx, ny)


def _check_cfl(coeffs: FrozenCoefficients, dt: float, cfl_safety: float):
    dt_max = cfl_bound(coeffs, coeffs.grid, cfl_safety)
    if dt > dt_max * (1.0 + 1e-9):
        raise ConfigurationError(
            f"dt={dt:g} violates the advective CFL bound {dt_max:g} "
            f"(rho_max={coeffs.rho_max:g})")


def step(v_now: TransformedState, coeffs: FrozenCoefficients, dt: float,
         mms_forcing: np.ndarray | None = None,
         cfl_safety: float = 0.8) -> TransformedState:
    """First-order IMEX update (backward Euler diffusion, explicit rest)."""
    _check_cfl(coeffs, dt, cfl_safety)
    v = v_now.as_array()
    E = explicit_terms(v, coeffs, mms_forcing)
    rhs = coeffs.bundle.S_diag / dt * v - E
    v_new = _implicit_solve(rhs, coeffs, dt, theta=1.0)
    return TransformedState.from_array(v_now.grid, v_new, v_now.time + dt)


class SecondOrderMarcher:
    """Second-order IMEX variant: Crank-Nicolson diffusion + Adams-Bashforth 2.

    The first step runs an implicit-Euler predictor and a trapezoidal
    corrector so the whole march stays second order.  Coefficients are
    frozen per level; within a step the implicit half uses the entering
    level's B, which is exact when the bundle is time-independent (the MMS
    configuration) and degrades gracefully otherwise.
    """

    def __init__(self, cfl_safety: float = 0.8):
        self.cfl_safety = cfl_safety
        self._prev_E: np.ndarray | None = None

    def reset(self):
        self._prev_E = None

    def advance(self, v_now: TransformedState, coeffs_now: FrozenCoefficients,
                coeffs_next: FrozenCoefficients, dt: float,
                forcing_now: np.ndarray | None = None,
                forcing_next: np.ndarray | None = None) -> TransformedState:
        _check_cfl(coeffs_now, dt, self.cfl_safety)
        grid = v_now.grid
        v = v_now.as_array()
        E_now = explicit_terms(v, coeffs_now, forcing_now)
        Sd = coeffs_now.bundle.S_diag
        if self._prev_E is None:
            rhs = Sd / dt * v - E_now
            v_pred = _implicit_solve(rhs, coeffs_now, dt, theta=1.0)
            E_pred = explicit_terms(v_pred, coeffs_next, forcing_next)
            E_eff = 0.5 * (E_now + E_pred)
        else:
            E_eff = 1.5 * E_now - 0.5 * self._prev_E
        rhs = (Sd / dt * v - E_eff
               + 0.5 * coeffs_now.bundle.B_diag * _dyy_with_bc(v, grid))
        v_new = _implicit_solve(rhs, coeffs_now, dt, theta=0.5)
        self._prev_E = E_now
        return TransformedState.from_array(grid, v_new, v_now.time + dt)
