"""Pointwise algebra of the symmetrized degenerate parabolic system.

At an admissible state (delta <= q1 <= P - delta) define

    Acal = (a / (P - q1))^(1/gamma)          specific-volume coefficient
    Q    = gamma (P - q1) + 2 q1             combined sound/Alfven factor

and the matrices

    S  = diag(Acal^-1 (P-q1) q1, Acal^-1 (P-q1) q1, Q / 2 gamma)
    A0 = [[u1, 0, -Acal], [0, u1, 0], [-2 gamma (P-q1) q1 / Q, 0, u1]]
    B0 = 2 q1 diag(mu Acal, mu' Acal, sigma gamma (P-q1) / Q)
    A  = S A0   (symmetric),   B = S B0   (positive diagonal)
    F  = [[(sigma/Acal - mu)(P-q1) q1 dyq, 0, 0],
          [2 zeta (P-q1) q1 sqrt(2 q1), (sigma/Acal - mu')(P-q1) q1 dyq, 0],
          [0, 0, sigma (Q / 2 gamma) dyq]]

so the homogenized unknown v = (u, w, q) obeys

    S dv/dt + A dv/dx + F d(v + lift)/dy - B d2v/dy2 = g.

The source g collects every term produced by the cutoff lift.  It is
derived here for the cutoff applied to all three components; with the
outflow obeying the Bernoulli system, g vanishes identically on the
far-field plateau, which is what makes v -> 0 a consistent boundary
condition.  The cutoff derivatives entering g (and the lift gradient) are
the discrete ones, so a lifted steady state is an exact fixed point of the
discrete scheme.

Assembly is pure and nodewise; every operation broadcasts over arrays of
any common shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CutoffProfile, PhysicalParams
from .exceptions import AdmissibilityError
from .outflow import OutflowLevel

__all__ = [
    "CoefficientBundle",
    "eval_Acal_Q",
    "assemble_S",
    "assemble_A0_B0_A_B",
    "assemble_F",
    "assemble_g",
    "assemble_bundle",
    "advective_spectral_radius",
]


def _band_check(q1: np.ndarray, P: np.ndarray, delta: float, time=None):
    lo = q1 - delta
    hi = P - delta - q1
    if np.any(lo < 0) or np.any(hi < 0):
        worst = np.minimum(lo, hi)
        idx = np.unravel_index(int(np.argmin(worst)), np.shape(worst))
        raise AdmissibilityError(
            f"state leaves the admissibility band at node {idx} "
            f"(q1 - delta = {lo[idx] if np.ndim(lo) else float(lo):.3e}, "
            f"P - delta - q1 = {hi[idx] if np.ndim(hi) else float(hi):.3e})",
            time=time,
            ix=idx[0] if idx else None,
            iy=idx[1] if len(idx) > 1 else None)


def eval_Acal_Q(P, q1, params: PhysicalParams, check_band: bool = True):
    """Specific-volume coefficient and combined factor at an admissible state.

    Powers are taken via exp(log) on strictly positive arguments; the band
    check runs first so no NaN path exists.
    """
    P = np.asarray(P, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    if check_band:
        _band_check(q1, P, params.delta)
    Acal = np.exp(np.log(params.a / (P - q1)) / params.gamma)
    Q = params.gamma * (P - q1) + 2.0 * q1
    return Acal, Q


def assemble_S(u1, w1, q1, P, params: PhysicalParams):
    """Symmetrizer S: positive diagonal, shape (3, 3) + state shape."""
    Acal, Q = eval_Acal_Q(P, q1, params)
    q1 = np.asarray(q1, dtype=float)
    P = np.asarray(P, dtype=float)
    s11 = (P - q1) * q1 / Acal
    s33 = Q / (2.0 * params.gamma)
    S = np.zeros((3, 3) + s11.shape)
    S[0, 0] = s11
    S[1, 1] = s11
    S[2, 2] = s33
    return S


def assemble_A0_B0_A_B(u1, w1, q1, P, params: PhysicalParams):
    """Advection and diffusion matrices, raw (A0, B0) and symmetrized (A, B).

    A is built directly in its symmetric form (identical off-diagonal
    entries by construction); the identities A = S A0, B = S B0 are checked
    by the invariant suite, not enforced here.
    """
    Acal, Q = eval_Acal_Q(P, q1, params)
    u1 = np.asarray(u1, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    P = np.asarray(P, dtype=float)
    shape = np.broadcast_shapes(u1.shape, q1.shape, P.shape)
    PQ = (P - q1) * q1

    A0 = np.zeros((3, 3) + shape)
    A0[0, 0] = u1
    A0[1, 1] = u1
    A0[2, 2] = u1
    A0[0, 2] = -Acal
    A0[2, 0] = -2.0 * params.gamma * PQ / Q

    B0 = np.zeros((3, 3) + shape)
    B0[0, 0] = 2.0 * q1 * params.mu * Acal
    B0[1, 1] = 2.0 * q1 * params.mu_prime * Acal
    B0[2, 2] = 2.0 * q1 * params.sigma * params.gamma * (P - q1) / Q

    s11 = PQ / Acal
    A = np.zeros((3, 3) + shape)
    A[0, 0] = s11 * u1
    A[1, 1] = s11 * u1
    A[2, 2] = Q * u1 / (2.0 * params.gamma)
    off = -PQ
    A[0, 2] = off
    A[2, 0] = off

    B = np.zeros((3, 3) + shape)
    B[0, 0] = 2.0 * params.mu * PQ * q1
    B[1, 1] = 2.0 * params.mu_prime * PQ * q1
    B[2, 2] = params.sigma * PQ
    return A0, B0, A, B


def assemble_F(u1, w1, q1, dy_q, P, params: PhysicalParams):
    """Lower-order matrix F; the f-vector of the system is F d(v1)/dy.

    ``dy_q`` is the y-gradient of the (lifted) q component of the state the
    coefficients are frozen at.
    """
    Acal, Q = eval_Acal_Q(P, q1, params)
    q1 = np.asarray(q1, dtype=float)
    if np.any(q1 < 0):
        raise AdmissibilityError("q1 negative under the square root")
    dy_q = np.asarray(dy_q, dtype=float)
    P = np.asarray(P, dtype=float)
    shape = np.broadcast_shapes(q1.shape, dy_q.shape, P.shape)
    PQ = (P - q1) * q1
    F = np.zeros((3, 3) + shape)
    F[0, 0] = (params.sigma / Acal - params.mu) * PQ * dy_q
    F[1, 0] = 2.0 * params.zeta * PQ * np.sqrt(2.0 * q1)
    F[1, 1] = (params.sigma / Acal - params.mu_prime) * PQ * dy_q
    F[2, 2] = params.sigma * Q / (2.0 * params.gamma) * dy_q
    return F


def assemble_g(u1, q1, trace: OutflowLevel, cutoff: CutoffProfile,
               params: PhysicalParams):
    """Source vector of the homogenized linear problem, shape (3, nx, ny).

    ``u1``/``q1`` are the lifted fields of the state being frozen.  Collects
    every lift-generated term for the cutoff applied to all three
    components; vanishes identically where the cutoff plateaus at one and
    the trace obeys the outflow system, and reduces to the pressure-only
    terms where the cutoff is zero.
    """
    Acal, Q = eval_Acal_Q(trace.P[:, None], q1, params)
    u1 = np.asarray(u1, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    phi = cutoff.phi[None, :]
    d2phi = cutoff.d2_phi[None, :]

    P = trace.P[:, None]
    P_t = trace.P_t[:, None]
    P_x = trace.P_x[:, None]
    U = trace.U[:, None]
    U_t = trace.U_t[:, None]
    U_x = trace.U_x[:, None]
    I = trace.I[:, None]
    I_t = trace.I_t[:, None]
    I_x = trace.I_x[:, None]
    R = (0.5 * trace.H**2)[:, None]
    HH_t = (trace.H * trace.H_t)[:, None]
    HH_x = (trace.H * trace.H_x)[:, None]

    PQ = (P - q1) * q1
    s11 = PQ / Acal
    gam = params.gamma

    g = np.empty((3,) + q1.shape)
    g[0] = (-s11 * (U_t + u1 * U_x) * phi - PQ * P_x + PQ * HH_x * phi
            + 2.0 * params.mu * PQ * q1 * U * d2phi)
    g[1] = -s11 * (I_t + u1 * I_x) * phi + 2.0 * params.mu_prime * PQ * q1 * I * d2phi
    g[2] = (-(Q / (2.0 * gam)) * (HH_t + u1 * HH_x) * phi
            + q1 * (P_t + P_x * u1) / gam + PQ * U_x * phi
            + params.sigma * PQ * R * d2phi)
    return g


@dataclass(frozen=True)
class CoefficientBundle:
    """Every pointwise object of the reformulated system frozen at one state.

    Matrices are shaped (3, 3, nx, ny); g is (3, nx, ny).  S is diagonal
    with positive entries, A symmetric, B diagonal positive.
    """

    Acal: np.ndarray
    Q: np.ndarray
    S: np.ndarray
    A0: np.ndarray
    B0: np.ndarray
    A: np.ndarray
    B: np.ndarray
    F: np.ndarray
    g: np.ndarray

    @property
    def S_diag(self) -> np.ndarray:
        return np.stack([self.S[0, 0], self.S[1, 1], self.S[2, 2]])

    @property
    def B_diag(self) -> np.ndarray:
        return np.stack([self.B[0, 0], self.B[1, 1], self.B[2, 2]])


def assemble_bundle(u1, w1, q1, dy_q1, trace: OutflowLevel,
                    cutoff: CutoffProfile, params: PhysicalParams,
                    time=None) -> CoefficientBundle:
    """Assemble the full bundle at a lifted state; raises on band violation."""
    P = trace.P[:, None]
    _band_check(np.asarray(q1, dtype=float), P, params.delta, time=time)
    Acal, Q = eval_Acal_Q(P, q1, params, check_band=False)
    S = assemble_S(u1, w1, q1, P, params)
    A0, B0, A, B = assemble_A0_B0_A_B(u1, w1, q1, P, params)
    F = assemble_F(u1, w1, q1, dy_q1, P, params)
    g = assemble_g(u1, q1, trace, cutoff, params)
    return CoefficientBundle(Acal=Acal, Q=Q, S=S, A0=A0, B0=B0, A=A, B=B, F=F, g=g)


def advective_spectral_radius(u1, q1, P, params: PhysicalParams) -> np.ndarray:
    """Closed-form spectral radius of S^-1 A = A0 per node.

    The (u, q) block of A0 has eigenvalues u1 +- sqrt(2 gamma Acal (P-q1) q1 / Q);
    the w eigenvalue is u1 itself.
    """
    Acal, Q = eval_Acal_Q(P, q1, params)
    u1 = np.asarray(u1, dtype=float)
    PQ = (np.asarray(P, dtype=float) - np.asarray(q1, dtype=float)) * np.asarray(q1, dtype=float)
    return np.abs(u1) + np.sqrt(2.0 * params.gamma * Acal * PQ / Q)
