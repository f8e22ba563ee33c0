"""Built-in verification studies: manufactured solutions, transform round
trips, and the random-state algebraic invariant suite.

The manufactured solution exercises the discrete linear step against a
chosen smooth field that satisfies every boundary condition exactly.  The
forcing applies the *continuous* operator to that field - coefficient
entries at a frozen synthetic admissible state times closed-form analytic
derivatives - so the march's discrete errors are exactly the quantity the
refinement study measures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coefficients import (CoefficientBundle, advective_spectral_radius,
                           assemble_A0_B0_A_B, assemble_F, assemble_S)
from .core import Field, Grid, PhysicalParams, TransformedState
from .diagnostics import convergence_order
from .linstep import FrozenCoefficients, SecondOrderMarcher, step
from .transform import inverse_y_of_psi, pushforward, stream_forward

__all__ = [
    "MmsResult",
    "mms_bundle",
    "mms_exact",
    "mms_forcing",
    "mms_march",
    "mms_space_study",
    "mms_time_study",
    "transform_roundtrip_study",
    "invariant_suite",
]

_P0 = 2.0


def mms_frozen_state(grid: Grid):
    """Closed-form admissible synthetic state the coefficients freeze at."""
    X, Y = grid.mesh()
    u1 = 0.3 * np.sin(X) * np.exp(-Y / 3.0)
    q1 = 0.8 + 0.2 * np.cos(X) * np.exp(-Y / 2.0)
    dyq1 = -0.1 * np.cos(X) * np.exp(-Y / 2.0)
    P = np.full_like(u1, _P0)
    return u1, q1, dyq1, P


def mms_bundle(grid: Grid, params: PhysicalParams) -> FrozenCoefficients:
    """Frozen coefficients at the synthetic state; zero source, zero lift."""
    u1, q1, dyq1, P = mms_frozen_state(grid)
    w1 = np.zeros_like(u1)
    S = assemble_S(u1, w1, q1, P, params)
    A0, B0, A, B = assemble_A0_B0_A_B(u1, w1, q1, P, params)
    F = assemble_F(u1, w1, q1, dyq1, P, params)
    Acal = np.exp(np.log(params.a / (P - q1)) / params.gamma)
    Q = params.gamma * (P - q1) + 2.0 * q1
    bundle = CoefficientBundle(Acal=Acal, Q=Q, S=S, A0=A0, B0=B0, A=A, B=B,
                               F=F, g=np.zeros((3,) + u1.shape))
    rho = advective_spectral_radius(u1, q1, P, params)
    return FrozenCoefficients(grid=grid, bundle=bundle,
                              lift_grad=np.zeros((3,) + u1.shape),
                              rho_max=float(np.max(rho)), time=0.0)


def _tau(t: float):
    return 1.0 + 0.3 * np.sin(2.0 * t), 0.6 * np.cos(2.0 * t)


def mms_exact(t: float, grid: Grid) -> np.ndarray:
    """Manufactured field; vanishes at y_max, u = w = 0 and dq/dy = 0 at y = 0."""
    X, Y = grid.mesh()
    tau, _ = _tau(t)
    ky_u = np.pi / grid.y_max
    ky_w = 2.0 * np.pi / grid.y_max
    ky_q = 0.5 * np.pi / grid.y_max
    u = tau * np.sin(X) * np.sin(ky_u * Y)
    w = tau * np.cos(X) * np.sin(ky_w * Y)
    q = tau * np.cos(X) * np.cos(ky_q * Y)
    return np.stack([u, w, q])


def mms_forcing(t: float, grid: Grid, coeffs: FrozenCoefficients) -> np.ndarray:
    """Continuous operator applied to the manufactured field, closed form."""
    X, Y = grid.mesh()
    tau, dtau = _tau(t)
    ky_u = np.pi / grid.y_max
    ky_w = 2.0 * np.pi / grid.y_max
    ky_q = 0.5 * np.pi / grid.y_max
    sin_u, cos_u = np.sin(ky_u * Y), np.cos(ky_u * Y)
    sin_w, cos_w = np.sin(ky_w * Y), np.cos(ky_w * Y)
    sin_q, cos_q = np.sin(ky_q * Y), np.cos(ky_q * Y)

    v_t = np.stack([dtau * np.sin(X) * sin_u,
                    dtau * np.cos(X) * sin_w,
                    dtau * np.cos(X) * cos_q])
    v_x = np.stack([tau * np.cos(X) * sin_u,
                    -tau * np.sin(X) * sin_w,
                    -tau * np.sin(X) * cos_q])
    v_y = np.stack([tau * ky_u * np.sin(X) * cos_u,
                    tau * ky_w * np.cos(X) * cos_w,
                    -tau * ky_q * np.cos(X) * sin_q])
    v_yy = np.stack([-tau * ky_u**2 * np.sin(X) * sin_u,
                     -tau * ky_w**2 * np.cos(X) * sin_w,
                     -tau * ky_q**2 * np.cos(X) * cos_q])
    b = coeffs.bundle
    return (b.S_diag * v_t
            + np.einsum("abxy,bxy->axy", b.A, v_x)
            + np.einsum("abxy,bxy->axy", b.F, v_y)
            - b.B_diag * v_yy)


def mms_march(grid: Grid, params: PhysicalParams, t_end: float, dt: float,
              integrator: str = "first") -> float:
    """March from the exact initial state; final sup-norm error."""
    coeffs = mms_bundle(grid, params)
    v = TransformedState.from_array(grid, mms_exact(0.0, grid), 0.0)
    n = int(round(t_end / dt))
    if integrator == "second":
        marcher = SecondOrderMarcher(cfl_safety=0.9)
        for m in range(n):
            t = m * dt
            v = marcher.advance(v, coeffs, coeffs, dt,
                                forcing_now=mms_forcing(t, grid, coeffs),
                                forcing_next=mms_forcing(t + dt, grid, coeffs))
    else:
        for m in range(n):
            t = m * dt
            v = step(v, coeffs, dt, mms_forcing=mms_forcing(t, grid, coeffs),
                     cfl_safety=0.9)
    exact = mms_exact(n * dt, grid)
    return float(np.max(np.abs(v.as_array() - exact)))


@dataclass(frozen=True)
class MmsResult:
    label: str
    hs: list
    errors: list
    order: float


def mms_space_study(params: PhysicalParams, levels: int = 3,
                    base: int = 16, t_end: float = 0.1,
                    y_max: float = 8.0) -> MmsResult:
    """Spatial refinement at dt proportional to h with the second-order
    integrator, so the temporal error refines at the same rate squared."""
    hs, errors = [], []
    for lev in range(levels):
        nx = base * 2**lev
        ny = base * 2**lev + 1
        grid = Grid(nx=nx, ny=ny, y_max=y_max)
        dt = t_end / (8 * 2**lev)
        errors.append(mms_march(grid, params, t_end, dt, integrator="second"))
        hs.append(grid.dy)
    return MmsResult("space", hs, errors, convergence_order(hs, errors))


def mms_time_study(params: PhysicalParams, levels: int = 3,
                   integrator: str = "first", t_end: float = 0.4,
                   nx: int = 32, ny: int = 65, y_max: float = 8.0,
                   dt0: float = 0.05) -> MmsResult:
    """Temporal refinement on a fixed fine grid."""
    grid = Grid(nx=nx, ny=ny, y_max=y_max)
    base_err = mms_march(grid, params, t_end, dt0 / 2**(levels + 1),
                         integrator=integrator)
    hs, errors = [], []
    for lev in range(levels):
        dt = dt0 / 2**lev
        err = mms_march(grid, params, t_end, dt, integrator=integrator)
        # subtract the spatial floor measured at a much smaller dt
        errors.append(max(err - base_err, 1e-15))
        hs.append(dt)
    return MmsResult(f"time-{integrator}", hs, errors,
                     convergence_order(hs, errors))


def transform_roundtrip_study(levels: int = 3, base_ny: int = 33,
                              nx: int = 8, y_max: float = 6.0,
                              delta: float = 0.1) -> MmsResult:
    """Forward-then-inverse stream map error under y refinement."""
    hs, errors = [], []
    for lev in range(levels):
        ny = (base_ny - 1) * 2**lev + 1
        grid = Grid(nx=nx, ny=ny, y_max=y_max)
        X, Y = grid.mesh()
        h1 = Field(grid, 1.0 + 0.4 * np.exp(-Y) + 0.1 * np.sin(X) * np.exp(-2 * Y))
        psi = stream_forward(h1, delta=delta)
        ybar_max = float(np.min(psi.values[:, -1]))
        gbar = Grid(nx=nx, ny=ny, y_max=ybar_max)
        (h1_hat,) = pushforward([h1], psi, gbar.y_nodes)
        keep = ny - 4
        _, psi_rec = inverse_y_of_psi(Field(gbar, h1_hat), delta=delta,
                                      y_phys_nodes=grid.y_nodes[:keep])
        errors.append(float(np.max(np.abs(psi_rec - psi.values[:, :keep]))))
        hs.append(grid.dy)
    return MmsResult("roundtrip", hs, errors, convergence_order(hs, errors))


def invariant_suite(params: PhysicalParams, samples: int = 10_000,
                    seed: int = 7) -> dict:
    """Algebraic identities on seeded random admissible states.

    Returns max relative identity errors, the exact symmetry defect, and
    eigenvalue margins over analytic lower bounds.
    """
    rng = np.random.default_rng(seed)
    d = params.delta
    P = rng.uniform(max(4 * d, 0.5), 3.0, size=samples)
    q1 = d + (P - 2 * d) * rng.uniform(0.0, 1.0, size=samples)
    u1 = rng.uniform(-1.0, 1.0, size=samples)
    w1 = rng.uniform(-1.0, 1.0, size=samples)
    dyq = rng.uniform(-1.0, 1.0, size=samples)

    S = assemble_S(u1, w1, q1, P, params)
    A0, B0, A, B = assemble_A0_B0_A_B(u1, w1, q1, P, params)
    assemble_F(u1, w1, q1, dyq, P, params)
    SA0 = np.einsum("ab...,bc...->ac...", S, A0)
    SB0 = np.einsum("ab...,bc...->ac...", S, B0)
    errA = float(np.max(np.abs(SA0 - A)) / np.max(np.abs(A)))
    errB = float(np.max(np.abs(SB0 - B)) / np.max(np.abs(B)))
    sym = float(np.max(np.abs(A - np.swapaxes(A, 0, 1))))

    s_eig = np.minimum(np.minimum(S[0, 0], S[1, 1]), S[2, 2])
    b_eig = np.minimum(np.minimum(B[0, 0], B[1, 1]), B[2, 2])
    s_bound = min(np.exp(np.log(d / params.a) / params.gamma) * d * d,
                  (params.gamma + 2.0) * d / (2.0 * params.gamma))
    b_bound = min(2 * params.mu * d**3, 2 * params.mu_prime * d**3,
                  params.sigma * d**2)
    return {
        "samples": samples,
        "seed": seed,
        "max_rel_err_SA0_vs_A": errA,
        "max_rel_err_SB0_vs_B": errB,
        "symmetry_defect": sym,
        "min_eig_S": float(np.min(s_eig)),
        "min_eig_S_bound": float(s_bound),
        "min_eig_B": float(np.min(b_eig)),
        "min_eig_B_bound": float(b_bound),
        "pass": bool(errA <= 1e-12 and errB <= 1e-12 and sym == 0.0
                     and np.min(s_eig) >= s_bound - 1e-15
                     and np.min(b_eig) >= b_bound - 1e-15),
    }
