"""Discrete norms, energy functionals, envelopes, and the residual oracle.

The discrete Sobolev machinery mirrors the analysis norms: mixed
differences d_t^a1 d_x^a2 d_y^a3 up to total order k, squared L2 norms
summed per time level.  Time derivatives come from stored snapshot levels:
central differences inside, one-sided stencils at the first/last levels
(those entries are reduced order and flagged).  All reductions use numpy's
fixed pairwise summation in a fixed iteration order, so repeated runs are
bitwise reproducible.

The residual oracle re-evaluates the five physical-variable equations -
tangential momentum, micro-rotation, tangential induction, the velocity
divergence relation, and the magnetic divergence constraint - on recovered
physical states, with no reference to the transformed solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Grid, PhysicalParams
from .exceptions import MmblError
from . import fd

__all__ = [
    "NormSuite",
    "GronwallFit",
    "discrete_sobolev_norm",
    "spatial_hk_norm",
    "energy_functional",
    "dissipation_functional",
    "gronwall_envelope",
    "sobolev_ratio",
    "original_system_residual",
    "norm_suite",
    "convergence_order",
]


def _l2(arr: np.ndarray, weights: np.ndarray) -> float:
    return float(np.sqrt(np.sum(arr**2 * weights)))


def _multi_indices(k: int, include_time: bool):
    """Multi-indices (a1, a2, a3) with |a| <= k in a fixed deterministic order."""
    out = []
    for a1 in range(0, k + 1 if include_time else 1):
        for a2 in range(0, k + 1 - a1):
            for a3 in range(0, k + 1 - a1 - a2):
                out.append((a1, a2, a3))
    return out


def _apply_spatial(arr: np.ndarray, grid: Grid, a2: int, a3: int) -> np.ndarray:
    out = arr
    for _ in range(a2):
        out = fd.dx_periodic(out, grid.dx)
    for _ in range(a3):
        out = fd.dy_central(out, grid.dy)
    return out


def spatial_hk_norm(f: np.ndarray, grid: Grid, k: int) -> float:
    """Discrete H^k norm over (x, y) of a single static field."""
    w = grid.quad_weights()
    total = 0.0
    for (_, a2, a3) in _multi_indices(k, include_time=False):
        d = _apply_spatial(f, grid, a2, a3)
        total += np.sum(d**2 * w)
    return float(np.sqrt(total))


def discrete_sobolev_norm(f: np.ndarray, grid: Grid, k: int,
                          dt: float | None = None):
    """Per-level discrete Sobolev norm with mixed t/x/y differences.

    ``f`` is either a static field (nx, ny) - time derivatives vanish and a
    scalar comes back - or a stored series (nt, nx, ny), which needs ``dt``
    and returns (values (nt,), reduced_order_mask (nt,), truncated_t_order).
    If the series is too short for all t-differences, the t-order is
    truncated to what fits and reported.
    """
    f = np.asarray(f, dtype=float)
    if f.ndim == 2:
        return spatial_hk_norm(f, grid, k)
    if f.ndim != 3:
        raise ValueError("expected (nx, ny) or (nt, nx, ny)")
    if dt is None:
        raise ValueError("series input needs dt")
    nt = f.shape[0]
    t_max = min(k, nt - 1)
    w = grid.quad_weights()
    # cache repeated time differences of the whole series
    t_stack = [f]
    for _ in range(t_max):
        t_stack.append(fd.dt_series(t_stack[-1], dt))
    totals = np.zeros(nt)
    for (a1, a2, a3) in _multi_indices(k, include_time=True):
        if a1 > t_max:
            continue
        base = t_stack[a1]
        for m in range(nt):
            d = _apply_spatial(base[m], grid, a2, a3)
            totals[m] += np.sum(d**2 * w)
    values = np.sqrt(totals)
    mask = np.zeros(nt, dtype=bool)
    edge = min(t_max, nt)
    if t_max > 0:
        mask[:edge] = True
        mask[-edge:] = True
    return values, mask, t_max


def energy_functional(v_series: np.ndarray, S_diag_series: np.ndarray,
                      grid: Grid, k: int, dt: float) -> np.ndarray:
    """Weighted energy E(t) = sum over |a| <= k of <d^a v, S d^a v> per level.

    ``v_series`` is (nt, 3, nx, ny); ``S_diag_series`` matches, holding the
    diagonal of the symmetrizer at each level.
    """
    v = np.asarray(v_series, dtype=float)
    S = np.asarray(S_diag_series, dtype=float)
    if v.shape != S.shape:
        raise ValueError("v series and S series must share a shape")
    nt = v.shape[0]
    t_max = min(k, nt - 1)
    w = grid.quad_weights()
    t_stack = [v]
    for _ in range(t_max):
        t_stack.append(fd.dt_series(t_stack[-1], dt))
    E = np.zeros(nt)
    for (a1, a2, a3) in _multi_indices(k, include_time=True):
        if a1 > t_max:
            continue
        base = t_stack[a1]
        for m in range(nt):
            for c in range(3):
                d = _apply_spatial(base[m, c], grid, a2, a3)
                E[m] += np.sum(d**2 * S[m, c] * w)
    return E


def dissipation_functional(v_series: np.ndarray, grid: Grid, k: int,
                           dt: float) -> np.ndarray:
    """D(t) = squared H^k norm of dy v, summed over components, per level."""
    v = np.asarray(v_series, dtype=float)
    dyv = np.stack([np.stack([fd.dy_central(v[m, c], grid.dy)
                              for c in range(3)]) for m in range(v.shape[0])])
    nt = v.shape[0]
    t_max = min(k, nt - 1)
    w = grid.quad_weights()
    t_stack = [dyv]
    for _ in range(t_max):
        t_stack.append(fd.dt_series(t_stack[-1], dt))
    D = np.zeros(nt)
    for (a1, a2, a3) in _multi_indices(k, include_time=True):
        if a1 > t_max:
            continue
        base = t_stack[a1]
        for m in range(nt):
            for c in range(3):
                d = _apply_spatial(base[m, c], grid, a2, a3)
                D[m] += np.sum(d**2 * w)
    return D


@dataclass(frozen=True)
class GronwallFit:
    """Tightest exponential envelope E(t) <= E(0) exp(C t) over the run."""

    C: float
    envelope: np.ndarray
    growth_ratio: float
    passed: bool
    undefined: bool = False


def gronwall_envelope(times: np.ndarray, E: np.ndarray,
                      D: np.ndarray | None = None,
                      ceiling: float = 10.0) -> GronwallFit:
    """Smallest C with E(t) <= E(0) e^(C t) at every sample.

    A zero initial energy with later growth makes the envelope undefined
    (reported, not fatal).  The pass flag requires a finite C and total
    growth E(T)/E(0) below the regression ceiling.  ``D`` is accepted for
    reporting symmetry; the envelope itself is fitted on E.
    """
    times = np.asarray(times, dtype=float)
    E = np.asarray(E, dtype=float)
    if E[0] <= 0.0:
        if np.any(E > 0.0):
            return GronwallFit(C=float("nan"), envelope=np.full_like(E, np.nan),
                               growth_ratio=float("inf"), passed=False,
                               undefined=True)
        return GronwallFit(C=0.0, envelope=np.zeros_like(E), growth_ratio=1.0,
                           passed=True)
    with np.errstate(divide="ignore"):
        rates = np.log(E[1:] / E[0]) / times[1:]
    C = float(np.max(rates)) if len(rates) else 0.0
    C = max(C, 0.0)
    envelope = E[0] * np.exp(C * times)
    ratio = float(E[-1] / E[0])
    passed = bool(np.isfinite(C) and ratio <= ceiling)
    return GronwallFit(C=C, envelope=envelope, growth_ratio=ratio, passed=passed)


def sobolev_ratio(f: np.ndarray, grid: Grid) -> float:
    """||f||_inf / (||f||_2 + ||dx f||_2 + ||dyy f||_2), all discrete."""
    f = np.asarray(f, dtype=float)
    w = grid.quad_weights()
    denom = (_l2(f, w) + _l2(fd.dx_periodic(f, grid.dx), w)
             + _l2(fd.dyy_central(f, grid.dy), w))
    if denom == 0.0:
        raise MmblError("sobolev_ratio undefined: zero denominator")
    return float(np.max(np.abs(f))) / denom


@dataclass(frozen=True)
class NormSuite:
    """Per-level norms of a stored homogenized series."""

    times: np.ndarray
    l2: np.ndarray
    hk: np.ndarray
    sup: np.ndarray
    energy: np.ndarray
    dissipation: np.ndarray
    reduced_order_mask: np.ndarray
    k: int


def norm_suite(times, v_series, S_diag_series, grid: Grid, k: int) -> NormSuite:
    times = np.asarray(times, dtype=float)
    v = np.asarray(v_series, dtype=float)
    dt = float(times[1] - times[0])
    w = grid.quad_weights()
    l2 = np.array([np.sqrt(np.sum(v[m] ** 2 * w[None, :, :]))
                   for m in range(v.shape[0])])
    sup = np.array([np.max(np.abs(v[m])) for m in range(v.shape[0])])
    hks = np.zeros(v.shape[0])
    mask = np.zeros(v.shape[0], dtype=bool)
    for c in range(3):
        vals, m_c, _ = discrete_sobolev_norm(v[:, c], grid, k, dt)
        hks += vals**2
        mask |= m_c
    hk = np.sqrt(hks)
    E = energy_functional(v, S_diag_series, grid, k, dt)
    D = dissipation_functional(v, grid, k, dt)
    return NormSuite(times=times, l2=l2, hk=hk, sup=sup, energy=E,
                     dissipation=D, reduced_order_mask=mask, k=k)


def original_system_residual(phys_series, trace, params: PhysicalParams,
                             grid: Grid):
    """L2 residuals of the five physical-variable equations per interior level.

    ``phys_series`` is a list of PhysicalState on one physical grid aligned
    with the trace levels.  Returns (times, residuals (5, nt-2)).
    """
    if len(phys_series) < 3:
        raise ValueError("need at least three stored physical levels")
    nt = len(phys_series)
    dt = float(phys_series[1].time - phys_series[0].time)
    w = grid.quad_weights()
    get = lambda name: np.stack([getattr(s, name).values for s in phys_series])
    u1 = get("u1")
    u2 = get("u2")
    w1 = get("w1")
    h1 = get("h1")
    h2 = get("h2")
    u1_t = fd.dt_series(u1, dt)
    w1_t = fd.dt_series(w1, dt)
    h1_t = fd.dt_series(h1, dt)
    gam = params.gamma
    res = np.empty((5, nt - 2))
    times = np.empty(nt - 2)
    for k_, m in enumerate(range(1, nt - 1)):
        P = trace.P[m][:, None]
        P_t = trace.P_t[m][:, None]
        P_x = trace.P_x[m][:, None]
        dxk = lambda f: fd.dx_periodic(f, grid.dx)
        dyk = lambda f: fd.dy_central(f, grid.dy)
        dyyk = lambda f: fd.dyy_central(f, grid.dy)
        pm = P - 0.5 * h1[m] ** 2
        Acal = np.exp(np.log(params.a / pm) / gam)
        Qs = gam * pm + h1[m] ** 2
        conv = lambda f: u1[m] * dxk(f) + u2[m] * dyk(f)
        mag = lambda f: h1[m] * dxk(f) + h2[m] * dyk(f)
        r1 = (u1_t[m] + conv(u1[m]) + Acal * P_x - Acal * mag(h1[m])
              - params.mu * Acal * dyyk(u1[m]))
        r2 = (w1_t[m] + conv(w1[m]) + 2.0 * params.zeta * Acal * dyk(u1[m])
              - params.mu_prime * Acal * dyyk(w1[m]))
        r3 = (h1_t[m] + conv(h1[m]) - h1[m] * (P_t + P_x * u1[m]) / Qs
              - gam * pm / Qs * mag(u1[m])
              - params.sigma * gam * pm / Qs * dyyk(h1[m]))
        r4 = (dxk(u1[m]) + dyk(u2[m]) + (P_t + P_x * u1[m]) / Qs
              - (h1[m] * mag(u1[m]) + params.sigma * h1[m] * dyyk(h1[m])) / Qs)
        r5 = dxk(h1[m]) + dyk(h2[m])
        for i, r in enumerate((r1, r2, r3, r4, r5)):
            res[i, k_] = _l2(r, w)
        times[k_] = phys_series[m].time
    return times, res


def convergence_order(hs, errors) -> float:
    """Least-squares slope of log(error) against log(h)."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= 0):
        return float("inf")
    A = np.vstack([np.log(hs), np.ones_like(hs)]).T
    slope, _ = np.linalg.lstsq(A, np.log(errors), rcond=None)[0]
    return float(slope)
