"""Picard iteration over the linear problem with lagged coefficients.

Each iterate marches the linear system over the whole window with every
coefficient frozen at the previous iterate, level by level.  The zeroth
iterate is a short Taylor polynomial built from compatibility data: the
initial state and its time derivatives obtained by evaluating the equation
(and, for the second derivative, differencing it) at t = 0.

The iteration is declared converged when the sup-over-time discrete L2 norm
of consecutive differences drops below ``picard_tol``; it is declared
divergent when the contraction ratio sits at or above one for three
consecutive iterations, which advises a smaller time window.  The outer
loop is inherently sequential; the per-step column solves inherit the
linear step's data parallelism.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field

import numpy as np

from .core import CutoffProfile, Grid, PhysicalParams, TransformedState
from .exceptions import AdmissibilityError, ConfigurationError, NonContractionError
from .linstep import FrozenCoefficients, SecondOrderMarcher, explicit_terms, \
    freeze_coefficients, step
from .outflow import TraceSeries
from . import fd

__all__ = [
    "SolverConfig",
    "IterationReport",
    "BoundsReport",
    "PicardResult",
    "compatibility_data",
    "zeroth_iterate",
    "run_picard",
    "check_bounds",
    "run_window_ladder",
]


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the Picard driver and its diagnostics."""

    t_window: float
    dt: float
    picard_tol: float = 1e-8
    picard_max_iters: int = 25
    taylor_order: int = 1
    k_order: int = 4
    cfl_safety: float = 0.8
    integrator: str = "first"
    snapshot_every: int = 1

    def __post_init__(self):
        if self.t_window <= 0 or self.dt <= 0:
            raise ConfigurationError("t_window and dt must be positive")
        if self.picard_tol <= 0:
            raise ConfigurationError("picard_tol must be positive")
        if not (0 <= self.taylor_order <= 2):
            raise ConfigurationError("taylor_order must be 0, 1 or 2")
        if self.integrator not in ("first", "second"):
            raise ConfigurationError("integrator must be 'first' or 'second'")
        n = self.t_window / self.dt
        if abs(n - round(n)) > 1e-9:
            raise ConfigurationError("t_window must be an integer multiple of dt")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_window / self.dt))


@dataclass
class IterationReport:
    """Per-iteration diffs, ratios and band margins of a Picard run."""

    diff_norms: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    margins_low: list = field(default_factory=list)
    margins_high: list = field(default_factory=list)
    wall_times: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0

    def max_ratio(self, from_n: int = 2) -> float:
        """Largest contraction ratio over iterations n >= from_n (1-based)."""
        rs = [r for n, r in enumerate(self.ratios, start=2) if n >= from_n]
        return max(rs) if rs else float("nan")


@dataclass(frozen=True)
class BoundsReport:
    """Minimum band margins over a run and the first violation, if any."""

    margin_low: float
    margin_high: float
    violation: tuple | None  # (level, ix, iy) of the first offending node


@dataclass
class PicardResult:
    times: np.ndarray
    series: list  # TransformedState per stored level
    report: IterationReport
    bounds: BoundsReport


def _l2_norm(arr: np.ndarray, weights: np.ndarray) -> float:
    return float(np.sqrt(np.sum(arr**2 * weights[None, :, :])))


def _pde_time_derivative(state: TransformedState, coeffs: FrozenCoefficients) -> np.ndarray:
    """Pointwise dv/dt = S^-1 (g - A Dx v - F Dy v1 + B Dyy v) with BC rows zeroed.

    The diffusion uses the scheme's own boundary-aware stencil (mirror row
    for q at the wall) so compatibility data match what the march does.
    """
    from .linstep import _dyy_with_bc
    grid = state.grid
    v = state.as_array()
    E = explicit_terms(v, coeffs)
    dyy = _dyy_with_bc(v, grid)
    dv = (-E + coeffs.bundle.B_diag * dyy) / coeffs.bundle.S_diag
    dv[0, :, 0] = 0.0
    dv[1, :, 0] = 0.0
    dv[:, :, -1] = 0.0
    return dv


def compatibility_data(initial: TransformedState, trace: TraceSeries,
                       cutoff: CutoffProfile, params: PhysicalParams,
                       taylor_order: int) -> list:
    """Initial time-derivative data v0^j, j = 0..taylor_order.

    v0^1 evaluates the equation at t = 0; v0^2 differences the equation's
    time derivative across one explicit micro-step.  Orders above 2 are
    unsupported.
    """
    if taylor_order > 2:
        raise ConfigurationError("taylor_order above 2 is unsupported")
    out = [initial.as_array()]
    if taylor_order == 0:
        return out
    lvl0 = trace.level(0, params)
    coeffs0 = freeze_coefficients(initial, lvl0, cutoff, params)
    v1 = _pde_time_derivative(initial, coeffs0)
    out.append(v1)
    if taylor_order == 2:
        dt = float(trace.times[1] - trace.times[0])
        stepped = TransformedState.from_array(
            initial.grid, initial.as_array() + dt * v1, dt)
        lvl1 = trace.level(1, params)
        coeffs1 = freeze_coefficients(stepped, lvl1, cutoff, params)
        v1_at_dt = _pde_time_derivative(stepped, coeffs1)
        out.append((v1_at_dt - v1) / dt)
    return out


def zeroth_iterate(v0j: list, t: float, grid: Grid) -> TransformedState:
    """Taylor polynomial sum_j t^j / j! v0^j of the configured order."""
    acc = np.zeros_like(v0j[0])
    fact = 1.0
    for j, vj in enumerate(v0j):
        if j > 0:
            fact *= j
        acc = acc + (t**j / fact) * vj
    return TransformedState.from_array(grid, acc, t)


def check_bounds(series, trace: TraceSeries, cutoff: CutoffProfile,
                 delta: float) -> BoundsReport:
    """Margins min(q1 - delta) and min(P - delta - q1) over stored levels."""
    phi = cutoff.phi[None, :]
    best_lo = np.inf
    best_hi = np.inf
    violation = None
    for m, state in enumerate(series):
        R = 0.5 * trace.H[m] ** 2
        q1 = state.q.values + R[:, None] * phi
        lo = q1 - delta
        hi = trace.P[m][:, None] - delta - q1
        worst = np.minimum(lo, hi)
        idx = np.unravel_index(int(np.argmin(worst)), worst.shape)
        best_lo = min(best_lo, float(np.min(lo)))
        best_hi = min(best_hi, float(np.min(hi)))
        if violation is None and worst[idx] < 0:
            violation = (m, int(idx[0]), int(idx[1]))
    return BoundsReport(margin_low=best_lo, margin_high=best_hi,
                        violation=violation)


def _march(initial: TransformedState, prev_series: list, trace_levels: list,
           cutoff: CutoffProfile, params: PhysicalParams, cfg: SolverConfig,
           iteration: int) -> list:
    """One Picard sweep: solve the linear problem over the whole window."""
    n = cfg.n_steps
    series = [initial]
    frozen = [None] * (n + 1)

    def coeffs_at(m):
        if frozen[m] is None:
            try:
                frozen[m] = freeze_coefficients(prev_series[m], trace_levels[m],
                                                cutoff, params)
            except AdmissibilityError as err:
                err.iteration = iteration
                raise
        return frozen[m]

    if cfg.integrator == "second":
        marcher = SecondOrderMarcher(cfl_safety=cfg.cfl_safety)
        v = initial
        for m in range(n):
            v = marcher.advance(v, coeffs_at(m), coeffs_at(m + 1), cfg.dt)
            series.append(v)
    else:
        v = initial
        for m in range(n):
            v = step(v, coeffs_at(m), cfg.dt, cfl_safety=cfg.cfl_safety)
            series.append(v)
    return series


def run_picard(cfg: SolverConfig, trace: TraceSeries, initial: TransformedState,
               cutoff: CutoffProfile, params: PhysicalParams) -> PicardResult:
    """Iterate linear solves until the sup-in-time L2 difference contracts away.

    The stored trace must cover the window at the solver's dt.  The zeroth
    iterate is the Taylor guess; its band admissibility is required before
    any marching starts.
    """
    n = cfg.n_steps
    times = np.arange(n + 1) * cfg.dt
    if trace.nt < n + 1 or not np.allclose(trace.times[:n + 1], times, atol=1e-12):
        raise ConfigurationError("trace series does not cover the Picard window "
                                 "at the solver dt")
    grid = initial.grid
    weights = grid.quad_weights()
    trace_levels = [trace.level(m, params) for m in range(n + 1)]

    v0j = compatibility_data(initial, trace, cutoff, params, cfg.taylor_order)
    prev_series = [zeroth_iterate(v0j, t, grid) for t in times]
    zb = check_bounds(prev_series, trace, cutoff, params.delta)
    if zb.violation is not None:
        m, ix, iy = zb.violation
        raise AdmissibilityError(
            f"zeroth iterate leaves the band at level {m}, node ({ix}, {iy}); "
            "reduce the window or the Taylor order", time=times[m], ix=ix, iy=iy,
            iteration=0)

    report = IterationReport()
    bad_streak = 0
    prev_diff = None
    series = prev_series
    for it in range(1, cfg.picard_max_iters + 1):
        t0 = _time.perf_counter()
        series = _march(initial, prev_series, trace_levels, cutoff, params,
                        cfg, it)
        diff = max(_l2_norm(series[m].as_array() - prev_series[m].as_array(),
                            weights) for m in range(n + 1))
        bounds = check_bounds(series, trace, cutoff, params.delta)
        report.diff_norms.append(diff)
        report.margins_low.append(bounds.margin_low)
        report.margins_high.append(bounds.margin_high)
        report.wall_times.append(_time.perf_counter() - t0)
        report.iterations = it
        if prev_diff is not None and prev_diff > 0:
            ratio = diff / prev_diff
            report.ratios.append(ratio)
            bad_streak = bad_streak + 1 if ratio >= 1.0 else 0
            if bad_streak >= 3:
                raise NonContractionError(
                    f"no contraction for 3 consecutive iterations "
                    f"(last ratio {ratio:.3f}); reduce t_window={cfg.t_window:g}")
        prev_series = series
        prev_diff = diff
        if diff <= cfg.picard_tol:
            report.converged = True
            break

    bounds = check_bounds(series, trace, cutoff, params.delta)
    return PicardResult(times=times, series=series, report=report, bounds=bounds)


def run_window_ladder(cfg: SolverConfig, trace: TraceSeries,
                      initial: TransformedState, cutoff: CutoffProfile,
                      params: PhysicalParams, windows=None,
                      target: float = 0.5, floor: float = 1e-3):
    """Measure contraction over a ladder of halved windows.

    ``windows=None`` halves cfg.t_window until the max ratio over n >= 2
    meets ``target`` or the window falls below ``floor``; an explicit list
    runs every rung.  Returns a list of (window, IterationReport).
    """
    results = []
    if windows is None:
        T = cfg.t_window
        while True:
            sub = SolverConfig(t_window=T, dt=cfg.dt, picard_tol=cfg.picard_tol,
                               picard_max_iters=cfg.picard_max_iters,
                               taylor_order=cfg.taylor_order, k_order=cfg.k_order,
                               cfl_safety=cfg.cfl_safety, integrator=cfg.integrator,
                               snapshot_every=cfg.snapshot_every)
            res = run_picard(sub, trace, initial, cutoff, params)
            results.append((T, res.report))
            mr = res.report.max_ratio()
            if (np.isfinite(mr) and mr <= target) or T / 2 < max(floor, 2 * cfg.dt):
                break
            T = T / 2
        return results
    for T in windows:
        sub = SolverConfig(t_window=T, dt=cfg.dt, picard_tol=cfg.picard_tol,
                           picard_max_iters=cfg.picard_max_iters,
                           taylor_order=cfg.taylor_order, k_order=cfg.k_order,
                           cfl_safety=cfg.cfl_safety, integrator=cfg.integrator,
                           snapshot_every=cfg.snapshot_every)
        res = run_picard(sub, trace, initial, cutoff, params)
        results.append((T, res.report))
    return results
