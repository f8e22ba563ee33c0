"""Full solver pipeline: outflow trace, Picard solve in stream coordinates,
inverse transform back to physical variables, residual oracle, certificate.

The evolution happens entirely on the transformed grid; physical output is
an export step.  The physical tensor grid is chosen once per run as the
largest uniform grid that stays inside the image of the inverse stream map
across every stored level and column.
"""

from __future__ import annotations

import os
import time as _time

import numpy as np

from .certificate import RunCertificate
from .config import RunSetup, canonical_config_lines
from .core import (Field, Grid, PhysicalState, TransformedState,
                   density_pressure, make_cutoff)
from .diagnostics import (energy_functional, gronwall_envelope, norm_suite,
                          original_system_residual)
from .exceptions import AdmissibilityError
from .outflow import TraceSeries, bernoulli_residual, solve_bernoulli
from .picard import PicardResult, SolverConfig, run_picard, run_window_ladder
from .snapshots import (write_physical_snapshot, write_trace_series,
                        write_transformed_snapshot)
from .transform import inverse_y_of_psi, recover_secondary
from .linstep import freeze_coefficients

__all__ = ["RunResult", "run_pipeline", "build_initial_state", "export_physical"]


class RunResult:
    def __init__(self):
        self.trace = None
        self.picard = None
        self.physical = None
        self.phys_grid = None
        self.residual_times = None
        self.residuals = None
        self.norms = None
        self.gronwall = None
        self.certificate = RunCertificate()
        self.window_used = None


def build_initial_state(setup: RunSetup, cutoff, trace: TraceSeries) -> TransformedState:
    """Homogenized initial data; enforces the 2-delta initial band."""
    u10, w10, q10 = setup.initial_profiles()
    d = setup.params.delta
    P0 = trace.P[0][:, None]
    if np.any(q10 < 2 * d) or np.any(q10 > P0 - 2 * d):
        raise AdmissibilityError(
            "initial data violate the 2-delta band 2d <= q1(0) <= P(0) - 2d")
    phi = cutoff.phi[None, :]
    R0 = (0.5 * trace.H[0] ** 2)[:, None]
    u = u10 - trace.U[0][:, None] * phi
    w = w10 - trace.I[0][:, None] * phi
    q = q10 - R0 * phi
    g = setup.grid
    return TransformedState(Field(g, u), Field(g, w), Field(g, q), 0.0)


def export_physical(setup: RunSetup, cutoff, trace: TraceSeries,
                    picard: PicardResult, margin: float = 0.995):
    """Inverse-transform the converged series to one physical tensor grid."""
    params = setup.params
    grid = setup.grid
    phi = cutoff.phi[None, :]
    nt = len(picard.series)

    hats = []
    y_tops = []
    for m in range(nt):
        st = picard.series[m]
        R = (0.5 * trace.H[m] ** 2)[:, None]
        q1 = st.q.values + R * phi
        h1_hat = np.sqrt(2.0 * q1)
        u1_hat = st.u.values + trace.U[m][:, None] * phi
        w1_hat = st.w.values + trace.I[m][:, None] * phi
        y_of, _ = inverse_y_of_psi(Field(grid, h1_hat), params.delta)
        hats.append((u1_hat, w1_hat, h1_hat, y_of))
        y_tops.append(np.min(y_of[:, -1]))

    y_phys_max = margin * min(y_tops)
    phys_grid = Grid(nx=grid.nx, ny=grid.ny, y_max=float(y_phys_max))
    y_phys = phys_grid.y_nodes

    from scipy.interpolate import PchipInterpolator
    ybar = grid.y_nodes
    psi_series = np.empty((nt, grid.nx, phys_grid.ny))
    u1_series = np.empty_like(psi_series)
    w1_series = np.empty_like(psi_series)
    h1_series = np.empty_like(psi_series)
    for m in range(nt):
        u1_hat, w1_hat, h1_hat, y_of = hats[m]
        for i in range(grid.nx):
            psi_col = PchipInterpolator(y_of[i], ybar)(y_phys)
            psi_col[0] = 0.0
            psi_series[m, i] = psi_col
            u1_series[m, i] = PchipInterpolator(ybar, u1_hat[i])(psi_col)
            w1_series[m, i] = PchipInterpolator(ybar, w1_hat[i])(psi_col)
            h1_series[m, i] = PchipInterpolator(ybar, h1_hat[i])(psi_col)

    u2_series, h2_series = recover_secondary(phys_grid, psi_series,
                                             picard.times, u1_series,
                                             h1_series, params)
    states = []
    for m in range(nt):
        q1 = 0.5 * h1_series[m] ** 2
        rho, p = density_pressure(q1, trace.P[m][:, None], params)
        g = phys_grid
        states.append(PhysicalState(
            u1=Field(g, u1_series[m]), u2=Field(g, u2_series[m]),
            w1=Field(g, w1_series[m]), h1=Field(g, h1_series[m]),
            h2=Field(g, h2_series[m]), psi=Field(g, psi_series[m]),
            rho=Field(g, rho), p=Field(g, p), time=float(picard.times[m])))
    return phys_grid, states


def run_pipeline(setup: RunSetup, outdir: str | None = None,
                 write_outputs: bool = True) -> RunResult:
    res = RunResult()
    cert = res.certificate
    params = setup.params
    grid = setup.grid
    t0 = _time.perf_counter()

    for line in canonical_config_lines(setup):
        key, _, val = line.partition(" = ")
        cert.set("config", key, val)

    cutoff = make_cutoff(grid)
    U0, I0, H0 = setup.initial_outflow()
    trace = solve_bernoulli(setup.pressure, U0, I0, H0, params,
                            t_end=setup.solver.t_window, dt=setup.solver.dt,
                            x_nodes=grid.x_nodes,
                            filter_coef=setup.filter_coef,
                            cfl_safety=setup.solver.cfl_safety)
    res.trace = trace
    t_trace = _time.perf_counter()

    # prescribed-pressure floor: P >= 4 delta + sup H^2/2 over the window
    p_floor = 4.0 * params.delta + float(np.max(0.5 * trace.H**2))
    cert.set("margins", "pressure_floor_required", p_floor)
    cert.set("margins", "pressure_min", float(np.min(trace.P)))
    cert.add_check("pressure_floor", bool(np.min(trace.P) >= p_floor))

    _, bres = bernoulli_residual(trace, params)
    cert.set("residuals", "bernoulli_max", float(np.max(bres)))

    initial = build_initial_state(setup, cutoff, trace)

    if setup.auto_window:
        rungs = run_window_ladder(setup.solver, trace, initial, cutoff, params)
        res.window_used = rungs[-1][0]
        for k, (T, rep) in enumerate(rungs):
            cert.set("contraction", f"ladder_{k}_window", float(T))
            cert.set("contraction", f"ladder_{k}_max_ratio",
                     float(rep.max_ratio()) if rep.ratios else float("nan"))
        solver = SolverConfig(
            t_window=res.window_used, dt=setup.solver.dt,
            picard_tol=setup.solver.picard_tol,
            picard_max_iters=setup.solver.picard_max_iters,
            taylor_order=setup.solver.taylor_order,
            k_order=setup.solver.k_order, cfl_safety=setup.solver.cfl_safety,
            integrator=setup.solver.integrator,
            snapshot_every=setup.solver.snapshot_every)
    else:
        solver = setup.solver
        res.window_used = solver.t_window

    picard = run_picard(solver, trace, initial, cutoff, params)
    res.picard = picard
    t_picard = _time.perf_counter()

    rep = picard.report
    cert.set("contraction", "iterations", rep.iterations)
    cert.set("contraction", "converged", rep.converged)
    cert.set("contraction", "diff_norms", list(rep.diff_norms))
    cert.set("contraction", "ratios", list(rep.ratios))
    cert.set("contraction", "margins_low_per_iteration", list(rep.margins_low))
    cert.set("contraction", "margins_high_per_iteration", list(rep.margins_high))
    cert.add_check("picard_converged", rep.converged)
    cert.add_check("contraction_ratios_below_one",
                   all(r < 1.0 for r in rep.ratios))
    cert.set("margins", "q1_minus_delta_min", picard.bounds.margin_low)
    cert.set("margins", "P_minus_delta_minus_q1_min", picard.bounds.margin_high)
    cert.add_check("band_margins_positive",
                   picard.bounds.margin_low > 0 and picard.bounds.margin_high > 0)

    # norms and envelope on the homogenized series with per-level symmetrizer
    nlev = len(picard.series)
    v_series = np.stack([picard.series[m].as_array() for m in range(nlev)])
    S_series = np.empty_like(v_series)
    for m in range(nlev):
        fc = freeze_coefficients(picard.series[m], trace.level(m, params),
                                 cutoff, params)
        S_series[m] = fc.bundle.S_diag
    suite = norm_suite(picard.times, v_series, S_series, grid,
                       k=solver.k_order)
    res.norms = suite
    fit = gronwall_envelope(picard.times, suite.energy, suite.dissipation)
    res.gronwall = fit
    cert.set("norms", "hk_order", suite.k)
    cert.set("norms", "l2_series", list(suite.l2))
    cert.set("norms", "hk_series", list(suite.hk))
    cert.set("norms", "energy_series", list(suite.energy))
    cert.set("norms", "dissipation_series", list(suite.dissipation))
    cert.set("norms", "reduced_order_levels",
             [float(i) for i in np.flatnonzero(suite.reduced_order_mask)])
    cert.set("gronwall", "C", fit.C)
    cert.set("gronwall", "growth_ratio", fit.growth_ratio)
    cert.add_check("gronwall_envelope", fit.passed)
    lam_min = float(np.min(S_series))
    cert.set("gronwall", "min_S_diag", lam_min)
    cert.add_check("energy_coercive",
                   bool(np.all(suite.energy >= lam_min * suite.hk**2
                               * (1 - 1e-10))))

    phys_grid, states = export_physical(setup, cutoff, trace, picard)
    res.phys_grid = phys_grid
    res.physical = states
    rt, rr = original_system_residual(states, trace, params, phys_grid)
    res.residual_times = rt
    res.residuals = rr
    for i, name in enumerate(("u1_momentum", "w1_equation", "h1_induction",
                              "velocity_divergence", "magnetic_divergence")):
        cert.set("residuals", f"physical_{name}_max", float(np.max(rr[i])))
    t_phys = _time.perf_counter()

    cert.set("timings", "trace_seconds", t_trace - t0)
    cert.set("timings", "picard_seconds", t_picard - t_trace)
    cert.set("timings", "export_seconds", t_phys - t_picard)

    if write_outputs:
        outdir = outdir or os.environ.get("MMBL_OUTDIR", setup.outdir)
        os.makedirs(outdir, exist_ok=True)
        write_trace_series(trace, os.path.join(outdir, "trace_series.txt"))
        write_transformed_snapshot(picard.series[-1],
                                   os.path.join(outdir, "final_transformed.txt"))
        write_physical_snapshot(states[-1],
                                os.path.join(outdir, "final_physical.txt"))
        cert.write(os.path.join(outdir, "certificate.txt"))
    return res
