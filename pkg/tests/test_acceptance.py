"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Everything runs at desk scale on the shipped canonical configuration; the
heavyweight canonical artifacts (converged run, window ladder) are computed
once per session and shared.
"""

import os

import numpy as np
import pytest

from mmbl.config import parse_config
from mmbl.core import Field, Grid, PhysicalParams, make_cutoff
from mmbl.diagnostics import convergence_order, gronwall_envelope, sobolev_ratio
from mmbl.outflow import PressureSpec, solve_bernoulli
from mmbl.picard import run_picard, run_window_ladder
from mmbl.pipeline import build_initial_state, run_pipeline
from mmbl.transform import divergence_residual, stream_forward
from mmbl.verification import (invariant_suite, mms_space_study,
                               mms_time_study, transform_roundtrip_study)

CONFIG_PATH = os.path.join(os.path.dirname(__file__), "..", "configs",
                           "canonical.cfg")


def _report(n, passed, detail):
    print(f"\nACCEPTANCE {n}: {'PASS' if passed else 'FAIL'} - {detail}")
    assert passed, f"criterion {n}: {detail}"


@pytest.fixture(scope="session")
def canonical_pipeline():
    setup = parse_config(CONFIG_PATH)
    return setup, run_pipeline(setup, write_outputs=False)


@pytest.fixture(scope="session")
def canonical_ladder():
    setup = parse_config(CONFIG_PATH)
    cutoff = make_cutoff(setup.grid)
    U0, I0, H0 = setup.initial_outflow()
    trace = solve_bernoulli(setup.pressure, U0, I0, H0, setup.params,
                            t_end=setup.solver.t_window, dt=setup.solver.dt,
                            x_nodes=setup.grid.x_nodes,
                            filter_coef=setup.filter_coef)
    initial = build_initial_state(setup, cutoff, trace)
    T = setup.solver.t_window
    windows = [T, T / 2, T / 4, T / 8]
    rungs = run_window_ladder(setup.solver, trace, initial, cutoff,
                              setup.params, windows=windows)
    return windows, rungs


def test_criterion_1_algebraic_identities():
    params = parse_config(CONFIG_PATH).params
    result = invariant_suite(params, samples=10_000, seed=7)
    ok = (result["max_rel_err_SA0_vs_A"] <= 1e-12
          and result["max_rel_err_SB0_vs_B"] <= 1e-12
          and result["symmetry_defect"] == 0.0
          and result["min_eig_S"] >= result["min_eig_S_bound"] - 1e-15
          and result["min_eig_B"] >= result["min_eig_B_bound"] - 1e-15)
    _report(1, ok,
            f"|SA0-A| {result['max_rel_err_SA0_vs_A']:.2e}, "
            f"|SB0-B| {result['max_rel_err_SB0_vs_B']:.2e}, "
            f"sym {result['symmetry_defect']:.1e}, "
            f"eig floors S {result['min_eig_S']:.3e}>="
            f"{result['min_eig_S_bound']:.3e}, "
            f"B {result['min_eig_B']:.3e}>={result['min_eig_B_bound']:.3e}")


def test_criterion_2_bernoulli_trivial_states():
    params = parse_config(CONFIG_PATH).params
    x = np.arange(32) * 2 * np.pi / 32
    pspec = PressureSpec(family="constant", p0=1.0)
    series = solve_bernoulli(pspec, np.zeros_like(x), 0.1 * np.ones_like(x),
                             np.ones_like(x), params, t_end=100 * 2e-3,
                             dt=2e-3, x_nodes=x)
    drift = max(float(np.max(np.abs(series.U))),
                float(np.max(np.abs(series.I - 0.1))),
                float(np.max(np.abs(series.H - 1.0))))
    U0, t_end = 0.5, 0.5
    errs, hs = [], []
    for nx in (32, 64, 128):
        xg = np.arange(nx) * 2 * np.pi / nx
        dt = t_end / int(round(t_end / (0.25 * (xg[1] - xg[0]))))
        s = solve_bernoulli(pspec, U0 * np.ones_like(xg), np.sin(xg),
                            np.ones_like(xg), params, t_end=t_end, dt=dt,
                            x_nodes=xg)
        errs.append(np.sqrt(np.mean((s.I[-1] - np.sin(xg - U0 * t_end)) ** 2)))
        hs.append(xg[1] - xg[0])
    order = convergence_order(hs, errs)
    ok = drift <= 1e-10 and order >= 1.8
    _report(2, ok, f"constant-state drift {drift:.2e} (<=1e-10), "
                   f"I-translation order {order:.2f} (>=1.8)")


def test_criterion_3_transform_roundtrip():
    r = transform_roundtrip_study(levels=3)
    g = Grid(nx=8, ny=65, y_max=6.0)
    c = 1.4
    h1 = Field(g, np.full((g.nx, g.ny), c))
    psi = stream_forward(h1, delta=0.1)
    exact = float(np.max(np.abs(psi.values - c * g.y_nodes[None, :])))
    ok = abs(r.order - 2.0) <= 0.2 and exact <= 1e-13
    _report(3, ok, f"roundtrip order {r.order:.2f} (2 +- 0.2), "
                   f"constant-h1 error {exact:.1e} (<=1e-13)")


def test_criterion_4_divergence_free():
    g = Grid(nx=32, ny=65, y_max=6.0)
    X, Y = g.mesh()
    psi = np.sin(X) * (1 - np.exp(-Y)) + Y + 0.1 * np.cos(2 * X) * Y**2 / (1 + Y)
    commuting = divergence_residual(g, psi)
    errs, hs = [], []
    for ny in (33, 65, 129):
        gr = Grid(nx=2 * (ny - 1), ny=ny, y_max=6.0)
        Xr, Yr = gr.mesh()
        h1 = 1.0 + 0.3 * np.sin(Xr) * np.exp(-Yr)
        ps = stream_forward(Field(gr, h1), delta=0.1)
        errs.append(divergence_residual(gr, ps.values, h1=h1))
        hs.append(gr.dy)
    order = convergence_order(hs, errs)
    ok = commuting <= 1e-12 and order >= 1.8
    _report(4, ok, f"commuting residual {commuting:.2e} (<=1e-12), "
                   f"mixed-route order {order:.2f} (>=1.8)")


def test_criterion_5_mms_linear_step():
    params = parse_config(CONFIG_PATH).params
    space = mms_space_study(params, levels=3)
    t1 = mms_time_study(params, levels=3, integrator="first")
    t2 = mms_time_study(params, levels=3, integrator="second")
    ok = space.order >= 1.8 and t1.order >= 0.9 and t2.order >= 1.8
    _report(5, ok, f"space order {space.order:.2f} (>=1.8), "
                   f"time orders {t1.order:.2f} (>=0.9 first) / "
                   f"{t2.order:.2f} (>=1.8 second)")


def test_criterion_6_picard_contraction(canonical_ladder):
    windows, rungs = canonical_ladder
    maxima = [rep.max_ratio() for _, rep in rungs]
    all_ratios = [r for _, rep in rungs for r in rep.ratios]
    some_below_half = any(np.isfinite(m) and m <= 0.5 for m in maxima)
    below_one = all(r < 1.0 for r in all_ratios)
    finite = [m for m in maxima if np.isfinite(m)]
    monotone = all(b <= a + 0.05 for a, b in zip(finite, finite[1:]))
    ok = some_below_half and below_one and monotone
    _report(6, ok,
            "ladder max ratios "
            + ", ".join(f"T={w:g}: {m:.4f}" for w, m in zip(windows, maxima))
            + f"; some<=0.5 {some_below_half}, all<1 {below_one}, "
              f"nonincreasing(0.05) {monotone}")


def test_criterion_7_bound_preservation(canonical_pipeline):
    _, res = canonical_pipeline
    b = res.picard.bounds
    ok = (res.picard.report.converged and b.margin_low > 0
          and b.margin_high > 0 and b.violation is None)
    _report(7, ok, f"margins min(q1-delta)={b.margin_low:.4f}, "
                   f"min(P-delta-q1)={b.margin_high:.4f}, both > 0")


def test_criterion_8_original_system_residuals():
    base = parse_config(CONFIG_PATH)
    from mmbl.config import parse_config_text
    tmpl = """
[physics]
a = 1.0
gamma = 2.0
mu = 0.1
mu_prime = 0.1
zeta = 0.05
sigma = 0.1
delta = 0.1

[grid]
nx = {nx}
ny = {ny}
ybar_max = 16.0

[pressure]
family = constant
p0 = 2.0

[solver]
t_window = 0.1
dt = {dt}
picard_tol = 1e-9
"""
    hs, table = [], []
    for nx, ny, dt in ((12, 41, 5e-3), (24, 81, 2.5e-3), (48, 161, 1.25e-3)):
        setup = parse_config_text(tmpl.format(nx=nx, ny=ny, dt=dt))
        res = run_pipeline(setup, write_outputs=False)
        table.append([float(np.max(res.residuals[i])) for i in range(5)])
        hs.append(setup.grid.dy)
    table = np.array(table)
    orders = [convergence_order(hs, table[:, i]) for i in range(5)]
    ok = all(o >= 0.9 for o in orders)
    names = ("u1_momentum", "w1", "h1_induction", "u_divergence", "h_divergence")
    _report(8, ok, "orders " + ", ".join(f"{n}={o:.2f}" for n, o in
                                         zip(names, orders)) + " (all >= 0.9)")


def test_criterion_9_energy_envelope(canonical_pipeline):
    _, res = canonical_pipeline
    fit = res.gronwall
    ok = np.isfinite(fit.C) and fit.growth_ratio <= 10.0 and fit.passed
    _report(9, ok, f"fitted C={fit.C:.3f} finite, "
                   f"E(T)/E(0)={fit.growth_ratio:.3f} (<=10)")


def test_criterion_10_sobolev_ratio():
    g = Grid(nx=32, ny=65, y_max=10.0)
    X, Y = g.mesh()
    f = np.cos(2 * X) * np.exp(-1.3 * Y) + 0.2 * np.sin(X) * np.exp(-0.7 * Y)
    r0 = sobolev_ratio(f, g)
    inv = max(abs(sobolev_ratio(a * f, g) - r0) / r0
              for a in (1e-6, 0.37, 4096.0))
    maxima = []
    for nx, ny in ((32, 65), (64, 129)):
        gr = Grid(nx=nx, ny=ny, y_max=12.0)
        Xr, Yr = gr.mesh()
        gen = np.random.default_rng(42)
        ratios = []
        for _ in range(100):
            fam = np.zeros((gr.nx, gr.ny))
            for m in range(4):
                fam += (gen.normal() * np.cos(m * Xr + gen.uniform(0, 2 * np.pi))
                        * np.exp(-gen.uniform(0.5, 2.0) * Yr))
            ratios.append(sobolev_ratio(fam, gr))
        maxima.append(max(ratios))
    stable = abs(maxima[1] - maxima[0]) <= 0.05 * maxima[0]
    bounded = maxima[0] <= 1.0 and maxima[1] <= 1.0
    ok = inv <= 1e-12 and bounded and stable
    _report(10, ok, f"scaling invariance {inv:.1e} (<=1e-12), family max "
                    f"{maxima[0]:.3f}/{maxima[1]:.3f} bounded and stable")
