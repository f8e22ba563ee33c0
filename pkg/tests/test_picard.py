import numpy as np
import pytest

from mmbl.core import Field, TransformedState, make_cutoff, Grid
from mmbl.exceptions import ConfigurationError, NonContractionError
from mmbl.outflow import constant_trace_series
from mmbl.picard import (SolverConfig, check_bounds, compatibility_data,
                         run_picard, run_window_ladder, zeroth_iterate)
from conftest import canonical_setup


def steady_setup(nx=16, ny=49, y_max=20.0, t_end=0.05, dt=2.5e-3):
    from mmbl.core import PhysicalParams
    params = PhysicalParams(a=1.0, gamma=2.0, mu=0.1, mu_prime=0.1,
                            zeta=0.05, sigma=0.1, delta=0.1)
    grid = Grid(nx=nx, ny=ny, y_max=y_max)
    cutoff = make_cutoff(grid)
    n = int(round(t_end / dt))
    times = np.arange(n + 1) * dt
    trace = constant_trace_series(times, grid.x_nodes, U0=0.0, I0=0.0,
                                  H0=1.0, P0=2.0)
    z = np.zeros((grid.nx, grid.ny))
    qstar = 0.5 * (1.0 - cutoff.phi)[None, :] * np.ones((grid.nx, 1))
    initial = TransformedState(Field(grid, z), Field(grid, z),
                               Field(grid, qstar), 0.0)
    return params, grid, cutoff, trace, initial


def test_config_validation():
    with pytest.raises(ConfigurationError):
        SolverConfig(t_window=0.1, dt=0.03)  # not an integer multiple
    with pytest.raises(ConfigurationError):
        SolverConfig(t_window=0.1, dt=0.01, taylor_order=3)
    cfg = SolverConfig(t_window=0.1, dt=0.01)
    assert cfg.n_steps == 10


def test_compatibility_steady_state_time_derivative_vanishes():
    params, grid, cutoff, trace, initial = steady_setup()
    v0j = compatibility_data(initial, trace, cutoff, params, taylor_order=2)
    assert np.max(np.abs(v0j[1])) <= 1e-11
    assert np.max(np.abs(v0j[2])) <= 1e-8


def test_compatibility_matches_explicit_micro_steps():
    params, grid, cutoff, trace, initial = canonical_setup(t_end=0.02)
    v0j = compatibility_data(initial, trace, cutoff, params, taylor_order=1)
    # oracle: two explicit micro-steps, centered difference at t = dt
    from mmbl.picard import _pde_time_derivative
    from mmbl.linstep import freeze_coefficients
    dt = 2.5e-3
    c0 = freeze_coefficients(initial, trace.level(0, params), cutoff, params)
    d0 = _pde_time_derivative(initial, c0)
    s1 = TransformedState.from_array(grid, initial.as_array() + dt * d0, dt)
    c1 = freeze_coefficients(s1, trace.level(1, params), cutoff, params)
    d1 = _pde_time_derivative(s1, c1)
    s2 = TransformedState.from_array(grid, s1.as_array() + dt * d1, 2 * dt)
    centered = (s2.as_array() - initial.as_array()) / (2 * dt)
    scale = max(1.0, np.max(np.abs(centered)))
    assert np.max(np.abs(v0j[1] - centered)) <= 5.0 * dt * scale


def test_zeroth_iterate_polynomial_identity():
    params, grid, cutoff, trace, initial = canonical_setup(t_end=0.02)
    v0j = compatibility_data(initial, trace, cutoff, params, taylor_order=1)
    s0 = zeroth_iterate(v0j, 0.0, grid)
    assert np.array_equal(s0.as_array(), v0j[0])
    dt = 0.01
    s1 = zeroth_iterate(v0j, dt, grid)
    slope = (s1.as_array() - s0.as_array()) / dt
    assert np.allclose(slope, v0j[1], rtol=0, atol=1e-12)
    # order 0: constant in time
    s_const = zeroth_iterate(v0j[:1], 0.7, grid)
    assert np.array_equal(s_const.as_array(), v0j[0])


def test_fixed_point_converges_in_one_iteration():
    params, grid, cutoff, trace, initial = steady_setup()
    cfg = SolverConfig(t_window=0.05, dt=2.5e-3, picard_tol=1e-12)
    res = run_picard(cfg, trace, initial, cutoff, params)
    assert res.report.converged
    assert res.report.iterations == 1
    assert res.report.diff_norms[0] <= 1e-12
    drift = np.max(np.abs(res.series[-1].as_array() - initial.as_array()))
    assert drift <= 1e-12


def test_canonical_run_contracts_and_keeps_bounds():
    params, grid, cutoff, trace, initial = canonical_setup()
    cfg = SolverConfig(t_window=0.2, dt=2.5e-3, picard_tol=1e-8,
                       picard_max_iters=30)
    res = run_picard(cfg, trace, initial, cutoff, params)
    assert res.report.converged
    assert all(r < 1.0 for r in res.report.ratios)
    assert res.bounds.margin_low > 0
    assert res.bounds.margin_high > 0
    assert res.bounds.violation is None


def test_rerun_with_tighter_tolerance_is_consistent():
    params, grid, cutoff, trace, initial = canonical_setup(nx=16, ny=33, ybar_max=12.0,
                                                           t_end=0.1)
    grid_w = grid.quad_weights()
    cfg = SolverConfig(t_window=0.1, dt=2.5e-3, picard_tol=1e-8,
                       picard_max_iters=30)
    res = run_picard(cfg, trace, initial, cutoff, params)
    cfg10 = SolverConfig(t_window=0.1, dt=2.5e-3, picard_tol=1e-9,
                         picard_max_iters=40)
    res10 = run_picard(cfg10, trace, initial, cutoff, params)
    diff = res.series[-1].as_array() - res10.series[-1].as_array()
    l2 = float(np.sqrt(np.sum(diff**2 * grid_w[None, :, :])))
    assert l2 < 1e-8


def test_converged_iterate_balances_its_own_equation():
    params, grid, cutoff, trace, initial = canonical_setup(nx=16, ny=33, ybar_max=12.0,
                                                           t_end=0.1)
    cfg = SolverConfig(t_window=0.1, dt=2.5e-3, picard_tol=1e-10,
                       picard_max_iters=40)
    res = run_picard(cfg, trace, initial, cutoff, params)
    # one more sweep frozen at the converged iterate barely moves it
    from mmbl.picard import _march
    levels = [trace.level(m, params) for m in range(cfg.n_steps + 1)]
    again = _march(initial, res.series, levels, cutoff, params, cfg, 99)
    w = grid.quad_weights()
    move = max(float(np.sqrt(np.sum((again[m].as_array()
                                     - res.series[m].as_array()) ** 2
                                    * w[None, :, :])))
               for m in range(len(again)))
    assert move <= 50 * cfg.picard_tol


def test_determinism_bitwise():
    a = canonical_setup(nx=16, ny=33, ybar_max=12.0, t_end=0.05)
    b = canonical_setup(nx=16, ny=33, ybar_max=12.0, t_end=0.05)
    cfg = SolverConfig(t_window=0.05, dt=2.5e-3)
    r1 = run_picard(cfg, a[3], a[4], a[2], a[0])
    r2 = run_picard(cfg, b[3], b[4], b[2], b[0])
    assert r1.report.diff_norms == r2.report.diff_norms
    assert np.array_equal(r1.series[-1].as_array(), r2.series[-1].as_array())


def test_check_bounds_cases(params):
    grid = Grid(nx=8, ny=17, y_max=4.0)
    cutoff = make_cutoff(grid)
    times = np.array([0.0])
    trace = constant_trace_series(times, grid.x_nodes, H0=0.0, P0=2.0)
    z = np.zeros((grid.nx, grid.ny))
    # q1 = P/2 everywhere: both margins P/2 - delta
    s = TransformedState(Field(grid, z), Field(grid, z),
                         Field(grid, np.full_like(z, 1.0)), 0.0)
    rep = check_bounds([s], trace, cutoff, params.delta)
    assert rep.margin_low == pytest.approx(1.0 - params.delta)
    assert rep.margin_high == pytest.approx(1.0 - params.delta)
    assert rep.violation is None
    # q1 touching delta at one node: zero margin, located
    q = np.full_like(z, 1.0)
    q[3, 5] = params.delta
    s2 = TransformedState(Field(grid, z), Field(grid, z), Field(grid, q), 0.0)
    rep2 = check_bounds([s2], trace, cutoff, params.delta)
    assert rep2.margin_low == pytest.approx(0.0, abs=1e-15)
    assert rep2.violation is None  # touching is not yet a violation


def test_noncontraction_raises(monkeypatch):
    # drive the guard with a march whose iterates drift apart geometrically
    params, grid, cutoff, trace, initial = canonical_setup(nx=16, ny=33, ybar_max=12.0,
                                                           t_end=0.05)
    cfg = SolverConfig(t_window=0.05, dt=2.5e-3, picard_tol=1e-300,
                       picard_max_iters=20)
    import mmbl.picard as picard_mod
    state = {"n": 0}

    def fake_march(initial_, prev_series, levels, cutoff_, params_, cfg_, it):
        state["n"] += 1
        bump = 1.5 ** state["n"]
        out = []
        for m, s in enumerate(prev_series):
            arr = s.as_array().copy()
            arr[0] += bump * 1e-3
            out.append(TransformedState.from_array(grid, arr, s.time))
        return out

    monkeypatch.setattr(picard_mod, "_march", fake_march)
    with pytest.raises(NonContractionError):
        picard_mod.run_picard(cfg, trace, initial, cutoff, params)


def test_window_ladder_ratios():
    params, grid, cutoff, trace, initial = canonical_setup(t_end=0.2)
    cfg = SolverConfig(t_window=0.2, dt=2.5e-3, picard_tol=1e-9,
                       picard_max_iters=30)
    rungs = run_window_ladder(cfg, trace, initial, cutoff, params,
                              windows=[0.2, 0.1, 0.05])
    assert len(rungs) == 3
    maxima = [rep.max_ratio() for _, rep in rungs]
    assert all(m < 1.0 for m in maxima if np.isfinite(m))
    finite = [m for m in maxima if np.isfinite(m)]
    for a, b in zip(finite, finite[1:]):
        assert b <= a + 0.05
