import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmbl.core import (Field, Grid, PhysicalParams, TransformedState,
                       cutoff_value, density_pressure, lift, make_cutoff)
from mmbl.exceptions import AdmissibilityError, ConfigurationError
from mmbl.outflow import constant_trace_series


def test_params_constraints():
    with pytest.raises(ConfigurationError):
        PhysicalParams(a=1, gamma=0.5, mu=1, mu_prime=1, zeta=0, sigma=1, delta=0.1)
    with pytest.raises(ConfigurationError):
        PhysicalParams(a=-1, gamma=2, mu=1, mu_prime=1, zeta=0, sigma=1, delta=0.1)
    with pytest.raises(ConfigurationError):
        PhysicalParams(a=1, gamma=2, mu=1, mu_prime=1, zeta=0, sigma=1, delta=0.0)


def test_grid_validation():
    with pytest.raises(ConfigurationError):
        Grid(nx=7, ny=16, y_max=10.0)
    with pytest.raises(ConfigurationError):
        Grid(nx=16, ny=4, y_max=10.0)
    g = Grid(nx=16, ny=33, y_max=8.0)
    assert g.y_nodes[0] == 0.0
    assert g.y_nodes[-1] == 8.0
    assert np.all(np.diff(g.y_nodes) > 0)


def test_field_rejects_nonfinite(grid):
    vals = np.zeros((grid.nx, grid.ny))
    vals[3, 4] = np.inf
    with pytest.raises(ValueError):
        Field(grid, vals)


def test_cutoff_plateaus_and_blend(grid):
    prof = make_cutoff(grid)
    y = grid.y_nodes
    assert np.all(prof.phi[y <= 1.0] == 0.0)
    assert np.all(prof.phi[y >= 2.0] == 1.0)
    # midpoint of the smoothstep blend p(s) = s^2 (3 - 2s)
    assert cutoff_value(1.5) == pytest.approx(0.5, abs=1e-15)
    assert np.all(np.diff(prof.phi) >= 0.0)
    assert np.max(np.abs(prof.phi)) <= 1.0


def test_cutoff_c1_by_finite_differences():
    # slope vanishes at both joints; the central quotient decays like O(h)
    for joint in (1.0, 2.0):
        for h in (1e-3, 1e-4, 1e-5):
            slope = (cutoff_value(joint + h) - cutoff_value(joint - h)) / (2 * h)
            assert abs(slope) <= 2.0 * h


def test_cutoff_needs_room():
    with pytest.raises(ConfigurationError):
        make_cutoff(Grid(nx=8, ny=9, y_max=2.5))


def test_lift_plateau_values(grid, cutoff, params):
    times = np.array([0.0])
    trace = constant_trace_series(times, grid.x_nodes, U0=1.0, I0=1.0,
                                  H0=1.0, P0=2.0)
    u = np.zeros((grid.nx, grid.ny))
    w = np.full((grid.nx, grid.ny), 0.2)
    q = np.full((grid.nx, grid.ny), 0.1)
    state = TransformedState(Field(grid, u), Field(grid, w), Field(grid, q), 0.0)
    lifted = lift(state, trace.level(0, params), cutoff, params.delta)
    y = grid.y_nodes
    far = y >= 2.0
    near = y <= 1.0
    assert np.allclose(lifted.u1.values[:, far], 1.0)
    assert np.allclose(lifted.w1.values[:, near], 0.2)
    # q lift at the blend midpoint: q + (H^2/2) phi(1.5)
    j = int(np.argmin(np.abs(y - 1.5)))
    expect = 0.1 + 0.5 * cutoff_value(y[j])
    assert lifted.q1.values[0, j] == pytest.approx(expect, rel=1e-12)


def test_lift_linear_in_state_and_trace(grid, cutoff, params):
    # joint linearity in (v, (U, I, H^2/2)): scale H by sqrt(alpha)
    rng = np.random.default_rng(0)
    alpha = 0.37
    u, w, q = rng.normal(size=(3, grid.nx, grid.ny))
    times = np.array([0.0])
    tr1 = constant_trace_series(times, grid.x_nodes, U0=0.4, I0=0.2, H0=1.0, P0=2.0)
    tra = constant_trace_series(times, grid.x_nodes, U0=0.4 * alpha,
                                I0=0.2 * alpha, H0=np.sqrt(alpha), P0=2.0)
    s1 = TransformedState(Field(grid, u), Field(grid, w), Field(grid, q), 0.0)
    sa = TransformedState(Field(grid, alpha * u), Field(grid, alpha * w),
                          Field(grid, alpha * q), 0.0)
    l1 = lift(s1, tr1.level(0, params), cutoff)
    la = lift(sa, tra.level(0, params), cutoff)
    for a, b in ((l1.u1, la.u1), (l1.w1, la.w1), (l1.q1, la.q1)):
        assert np.allclose(alpha * a.values, b.values, atol=1e-14)


def test_lift_band_margins_flagged_not_fatal(grid, cutoff, params):
    times = np.array([0.0])
    trace = constant_trace_series(times, grid.x_nodes, H0=1.0, P0=2.0)
    q = np.zeros((grid.nx, grid.ny))  # q1 = 0 at the wall: below delta
    z = np.zeros_like(q)
    state = TransformedState(Field(grid, z), Field(grid, z), Field(grid, q), 0.0)
    lifted = lift(state, trace.level(0, params), cutoff, params.delta)
    assert not lifted.band_ok
    assert lifted.margin_low < 0


def test_density_pressure_trivial(params):
    rho, p = density_pressure(np.array(0.0), np.array(1.0), params)
    assert p == pytest.approx(1.0)
    assert rho == pytest.approx(1.0)
    rho, p = density_pressure(np.array(1.5), np.array(2.0), params)
    assert p == pytest.approx(0.5)
    assert rho == pytest.approx(np.sqrt(0.5), rel=1e-14)


def test_density_pressure_degenerate(params):
    with pytest.raises(AdmissibilityError):
        density_pressure(np.array(1.0), np.array(1.0), params)


@settings(max_examples=200, deadline=None)
@given(P=st.floats(0.5, 5.0), frac=st.floats(1e-6, 1.0 - 1e-6),
       a=st.floats(0.2, 3.0), gamma=st.floats(1.1, 3.0))
def test_density_pressure_closes_the_pressure_law(P, frac, a, gamma):
    # a rho^gamma + q1 = P for admissible samples
    params = PhysicalParams(a=a, gamma=gamma, mu=1, mu_prime=1, zeta=0,
                            sigma=1, delta=1e-8)
    q1 = frac * (P - 2e-8) + 1e-8
    rho, p = density_pressure(np.array(q1), np.array(P), params)
    assert a * rho**gamma + q1 == pytest.approx(P, rel=1e-12)
