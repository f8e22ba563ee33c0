import numpy as np
import pytest

from mmbl.core import Grid, PhysicalParams, make_cutoff


@pytest.fixture
def params():
    return PhysicalParams(a=1.0, gamma=2.0, mu=0.1, mu_prime=0.1,
                          zeta=0.05, sigma=0.1, delta=0.1)


@pytest.fixture
def grid():
    return Grid(nx=16, ny=65, y_max=20.0)


@pytest.fixture
def cutoff(grid):
    return make_cutoff(grid)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def sample_admissible(rng, n, delta, p_lo=0.6, p_hi=3.0):
    """Random admissible nodes: P, q1 in [delta, P - delta], u1, w1, dyq."""
    P = rng.uniform(p_lo, p_hi, size=n)
    q1 = delta + (P - 2 * delta) * rng.uniform(0.0, 1.0, size=n)
    u1 = rng.uniform(-1.0, 1.0, size=n)
    w1 = rng.uniform(-1.0, 1.0, size=n)
    dyq = rng.uniform(-1.0, 1.0, size=n)
    return P, q1, u1, w1, dyq


def canonical_setup(nx=16, ny=49, ybar_max=20.0, t_end=0.2, dt=2.5e-3,
                    u0_amp=0.1, i0_amp=0.05, h0=1.0, p0=2.0, q_amp=0.2):
    """Small canonical configuration: traces, cutoff, initial homogenized data."""
    from mmbl.core import Field, PhysicalParams, Grid, TransformedState, make_cutoff
    from mmbl.outflow import PressureSpec, solve_bernoulli

    params = PhysicalParams(a=1.0, gamma=2.0, mu=0.1, mu_prime=0.1,
                            zeta=0.05, sigma=0.1, delta=0.1)
    grid = Grid(nx=nx, ny=ny, y_max=ybar_max)
    cutoff = make_cutoff(grid)
    x = grid.x_nodes
    pspec = PressureSpec(family="constant", p0=p0)
    trace = solve_bernoulli(pspec, u0_amp * np.sin(x), i0_amp * np.cos(x),
                            h0 * np.ones_like(x), params, t_end=t_end, dt=dt,
                            x_nodes=x)
    Y = grid.y_nodes[None, :]
    shape_fn = 1.0 - np.exp(-Y)
    u10 = (u0_amp * np.sin(x))[:, None] * shape_fn
    w10 = (i0_amp * np.cos(x))[:, None] * shape_fn
    q10 = 0.5 * h0**2 + q_amp * np.exp(-(Y**2)) * np.ones((nx, 1))
    phi = cutoff.phi[None, :]
    u = u10 - (u0_amp * np.sin(x))[:, None] * phi
    w = w10 - (i0_amp * np.cos(x))[:, None] * phi
    q = q10 - (0.5 * h0**2) * phi
    initial = TransformedState(Field(grid, u), Field(grid, w),
                               Field(grid, q), 0.0)
    return params, grid, cutoff, trace, initial
