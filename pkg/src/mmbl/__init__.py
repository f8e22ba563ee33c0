"""Solver and verification harness for the 2D compressible magneto-micropolar
boundary layer: outflow traces, stream-function transform, symmetrized
degenerate parabolic core, Picard iteration, and diagnostic suites."""

from .core import (CutoffProfile, Field, Grid, LiftedState, PhysicalParams,
                   PhysicalState, TransformedState, density_pressure, lift,
                   make_cutoff)
from .coefficients import (CoefficientBundle, advective_spectral_radius,
                           assemble_A0_B0_A_B, assemble_bundle, assemble_F,
                           assemble_g, assemble_S, eval_Acal_Q)
from .outflow import (OutflowLevel, PressureSpec, TraceSeries,
                      bernoulli_residual, constant_trace_series, solve_bernoulli)
from .transform import (divergence_residual, inverse_y_of_psi, pullback,
                        pushforward, recover_secondary, stream_forward)
from .linstep import (FrozenCoefficients, SecondOrderMarcher, cfl_bound,
                      freeze_coefficients, step)
from .picard import (BoundsReport, IterationReport, PicardResult, SolverConfig,
                     check_bounds, compatibility_data, run_picard,
                     run_window_ladder, zeroth_iterate)
from .diagnostics import (GronwallFit, NormSuite, convergence_order,
                          discrete_sobolev_norm, energy_functional,
                          gronwall_envelope, norm_suite,
                          original_system_residual, sobolev_ratio,
                          spatial_hk_norm)

__version__ = "0.1.0"
