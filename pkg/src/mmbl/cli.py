"""Command-line surface.

Subcommands: run, bernoulli, mms, transform-roundtrip, check-invariants,
report.  Exit code 0 iff every executed check passes, 2 for configuration
errors (missing file, bad keys), 1 for failed checks, with one
machine-readable ``FAIL <name> value=... limit=...`` line per failure.
MMBL_OUTDIR overrides the output directory.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .certificate import RunCertificate, parse_certificate
from .config import parse_config
from .core import PhysicalParams
from .exceptions import ConfigurationError, MmblError
from .outflow import bernoulli_residual, solve_bernoulli
from .snapshots import write_trace_series
from .verification import (invariant_suite, mms_space_study, mms_time_study,
                           transform_roundtrip_study)

__all__ = ["main", "cli"]


def _outdir(args) -> str:
    out = os.environ.get("MMBL_OUTDIR", getattr(args, "outdir", None) or "out")
    os.makedirs(out, exist_ok=True)
    return out


def _finish(cert: RunCertificate, path: str | None) -> int:
    if path:
        cert.write(path)
        print(f"certificate written to {path}")
    failures = cert.failures()
    for name in failures:
        print(f"FAIL {name}")
    print("all checks passed" if not failures else
          f"{len(failures)} check(s) failed")
    return 0 if not failures else 1


def _cmd_run(args) -> int:
    from .pipeline import run_pipeline
    setup = parse_config(args.config)
    out = os.environ.get("MMBL_OUTDIR", args.outdir or setup.outdir)
    res = run_pipeline(setup, outdir=out)
    cert = res.certificate
    rep = res.picard.report
    print(f"picard: {rep.iterations} iterations, converged={rep.converged}, "
          f"window={res.window_used:g}")
    print(f"band margins: {res.picard.bounds.margin_low:.6g}, "
          f"{res.picard.bounds.margin_high:.6g}")
    for name in ("u1_momentum", "w1_equation", "h1_induction",
                 "velocity_divergence", "magnetic_divergence"):
        print(f"residual {name}: "
              f"{cert.get('residuals', 'physical_' + name + '_max'):.4e}")
    failures = cert.failures()
    for name in failures:
        print(f"FAIL {name}")
    print(f"outputs in {out}")
    return 0 if not failures else 1


def _cmd_bernoulli(args) -> int:
    setup = parse_config(args.config)
    U0, I0, H0 = setup.initial_outflow()
    trace = solve_bernoulli(setup.pressure, U0, I0, H0, setup.params,
                            t_end=setup.solver.t_window, dt=setup.solver.dt,
                            x_nodes=setup.grid.x_nodes,
                            filter_coef=setup.filter_coef)
    out = _outdir(args)
    path = os.path.join(out, "trace_series.txt")
    write_trace_series(trace, path)
    _, res = bernoulli_residual(trace, setup.params)
    cert = RunCertificate()
    cert.set("bernoulli", "levels", trace.nt)
    cert.set("bernoulli", "max_residual", float(np.max(res)))
    cert.add_check("bernoulli_residual_finite", bool(np.all(np.isfinite(res))))
    print(f"trace series written to {path}; max residual {np.max(res):.4e}")
    return _finish(cert, os.path.join(out, "bernoulli_certificate.txt"))


def _default_params(args) -> PhysicalParams:
    if getattr(args, "config", None):
        return parse_config(args.config).params
    return PhysicalParams(a=1.0, gamma=2.0, mu=0.1, mu_prime=0.1, zeta=0.05,
                          sigma=0.1, delta=0.1)


def _cmd_mms(args) -> int:
    params = _default_params(args)
    cert = RunCertificate()
    space = mms_space_study(params, levels=args.levels)
    t1 = mms_time_study(params, levels=args.levels, integrator="first")
    t2 = mms_time_study(params, levels=args.levels, integrator="second")
    print(f"{'study':<14}{'h':>12}{'error':>14}")
    for r in (space, t1, t2):
        for h, e in zip(r.hs, r.errors):
            print(f"{r.label:<14}{h:>12.5g}{e:>14.5e}")
        print(f"{r.label:<14} observed order {r.order:.3f}")
        cert.set("orders", r.label.replace("-", "_"), r.order)
    cert.add_check("mms_space_order", space.order >= 1.8)
    cert.add_check("mms_time_first_order", t1.order >= 0.9)
    cert.add_check("mms_time_second_order", t2.order >= 1.8)
    out = _outdir(args)
    table = os.path.join(out, "mms_orders.txt")
    with open(table, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# mmbl-orders v1\n")
        fh.write("study h error\n")
        for r in (space, t1, t2):
            for h, e in zip(r.hs, r.errors):
                fh.write(f"{r.label} {h:.17g} {e:.17g}\n")
    print(f"order table written to {table}")
    return _finish(cert, os.path.join(out, "mms_certificate.txt"))


def _cmd_roundtrip(args) -> int:
    params = _default_params(args)
    r = transform_roundtrip_study(levels=args.levels, delta=params.delta)
    print(f"{'h':>12}{'error':>14}")
    for h, e in zip(r.hs, r.errors):
        print(f"{h:>12.5g}{e:>14.5e}")
    print(f"observed order {r.order:.3f}")
    cert = RunCertificate()
    cert.set("orders", "roundtrip", r.order)
    cert.add_check("roundtrip_order", abs(r.order - 2.0) <= 0.45)
    out = _outdir(args)
    table = os.path.join(out, "roundtrip_orders.txt")
    with open(table, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# mmbl-orders v1\n")
        fh.write("study h error\n")
        for h, e in zip(r.hs, r.errors):
            fh.write(f"roundtrip {h:.17g} {e:.17g}\n")
    return _finish(cert, os.path.join(out, "roundtrip_certificate.txt"))


def _cmd_invariants(args) -> int:
    params = _default_params(args)
    result = invariant_suite(params, samples=args.samples, seed=args.seed)
    cert = RunCertificate()
    for key, val in result.items():
        if key != "pass":
            cert.set("invariants", key, val)
    cert.add_check("identity_SA0_equals_A",
                   result["max_rel_err_SA0_vs_A"] <= 1e-12)
    cert.add_check("identity_SB0_equals_B",
                   result["max_rel_err_SB0_vs_B"] <= 1e-12)
    cert.add_check("A_symmetry_exact", result["symmetry_defect"] == 0.0)
    cert.add_check("S_eigenvalue_floor",
                   result["min_eig_S"] >= result["min_eig_S_bound"] - 1e-15)
    cert.add_check("B_eigenvalue_floor",
                   result["min_eig_B"] >= result["min_eig_B_bound"] - 1e-15)
    print(f"samples={result['samples']} seed={result['seed']}")
    print(f"max |S A0 - A| relative: {result['max_rel_err_SA0_vs_A']:.3e}")
    print(f"max |S B0 - B| relative: {result['max_rel_err_SB0_vs_B']:.3e}")
    print(f"symmetry defect: {result['symmetry_defect']:.3e}")
    out = _outdir(args)
    return _finish(cert, os.path.join(out, "invariants_certificate.txt"))


def _cmd_report(args) -> int:
    cert = parse_certificate(args.certificate)
    sys.stdout.write(cert.serialize())
    return 0 if cert.all_checks_pass() else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mmbl",
        description="2D compressible magneto-micropolar boundary-layer solver")
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="full pipeline: trace, Picard solve, "
                                    "inverse transform, residual oracle")
    pr.add_argument("--config", required=True)
    pr.add_argument("--outdir", default=None)
    pr.set_defaults(func=_cmd_run)

    pb = sub.add_parser("bernoulli", help="outflow trace solve only")
    pb.add_argument("--config", required=True)
    pb.add_argument("--outdir", default=None)
    pb.set_defaults(func=_cmd_bernoulli)

    pm = sub.add_parser("mms", help="manufactured-solution convergence study")
    pm.add_argument("--levels", type=int, default=3)
    pm.add_argument("--config", default=None)
    pm.add_argument("--outdir", default=None)
    pm.set_defaults(func=_cmd_mms)

    pt = sub.add_parser("transform-roundtrip",
                        help="forward/inverse stream-map refinement study")
    pt.add_argument("--levels", type=int, default=3)
    pt.add_argument("--config", default=None)
    pt.add_argument("--outdir", default=None)
    pt.set_defaults(func=_cmd_roundtrip)

    pi = sub.add_parser("check-invariants",
                        help="algebraic identity suite on random states")
    pi.add_argument("--samples", type=int, default=10_000)
    pi.add_argument("--seed", type=int, default=7)
    pi.add_argument("--config", default=None)
    pi.add_argument("--outdir", default=None)
    pi.set_defaults(func=_cmd_invariants)

    pp = sub.add_parser("report", help="reprint a stored certificate")
    pp.add_argument("--certificate", required=True)
    pp.set_defaults(func=_cmd_report)
    return p


def cli(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except MmblError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    main()
