"""Standalone batch plotting CLI, long-form flags matching the solver's style."""

from __future__ import annotations

import argparse
import sys

from .figures import (plot_contraction, plot_convergence, plot_margins,
                      plot_profiles)
from .readers import SchemaError


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mmbl-plots",
        description="render mmbl solver outputs into figures")
    sub = p.add_subparsers(dest="command", required=True)

    pp = sub.add_parser("profiles", help="wall-normal profiles from a "
                                         "physical snapshot")
    pp.add_argument("--snapshot", required=True)
    pp.add_argument("--output", required=True)
    pp.add_argument("--stations", type=float, nargs="+", default=[0.0])
    pp.add_argument("--delta", type=float, default=None)
    pp.add_argument("--certificate", default=None)

    pc = sub.add_parser("convergence", help="log-log order plot from an "
                                            "order table")
    pc.add_argument("--table", required=True)
    pc.add_argument("--output", required=True)

    pr = sub.add_parser("contraction", help="Picard difference norms and "
                                            "ratios from a certificate")
    pr.add_argument("--certificate", required=True)
    pr.add_argument("--output", required=True)

    pm = sub.add_parser("margins", help="admissibility margins per iteration")
    pm.add_argument("--certificate", required=True)
    pm.add_argument("--output", required=True)
    return p


def cli(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "profiles":
            plot_profiles(args.snapshot, args.output,
                          stations=tuple(args.stations), delta=args.delta,
                          certificate_path=args.certificate)
        elif args.command == "convergence":
            slopes = plot_convergence(args.table, args.output)
            for study, slope in slopes.items():
                print(f"{study}: slope {slope:.3f}")
        elif args.command == "contraction":
            plot_contraction(args.certificate, args.output)
        elif args.command == "margins":
            plot_margins(args.certificate, args.output)
    except (SchemaError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(f"wrote {args.output}")
    return 0


def main() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    main()
