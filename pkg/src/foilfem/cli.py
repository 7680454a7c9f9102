"""Command line front end.

Subcommands: ``run`` executes a deck, ``check`` validates it and echoes the
fully resolved configuration, ``mms`` runs the thermal manufactured-solution
convergence study, ``convergence`` compares homogenized against resolved
turns on a deck. Exit code 0 on success, 1 with a one-line diagnostic on
failure.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import post, thermal
from .config import load_config


def _cmd_run(args) -> int:
    from . import runner as runmod

    cfg = load_config(args.deck)
    report = runmod.run(cfg, out_dir=args.out)
    print(f"run '{report.name}' finished at t = {report.end_time_s:.6g} s "
          f"({report.thermal_steps} thermal steps, "
          f"{report.magnetic_solves} magnetic solves)")
    print(f"total losses {report.total_losses_W:.6g} W, "
          f"internal energy {report.internal_energy_J:.6g} J")
    for region, temp in report.winding_mean_T_C.items():
        print(f"mean temperature in '{region}': {temp:.2f} C")
    print(f"outputs in {report.output_dir}")
    return 0


def _cmd_check(args) -> int:
    cfg = load_config(args.deck)
    print(json.dumps(cfg.to_dict(), indent=2))
    return 0


def _cmd_mms(args) -> int:
    for aniso in (False, True):
        label = "anisotropic" if aniso else "isotropic"
        rows = thermal.mms_convergence(args.levels, anisotropic=aniso)
        print(f"# thermal manufactured-solution study ({label})")
        print("level  h_m        n_elems   l2_error      rate")
        for r in rows:
            rate = "   -" if r["rate"] != r["rate"] else f"{r['rate']:.2f}"
            print(f"{r['level']:<6d} {r['h']:<10.4g} {r['n_elems']:<9d} "
                  f"{r['l2_error']:<13.6e} {rate}")
    return 0


def _cmd_convergence(args) -> int:
    cfg = load_config(args.deck)
    result = post.convergence_study(cfg, args.levels)
    print("level  n_resolved  n_homogenized  U_resolved_J    U_homogenized_J  rel_error")
    for r in result["rows"]:
        print(f"{r['level']:<6d} {r['n_elems_resolved']:<11d} "
              f"{r['n_elems_homogenized']:<14d} {r['U_resolved_J']:<15.8e} "
              f"{r['U_homogenized_J']:<16.8e} {r['rel_error']:.6e}")
    print(f"fitted order in element count: {result['order']:.3f}")
    if args.out:
        post.write_table_csv(args.out, result["rows"])
        print(f"table written to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="foilfem",
        description="Axisymmetric magneto-thermal solver for foil windings")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a deck")
    p_run.add_argument("deck")
    p_run.add_argument("--out", default=None, help="output directory override")
    p_run.set_defaults(func=_cmd_run)

    p_check = sub.add_parser("check", help="validate a deck and echo it resolved")
    p_check.add_argument("deck")
    p_check.set_defaults(func=_cmd_check)

    p_mms = sub.add_parser("mms", help="thermal manufactured-solution convergence")
    p_mms.add_argument("--levels", type=int, default=3)
    p_mms.set_defaults(func=_cmd_mms)

    p_conv = sub.add_parser("convergence",
                            help="resolved vs homogenized internal-energy study")
    p_conv.add_argument("deck")
    p_conv.add_argument("--levels", type=int, default=3)
    p_conv.add_argument("--out", default=None, help="write the table as CSV")
    p_conv.set_defaults(func=_cmd_convergence)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"foilfem: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
