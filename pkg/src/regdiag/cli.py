"""Command line driver: ``regdiag {generate,semiconv,diagnose,report}``.

Exit status is 0 on success, 2 for invalid input (including unwritable
output directories) and 3 when a numerical routine fails.
"""

import argparse
import sys
from pathlib import Path

from .errors import NumericalError, ValidationError
from .experiments import (METHODS, ExperimentConfig, build_report, parse_decay,
                          run_diagnose, run_generate, run_semiconv)
from .subspace import DELTA_DEFAULT

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


def _problem_args(p):
    p.add_argument("--kind", required=True, choices=("synthetic", "shaw", "deriv2"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None, help="rows (synthetic only; default n)")
    p.add_argument("--decay", default=None, help="geometric:RHO or power:ZETA:ALPHA")
    p.add_argument("--beta", type=float, default=1.0, help="Picard exponent (synthetic)")
    p.add_argument("--eps", type=float, default=1e-3, help="relative noise level")
    p.add_argument("--seed", type=int, action="append", default=None,
                   help="repeatable; one run per seed (default 0)")
    p.add_argument("--out", type=Path, required=True)


def _solver_args(p, with_methods):
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--reorth", choices=("none", "full"), default="full")
    if with_methods:
        p.add_argument("--methods", default="lsqr",
                       help=f"comma separated subset of {','.join(METHODS)}")
    p.add_argument("--delta", type=float, default=DELTA_DEFAULT)


def build_parser():
    parser = argparse.ArgumentParser(prog="regdiag",
                                     description="Krylov regularization diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a noisy problem bundle per seed")
    _problem_args(gen)

    sc = sub.add_parser("semiconv", help="LSQR-family and TSVD error curves")
    _problem_args(sc)
    _solver_args(sc, with_methods=True)

    dg = sub.add_parser("diagnose", help="subspace distances, estimates and Ritz checks")
    _problem_args(dg)
    _solver_args(dg, with_methods=False)

    rp = sub.add_parser("report", help="merge a run directory into report.json")
    rp.add_argument("--out", type=Path, required=True)
    return parser


def config_from_args(args):
    methods = ("lsqr",)
    if getattr(args, "methods", None) is not None:
        methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    return ExperimentConfig(
        kind=args.kind, n=args.n, m=args.m,
        decay=parse_decay(args.decay) if args.decay else None,
        beta=args.beta, epsilon=args.eps,
        seeds=tuple(args.seed) if args.seed else (0,),
        kmax=getattr(args, "kmax", None), reorth=getattr(args, "reorth", "full"),
        methods=methods, delta=getattr(args, "delta", DELTA_DEFAULT), out=args.out)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            report = build_report(args.out)
            print(f"report written to {args.out / 'report.json'}"
                  + (" (partial)" if report["partial"] else ""))
            return EXIT_OK
        config = config_from_args(args)
        if args.command == "generate":
            rows = run_generate(config)
            print(f"{len(rows)} bundle(s) written under {args.out}")
        elif args.command == "semiconv":
            agg = run_semiconv(config)
            for r in agg["runs"]:
                lsqr = r["methods"].get("lsqr")
                extra = "" if lsqr is None else f" kstar_lsqr={lsqr['kstar']}"
                print(f"seed {r['seed']}: k0={r['k0_transition']} "
                      f"best_tsvd_k={r['k0_best_tsvd']}{extra}")
        else:
            agg = run_diagnose(config)
            print(f"estimate/exact ratio: geometric mean {agg['ratio_geomean']:.4f}, "
                  f"range [{agg['ratio_min']:.4f}, {agg['ratio_max']:.4f}]")
    except ValidationError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
