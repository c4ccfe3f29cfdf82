"""Command-line front end.

Subcommands: sample, quantile-report, bounds, experiment.  Exit codes:
0 success, 2 configuration error, 3 data error.  All outputs are CSV with a
header row; experiment outputs get a JSON sidecar echoing the resolved
configuration.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bounds as bounds_mod
from . import experiments as exp
from .density import KdeConfig
from .regen import run_regenerative_rw
from .samplers import run_linchpin_chain, t_cdf, t_quantile
from .trace import InvalidInputError, write_trace_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcquantile",
        description="Quantile estimates for MCMC output with Monte Carlo "
        "standard errors, finite-sample bounds, and replication experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="run a sampler and store its trace")
    p.add_argument("--sampler", choices=["rw", "linchpin"], required=True)
    p.add_argument("--v", type=float, default=30.0, help="degrees of freedom of the target")
    p.add_argument("--sigma", type=float, default=2.5, help="random-walk proposal scale")
    p.add_argument("--n", type=int, help="iterations (linchpin, or rw without flags)")
    p.add_argument("--tours", type=int, help="regeneration count (rw)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", choices=["zero", "stationary"], default="zero")
    p.add_argument("--out", required=True)

    p = sub.add_parser("quantile-report", help="interval estimates from a stored trace")
    p.add_argument("trace")
    p.add_argument("--q", type=float, action="append", required=True)
    p.add_argument("--methods", default="BM,SBM,RS")
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--bandwidth", type=float, default=None)
    p.add_argument("--out", default="-")

    p = sub.add_parser("bounds", help="finite-sample error-bound calculator")
    p.add_argument("--kind", choices=["polynomial", "uniform", "uniform-improved"],
                   required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--a", type=int)
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=exp.LINCHPIN_DELTA)
    p.add_argument("--gamma", type=float, help="use this gamma instead of the t(df) CDF")
    p.add_argument("--df", type=float, default=4.0,
                   help="target t degrees of freedom used to compute gamma")
    p.add_argument("--lam", type=float, default=exp.LINCHPIN_LAMBDA)
    p.add_argument("--n0", type=int, default=1)
    p.add_argument("--m", type=float, help="polynomial ergodicity order")
    p.add_argument("--EpiM", type=float, default=1.0)
    p.add_argument("--target", type=float,
                   help="invert: report the smallest n with bound <= target")
    p.add_argument("--out", default="-")

    p = sub.add_parser("experiment", help="replication experiments")
    p.add_argument("kind", choices=["coverage", "linchpin", "tour-stats"])
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--v", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--q", type=float, action="append", default=None)
    p.add_argument("--methods", default=None)
    p.add_argument("--confidence", type=float, default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--tours", type=int, default=None)
    p.add_argument("--lengths", default=None, help="comma-separated chain lengths")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--init", choices=["zero", "stationary"], default=None)
    p.add_argument("--out", required=True)
    return parser


def _cmd_sample(args) -> int:
    if args.sampler == "rw":
        if args.tours:
            trace = run_regenerative_rw(args.v, args.sigma, args.tours, args.seed)
            write_trace_csv(args.out, trace.values, trace.flags)
        elif args.n:
            rng = np.random.default_rng(args.seed)
            x = 0.0
            out = np.empty(args.n)
            from .samplers import metropolis_rw_step

            for i in range(args.n):
                x, _, _ = metropolis_rw_step(x, args.v, args.sigma, rng)
                out[i] = x
            write_trace_csv(args.out, out)
        else:
            print("sample: rw needs --tours or --n", file=sys.stderr)
            return EXIT_CONFIG
    else:
        if not args.n:
            print("sample: linchpin needs --n", file=sys.stderr)
            return EXIT_CONFIG
        rng = np.random.default_rng(args.seed)
        xs = run_linchpin_chain(args.n, rng, init=args.init)
        write_trace_csv(args.out, xs)
    return EXIT_OK


def _write_rows(out, columns, rows) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(exp._fmt(row.get(c)) for c in columns))
    text = "\n".join(lines) + "\n"
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _cmd_quantile_report(args) -> int:
    methods = tuple(m.strip().upper() for m in args.methods.split(",") if m.strip())
    kde = KdeConfig() if args.bandwidth is None else KdeConfig(bandwidth=args.bandwidth)
    rows = exp.quantile_report(args.trace, args.q, methods, args.confidence, kde)
    _write_rows(args.out, exp.QUANTILE_REPORT_COLUMNS, rows)
    return EXIT_OK


def _cmd_bounds(args) -> int:
    if args.gamma is not None:
        gamma = args.gamma
    else:
        df = args.df
        target_cdf = bounds_mod.TargetCdf(
            cdf=lambda x: float(t_cdf(df, x)), quantile=t_quantile(df, args.q)
        )
        gamma = bounds_mod.gamma_eps(target_cdf, args.q, args.eps, args.delta)

    if args.kind == "polynomial":
        if args.m is None:
            print("bounds: polynomial kind needs --m", file=sys.stderr)
            return EXIT_CONFIG
        profile = bounds_mod.PolynomialErgodicity(order=args.m, moment=args.EpiM)
    else:
        profile = bounds_mod.UniformErgodicity(lam=args.lam, n0=args.n0)

    if args.target is not None:
        n = bounds_mod.min_sample_size(args.kind, gamma, profile, args.target, a=args.a)
    elif args.n is not None:
        n = args.n
    else:
        print("bounds: need --n or --target", file=sys.stderr)
        return EXIT_CONFIG

    value = bounds_mod._evaluate(args.kind, n, gamma, profile, args.a)
    row = {
        "kind": args.kind,
        "n": n,
        "a": args.a if args.a is not None else "",
        "gamma": gamma,
        "bound": value,
        "valid": not (value > 1.0),
    }
    _write_rows(args.out, ["kind", "n", "a", "gamma", "bound", "valid"], [row])
    return EXIT_OK


def _cmd_experiment(args) -> int:
    kind = {"coverage": "coverage", "linchpin": "linchpin-bound",
            "tour-stats": "tour-stats"}[args.kind]
    overrides = {
        "kind": kind,
        "df": args.v,
        "sigma": args.sigma,
        "quantiles": tuple(args.q) if args.q else None,
        "methods": tuple(m.strip().upper() for m in args.methods.split(",")) if args.methods else None,
        "confidence": args.confidence,
        "replications": args.reps,
        "tours": args.tours,
        "lengths": tuple(int(s) for s in args.lengths.split(",")) if args.lengths else None,
        "seed": args.seed,
        "workers": args.workers,
        "init": args.init,
    }
    if args.config:
        config = exp.ExperimentConfig.from_json(args.config, **overrides)
    else:
        config = exp.ExperimentConfig(
            **{k: v for k, v in overrides.items() if v is not None}
        )
    if config.replications == 0 and kind != "tour-stats":
        print("warning: zero replications requested; report will be empty",
              file=sys.stderr)
    if kind == "coverage":
        report = exp.run_coverage_experiment(config)
    elif kind == "linchpin-bound":
        report = exp.run_linchpin_bound_experiment(config)
    else:
        report = exp.run_tour_stats(config)
    report.write_csv(args.out)
    if "histogram" in report.extras:
        hist_path = str(args.out) + ".hist.csv"
        _write_rows(hist_path, report.extras["histogram_columns"],
                    report.extras["histogram"])
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "sample":
            return _cmd_sample(args)
        if args.command == "quantile-report":
            return _cmd_quantile_report(args)
        if args.command == "bounds":
            return _cmd_bounds(args)
        return _cmd_experiment(args)
    except (exp.ConfigurationError, json.JSONDecodeError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidInputError, bounds_mod.BoundDomainError, OSError, ValueError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
