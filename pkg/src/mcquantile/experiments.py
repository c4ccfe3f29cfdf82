"""Replication-experiment engine: coverage studies, the finite-sample-bound
validation study for the linchpin sampler, tour statistics, and per-trace
quantile reports.

Replication r of an experiment with master seed s always runs on the child
stream SeedSequence((s, r)), so results are deterministic and independent of
the worker count; aggregation only sums and collects per-replication records
keyed by index.
"""
from __future__ import annotations

import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds as bounds_mod
from .batch_means import bm_quantile_ci
from .density import KdeConfig
from .regen import RegenTrace, rs_quantile_ci, run_regenerative_rw
from .samplers import run_linchpin_chain, t_cdf, t_quantile
from .subsampling import sbm_quantile_ci
from .trace import (
    InvalidInputError,
    QuantileSpec,
    ScalarTrace,
    empirical_quantile,
    read_trace_csv,
)

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "run_coverage_experiment",
    "run_linchpin_bound_experiment",
    "run_tour_stats",
    "quantile_report",
    "LINCHPIN_DELTA",
    "LINCHPIN_LAMBDA",
]

ALL_METHODS = ("BM", "SBM", "RS")

# Minorization constant for the linchpin sampler (t(3) proposal density over
# the t(4) target density has infimum sqrt(9375)/(32 pi)) and the slack
# factor used in the worked bound.
LINCHPIN_LAMBDA = math.sqrt(9375.0) / (32.0 * math.pi)
LINCHPIN_DELTA = 0.99999

HIST_BIN_WIDTH = 0.02
HIST_RANGE = (-0.6, 0.6)


class ConfigurationError(ValueError):
    """Invalid or unresolvable experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str  # coverage | linchpin-bound | tour-stats
    sampler: str = "rw"  # rw | linchpin
    df: float = 30.0
    sigma: float = 2.5
    quantiles: tuple = (0.5,)
    methods: tuple = ALL_METHODS
    confidence: float = 0.95
    replications: int = 100
    tours: int = 500
    lengths: tuple = (500, 1000, 4700)
    epsilon: float = 0.1
    seed: int = 0
    workers: int = 1
    init: str = "zero"

    def __post_init__(self):
        if self.kind not in ("coverage", "linchpin-bound", "tour-stats"):
            raise ConfigurationError(f"unknown experiment kind {self.kind!r}")
        if self.replications < 0:
            raise ConfigurationError("replication count must be >= 0")
        for q in self.quantiles:
            if not (0.0 < q < 1.0):
                raise ConfigurationError(f"quantile {q} outside (0, 1)")
        for m in self.methods:
            if m not in ALL_METHODS:
                raise ConfigurationError(f"unknown method {m!r}")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")

    @classmethod
    def from_json(cls, path, **overrides):
        with open(path) as fh:
            data = json.load(fh)
        for key in ("quantiles", "methods", "lengths"):
            if key in data:
                data[key] = tuple(data[key])
        data.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from None


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    columns: list
    rows: list
    extras: dict = field(default_factory=dict)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(self.columns) + "\n")
            for row in self.rows:
                fh.write(",".join(_fmt(row[c]) for c in self.columns) + "\n")
        sidecar = str(path) + ".config.json"
        with open(sidecar, "w") as fh:
            json.dump(dataclasses.asdict(self.config), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _child_rng(seed: int, *key) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed,) + tuple(key)))


def _coverage_one_rep(args):
    """One replication: sample a regenerative run, build every requested
    interval on the same output, score containment against the truth."""
    config, rep, truths = args
    rng_seed = np.random.SeedSequence((config.seed, rep))
    trace = run_regenerative_rw(config.df, config.sigma, config.tours, rng_seed)
    scalar = trace.as_scalar_trace()
    out = {}
    for q in config.quantiles:
        spec = QuantileSpec(q)
        truth = truths[q]
        for method in config.methods:
            try:
                if method == "BM":
                    est = bm_quantile_ci(scalar, spec, config.confidence)
                elif method == "SBM":
                    est = sbm_quantile_ci(scalar, spec, config.confidence)
                else:
                    est = rs_quantile_ci(trace, spec, config.confidence)
            except (InvalidInputError, ValueError):
                out[(method, q)] = None
                continue
            covered = est.ci_low <= truth <= est.ci_high
            out[(method, q)] = (covered, est.half_width)
    return rep, out


def _map_replications(fn, work, workers: int):
    if workers <= 1 or len(work) <= 1:
        return [fn(w) for w in work]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, work, chunksize=max(1, len(work) // (8 * workers))))


def run_coverage_experiment(config: ExperimentConfig) -> ExperimentReport:
    if config.kind != "coverage":
        raise ConfigurationError("config.kind must be 'coverage'")
    truths = {q: t_quantile(config.df, q) for q in config.quantiles}
    work = [(config, rep, truths) for rep in range(config.replications)]
    results = _map_replications(_coverage_one_rep, work, config.workers)
    results.sort(key=lambda item: item[0])

    rows = []
    for q in config.quantiles:
        for method in config.methods:
            records = [res[(method, q)] for _, res in results]
            failures = sum(1 for r in records if r is None)
            ok = [r for r in records if r is not None]
            reps = len(ok)
            if reps == 0:
                rows.append(
                    {"method": method, "q": q, "tours": config.tours, "reps": 0,
                     "coverage": None, "coverage_mcse": None,
                     "mean_halfwidth": None, "sd_halfwidth": None,
                     "failures": failures, "truth": truths[q]}
                )
                continue
            phat = sum(1 for c, _ in ok if c) / reps
            widths = np.array([w for _, w in ok])
            rows.append(
                {
                    "method": method,
                    "q": q,
                    "tours": config.tours,
                    "reps": reps,
                    "coverage": phat,
                    "coverage_mcse": math.sqrt(phat * (1.0 - phat) / reps),
                    "mean_halfwidth": float(widths.mean()),
                    "sd_halfwidth": float(widths.std(ddof=1)) if reps > 1 else None,
                    "failures": failures,
                    "truth": truths[q],
                }
            )
    columns = ["method", "q", "tours", "reps", "coverage", "coverage_mcse",
               "mean_halfwidth", "sd_halfwidth", "failures", "truth"]
    return ExperimentReport(config=config, columns=columns, rows=rows)


def _linchpin_one_rep(args):
    config, length_idx, n, rep = args
    rng = _child_rng(config.seed, length_idx, rep)
    xs = run_linchpin_chain(n, rng, init=config.init)
    med = empirical_quantile(ScalarTrace(xs), QuantileSpec(0.5))
    return (length_idx, rep, med)


def _linchpin_bound(n: int, epsilon: float) -> float:
    target = bounds_mod.TargetCdf(cdf=lambda x: float(t_cdf(4, x)), quantile=0.0)
    gamma = bounds_mod.gamma_eps(target, 0.5, epsilon, LINCHPIN_DELTA)
    profile = bounds_mod.UniformErgodicity(lam=LINCHPIN_LAMBDA, n0=1)
    return bounds_mod.bound_uniform_improved(n, gamma, profile)


def run_linchpin_bound_experiment(config: ExperimentConfig) -> ExperimentReport:
    if config.kind != "linchpin-bound":
        raise ConfigurationError("config.kind must be 'linchpin-bound'")
    work = [
        (config, li, n, rep)
        for li, n in enumerate(config.lengths)
        for rep in range(config.replications)
    ]
    results = _map_replications(_linchpin_one_rep, work, config.workers)

    medians = {li: {} for li in range(len(config.lengths))}
    for li, rep, med in results:
        medians[li][rep] = med

    lo, hi = HIST_RANGE
    nbins = round((hi - lo) / HIST_BIN_WIDTH)
    edges = lo + HIST_BIN_WIDTH * np.arange(nbins + 1)

    rows = []
    hist_rows = []
    for li, n in enumerate(config.lengths):
        meds = np.array([medians[li][r] for r in sorted(medians[li])])
        reps = meds.size
        exceed = int(np.count_nonzero(np.abs(meds) > config.epsilon)) if reps else 0
        phat = exceed / reps if reps else None
        bound = _linchpin_bound(n, config.epsilon)
        rows.append(
            {
                "length": n,
                "reps": reps,
                "exceed_count": exceed,
                "exceed_prop": phat,
                "prop_mcse": math.sqrt(phat * (1 - phat) / reps) if reps else None,
                "bound": bound,
                "bound_vacuous": bound > 1.0,
            }
        )
        if reps:
            counts, _ = np.histogram(meds, bins=edges)
            for b in range(nbins):
                hist_rows.append(
                    {"length": n, "bin_left": float(edges[b]), "count": int(counts[b])}
                )
    columns = ["length", "reps", "exceed_count", "exceed_prop", "prop_mcse",
               "bound", "bound_vacuous"]
    return ExperimentReport(
        config=config,
        columns=columns,
        rows=rows,
        extras={"histogram": hist_rows, "histogram_columns": ["length", "bin_left", "count"]},
    )


def run_tour_stats(config: ExperimentConfig) -> ExperimentReport:
    if config.kind != "tour-stats":
        raise ConfigurationError("config.kind must be 'tour-stats'")
    trace, stats = run_regenerative_rw(
        config.df, config.sigma, config.tours, np.random.SeedSequence((config.seed,)),
        return_stats=True,
    )
    lengths = trace.tour_lengths()
    rows = [
        {
            "df": config.df,
            "sigma": config.sigma,
            "tours": trace.tour_count,
            "mean_tour_length": float(lengths.mean()),
            "sd_tour_length": float(lengths.std(ddof=1)) if trace.tour_count > 1 else None,
            "acceptance_rate": stats["acceptance_rate"],
            "total_steps": stats["total_steps"],
        }
    ]
    columns = ["df", "sigma", "tours", "mean_tour_length", "sd_tour_length",
               "acceptance_rate", "total_steps"]
    return ExperimentReport(config=config, columns=columns, rows=rows)


def quantile_report(
    trace_path,
    quantiles,
    methods=ALL_METHODS,
    confidence: float = 0.95,
    kde: KdeConfig = KdeConfig(),
):
    """One report row per (q, method) for a stored trace CSV.  RS requires
    the three-column format with regeneration flags."""
    values, flags = read_trace_csv(trace_path)
    scalar = ScalarTrace(values)
    regen_trace = RegenTrace(values, flags) if flags is not None else None
    rows = []
    for q in quantiles:
        spec = QuantileSpec(q)
        for method in methods:
            if method == "BM":
                est = bm_quantile_ci(scalar, spec, confidence, kde)
            elif method == "SBM":
                est = sbm_quantile_ci(scalar, spec, confidence)
            elif method == "RS":
                if regen_trace is None:
                    raise InvalidInputError(
                        "RS requested but the trace file has no regen column"
                    )
                est = rs_quantile_ci(regen_trace, spec, confidence, kde)
            else:
                raise InvalidInputError(f"unknown method {method!r}")
            d = est.details
            rows.append(
                {
                    "q": q,
                    "method": method,
                    "point": est.point,
                    "avar": est.avar,
                    "mcse": est.mcse,
                    "ci_low": est.ci_low,
                    "ci_high": est.ci_high,
                    "confidence": confidence,
                    "bandwidth": d.get("bandwidth"),
                    "batch_count": d.get("batch_count"),
                    "batch_size": d.get("batch_size"),
                    "block_length": d.get("block_length"),
                    "tours": d.get("tours"),
                }
            )
    return rows


QUANTILE_REPORT_COLUMNS = [
    "q", "method", "point", "avar", "mcse", "ci_low", "ci_high", "confidence",
    "bandwidth", "batch_count", "batch_size", "block_length", "tours",
]
