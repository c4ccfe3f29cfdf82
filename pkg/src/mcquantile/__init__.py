"""Quantile estimates for MCMC output with Monte Carlo standard errors.

Interval constructions: batch means (BM), subsampling bootstrap (SBM) and
regenerative simulation (RS), plus finite-sample error-bound calculators and
two reference samplers for replication studies.
"""
from .batch_means import BatchLayout, bm_quantile_ci, bm_sigma2, default_batch_layout
from .bounds import (
    BoundDomainError,
    PolynomialErgodicity,
    TargetCdf,
    UniformErgodicity,
    a_grid,
    bound_polynomial,
    bound_uniform,
    bound_uniform_improved,
    gamma_eps,
    min_sample_size,
)
from .density import KdeConfig, kde_at, resolve_bandwidth, silverman_bandwidth
from .estimators import (
    BatchMeansQuantileCI,
    RegenerativeQuantileCI,
    SubsamplingQuantileCI,
)
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    quantile_report,
    run_coverage_experiment,
    run_linchpin_bound_experiment,
    run_tour_stats,
)
from .regen import (
    RegenTrace,
    RwRegenParams,
    regen_prob_accepted,
    rs_cdf_at,
    rs_gamma_hat,
    rs_quantile_ci,
    run_regenerative_rw,
)
from .samplers import (
    LinchpinState,
    StudentT,
    gamma_sample,
    linchpin_step,
    metropolis_rw_step,
    run_linchpin_chain,
    t_cdf,
    t_pdf,
    t_quantile,
)
from .subsampling import (
    SlidingQuantileWindow,
    SubsampleLayout,
    block_quantiles,
    default_subsample_layout,
    sbm_gamma2,
    sbm_quantile_ci,
)
from .trace import (
    DegenerateDataError,
    InvalidInputError,
    QuantileEstimate,
    QuantileSpec,
    ScalarTrace,
    ecdf,
    empirical_quantile,
    order_statistic,
    quantile_index,
    read_trace_csv,
    write_trace_csv,
)

__version__ = "0.1.0"
