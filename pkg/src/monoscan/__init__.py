"""Multiscale monotonicity test based on local least concave majorants.

The test statistic scans every subinterval [i/n, j/n] of the unit interval,
fits the least concave majorant of the cumulated observation restricted to
the subinterval, and normalizes the largest gap by the interval length and
the noise level.  Large values witness a local increase of the underlying
signal.  Thresholds come from exact Monte Carlo calibration
(:func:`calibrate`) or from a distribution-free bound
(:func:`analytic_threshold`).

Two observation models are supported: a known-variance white-noise path
(:func:`scan` on the cumulated observation directly) and fixed-design
Gaussian regression with unknown variance (:func:`pair_and_estimate` then
:func:`scan_regression`).
"""

from .calibration import (
    GENERATOR_ID,
    MODELS,
    QuantileTable,
    analytic_threshold,
    calibrate,
    derive_stream,
    empirical_upper_quantile,
    null_regression_statistic,
    null_white_statistic,
    z_tail_bound,
)
from .errors import (
    ConfigError,
    DataError,
    DegenerateSampleError,
    DomainError,
    MonoscanError,
    PreconditionError,
)
from .experiments import (
    KINDS,
    AlternativeSpec,
    PowerReport,
    average,
    delta2,
    detectability,
    envelope_gap,
    guarantee_threshold,
    power_study,
    signal,
    simulate_regression_sample,
    simulate_white_path,
)
from .geometry import (
    ConcaveChain,
    GridFunction,
    concat_lcm,
    evaluate,
    lcm,
    max_deviation,
)
from .statistics import (
    RETAIN_ALL_MAX_N,
    PairedSample,
    ScanResult,
    cumulative_sum_diagram,
    pair_and_estimate,
    scan,
    scan_regression,
    violating_intervals,
)

__version__ = "0.1.0"

__all__ = [
    "AlternativeSpec",
    "ConcaveChain",
    "ConfigError",
    "DataError",
    "DegenerateSampleError",
    "DomainError",
    "GENERATOR_ID",
    "GridFunction",
    "KINDS",
    "MODELS",
    "MonoscanError",
    "PairedSample",
    "PowerReport",
    "PreconditionError",
    "QuantileTable",
    "RETAIN_ALL_MAX_N",
    "ScanResult",
    "analytic_threshold",
    "average",
    "calibrate",
    "concat_lcm",
    "cumulative_sum_diagram",
    "delta2",
    "derive_stream",
    "detectability",
    "empirical_upper_quantile",
    "envelope_gap",
    "evaluate",
    "guarantee_threshold",
    "lcm",
    "max_deviation",
    "null_regression_statistic",
    "null_white_statistic",
    "pair_and_estimate",
    "power_study",
    "scan",
    "scan_regression",
    "signal",
    "simulate_regression_sample",
    "simulate_white_path",
    "violating_intervals",
    "z_tail_bound",
]
