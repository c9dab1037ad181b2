"""Entropy bound estimators, MCMC refresh and diagnostics."""

from .bounds import (
    LOWER,
    UPPER,
    BoundEstimate,
    EstimatorConfig,
    IntervalEstimate,
    entropy_interval,
    entropy_lower,
    entropy_upper,
    exact_entropy_plugin,
    outer_sample,
    plugin_terms,
)
from .diagnostics import WeightDiagnostics, coverage_probability, log_weight_diagnostics
from .mcmc import mcmc_refresh, mh_sweep
