"""Interval estimates of entropy and derived information measures."""

from .estimators import EstimatorConfig, entropy_interval, entropy_lower, entropy_upper
from .measures import (
    cmi_interval,
    conditional_entropy_interval,
    dual_correlation_interval,
    interaction_information_interval,
    rank_by_conditional_entropy,
    total_correlation_interval,
)
from .model import Address, select

__all__ = [
    "Address",
    "EstimatorConfig",
    "cmi_interval",
    "conditional_entropy_interval",
    "dual_correlation_interval",
    "entropy_interval",
    "entropy_lower",
    "entropy_upper",
    "interaction_information_interval",
    "rank_by_conditional_entropy",
    "select",
    "total_correlation_interval",
]
