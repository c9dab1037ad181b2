"""Interval coverage and log-weight summary statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from ..errors import NonpositiveStddev


def coverage_probability(bias_lower, bias_upper, sd_lower, sd_upper, t) -> float:
    """Approximate probability that the interval covers the true entropy.

    ``Phi(sqrt(t) B_lower / sd_lower) * Phi(sqrt(t) B_upper / sd_upper)``,
    where the biases must come from an oracle and ``t = n * m``.
    """
    if not (sd_lower > 0 and sd_upper > 0):
        raise NonpositiveStddev("standard deviations must be positive")
    if t < 1:
        raise ValueError("sample budget t must be >= 1")
    s = np.sqrt(t)
    return float(norm.cdf(s * bias_lower / sd_lower) * norm.cdf(s * bias_upper / sd_upper))


@dataclass
class WeightDiagnostics:
    n: int
    mean: float
    variance: float
    stderr: float
    mad: float
    tail_t: np.ndarray
    tail_freq: np.ndarray

    def tail_stderr(self) -> np.ndarray:
        p = self.tail_freq
        return np.sqrt(p * (1 - p) / self.n)


def log_weight_diagnostics(log_w, log_z=None, t_grid=(1.0, 2.0, 3.0)) -> WeightDiagnostics:
    """Summaries of a sample of log importance weights.

    Parameters
    ----------
    log_w : array_like
        Log weights ``log h~(X) / g~(X)`` with ``X ~ g``.
    log_z : float, optional
        ``log(Z_h / Z_g)`` for the tail curve; defaults to the log of the
        sample mean weight.
    t_grid : sequence of float
        Offsets at which ``Pr[log w >= t + log_z]`` is estimated.
    """
    w = np.asarray(log_w, dtype=float).ravel()
    if w.size == 0:
        raise ValueError("no weights")
    mean = float(w.mean())
    var = float(w.var(ddof=1)) if w.size > 1 else 0.0
    if log_z is None:
        from ..logspace import logmeanexp

        log_z = float(logmeanexp(w))
    t = np.asarray(t_grid, dtype=float)
    freq = np.array([np.mean(w >= ti + log_z) for ti in t])
    return WeightDiagnostics(
        n=w.size,
        mean=mean,
        variance=var,
        stderr=float(np.sqrt(var / w.size)),
        mad=float(np.mean(np.abs(w - mean))),
        tail_t=t,
        tail_freq=freq,
    )
