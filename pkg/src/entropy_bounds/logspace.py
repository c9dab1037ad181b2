"""Log-space weight arithmetic, categorical sampling and RNG substreams."""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp


def logmeanexp(log_w, axis=None):
    """``log(mean(exp(log_w)))`` without leaving log space."""
    log_w = np.asarray(log_w, dtype=float)
    n = log_w.size if axis is None else log_w.shape[axis]
    return logsumexp(log_w, axis=axis) - np.log(n)


def normalize_log_weights(log_w):
    """Normalized probabilities from log weights; all ``-inf`` gives NaNs."""
    log_w = np.asarray(log_w, dtype=float)
    return np.exp(log_w - logsumexp(log_w))


def inverse_cdf(probs, u):
    """Indices ``i`` with ``cdf[i-1] <= u < cdf[i]`` for each uniform in ``u``."""
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(cdf) - 1)


def sample_categorical(rng: np.random.Generator, log_w, size=None):
    """Draw indices proportional to ``exp(log_w)`` by inverse CDF.

    One uniform per draw, consumed in index order.
    """
    probs = normalize_log_weights(log_w)
    u = rng.random(size)
    return inverse_cdf(probs, u)


def sample_rows(rng: np.random.Generator, probs):
    """One categorical draw per row of a ``(B, K)`` probability array."""
    probs = np.asarray(probs, dtype=float)
    cdf = np.cumsum(probs, axis=-1)
    u = rng.random(probs.shape[:-1]) * cdf[..., -1]
    idx = (cdf <= u[..., None]).sum(axis=-1)
    return np.minimum(idx, probs.shape[-1] - 1)


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator keyed by ``(seed, *keys)``.

    Streams depend only on the key tuple, so replicate ``i`` sees the same
    numbers no matter which worker runs it.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.default_rng(ss)
