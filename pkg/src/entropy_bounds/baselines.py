"""Model-free k-nearest-neighbour entropy baseline and a timing harness."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma

from .errors import DegenerateSample

BRUTE_FORCE_BELOW = 512
JITTER_SCALE = 1e-10


@dataclass(frozen=True)
class KnnEntropyConfig:
    k: int = 4
    jitter_seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


def _as_samples(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError("samples must be a list of equal-length real vectors")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples contain non-finite values")
    return x


def _jitter_duplicates(x, seed):
    """Add tiny uniform noise to repeated points so every distance is positive."""
    _, inverse, counts = np.unique(x, axis=0, return_inverse=True, return_counts=True)
    dup = counts[inverse.ravel()] > 1
    if not np.any(dup):
        return x
    rng = np.random.default_rng(seed)
    scale = JITTER_SCALE * np.maximum(1.0, np.abs(x[dup]))
    x = x.copy()
    x[dup] += rng.uniform(-scale, scale)
    return x


def kth_neighbor_distances(x: np.ndarray, k: int, brute_force: bool | None = None) -> np.ndarray:
    """Max-norm distance from each point to its ``k``-th nearest other point."""
    n = len(x)
    if brute_force is None:
        brute_force = n < BRUTE_FORCE_BELOW
    if brute_force:
        d = np.max(np.abs(x[:, None, :] - x[None, :, :]), axis=-1)
        np.fill_diagonal(d, np.inf)
        return np.partition(d, k - 1, axis=1)[:, k - 1]
    dist, _ = cKDTree(x).query(x, k=k + 1, p=np.inf)
    return dist[:, k]


def knn_entropy(samples, cfg: KnnEntropyConfig | None = None, brute_force: bool | None = None) -> float:
    """Kozachenko-Leonenko entropy estimate (nats) under the max norm.

    ``psi(N) - psi(k) + (d / N) sum_i log(eps_i)`` with ``eps_i`` twice the
    distance to the ``k``-th neighbour; the unit max-norm ball has volume
    ``2^d``, which the doubling absorbs.
    """
    cfg = cfg or KnnEntropyConfig()
    x = _as_samples(samples)
    n, d = x.shape
    if cfg.k >= n:
        raise ValueError(f"need more than k={cfg.k} samples, got {n}")
    x = _jitter_duplicates(x, cfg.jitter_seed)
    r = kth_neighbor_distances(x, cfg.k, brute_force)
    if np.any(r <= 0):
        raise DegenerateSample("zero neighbour distance after jitter")
    return float(digamma(n) - digamma(cfg.k) + d * np.mean(np.log(2.0 * r)))


@dataclass
class TimingRecord:
    estimator: str
    parameter: float
    wall_time_ms: float
    estimates: tuple


def runtime_profile(tasks: Sequence[tuple[str, Callable, Sequence]]) -> list[TimingRecord]:
    """Time each ``(name, fn, grid)`` task at every grid value.

    ``fn(parameter)`` returns a float or a tuple of floats.  Grids must be
    strictly increasing.
    """
    records = []
    for name, fn, grid in tasks:
        grid = list(grid)
        if not grid:
            raise ValueError(f"task {name!r} has an empty grid")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError(f"task {name!r} grid is not increasing")
        for param in grid:
            start = time.perf_counter()
            value = fn(param)
            elapsed = 1e3 * (time.perf_counter() - start)
            est = tuple(np.atleast_1d(np.asarray(value, dtype=float)).tolist())
            records.append(TimingRecord(name, param, elapsed, est))
    return records
