"""Monte Carlo upper and lower bounds on the entropy of a variable subset.

Both estimators average log weights over ``n`` outer joint draws and ``m``
inner repetitions:

* upper: draw ``(X~, Y) ~ p``, then ``(V, X) ~ q(.; Y)`` and score
  ``log w = log p(X,Y) r(V;X,Y) / q(V,X;Y)``; the bound is ``-mean(log w)``.
* lower: draw ``(X', Y) ~ p`` and ``V ~ r'(.; X', Y)``; score
  ``log w' = log q'(V,X';Y) / (p(X',Y) r'(V;X',Y))``; the bound is
  ``mean(log w')``.

Replicate ``i`` draws from substreams keyed by ``(seed, ..., i)`` so
results do not depend on how replicates are scheduled across workers.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import TooLargeToEnumerate
from ..logspace import substream
from ..model import JointModel, Selection, restrict, split
from ..proposals.base import as_weighted
from .mcmc import mcmc_refresh

LOWER = "lower"
UPPER = "upper"

# substream tags
_OUTER, _INNER = 0, 1
_SIDE_TAG = {LOWER: 0, UPPER: 1}


@dataclass(frozen=True)
class EstimatorConfig:
    """Replicate counts, chain length, seed and worker count."""

    n: int
    m: int = 1
    mcmc_steps: int = 0
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be >= 1")
        if self.mcmc_steps < 0:
            raise ValueError("mcmc_steps must be >= 0")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class BoundEstimate:
    """One-sided entropy estimate.

    ``terms`` has shape ``(n, m)`` and holds the per-replicate contributions
    on the entropy scale (``-log w`` for the upper side, ``log w'`` for the
    lower side), so ``point == terms.mean()``.
    """

    kind: str
    point: float
    terms: np.ndarray
    variance: float
    n: int
    m: int
    stderr: float
    invalid: bool = False
    label: str = ""
    n_particles: int = 1
    wall_time_ms: float = 0.0
    exact: bool = False

    @property
    def replicate_means(self) -> np.ndarray:
        return self.terms.mean(axis=1)

    @classmethod
    def from_terms(cls, kind, terms, **kwargs) -> BoundEstimate:
        terms = np.asarray(terms, dtype=float)
        if terms.ndim == 1:
            terms = terms[:, None]
        n, m = terms.shape
        invalid = not np.all(np.isfinite(terms))
        with np.errstate(invalid="ignore"):
            point = float(terms.mean())
            variance = float(terms.var(ddof=1)) if terms.size > 1 else 0.0
            rows = terms.mean(axis=1)
            if n > 1:
                stderr = float(rows.std(ddof=1) / np.sqrt(n))
            else:
                stderr = float(np.sqrt(variance / terms.size)) if terms.size > 1 else 0.0
        if invalid:
            point = np.inf if kind == UPPER else -np.inf
        return cls(kind, point, terms, variance, n, m, stderr, invalid, **kwargs)


ROUNDING_ULPS = 64


@dataclass
class IntervalEstimate:
    """Lower and upper entropy bounds assembled into an interval."""

    lower: BoundEstimate
    upper: BoundEstimate

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower.point + self.upper.point)

    @property
    def width(self) -> float:
        return self.upper.point - self.lower.point

    @property
    def negative_width(self) -> bool:
        return self.width < 0

    @property
    def invalid(self) -> bool:
        return self.lower.invalid or self.upper.invalid

    @property
    def magnitude(self) -> float:
        """Size of the numbers summed into the endpoints, for rounding error."""
        return max(abs(self.lower.point), abs(self.upper.point))

    def contains(self, value, slack=0.0) -> bool:
        """``lower - slack <= value <= upper + slack``, up to float rounding."""
        mag = self.magnitude
        mag = max(1.0, mag) if np.isfinite(mag) else 1.0
        tol = slack + ROUNDING_ULPS * np.finfo(float).eps * mag
        return self.lower.point - tol <= value <= self.upper.point + tol


# --- outer samples ----------------------------------------------------------


def outer_sample(model: JointModel, seed: int, i: int, key: Sequence[int] = ()):
    """Joint draw ``Z_i ~ p`` for replicate ``i`` under a stream key."""
    return model.simulate(substream(seed, _OUTER, *key, i))


def _map(fn: Callable, n: int, workers: int):
    if workers <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n)))


def _outer_key(key, side, shared_outer, outer_key=None):
    if outer_key is not None:
        return tuple(outer_key)
    return tuple(key) if shared_outer else tuple(key) + (_SIDE_TAG[side],)


# --- full selections --------------------------------------------------------


def _is_enumerable(model) -> bool:
    try:
        model.joint_table
    except (AttributeError, TooLargeToEnumerate):
        return False
    return True


def exact_entropy_plugin(model, sel) -> float:
    """Exact entropy of a subset of an enumerable discrete model."""
    from ..models.bayesnet import table_entropy

    targets = sel.targets if isinstance(sel, Selection) else sel
    return table_entropy(model.marginal(targets))


def _full_selection(kind, model, sel, cfg, okey):
    """Both bounds of a selection with no latents collapse to the plug-in."""
    if _is_enumerable(model):
        h = exact_entropy_plugin(model, sel)
        terms = np.full((cfg.n, cfg.m), h)
        est = BoundEstimate.from_terms(kind, terms, label="exact", exact=True)
        est.stderr = 0.0
        return est

    def one(i):
        z = outer_sample(model, cfg.seed, i, okey)
        return np.full(cfg.m, -float(model.log_joint(z)))

    return BoundEstimate.from_terms(kind, np.array(_map(one, cfg.n, cfg.workers)), label="plugin")


# --- the two bounds ---------------------------------------------------------


def entropy_upper(model, sel: Selection, proposal, cfg: EstimatorConfig,
                  key: Sequence[int] = (), shared_outer: bool = True,
                  outer_key: Sequence[int] | None = None) -> BoundEstimate:
    """Upper bound on ``H(Y)`` from forward proposal weights.

    Parameters
    ----------
    proposal : WeightedProposal or BasicProposal
        Pairs the forward proposal with its auxiliary.
    key : sequence of int
        Extra substream key, distinguishing terms of a composed measure.
    shared_outer : bool
        If False the outer draws are keyed by side as well, so the two
        sides of an interval use independent joint samples.
    outer_key : sequence of int, optional
        Explicit substream key for the outer joint draws, overriding
        ``key`` and ``shared_outer``.
    """
    okey = _outer_key(key, UPPER, shared_outer, outer_key)
    if sel.is_full:
        return _full_selection(UPPER, model, sel, cfg, okey)
    prop = as_weighted(proposal)

    def one(i):
        y = restrict(outer_sample(model, cfg.seed, i, okey), sel.targets)
        rng = substream(cfg.seed, _INNER, *key, _SIDE_TAG[UPPER], i)
        return [-prop.propose(rng, y)[2] for _ in range(cfg.m)]

    start = time.perf_counter()
    terms = np.array(_map(one, cfg.n, cfg.workers), dtype=float)
    elapsed = 1e3 * (time.perf_counter() - start)
    return BoundEstimate.from_terms(UPPER, terms, label=prop.label,
                                    n_particles=prop.n_particles, wall_time_ms=elapsed)


def entropy_lower(model, sel: Selection, proposal, cfg: EstimatorConfig,
                  key: Sequence[int] = (), shared_outer: bool = True,
                  outer_key: Sequence[int] | None = None) -> BoundEstimate:
    """Lower bound on ``H(Y)`` from auxiliary weights at joint samples.

    With ``cfg.m > 1`` the latent part is refreshed by ``cfg.mcmc_steps``
    single-site Metropolis-Hastings sweeps between inner repetitions; with
    ``mcmc_steps == 0`` all inner repetitions reuse the same latent draw.
    """
    okey = _outer_key(key, LOWER, shared_outer, outer_key)
    if sel.is_full:
        return _full_selection(LOWER, model, sel, cfg, okey)
    prop = as_weighted(proposal)

    def one(i):
        y, x = split(outer_sample(model, cfg.seed, i, okey), sel)
        rng = substream(cfg.seed, _INNER, *key, _SIDE_TAG[LOWER], i)
        out = []
        for j in range(cfg.m):
            if j > 0:
                for _ in range(cfg.mcmc_steps):
                    x = mcmc_refresh(model, sel, y, x, rng)
            out.append(prop.propose_aux(rng, x, y)[1])
        return out

    start = time.perf_counter()
    terms = np.array(_map(one, cfg.n, cfg.workers), dtype=float)
    elapsed = 1e3 * (time.perf_counter() - start)
    return BoundEstimate.from_terms(LOWER, terms, label=prop.label,
                                    n_particles=prop.n_particles, wall_time_ms=elapsed)


def entropy_interval(model, sel: Selection, lower_proposal, upper_proposal=None,
                     cfg: EstimatorConfig | None = None, shared_outer: bool = True,
                     key: Sequence[int] = ()) -> IntervalEstimate:
    """Run both bounds; ``upper_proposal`` defaults to ``lower_proposal``."""
    if cfg is None:
        raise ValueError("an EstimatorConfig is required")
    if upper_proposal is None:
        upper_proposal = lower_proposal
    lo = entropy_lower(model, sel, lower_proposal, cfg, key, shared_outer)
    hi = entropy_upper(model, sel, upper_proposal, cfg, key, shared_outer)
    return IntervalEstimate(lo, hi)


def plugin_terms(model, sel: Selection, cfg: EstimatorConfig, key: Sequence[int] = (),
                 marginal_logpdf: Callable | None = None) -> np.ndarray:
    """``-log p(Y_i)`` at the shared outer draws, given an exact marginal density."""
    if marginal_logpdf is None:
        marginal_logpdf = lambda y: model.marginal_logpdf(y, sel.targets)  # noqa: E731

    def one(i):
        y = restrict(outer_sample(model, cfg.seed, i, tuple(key)), sel.targets)
        return -float(marginal_logpdf(y))

    return np.array(_map(one, cfg.n, cfg.workers))
