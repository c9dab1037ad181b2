"""Interval estimates of information measures built from entropy bounds.

Every measure here is a linear combination ``sum_k c_k H(S_k)`` of marginal
entropies.  Its lower bound takes the lower entropy bound of each term with
``c_k > 0`` and the upper bound of each term with ``c_k < 0``; the upper
bound does the reverse.  With ``shared_outer`` (the default) every term and
both sides read the same outer joint draws, which keeps the paired weight
terms positively correlated and so reduces the variance of the differences.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidSelection, SharingModeMismatch
from .estimators.bounds import (
    LOWER,
    UPPER,
    BoundEstimate,
    EstimatorConfig,
    IntervalEstimate,
    entropy_lower,
    entropy_upper,
)
from .model import Address, as_address, select
from .proposals.factory import ProposalFactory

CONDITIONAL_ENTROPY = "conditional-entropy"
CMI = "cmi"
TOTAL_CORRELATION = "total-correlation"
INTERACTION = "interaction-information"
DUAL_CORRELATION = "dual-correlation"


def _as_set(addresses) -> frozenset:
    if addresses is None:
        return frozenset()
    if isinstance(addresses, (str, Address)):
        addresses = [addresses]
    return frozenset(as_address(a) for a in addresses)


@dataclass(frozen=True)
class PlanTerm:
    targets: frozenset
    coef: float

    @property
    def name(self):
        return "H({" + ",".join(sorted(map(str, self.targets))) + "})"


@dataclass
class CompositionPlan:
    """Signed marginal-entropy terms of one measure."""

    kind: str
    terms: list
    shared_outer: bool = True

    @classmethod
    def from_pairs(cls, kind, pairs: Iterable, shared_outer=True) -> CompositionPlan:
        """Merge ``(address set, coefficient)`` pairs, dropping empty sets and zeros."""
        coefs: dict[frozenset, float] = {}
        order: list[frozenset] = []
        for targets, c in pairs:
            key = _as_set(targets)
            if not key:
                continue
            if key not in coefs:
                coefs[key] = 0.0
                order.append(key)
            coefs[key] += c
        terms = [PlanTerm(k, coefs[k]) for k in order if coefs[k] != 0]
        return cls(kind, terms, shared_outer)

    def sides(self, term: PlanTerm):
        """Which entropy bound feeds ``term`` on the (lower, upper) measure side."""
        return (LOWER, UPPER) if term.coef > 0 else (UPPER, LOWER)

    def combine(self, values: Mapping[frozenset, float]) -> float:
        return float(sum(t.coef * values[t.targets] for t in self.terms))


@dataclass
class TermEstimate:
    term: PlanTerm
    lower: BoundEstimate
    upper: BoundEstimate


@dataclass
class MeasureEstimate(IntervalEstimate):
    """Interval on a measure plus the per-term entropy bounds behind it."""

    plan: CompositionPlan = None
    term_estimates: list = field(default_factory=list)

    @property
    def magnitude(self) -> float:
        # endpoints are signed sums of term estimates; cancellation error scales with the terms
        total = sum(abs(e.term.coef) * max(abs(e.lower.point), abs(e.upper.point))
                    for e in self.term_estimates)
        return max(total, super().magnitude)


def _check_disjoint(sets: Sequence[frozenset]):
    seen: set = set()
    for s in sets:
        if seen & s:
            raise InvalidSelection(f"argument sets overlap on {sorted(map(str, seen & s))}")
        seen |= s


def evaluate_plan(model, plan: CompositionPlan, factory: ProposalFactory, cfg: EstimatorConfig,
                  key: Sequence[int] = ()) -> MeasureEstimate:
    """Estimate every term of ``plan`` and assemble both sides.

    Term ``k`` uses inner streams keyed by ``(*key, k)``.  With a shared
    plan all outer draws come from one stream; otherwise each term and
    side gets its own.
    """
    estimates = []
    for k, term in enumerate(plan.terms):
        sel = select(model, sorted(term.targets), allow_full=True)
        prop = None if sel.is_full else factory(model, sel)
        tkey = (*key, k)
        if plan.shared_outer:
            lo = entropy_lower(model, sel, prop, cfg, key=tkey, outer_key=())
            hi = entropy_upper(model, sel, prop, cfg, key=tkey, outer_key=())
        else:
            lo = entropy_lower(model, sel, prop, cfg, key=tkey, shared_outer=False)
            hi = entropy_upper(model, sel, prop, cfg, key=tkey, shared_outer=False)
        estimates.append(TermEstimate(term, lo, hi))
    zero = np.zeros((cfg.n, cfg.m))
    lower_terms = zero + sum(
        e.term.coef * (e.lower if e.term.coef > 0 else e.upper).terms for e in estimates
    )
    upper_terms = zero + sum(
        e.term.coef * (e.upper if e.term.coef > 0 else e.lower).terms for e in estimates
    )
    lo = BoundEstimate.from_terms(LOWER, lower_terms, label=plan.kind)
    hi = BoundEstimate.from_terms(UPPER, upper_terms, label=plan.kind)
    lo.invalid = hi.invalid = any(e.lower.invalid or e.upper.invalid for e in estimates)
    return MeasureEstimate(lo, hi, plan=plan, term_estimates=estimates)


# --- plans ------------------------------------------------------------------


def conditional_entropy_plan(a1, a2, shared_outer=True) -> CompositionPlan:
    a1, a2 = _as_set(a1), _as_set(a2)
    _check_disjoint([a1, a2])
    return CompositionPlan.from_pairs(CONDITIONAL_ENTROPY, [(a1 | a2, 1), (a2, -1)], shared_outer)


def cmi_plan(a1, a2, a0=None, shared_outer=True) -> CompositionPlan:
    a1, a2, a0 = _as_set(a1), _as_set(a2), _as_set(a0)
    _check_disjoint([a0, a1, a2])
    pairs = [(a0 | a1, 1), (a0 | a2, 1), (a0 | a1 | a2, -1), (a0, -1)]
    return CompositionPlan.from_pairs(CMI, pairs, shared_outer)


def total_correlation_plan(sets, a0=None, shared_outer=True) -> CompositionPlan:
    sets, a0 = [_as_set(s) for s in sets], _as_set(a0)
    if len(sets) < 2:
        raise InvalidSelection("total correlation needs at least two argument sets")
    _check_disjoint([a0, *sets])
    union = frozenset().union(*sets)
    pairs = [(s | a0, 1) for s in sets]
    pairs += [(a0, -(len(sets) - 1)), (union | a0, -1)]
    return CompositionPlan.from_pairs(TOTAL_CORRELATION, pairs, shared_outer)


def interaction_information_plan(sets, a0=None, shared_outer=True) -> CompositionPlan:
    """``sum over nonempty S of (-1)^(n-|S|) H(union_S | A0)``.

    For two sets this is ``-I(A1 : A2 | A0)``; for the exclusive-or triple
    of fair bits it is ``-log 2``.
    """
    sets, a0 = [_as_set(s) for s in sets], _as_set(a0)
    n = len(sets)
    if n < 2:
        raise InvalidSelection("interaction information needs at least two argument sets")
    _check_disjoint([a0, *sets])
    pairs = []
    for size in range(1, n + 1):
        sign = (-1) ** (n - size)
        for subset in itertools.combinations(sets, size):
            pairs.append((frozenset().union(*subset) | a0, sign))
            pairs.append((a0, -sign))
    return CompositionPlan.from_pairs(INTERACTION, pairs, shared_outer)


def dual_correlation_plan(sets, a0=None, shared_outer=True) -> CompositionPlan:
    """``H(union | A0) - sum_i H(A_i | A0 and all other A_j)``."""
    sets, a0 = [_as_set(s) for s in sets], _as_set(a0)
    n = len(sets)
    if n < 2:
        raise InvalidSelection("dual correlation needs at least two argument sets")
    _check_disjoint([a0, *sets])
    full = frozenset().union(*sets) | a0
    pairs = [(full, 1 - n), (a0, -1)] + [(full - s, 1) for s in sets]
    return CompositionPlan.from_pairs(DUAL_CORRELATION, pairs, shared_outer)


# --- measure intervals ------------------------------------------------------


def conditional_entropy_interval(model, a1, a2, factory, cfg, shared_outer=True, key=()):
    """Interval on ``H(A1 | A2)``."""
    return evaluate_plan(model, conditional_entropy_plan(a1, a2, shared_outer), factory, cfg, key)


def cmi_interval(model, a1, a2, a0=None, factory=None, cfg=None, shared_outer=True, key=()):
    """Interval on ``I(A1 : A2 | A0)``; an empty ``a0`` gives mutual information."""
    return evaluate_plan(model, cmi_plan(a1, a2, a0, shared_outer), factory, cfg, key)


def total_correlation_interval(model, sets, a0=None, factory=None, cfg=None, shared_outer=True, key=()):
    return evaluate_plan(model, total_correlation_plan(sets, a0, shared_outer), factory, cfg, key)


def interaction_information_interval(model, sets, a0=None, factory=None, cfg=None,
                                     shared_outer=True, key=()):
    return evaluate_plan(model, interaction_information_plan(sets, a0, shared_outer), factory, cfg, key)


def dual_correlation_interval(model, sets, a0=None, factory=None, cfg=None, shared_outer=True, key=()):
    return evaluate_plan(model, dual_correlation_plan(sets, a0, shared_outer), factory, cfg, key)


def exact_measure(plan: CompositionPlan, entropy: Callable[[frozenset], float]) -> float:
    """Value of ``plan`` with exact entropies supplied by ``entropy``."""
    return float(sum(t.coef * entropy(t.targets) for t in plan.terms))


# --- ranking ----------------------------------------------------------------


@dataclass
class RankedCandidate:
    name: str
    addresses: frozenset
    estimate: MeasureEstimate

    @property
    def midpoint(self):
        return self.estimate.midpoint


def rank_by_conditional_entropy(model, candidates, target, conditioning=None, factory=None,
                                cfg=None, shared_outer=True) -> list[RankedCandidate]:
    """Order candidate sets ``t_j`` by the midpoint of ``H(target | t_j, conditioning)``.

    ``candidates`` is a mapping of names to address collections, or a
    sequence of addresses (each its own candidate).  Ascending conditional
    entropy is descending conditional mutual information with the target.
    Ties break by candidate name.
    """
    if isinstance(candidates, Mapping):
        items = [(str(k), _as_set(v)) for k, v in candidates.items()]
    else:
        items = [(str(c), _as_set(c)) for c in candidates]
    if not items:
        raise InvalidSelection("no candidates to rank")
    target, cond = _as_set(target), _as_set(conditioning)
    out = []
    for j, (name, addrs) in enumerate(items):
        _check_disjoint([target, cond, addrs])
        plan = conditional_entropy_plan(target, addrs | cond, shared_outer)
        est = evaluate_plan(model, plan, factory, cfg, key=(j,))
        out.append(RankedCandidate(name, addrs, est))
    out.sort(key=lambda r: (r.midpoint, r.name))
    return out


# --- covariance diagnostics -------------------------------------------------


@dataclass
class CovarianceReport:
    labels: list
    covariance: np.ndarray
    n: int

    @property
    def correlation(self) -> np.ndarray:
        sd = np.sqrt(np.diag(self.covariance))
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.covariance / np.outer(sd, sd)

    def index(self, label) -> int:
        return self.labels.index(label)

    def variance_of_difference(self, a, b) -> float:
        i, j = self.index(a), self.index(b)
        c = self.covariance
        return float(c[i, i] + c[j, j] - 2 * c[i, j])


def covariance_report(estimate: MeasureEstimate) -> CovarianceReport:
    """Sample covariance of the paired per-replicate term values.

    Columns are labelled ``"<side>:<term>"``; values are replicate means of
    each term's entropy contributions.
    """
    plan = estimate.plan
    if plan is None or not plan.shared_outer:
        raise SharingModeMismatch("covariance report needs shared outer samples")
    labels, cols = [], []
    for e in estimate.term_estimates:
        for side, b in ((LOWER, e.lower), (UPPER, e.upper)):
            labels.append(f"{side}:{e.term.name}")
            cols.append(b.replicate_means)
    data = np.stack(cols)
    cov = np.atleast_2d(np.cov(data, ddof=1))
    return CovarianceReport(labels, cov, data.shape[1])
