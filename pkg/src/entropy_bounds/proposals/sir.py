"""Sampling-importance-resampling proposals, plain and nested."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import AllWeightsZero, ZeroDensityConditioningPoint
from ..logspace import logmeanexp, sample_categorical
from ..model import merge, take
from .base import (
    AuxiliaryProposal,
    BasicProposal,
    ExtendedProposal,
    GenericPair,
    WeightedProposal,
    scalar,
)


@dataclass
class SIRState:
    """Auxiliary record ``v = (x_1..x_P, k)`` of one SIR run."""

    particles: dict
    index: int
    log_ratios: np.ndarray


class SIRProposal(WeightedProposal):
    """SIR over ``n_particles`` draws from a basic proposal.

    The forward weight is the usual SIR estimate of ``p(y)``: the log mean of
    ``p(x_j, y) / q0(x_j; y)`` over the particle set.
    """

    def __init__(self, base: BasicProposal, n_particles: int):
        if n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        self.base = base
        self.model = base.model
        self.selection = base.selection
        self.n_particles = int(n_particles)
        self.label = f"sir-{base.label}"

    def _log_ratios(self, particles, y, log_q0=None):
        if log_q0 is None:
            log_q0 = self.base.assess(particles, y)
        log_p = self.model.log_joint(merge(particles, y))
        return np.asarray(log_p - log_q0, dtype=float)

    def propose(self, rng, y):
        particles, log_q0 = self.base.propose(rng, y, size=self.n_particles)
        log_ratios = self._log_ratios(particles, y, log_q0)
        if np.all(np.isneginf(log_ratios)):
            raise AllWeightsZero("every SIR particle has zero joint density")
        k = int(sample_categorical(rng, log_ratios))
        x = scalar(take(particles, k))
        return SIRState(particles, k, log_ratios), x, float(logmeanexp(log_ratios))

    def propose_aux(self, rng, x, y):
        P = self.n_particles
        if np.isneginf(self.model.log_joint(merge(x, y))):
            raise ZeroDensityConditioningPoint("p(x, y) = 0 at the conditioning point")
        k = int(rng.integers(P))
        x_batch = {a: np.asarray(v)[None] for a, v in x.items()}
        if P > 1:
            others, _ = self.base.propose(rng, y, size=P - 1)
            particles = {
                a: np.concatenate([others[a][:k], x_batch[a], others[a][k:]]) for a in x
            }
        else:
            particles = x_batch
        log_ratios = self._log_ratios(particles, y)
        return SIRState(particles, k, log_ratios), float(-logmeanexp(log_ratios))

    # explicit extended densities, for checking the simplified weights

    def log_q_extended(self, v: SIRState, x, y):
        """``log q((x_1..x_P, k), x; y)``."""
        log_q0 = self.base.assess(v.particles, y)
        log_ratios = self._log_ratios(v.particles, y, log_q0)
        total = np.logaddexp.reduce(log_ratios)
        return float(np.sum(log_q0) + log_ratios[v.index] - total)

    def log_r_extended(self, v: SIRState, x, y):
        """``log r((x_1..x_P, k); x, y)``."""
        log_q0 = np.asarray(self.base.assess(v.particles, y), dtype=float)
        others = np.delete(log_q0, v.index)
        return float(np.sum(others) - np.log(self.n_particles))

    def as_generic_pair(self) -> GenericPair:
        return GenericPair(_SIRForward(self), _SIRBackward(self), self.model, self.selection,
                           label=self.label + "-generic")


class _SIRForward(ExtendedProposal):
    def __init__(self, sir):
        self.sir = sir

    def propose(self, rng, y):
        v, x, _ = self.sir.propose(rng, y)
        return v, x, self.sir.log_q_extended(v, x, y)

    def assess(self, v, x, y):
        return self.sir.log_q_extended(v, x, y)


class _SIRBackward(AuxiliaryProposal):
    def __init__(self, sir):
        self.sir = sir

    def propose_aux(self, rng, x, y):
        v, _ = self.sir.propose_aux(rng, x, y)
        return v, self.sir.log_r_extended(v, x, y)

    def assess_aux(self, v, x, y):
        return self.sir.log_r_extended(v, x, y)


def sir_propose(base: BasicProposal, n_particles: int, rng, y):
    """Return ``(v, x, log w)`` for one SIR run."""
    return SIRProposal(base, n_particles).propose(rng, y)


def sir_aux_propose(base: BasicProposal, n_particles: int, rng, x, y):
    """Return ``(v, log w')`` for one conditional SIR run retaining ``x``."""
    return SIRProposal(base, n_particles).propose_aux(rng, x, y)


@dataclass
class NestedSIRState:
    records: list
    index: int
    log_xi: np.ndarray


class NestedSIRProposal(WeightedProposal):
    """SIR over the auxiliary variables of an extended base proposal.

    ``P`` copies of the base auxiliary record are used to estimate the base
    marginal ``q0(x; y)``: one from the base proposal itself (forward) and the
    rest from the base auxiliary proposal.
    """

    def __init__(self, base: WeightedProposal, n_particles: int):
        if n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        self.base = base
        self.model = base.model
        self.selection = base.selection
        self.n_particles = int(n_particles)
        self.label = f"nested-sir-{base.label}"

    def propose(self, rng, y):
        P = self.n_particles
        v0, x, log_w0 = self.base.propose(rng, y)
        k = int(rng.integers(P))
        records, log_xi_rel = [], []
        for _ in range(P - 1):
            v, log_w_aux = self.base.propose_aux(rng, x, y)
            records.append(v)
            log_xi_rel.append(log_w_aux)
        records.insert(k, v0)
        log_xi_rel.insert(k, -log_w0)
        # xi_k / p(x, y) = q0(v_k, x; y) / (r0(v_k; x, y) p(x, y))
        log_xi_rel = np.asarray(log_xi_rel, dtype=float)
        log_p = float(self.log_joint(x, y))
        return NestedSIRState(records, k, log_xi_rel + log_p), x, float(-logmeanexp(log_xi_rel))

    def propose_aux(self, rng, x, y):
        records, log_xi_rel = [], []
        for _ in range(self.n_particles):
            v, log_w_aux = self.base.propose_aux(rng, x, y)
            records.append(v)
            log_xi_rel.append(log_w_aux)
        log_xi_rel = np.asarray(log_xi_rel, dtype=float)
        log_p = float(self.log_joint(x, y))
        return NestedSIRState(records, -1, log_xi_rel + log_p), float(logmeanexp(log_xi_rel))

