"""Proposal interfaces.

Three layers:

* :class:`BasicProposal` -- a normalized density ``q(x; y)`` over the latents.
* :class:`ExtendedProposal` / :class:`AuxiliaryProposal` -- a proposal
  ``q(v, x; y)`` on an extended space plus the auxiliary ``r(v; x, y)`` that
  infers ``v`` back from ``(x, y)``.
* :class:`WeightedProposal` -- what the entropy estimators consume: it draws
  ``(v, x) ~ q`` together with ``log w = log p(x,y) r(v;x,y) / q(v,x;y)``
  (``E[w] = p(y)``), and draws ``v ~ r(.; x, y)`` together with
  ``log w' = log q(v,x;y) / (p(x,y) r(v;x,y))`` (``E[w'] = 1/p(y)`` when
  ``x ~ p(x | y)``).
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Mapping

import numpy as np

from ..errors import InvalidSelection
from ..model import JointModel, Selection, merge


class BasicProposal(ABC):
    """Normalized proposal density ``q(x; y)`` over the latents of a selection."""

    def __init__(self, model: JointModel, selection: Selection):
        if selection.is_full:
            raise InvalidSelection("selection has no latent addresses to propose")
        self.model = model
        self.selection = selection

    @abstractmethod
    def propose(self, rng, y: Mapping, size: int | None = None):
        """Return ``(x, log_q)``; batched over ``size`` particles if given."""

    @abstractmethod
    def assess(self, x: Mapping, y: Mapping):
        """Return ``log q(x; y)`` (broadcasts over a batched ``x``)."""

    label = "basic"


class ExtendedProposal(ABC):
    @abstractmethod
    def propose(self, rng, y):
        """Return ``(v, x, log q(v, x; y))``."""

    @abstractmethod
    def assess(self, v, x, y):
        ...


class AuxiliaryProposal(ABC):
    @abstractmethod
    def propose_aux(self, rng, x, y):
        """Return ``(v, log r(v; x, y))``."""

    @abstractmethod
    def assess_aux(self, v, x, y):
        ...


class WeightedProposal(ABC):
    """Proposal paired with its auxiliary, exposing the two log weights."""

    model: JointModel
    selection: Selection
    n_particles = 1
    label = "weighted"

    @abstractmethod
    def propose(self, rng, y):
        """Draw ``(v, x) ~ q(.; y)``; return ``(v, x, log w)``."""

    @abstractmethod
    def propose_aux(self, rng, x, y):
        """Draw ``v ~ r(.; x, y)``; return ``(v, log w')``."""

    def log_joint(self, x, y):
        return self.model.log_joint(merge(x, y))


class ImportanceProposal(WeightedProposal):
    """A basic proposal used directly (no auxiliary variables)."""

    def __init__(self, base: BasicProposal):
        self.base = base
        self.model = base.model
        self.selection = base.selection
        self.label = base.label

    def propose(self, rng, y):
        x, log_q = self.base.propose(rng, y)
        return None, x, float(self.log_joint(x, y) - log_q)

    def propose_aux(self, rng, x, y):
        return None, float(self.base.assess(x, y) - self.log_joint(x, y))


class GenericPair(WeightedProposal):
    """Weights computed from explicit extended and auxiliary densities."""

    def __init__(self, q: ExtendedProposal, r: AuxiliaryProposal, model, selection, label="extended"):
        self.q, self.r = q, r
        self.model, self.selection = model, selection
        self.label = label

    def propose(self, rng, y):
        v, x, log_q = self.q.propose(rng, y)
        log_r = self.r.assess_aux(v, x, y)
        return v, x, float(self.log_joint(x, y) + log_r - log_q)

    def propose_aux(self, rng, x, y):
        v, log_r = self.r.propose_aux(rng, x, y)
        log_q = self.q.assess(v, x, y)
        return v, float(log_q - self.log_joint(x, y) - log_r)


def as_weighted(proposal) -> WeightedProposal:
    if isinstance(proposal, WeightedProposal):
        return proposal
    if isinstance(proposal, BasicProposal):
        return ImportanceProposal(proposal)
    raise TypeError(f"cannot use {type(proposal).__name__} as a proposal")


def scalar(x) -> dict:
    """Convert a one-particle assignment to plain numpy scalars."""
    return {k: np.asarray(v)[()] for k, v in x.items()}
