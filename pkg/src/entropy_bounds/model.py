"""Generative-model abstraction, addresses, assignments and target selections.

An *assignment* is a plain ``dict`` mapping :class:`Address` to values.  Values
are numpy scalars/arrays; a *batched* assignment carries a leading particle
axis on every value and all model densities broadcast over it.
"""

from __future__ import annotations

import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CapabilityMissing, IncompleteAssignment, InvalidSelection

_ADDRESS_RE = re.compile(r"^\s*([^\[\]\s]+)\s*(?:\[\s*(\d+)\s*\])?\s*$")


@dataclass(frozen=True, order=True)
class Address:
    """Name of one random variable, optionally indexed by time."""

    name: str
    time: int | None = None

    def __post_init__(self):
        if self.time is not None and self.time < 0:
            raise ValueError(f"negative time index in address {self.name!r}")

    def __str__(self):
        return self.name if self.time is None else f"{self.name}[{self.time}]"

    @classmethod
    def parse(cls, text: str | Address) -> Address:
        """Parse ``"name"`` or ``"name[t]"``."""
        if isinstance(text, Address):
            return text
        match = _ADDRESS_RE.match(text)
        if match is None:
            raise ValueError(f"malformed address {text!r}")
        name, time = match.groups()
        return cls(name, None if time is None else int(time))


def as_address(a) -> Address:
    return Address.parse(a) if not isinstance(a, Address) else a


# --- supports ---------------------------------------------------------------


@dataclass(frozen=True)
class Discrete:
    cardinality: int

    def contains(self, value):
        v = np.asarray(value)
        return (v >= 0) & (v < self.cardinality) & (v == np.floor(v))


@dataclass(frozen=True)
class Real:
    def contains(self, value):
        return np.isfinite(np.asarray(value, dtype=float))


@dataclass(frozen=True)
class RealVector:
    length: int

    def contains(self, value):
        v = np.asarray(value, dtype=float)
        return np.all(np.isfinite(v), axis=-1)


Support = Discrete | Real | RealVector


def is_real(support: Support) -> bool:
    return isinstance(support, (Real, RealVector))


# --- assignments ------------------------------------------------------------

Assignment = dict


def merge(a: Mapping, b: Mapping) -> dict:
    """Union of two assignments with disjoint key sets."""
    overlap = a.keys() & b.keys()
    if overlap:
        raise ValueError(f"assignments overlap on {sorted(map(str, overlap))}")
    out = dict(a)
    out.update(b)
    return out


def restrict(a: Mapping, addresses: Iterable[Address]) -> dict:
    try:
        return {k: a[k] for k in addresses}
    except KeyError as exc:
        raise IncompleteAssignment(f"missing address {exc.args[0]}") from None


def take(batch: Mapping, index) -> dict:
    """Select particle(s) ``index`` from a batched assignment."""
    return {k: np.asarray(v)[index] for k, v in batch.items()}


def stack(assignments: Sequence[Mapping]) -> dict:
    keys = assignments[0].keys()
    return {k: np.stack([np.asarray(a[k]) for a in assignments]) for k in keys}


def assignments_equal(a: Mapping, b: Mapping) -> bool:
    if a.keys() != b.keys():
        return False
    return all(np.array_equal(np.asarray(a[k]), np.asarray(b[k])) for k in a)


# --- selections -------------------------------------------------------------


@dataclass(frozen=True)
class Selection:
    """Partition of a model's addresses into targets ``Y`` and latents ``X``."""

    targets: tuple[Address, ...]
    latents: tuple[Address, ...]

    @property
    def is_full(self) -> bool:
        return not self.latents

    @property
    def key(self) -> frozenset:
        return frozenset(self.targets)

    def __str__(self):
        return "{" + ",".join(map(str, self.targets)) + "}"


def select(model: JointModel, targets: Iterable, allow_full: bool = False) -> Selection:
    """Build a :class:`Selection` of ``targets`` in ``model``.

    Targets are reordered to the model's address order. A selection covering
    every address is rejected unless ``allow_full`` is set.
    """
    wanted = [as_address(t) for t in targets]
    if not wanted:
        raise InvalidSelection("target set is empty")
    if len(set(wanted)) != len(wanted):
        raise InvalidSelection("target set contains duplicates")
    known = set(model.addresses)
    unknown = [str(a) for a in wanted if a not in known]
    if unknown:
        raise InvalidSelection(f"unknown addresses {unknown}")
    wanted_set = set(wanted)
    tgt = tuple(a for a in model.addresses if a in wanted_set)
    lat = tuple(a for a in model.addresses if a not in wanted_set)
    if not lat and not allow_full:
        raise InvalidSelection("selection covers every address; latent set is empty")
    return Selection(tgt, lat)


def split(a: Mapping, sel: Selection) -> tuple[dict, dict]:
    """Split a complete assignment into its target and latent parts."""
    unknown = set(sel.targets) - a.keys()
    if unknown:
        raise InvalidSelection(f"unknown addresses {sorted(map(str, unknown))}")
    return restrict(a, sel.targets), restrict(a, sel.latents)


# --- models -----------------------------------------------------------------


class JointModel(ABC):
    """A joint density ``p(z_1, ..., z_d)`` that can be simulated and scored.

    Subclasses define :attr:`addresses` (in a topological order),
    :attr:`supports`, :meth:`simulate` and :meth:`log_joint`.  Models that can
    ancestrally sample latents given fixed targets set
    ``can_simulate_latents`` and implement :meth:`simulate_latents_given`;
    models that expose per-site ancestral kernels for MCMC set
    ``can_resimulate_sites``.
    """

    can_simulate_latents = False
    can_resimulate_sites = False

    addresses: tuple[Address, ...]
    supports: dict[Address, Support]

    @abstractmethod
    def simulate(self, rng: np.random.Generator, size: int | None = None) -> dict:
        ...

    @abstractmethod
    def _log_joint(self, a: Mapping) -> np.ndarray:
        ...

    def log_joint(self, a: Mapping):
        """Log density of a complete (possibly batched) assignment, in nats.

        Returns ``-inf`` where the density is zero, never NaN.
        """
        self.check_complete(a)
        out = self._log_joint(a)
        out = np.where(np.isnan(out), -np.inf, out)
        return out[()] if np.ndim(out) == 0 else out

    def check_complete(self, a: Mapping):
        if len(a) != len(self.addresses) or any(k not in a for k in self.addresses):
            missing = [str(k) for k in self.addresses if k not in a]
            extra = [str(k) for k in a if k not in self.supports]
            raise IncompleteAssignment(
                f"assignment is not complete (missing={missing}, unexpected={extra})"
            )

    def simulate_latents_given(self, rng, y: Mapping, latents: Sequence[Address], size=None):
        """Ancestrally sample ``latents`` given fixed values ``y``.

        Returns ``(x, log_q)`` where ``log_q`` is the product of the ancestral
        conditionals of the sampled sites.
        """
        raise CapabilityMissing(f"{type(self).__name__} cannot simulate latents")

    def site_propose(self, rng, address: Address, a: Mapping):
        """Resample one site from its ancestral conditional; returns ``(value, log_k)``."""
        raise CapabilityMissing(f"{type(self).__name__} has no site kernels")

    def site_logpdf(self, address: Address, value, a: Mapping):
        raise CapabilityMissing(f"{type(self).__name__} has no site kernels")


def simulate_joint(model: JointModel, rng: np.random.Generator) -> dict:
    return model.simulate(rng)


def log_joint_density(model: JointModel, a: Mapping) -> float:
    return float(model.log_joint(a))
