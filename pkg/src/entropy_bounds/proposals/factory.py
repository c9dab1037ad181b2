"""Build proposals for arbitrary selections from a small declarative spec.

A spec is a string naming a basic proposal (``"prior"``, ``"regression"``,
``"exact"``) or a dict::

    {"kind": "sir", "P": 64, "base": "prior"}
    {"kind": "nested-sir", "P": 8, "base": {"kind": "sir", "P": 8}}
    {"kind": "smc", "P": 32, "T": 4, "schedule": "tempered", "base": "prior"}
    {"kind": "smc", "P": 32, "schedule": "trajectory"}
    {"kind": "regression", "n_train": 5000}
"""

from __future__ import annotations

import zlib
from typing import Callable

from ..errors import ConfigError
from ..logspace import substream
from .base import WeightedProposal, as_weighted
from .basic import PriorProposal, fit_regression_proposal
from .sir import NestedSIRProposal, SIRProposal
from .smc import SMCConfig, SMCProposal, TemperedSteps

ProposalFactory = Callable[[object, object], WeightedProposal]

_FIT_TAG = 7


def _normalize(spec):
    if isinstance(spec, str):
        return {"kind": spec}
    if isinstance(spec, dict) and "kind" in spec:
        return dict(spec)
    raise ConfigError(f"proposal: cannot interpret {spec!r}")


def _exact(model, sel):
    from ..models.bayesnet import BNPosteriorProposal, DiscreteBayesNet
    from ..models.gaussian import GaussianConditionalProposal, MVNModel
    from ..models.statespace import LinearGaussianSSM, SSMPosteriorProposal

    if isinstance(model, MVNModel):
        return GaussianConditionalProposal(model, sel)
    if isinstance(model, LinearGaussianSSM):
        return SSMPosteriorProposal(model, sel)
    if isinstance(model, DiscreteBayesNet):
        return BNPosteriorProposal(model, sel)
    raise ConfigError(f"proposal: no exact posterior for {type(model).__name__}")


def selection_tag(sel) -> int:
    """Stable integer tag of a selection's target set."""
    return zlib.crc32(",".join(sorted(map(str, sel.targets))).encode())


def build_proposal(spec, model, sel, seed: int = 0):
    """Instantiate ``spec`` for one selection (basic or weighted proposal)."""
    spec = _normalize(spec)
    kind = spec["kind"]
    if kind == "prior":
        return PriorProposal(model, sel)
    if kind == "exact":
        return _exact(model, sel)
    if kind == "regression":
        n_train = int(spec.get("n_train", 5000))
        rng = substream(seed, _FIT_TAG, selection_tag(sel))
        return fit_regression_proposal(model, sel, n_train, rng)
    if kind == "sir":
        base = build_proposal(spec.get("base", "prior"), model, sel, seed)
        if isinstance(base, WeightedProposal):
            raise ConfigError("proposal: sir needs a basic base proposal")
        return SIRProposal(base, int(_require(spec, "P")))
    if kind == "nested-sir":
        base_spec = spec.get("base", {"kind": "sir", "P": 4})
        base = as_weighted(build_proposal(base_spec, model, sel, seed))
        return NestedSIRProposal(base, int(_require(spec, "P")))
    if kind == "smc":
        P = int(_require(spec, "P"))
        schedule = spec.get("schedule", "tempered")
        if schedule == "tempered":
            base = build_proposal(spec.get("base", "prior"), model, sel, seed)
            steps = TemperedSteps(model, sel, base, int(spec.get("T", 0)),
                                  mh_moves=int(spec.get("mh_moves", 1)), betas=spec.get("betas"))
        elif schedule == "trajectory":
            from ..models.statespace import TrajectorySteps

            steps = TrajectorySteps(model, sel)
            if "T" in spec and int(spec["T"]) != steps.n_steps:
                raise ConfigError(f"proposal.T: trajectory schedule has {steps.n_steps} steps")
        else:
            raise ConfigError(f"proposal.schedule: unknown schedule {schedule!r}")
        return SMCProposal(model, sel, SMCConfig(P, steps))
    raise ConfigError(f"proposal.kind: unknown proposal {kind!r}")


def _require(spec, key):
    if key not in spec:
        raise ConfigError(f"proposal.{key}: required for {spec['kind']!r}")
    return spec[key]


def make_factory(spec, seed: int = 0) -> ProposalFactory:
    """Callable mapping ``(model, selection)`` to a weighted proposal."""
    _normalize(spec)

    def factory(model, sel):
        return as_weighted(build_proposal(spec, model, sel, seed))

    factory.spec = spec
    return factory


def proposal_id(spec) -> str:
    """Short provenance label such as ``sir64-prior``."""
    spec = _normalize(spec)
    kind = spec["kind"]
    if kind in ("prior", "exact", "regression"):
        return kind
    base = proposal_id(spec.get("base", "prior" if kind != "nested-sir" else {"kind": "sir", "P": 4}))
    if kind == "smc":
        sched = spec.get("schedule", "tempered")
        if sched == "trajectory":
            return f"smc{spec['P']}-trajectory"
        return f"smc{spec['P']}x{spec.get('T', 0)}-{sched}-{base}"
    return f"{kind.replace('-', '')}{spec['P']}-{base}"
