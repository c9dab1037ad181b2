"""Proposal families: basic, SIR, nested SIR and SMC."""

from .base import (
    AuxiliaryProposal,
    BasicProposal,
    ExtendedProposal,
    GenericPair,
    ImportanceProposal,
    WeightedProposal,
    as_weighted,
)
from .basic import (
    GaussianRegressionProposal,
    PriorProposal,
    fit_regression_proposal,
    prior_propose,
)
from .sir import NestedSIRProposal, SIRProposal, sir_aux_propose, sir_propose
from .smc import (
    SMCConfig,
    SMCProposal,
    SMCSteps,
    TemperedSteps,
    csmc_aux_propose,
    smc_propose,
    tempered_smc,
)
