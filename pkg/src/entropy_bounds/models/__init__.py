"""Benchmark models with exact oracles."""

from .bayesnet import (
    BNPosteriorProposal,
    DiscreteBayesNet,
    copy_network,
    disease_network,
    independent_network,
    pinned_disease_network,
    table_entropy,
    table_kl,
    two_node_network,
    xor_network,
)
from .gaussian import (
    GaussianConditionalProposal,
    MVNModel,
    benchmark_mvn,
    bivariate_normal,
    gaussian_entropy,
    gaussian_kl,
    mvn_conditional_params,
    mvn_subset_entropy,
)
from .statespace import (
    LinearGaussianSSM,
    SSMParams,
    SSMPosteriorProposal,
    TrajectorySteps,
    PairGrid,
    default_gain_model,
    ssm_measurement_pair_grid,
    ssm_gain_cmi,
    ssm_mixture_entropy,
    ssm_observation_entropy,
    trajectory_smc,
)
