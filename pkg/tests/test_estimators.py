import numpy as np
import pytest

from entropy_bounds.errors import CapabilityMissing, TooLargeToEnumerate
from entropy_bounds.estimators import (
    EstimatorConfig,
    entropy_interval,
    entropy_lower,
    entropy_upper,
    exact_entropy_plugin,
    mcmc_refresh,
    mh_sweep,
    plugin_terms,
)
from entropy_bounds.logspace import substream
from entropy_bounds.model import Address, select, split
from entropy_bounds.models import (
    BNPosteriorProposal,
    DiscreteBayesNet,
    GaussianConditionalProposal,
    LinearGaussianSSM,
    benchmark_mvn,
    bivariate_normal,
    gaussian_entropy,
    pinned_disease_network,
    two_node_network,
)
from entropy_bounds.proposals import BasicProposal, PriorProposal, SIRProposal, fit_regression_proposal

H_B = -(0.41 * np.log(0.41) + 0.59 * np.log(0.59))


def test_config_validation():
    with pytest.raises(ValueError):
        EstimatorConfig(n=0)
    with pytest.raises(ValueError):
        EstimatorConfig(n=1, mcmc_steps=-1)
    with pytest.raises(ValueError):
        EstimatorConfig(n=1, seed=-1)


def test_two_node_bounds_bracket_enumerated_entropy():
    model = two_node_network()
    sel = select(model, ["B"])
    cfg = EstimatorConfig(n=4000, seed=1)
    iv = entropy_interval(model, sel, PriorProposal(model, sel), cfg=cfg)
    assert iv.upper.point >= H_B - 3 * iv.upper.stderr
    assert iv.lower.point <= H_B + 3 * iv.lower.stderr
    assert iv.lower.point < iv.upper.point


def test_point_is_mean_of_terms():
    model = two_node_network()
    sel = select(model, ["B"])
    est = entropy_upper(model, sel, SIRProposal(PriorProposal(model, sel), 3), EstimatorConfig(n=20, m=3))
    assert est.terms.shape == (20, 3)
    assert est.point == pytest.approx(est.terms.mean())
    assert est.stderr == pytest.approx(est.terms.mean(axis=1).std(ddof=1) / np.sqrt(20))


def test_exact_proposal_collapses_to_plugin():
    model = benchmark_mvn(4, rho=0.5)
    sel = select(model, ["z2", "z3"])
    cfg = EstimatorConfig(n=50, m=2, seed=3)
    exact = GaussianConditionalProposal(model, sel)
    iv = entropy_interval(model, sel, exact, cfg=cfg)
    plug = plugin_terms(model, sel, cfg)
    np.testing.assert_allclose(iv.lower.terms, plug[:, None].repeat(2, axis=1), atol=1e-9)
    np.testing.assert_allclose(iv.upper.terms, plug[:, None].repeat(2, axis=1), atol=1e-9)
    assert abs(iv.width) < 1e-9


def test_sir_regression_on_bivariate_normal():
    model = bivariate_normal(0.5, var_y=2.0)
    sel = select(model, ["z1"])
    base = fit_regression_proposal(model, sel, 5000, substream(0))
    iv = entropy_interval(model, sel, SIRProposal(base, 256), cfg=EstimatorConfig(n=200))
    truth = 0.5 * np.log(2 * np.pi * np.e * 2.0)
    assert abs(iv.midpoint - truth) < 0.02 + 3 * max(iv.lower.stderr, iv.upper.stderr)
    assert iv.width < 0.02


def test_inner_replicates_without_mcmc_duplicate_the_latent():
    model = two_node_network()
    sel = select(model, ["B"])
    est = entropy_lower(model, sel, PriorProposal(model, sel), EstimatorConfig(n=30, m=3))
    assert np.array_equal(est.terms[:, 0], est.terms[:, 2])


def test_mcmc_refresh_moves_latents_between_inner_replicates():
    model = pinned_disease_network()
    sel = select(model, ["symptom1", "symptom3"])
    est = entropy_lower(model, sel, PriorProposal(model, sel), EstimatorConfig(n=20, m=3, mcmc_steps=1))
    assert not np.array_equal(est.terms[:, 0], est.terms[:, 2])


def test_determinism_across_worker_counts():
    model = two_node_network()
    sel = select(model, ["B"])
    prop = SIRProposal(PriorProposal(model, sel), 4)
    a = entropy_interval(model, sel, prop, cfg=EstimatorConfig(n=40, m=2, seed=9, workers=1))
    b = entropy_interval(model, sel, prop, cfg=EstimatorConfig(n=40, m=2, seed=9, workers=3))
    assert np.array_equal(a.lower.terms, b.lower.terms)
    assert np.array_equal(a.upper.terms, b.upper.terms)


def test_shared_outer_pairs_the_two_sides():
    model = benchmark_mvn(2)
    sel = select(model, ["z0", "z1"], allow_full=True)
    shared = entropy_interval(model, sel, None, cfg=EstimatorConfig(n=30), shared_outer=True)
    assert np.array_equal(shared.lower.terms, shared.upper.terms)
    iid = entropy_interval(model, sel, None, cfg=EstimatorConfig(n=30), shared_outer=False)
    assert not np.array_equal(iid.lower.terms, iid.upper.terms)


def test_full_selection_on_enumerable_model_is_exact():
    model = two_node_network()
    sel = select(model, ["A", "B"], allow_full=True)
    iv = entropy_interval(model, sel, None, cfg=EstimatorConfig(n=5))
    joint = model.joint_table
    assert iv.lower.point == pytest.approx(-(joint * np.log(joint)).sum())
    assert iv.width == 0 and iv.lower.stderr == 0


def test_full_selection_on_gaussian_uses_plugin():
    model = benchmark_mvn(3, rho=0.4)
    sel = select(model, ["z0", "z1", "z2"], allow_full=True)
    iv = entropy_interval(model, sel, None, cfg=EstimatorConfig(n=4000))
    truth = gaussian_entropy(model.cov)
    assert abs(iv.lower.point - truth) < 4 * iv.lower.stderr


class _StuckProposal(BasicProposal):
    """Always proposes A = 0 (impossible when B = 1 under a deterministic child)."""

    label = "stuck"

    def propose(self, rng, y, size=None):
        shape = () if size is None else (size,)
        return {Address("A"): np.zeros(shape, dtype=int)}, np.zeros(shape)

    def assess(self, x, y):
        return np.where(np.asarray(x[Address("A")]) == 0, 0.0, -np.inf)


def test_zero_weight_replicates_poison_the_estimate():
    model = two_node_network(p_a=0.5, p_b_given_a1=1.0, p_b_given_a0=0.0)
    sel = select(model, ["B"])
    est = entropy_upper(model, sel, _StuckProposal(model, sel), EstimatorConfig(n=20))
    assert est.invalid and est.point == np.inf
    assert np.isinf(est.terms).any() and np.isfinite(est.terms).any()


def test_exact_plugin_oracles():
    coin = DiscreteBayesNet({"c": 2, "d": 2}, {}, {"c": [0.5, 0.5], "d": [0.5, 0.5]})
    assert exact_entropy_plugin(coin, ["c"]) == pytest.approx(np.log(2))
    assert exact_entropy_plugin(coin, ["c", "d"]) == pytest.approx(2 * np.log(2))
    assert exact_entropy_plugin(two_node_network(), ["B"]) == pytest.approx(0.6769, abs=5e-5)
    big = DiscreteBayesNet({f"v{i}": 2 for i in range(21)}, {}, {f"v{i}": [0.5, 0.5] for i in range(21)})
    with pytest.raises(TooLargeToEnumerate):
        exact_entropy_plugin(big, ["v0"])


class _ExactKernel:
    """Exact full conditional of A in the two-node net."""

    def __init__(self, model):
        self.post = BNPosteriorProposal(model, select(model, ["B"]))

    def propose(self, rng, address, a):
        x, lq = self.post.propose(rng, {Address("B"): a[Address("B")]})
        return x[address], lq

    def logpdf(self, address, value, a):
        return self.post.assess({address: value}, {Address("B"): a[Address("B")]})


def test_exact_conditional_kernel_always_accepts():
    model = two_node_network()
    sel = select(model, ["B"])
    rng = np.random.default_rng(0)
    x = {Address("A"): 0}
    for _ in range(50):
        x, probs = mh_sweep(model, sel, {Address("B"): 1}, x, rng, kernel=_ExactKernel(model))
        assert probs == [pytest.approx(1.0)]


def test_mcmc_refresh_targets_the_posterior():
    model = pinned_disease_network()
    latents = ["disease0", "disease1", "disease2"]
    sel = select(model, [a.name for a in model.addresses if a.name not in latents])
    rng = np.random.default_rng(1)
    y, x = split(model.simulate(rng), sel)
    exact = BNPosteriorProposal(model, sel)
    probs, _ = exact._row(y)
    counts = np.zeros(probs.size)
    n_sweeps = 6000
    for _ in range(n_sweeps):
        x = mcmc_refresh(model, sel, y, x, rng)
        counts[np.ravel_multi_index([int(x[a]) for a in sel.latents], exact._l_shape)] += 1
    tv = 0.5 * np.abs(counts / n_sweeps - probs).sum()
    assert tv < 0.03


def test_mcmc_refresh_identity_and_capability():
    model = two_node_network()
    full = select(model, ["A", "B"], allow_full=True)
    assert mh_sweep(model, full, {}, {}, np.random.default_rng(0)) == ({}, [])
    mvn = benchmark_mvn(2)
    sel = select(mvn, ["z1"])
    if not mvn.can_resimulate_sites:
        with pytest.raises(CapabilityMissing):
            mcmc_refresh(mvn, sel, {Address("z1"): 0.0}, {Address("z0"): 0.0}, np.random.default_rng(0))


def test_contains_allows_float_rounding_only():
    from entropy_bounds.estimators import BoundEstimate, IntervalEstimate

    def side(kind, point):
        return BoundEstimate.from_terms(kind, np.full((4, 1), point))

    iv = IntervalEstimate(side("lower", -4e-16), side("upper", -4.1e-16))
    assert iv.contains(0.0)
    assert not iv.contains(1e-9)
    bad = IntervalEstimate(side("lower", 0.0), side("upper", np.inf))
    assert not bad.contains(-1e-3)
