"""Acceptance criteria, one test each.

Every test prints a ``criterion N PASS/FAIL`` line (also collected in the
terminal summary) before asserting.  Truth values come from oracles that do
not share code paths with the estimators: table enumeration, scipy Gaussian
densities, Kalman filtering and quadrature.

Statistical tolerances are read as follows.  "Within k stderr" for a mean
over repeated runs uses the standard error across those runs.  Monotone-width
checks compare consecutive grid points through paired differences over shared
outer replicates: ``w_next - w_prev < 2 * se(diff)``.  An interval
"contains" an oracle value when ``lower - 3 se <= truth <= upper + 3 se``,
with ``se`` the larger side stderr.
"""

import itertools
import json
import math
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from entropy_bounds.cli import main
from entropy_bounds.estimators import (
    EstimatorConfig,
    entropy_interval,
    log_weight_diagnostics,
    outer_sample,
)
from entropy_bounds.experiments import baseline_compare, mvn_sweep
from entropy_bounds.logspace import substream
from entropy_bounds.measures import (
    cmi_interval,
    cmi_plan,
    conditional_entropy_plan,
    covariance_report,
    dual_correlation_interval,
    evaluate_plan,
    interaction_information_interval,
    rank_by_conditional_entropy,
    total_correlation_interval,
)
from entropy_bounds.model import Address, merge, restrict, select, split
from entropy_bounds.models import (
    GaussianConditionalProposal,
    LinearGaussianSSM,
    MVNModel,
    SSMPosteriorProposal,
    benchmark_mvn,
    bivariate_normal,
    gaussian_kl,
    independent_network,
    mvn_subset_entropy,
    pinned_disease_network,
    trajectory_smc,
    two_node_network,
    xor_network,
)
from entropy_bounds.proposals import PriorProposal, SIRProposal, tempered_smc
from entropy_bounds.proposals.factory import make_factory
from entropy_bounds.reporting import read_csv

pytestmark = pytest.mark.acceptance

MVN_RHO = 0.8


def _se(values):
    values = np.asarray(values, dtype=float)
    return float(values.std(ddof=1) / np.sqrt(len(values)))


def _side_slack(est, k=3.0):
    return k * max(est.lower.stderr, est.upper.stderr)


def _enum_entropy(model, targets):
    # independent oracle: marginalize the joint table directly
    table = model.joint_table
    keep = {Address(t) if isinstance(t, str) else t for t in targets}
    axes = tuple(i for i, a in enumerate(model.addresses) if a not in keep)
    p = table.sum(axis=axes).ravel()
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def _mvn_split(d=10):
    model = benchmark_mvn(d, rho=MVN_RHO)
    targets = [f"z{i}" for i in range(d // 2, d)]
    idx = list(range(d // 2, d))
    truth = float(stats.multivariate_normal(cov=model.cov[np.ix_(idx, idx)]).entropy())
    return model, targets, truth


# --- 1 ----------------------------------------------------------------------


def test_criterion_01_sandwich(verdict):
    start = time.perf_counter()
    disease = pinned_disease_network()
    d_targets = ["symptom1", "symptom3", "symptom4"]
    mvn, m_targets, m_truth = _mvn_split()
    benches = [
        ("two-node H(B)", two_node_network(), ["B"], _enum_entropy(two_node_network(), ["B"])),
        ("12-node H(symptom1,3,4)", disease, d_targets, _enum_entropy(disease, d_targets)),
        ("MVN d=10 5/5", mvn, m_targets, m_truth),
    ]
    assert benches[0][3] == pytest.approx(0.6769, abs=5e-5)
    checks, details = {}, []
    R, n = 50, 100
    for name, model, targets, truth in benches:
        sel = select(model, targets)
        prop = SIRProposal(PriorProposal(model, sel), 64)
        lo, hi = [], []
        for r in range(R):
            iv = entropy_interval(model, sel, prop, cfg=EstimatorConfig(n=n, seed=1000 + r))
            lo.append(iv.lower.point)
            hi.append(iv.upper.point)
        lo_m, hi_m, lo_se, hi_se = np.mean(lo), np.mean(hi), _se(lo), _se(hi)
        checks[f"{name}: mean lower <= truth"] = lo_m <= truth + 3 * lo_se
        checks[f"{name}: truth <= mean upper"] = hi_m >= truth - 3 * hi_se
        details.append(f"{name}: {lo_m:.4f} <= {truth:.4f} <= {hi_m:.4f} (se {lo_se:.4f}/{hi_se:.4f})")
    elapsed = time.perf_counter() - start
    checks["runtime <= 120 s"] = elapsed <= 120
    verdict(1, "sandwich property over 50 runs", checks, "; ".join(details) + f"; {elapsed:.1f}s")


# --- 2 and 3 ------------------------------------------------------------------

P_GRID = (4, 16, 64, 256, 1024)


@pytest.fixture(scope="module")
def mvn_sweep_cells():
    start = time.perf_counter()
    _, _, truth, cells = mvn_sweep(10, MVN_RHO, ("prior", "regression"), P_GRID,
                                   EstimatorConfig(n=2000, seed=7))
    elapsed = time.perf_counter() - start
    by = {(c.proposal, c.P): c.interval for c in cells}
    return truth, by, elapsed


def _paired_width_diff(a, b):
    """Mean and stderr of ``width(a) - width(b)`` over shared outer replicates."""
    wa = a.upper.replicate_means - a.lower.replicate_means
    wb = b.upper.replicate_means - b.lower.replicate_means
    diff = wa - wb
    return float(diff.mean()), _se(diff)


def test_criterion_02_width_converges_in_particles(verdict, mvn_sweep_cells):
    truth, by, elapsed = mvn_sweep_cells
    checks, details = {}, []
    for prop in ("prior", "regression"):
        widths = [by[(prop, P)].width for P in P_GRID]
        details.append(f"{prop} widths " + ", ".join(f"{w:.4f}" for w in widths))
        for P0, P1 in zip(P_GRID, P_GRID[1:]):
            diff, se = _paired_width_diff(by[(prop, P1)], by[(prop, P0)])
            checks[f"{prop} width(P={P1}) < width(P={P0})"] = diff < 2 * se
    final = by[("regression", 1024)].width
    checks["regression width at P=1024 <= 0.05"] = final <= 0.05
    checks["runtime <= 300 s"] = elapsed <= 300
    verdict(2, "interval width decreases along the SIR grid", checks,
            "; ".join(details) + f"; truth {truth:.4f}; {elapsed:.1f}s")


def test_criterion_03_regression_beats_prior(verdict, mvn_sweep_cells):
    _, by, _ = mvn_sweep_cells
    checks, details = {}, []
    for P in P_GRID:
        diff, se = _paired_width_diff(by[("regression", P)], by[("prior", P)])
        checks[f"P={P}"] = diff <= 2 * se
        details.append(f"P={P}: {by[('regression', P)].width:.4f} vs {by[('prior', P)].width:.4f}")
    verdict(3, "regression-proposal width <= prior-proposal width", checks, "; ".join(details))


# --- 4 ----------------------------------------------------------------------


def test_criterion_04_exact_proposal_collapse(verdict):
    model, targets, _ = _mvn_split()
    sel = select(model, targets)
    cfg = EstimatorConfig(n=200, m=2, seed=4)
    checks = {}
    oracle = stats.multivariate_normal(cov=model.cov[np.ix_(range(5, 10), range(5, 10))])
    plug = np.array([
        -oracle.logpdf([float(outer_sample(model, cfg.seed, i)[Address(t)]) for t in targets])
        for i in range(cfg.n)
    ])
    worst = 0.0
    for label, prop in (("exact", GaussianConditionalProposal(model, sel)),
                        ("SIR(8) over exact", SIRProposal(GaussianConditionalProposal(model, sel), 8))):
        iv = entropy_interval(model, sel, prop, cfg=cfg)
        for side in (iv.lower, iv.upper):
            err = float(np.max(np.abs(side.terms - plug[:, None])))
            worst = max(worst, err)
            checks[f"{label} {side.kind}"] = err < 1e-9
    verdict(4, "exact proposal collapses both bounds to the plug-in", checks, f"max |diff| {worst:.2e}")


# --- 5 ----------------------------------------------------------------------

_SIR_CASES = {"n": 0, "worst": 0.0}


def _naive_logmeanexp(values):
    top = max(values)
    if top == -math.inf:
        return -math.inf
    return top + math.log(math.fsum(math.exp(v - top) for v in values) / len(values))


@settings(max_examples=1000, deadline=None, derandomize=True,
          suppress_health_check=[HealthCheck.too_slow])
@given(
    seed=st.integers(0, 2**32 - 1),
    P=st.integers(1, 64),
    rho=st.floats(-0.95, 0.95),
    var_y=st.floats(0.1, 10.0),
    scale=st.floats(0.2, 5.0),
)
def _sir_identity_case(seed, P, rho, var_y, scale):
    model = bivariate_normal(rho, var_x=scale, var_y=var_y)
    sel = select(model, ["z1"])
    rng = np.random.default_rng(seed)
    y, _ = split(model.simulate(rng), sel)
    v, x, log_w = SIRProposal(PriorProposal(model, sel), P).propose(rng, y)
    stored = [float(r) for r in v.log_ratios]
    expected = _naive_logmeanexp(stored)
    # second route: recompute the ratios with scipy densities
    pts = np.column_stack([v.particles[Address("z0")], np.full(P, y[Address("z1")])])
    log_p = stats.multivariate_normal(np.zeros(2), model.cov).logpdf(pts).reshape(-1)
    log_q = stats.norm(0, np.sqrt(scale)).logpdf(v.particles[Address("z0")]).reshape(-1)
    recomputed = _naive_logmeanexp(list(log_p - log_q))
    err = abs(log_w - expected) / max(1.0, abs(expected))
    err2 = abs(log_w - recomputed) / max(1.0, abs(recomputed))
    _SIR_CASES["n"] += 1
    _SIR_CASES["worst"] = max(_SIR_CASES["worst"], err, err2)
    assert err <= 1e-12
    assert err2 <= 1e-12


def test_criterion_05_sir_weight_identity(verdict):
    _SIR_CASES.update(n=0, worst=0.0)
    ok = True
    try:
        _sir_identity_case()
    except AssertionError:
        ok = False
    checks = {"all cases within 1e-12": ok, "1000 cases run": _SIR_CASES["n"] >= 1000 or not ok}
    verdict(5, "SIR log weight is the log-mean-exp of stored ratios", checks,
            f"{_SIR_CASES['n']} cases, worst relative error {_SIR_CASES['worst']:.1e}")


# --- 6 ----------------------------------------------------------------------


def test_criterion_06_smc_consistency(verdict):
    start = time.perf_counter()
    checks, details = {}, []

    # zero-step SMC is SIR, bit for bit
    same = True
    for model, targets in ((two_node_network(), ["B"]), (benchmark_mvn(4, rho=0.5), ["z2", "z3"])):
        sel = select(model, targets)
        base = PriorProposal(model, sel)
        smc, sir = tempered_smc(model, sel, base, 32, 0), SIRProposal(base, 32)
        for s in range(100):
            y, x = split(model.simulate(substream(60, s)), sel)
            a, b = smc.propose(substream(61, s), y), sir.propose(substream(61, s), y)
            same &= a[2] == b[2] and all(np.array_equal(a[1][k], b[1][k]) for k in a[1])
            a, b = smc.propose_aux(substream(62, s), x, y), sir.propose_aux(substream(62, s), x, y)
            same &= a[1] == b[1]
    checks["T=0 SMC equals SIR bitwise"] = bool(same)

    # unbiasedness against the Kalman marginal on a horizon-5 model
    model = LinearGaussianSSM(horizon=5)
    sel = select(model, [f"y[{t}]" for t in range(5)])
    y, _ = split(model.simulate(np.random.default_rng(63)), sel)
    log_z = model.kalman_log_marginal([y[Address("y", t)] for t in range(5)])
    smc = trajectory_smc(model, sel, 16)
    lw = np.array([smc.propose(substream(64, i), y)[2] for i in range(10_000)])
    w = np.exp(lw - log_z)
    checks["E[w] = p(y) within 3 stderr"] = abs(w.mean() - 1.0) <= 3 * _se(w)
    details.append(f"E[w]/p(y) = {w.mean():.4f} +- {_se(w):.4f}")

    # conditional SMC gives the upper side of the sandwich
    exact = SSMPosteriorProposal(model, sel)
    hi = []
    for i in range(2000):
        rng = substream(65, i)
        x, _ = exact.propose(rng, y)
        hi.append(-smc.propose_aux(rng, x, y)[1])
    lo_m, hi_m = lw[:2000].mean(), np.mean(hi)
    checks["mean(-log w') >= log p(y) >= mean(log w)"] = hi_m >= log_z >= lo_m
    details.append(f"{lo_m:.4f} <= {log_z:.4f} <= {hi_m:.4f}")
    elapsed = time.perf_counter() - start
    checks["runtime <= 180 s"] = elapsed <= 180
    verdict(6, "SMC consistency", checks, "; ".join(details) + f"; {elapsed:.1f}s")


# --- 7 ----------------------------------------------------------------------

GAUSSIAN_PAIRS = [
    # (mean_g, sd_g, mean_h, sd_h): samples come from g, weights are h/g
    (0.0, 1.0, 0.5, 1.0),
    (0.0, 1.0, 0.0, 1.6),
    (0.3, 0.8, -0.4, 1.2),
    (0.0, 1.2, 1.0, 0.9),
]


def _quad_log_ratio_moments(mg, sg, mh, sh):
    g, h = stats.norm(mg, sg), stats.norm(mh, sh)
    lo, hi = mg - 15 * sg, mg + 15 * sg
    m1 = integrate.quad(lambda x: g.pdf(x) * (h.logpdf(x) - g.logpdf(x)), lo, hi)[0]
    m2 = integrate.quad(lambda x: g.pdf(x) * (h.logpdf(x) - g.logpdf(x)) ** 2, lo, hi)[0]
    return m1, m2


def test_criterion_07_log_weight_properties(verdict):
    start = time.perf_counter()
    checks, details = {}, []
    N = 200_000
    log_zh, log_zg = np.log(2.5), np.log(0.4)
    for j, (mg, sg, mh, sh) in enumerate(GAUSSIAN_PAIRS):
        x = substream(70, j).normal(mg, sg, N)
        log_wt = stats.norm(mh, sh).logpdf(x) - stats.norm(mg, sg).logpdf(x)
        log_w = log_wt + log_zh - log_zg
        kl = gaussian_kl([mg], [[sg**2]], [mh], [[sh**2]])
        m1, m2 = _quad_log_ratio_moments(mg, sg, mh, sh)
        assert m1 == pytest.approx(-kl, rel=1e-7, abs=1e-10)

        d = log_weight_diagnostics(log_w, log_z=log_zh - log_zg, t_grid=(1.0, 2.0, 3.0))
        checks[f"pair {j}: KL gap"] = abs(d.mean - (log_zh - log_zg - kl)) <= 3 * d.stderr

        var_identity = m2 - kl**2
        c = log_wt - log_wt.mean()
        var_se = np.sqrt((np.mean(c**4) - d.variance**2) / N)
        checks[f"pair {j}: variance identity"] = abs(d.variance - var_identity) <= 3 * var_se

        bound = np.exp(-d.tail_t)
        binom = np.sqrt(bound * (1 - bound) / N)
        checks[f"pair {j}: tail bound"] = bool(np.all(d.tail_freq <= bound + 3 * binom))

        mad_se = np.std(np.abs(log_w - d.mean), ddof=1) / np.sqrt(N)
        checks[f"pair {j}: MAD bound"] = d.mad <= 2 + 2 * kl + 3 * mad_se
        details.append(f"pair {j}: KL {kl:.3f}, var {d.variance:.4f}/{var_identity:.4f}, "
                       f"MAD {d.mad:.3f}, tails {np.round(d.tail_freq, 4).tolist()}")
    elapsed = time.perf_counter() - start
    checks["runtime <= 120 s"] = elapsed <= 120
    verdict(7, "log-weight identities and bounds on Gaussian pairs", checks,
            "; ".join(details) + f"; {elapsed:.1f}s")


# --- 8 ----------------------------------------------------------------------


def _random_triples(model, count, seed):
    rng = np.random.default_rng(seed)
    names = [a.name for a in model.addresses]
    out = []
    while len(out) < count:
        sizes = (rng.integers(0, 3), rng.integers(1, 3), rng.integers(1, 3))
        pick = list(rng.choice(names, size=sum(sizes), replace=False))
        a0, a1, a2 = pick[:sizes[0]], pick[sizes[0]:sizes[0] + sizes[1]], pick[sizes[0] + sizes[1]:]
        out.append((a0, a1, a2))
    return out


def test_criterion_08_derived_measures(verdict):
    checks, details = {}, []
    sir = make_factory({"kind": "sir", "P": 64})

    disease = pinned_disease_network()
    for k, (a0, a1, a2) in enumerate(_random_triples(disease, 10, seed=8)):
        truth = (_enum_entropy(disease, a0 + a1) + _enum_entropy(disease, a0 + a2)
                 - _enum_entropy(disease, a0 + a1 + a2) - (_enum_entropy(disease, a0) if a0 else 0.0))
        est = cmi_interval(disease, a1, a2, a0, sir, EstimatorConfig(n=200, seed=80 + k))
        checks[f"12-node CMI triple {k}"] = est.contains(truth, _side_slack(est))
        details.append(f"I({','.join(a1)};{','.join(a2)}|{','.join(a0)})={truth:.4f} "
                       f"in [{est.lower.point:.4f},{est.upper.point:.4f}]")

    biv = bivariate_normal(0.5)
    mi = -0.5 * np.log(1 - 0.25)
    assert mi == pytest.approx(0.1438, abs=5e-5)
    est = cmi_interval(biv, ["z0"], ["z1"], None, sir, EstimatorConfig(n=2000, seed=81))
    checks["bivariate normal MI"] = est.contains(mi, _side_slack(est))
    details.append(f"MI {mi:.4f} in [{est.lower.point:.4f},{est.upper.point:.4f}]")

    xor = xor_network()
    est = interaction_information_interval(xor, [["A1"], ["A2"], ["A3"]], None, sir, EstimatorConfig(n=200, seed=82))
    checks["XOR interaction information"] = est.contains(-np.log(2), _side_slack(est))
    details.append(f"XOR II in [{est.lower.point:.4f},{est.upper.point:.4f}]")

    ind = independent_network((2, 2, 3))
    cfg = EstimatorConfig(n=200, seed=83)
    sets = [["V0"], ["V1"], ["V2"]]
    measures = {
        "mutual information": cmi_interval(ind, ["V0"], ["V1"], None, sir, cfg),
        "conditional mutual information": cmi_interval(ind, ["V0"], ["V1"], ["V2"], sir, cfg),
        "total correlation": total_correlation_interval(ind, sets, None, sir, cfg),
        "interaction information": interaction_information_interval(ind, sets, None, sir, cfg),
        "dual correlation": dual_correlation_interval(ind, sets, None, sir, cfg),
    }
    for name, est in measures.items():
        checks[f"independent {name} contains 0"] = est.contains(0.0, _side_slack(est))
    verdict(8, "derived-measure intervals contain oracle values", checks, "; ".join(details))


# --- 9 ----------------------------------------------------------------------


def test_criterion_09_shared_samples_reduce_variance(verdict):
    model = benchmark_mvn(4, rho=MVN_RHO)
    factory = make_factory({"kind": "sir", "P": 16})
    shared, iid = [], []
    for r in range(100):
        cfg = EstimatorConfig(n=50, seed=900 + r)
        for flag, out in ((True, shared), (False, iid)):
            plan = conditional_entropy_plan(["z0"], ["z2", "z3"], shared_outer=flag)
            out.append(evaluate_plan(model, plan, factory, cfg).lower.point)
    shared, iid = np.asarray(shared), np.asarray(iid)
    dev = (shared - shared.mean()) ** 2 - (iid - iid.mean()) ** 2
    excess, se = float(dev.mean()), _se(dev)
    checks = {"Var[shared] <= Var[iid] (one-sided 3 sigma)": excess <= 3 * se}

    est = cmi_interval(model, ["z0"], ["z2"], ["z3"], factory, EstimatorConfig(n=300, seed=91))
    rep = covariance_report(est)
    cols = {f"{b.kind}:{e.term.name}": b.replicate_means
            for e in est.term_estimates for b in (e.lower, e.upper)}
    worst = 0.0
    for a, b in itertools.combinations(rep.labels, 2):
        direct = float(np.var(cols[a] - cols[b], ddof=1))
        worst = max(worst, abs(rep.variance_of_difference(a, b) - direct))
    checks["Var[A-B] = Var A + Var B - 2 Cov within 1e-9"] = worst < 1e-9
    verdict(9, "shared outer samples reduce conditional-entropy variance", checks,
            f"var shared {shared.var(ddof=1):.5f} vs iid {iid.var(ddof=1):.5f}; identity error {worst:.1e}")


# --- 10 ---------------------------------------------------------------------


def test_criterion_10_ranking_fidelity(verdict):
    model = pinned_disease_network()
    target = ["disease1"]
    candidates = [f"symptom{i}" for i in range(6)]
    oracle = {c: _enum_entropy(model, target + [c]) - _enum_entropy(model, [c]) for c in candidates}
    ranked = rank_by_conditional_entropy(model, candidates, target, None,
                                         make_factory({"kind": "sir", "P": 64}), EstimatorConfig(n=500, seed=10))
    by = {r.name: r for r in ranked}
    checks, eligible = {}, 0
    for a, b in itertools.combinations(candidates, 2):
        gap = abs(oracle[a] - oracle[b])
        width = max(abs(by[a].estimate.width), abs(by[b].estimate.width))
        if gap > 3 * width:
            eligible += 1
            checks[f"{a} vs {b}"] = (oracle[a] < oracle[b]) == (by[a].midpoint < by[b].midpoint)
    checks["some pairs are separated"] = eligible > 0
    order = " < ".join(r.name for r in ranked)
    verdict(10, "midpoint ranking matches enumeration ranking", checks,
            f"{eligible} separated pairs; estimated order {order}")


# --- 11 ---------------------------------------------------------------------


def test_criterion_11_baseline_shapes(verdict):
    checks, details = {}, []
    reps = 10
    cols, rows, _ = baseline_compare({
        "model": {"builtin": "mvn", "d": 2, "rho": 0.0}, "targets": ["z0", "z1"],
        "P_grid": [], "N_grid": [1000, 10000], "replicates": reps, "estimator": {"seed": 11},
    })
    truth = np.log(2 * np.pi * np.e)
    err = {N: np.array([abs(r["estimate"] - truth) for r in rows if r["parameter"] == N]) for N in (1000, 10000)}
    checks["kNN error non-increasing in N"] = err[10000].mean() <= err[1000].mean() + 2 * np.hypot(
        _se(err[1000]), _se(err[10000]))
    details.append(f"kNN |err| {err[1000].mean():.4f} -> {err[10000].mean():.4f}")

    cols, rows, _ = baseline_compare({
        "model": {"builtin": "pinned-disease"}, "targets": ["symptom1", "symptom3", "symptom4"],
        "P_grid": [4, 16, 64, 256], "N_grid": [], "replicates": reps, "estimator": {"n": 50, "seed": 12},
    })
    widths = {P: np.array([r["upper"] - r["lower"] for r in rows if r["parameter"] == P]) for P in (4, 16, 64, 256)}
    for P0, P1 in ((4, 16), (16, 64), (64, 256)):
        diff = widths[P1] - widths[P0]
        checks[f"interval width P={P1} <= P={P0}"] = diff.mean() <= 2 * _se(diff)
    details.append("interval widths " + ", ".join(f"{widths[P].mean():.4f}" for P in (4, 16, 64, 256)))

    from entropy_bounds.baselines import knn_entropy

    one = knn_entropy(substream(13, 1).standard_normal(10_000))
    two = knn_entropy(substream(13, 2).standard_normal((10_000, 2)))
    checks["1-D kNN within 0.05"] = abs(one - 0.5 * np.log(2 * np.pi * np.e)) <= 0.05
    checks["2-D kNN within 0.07"] = abs(two - np.log(2 * np.pi * np.e)) <= 0.07
    details.append(f"kNN 1-D {one:.4f}, 2-D {two:.4f}")
    verdict(11, "baseline comparison shapes", checks, "; ".join(details))


# --- 12 ---------------------------------------------------------------------

DETERMINISM_CONFIGS = [
    ("run", {"model": {"builtin": "two-node"}, "query": {"kind": "entropy", "targets": ["B"]},
             "proposal": {"kind": "sir", "P": 64}, "estimator": {"n": 100}}),
    ("run", {"model": {"builtin": "pinned-disease"},
             "query": {"kind": "cmi", "a1": ["symptom3"], "a2": ["symptom4"], "a0": ["attr0"]},
             "proposal": {"kind": "sir", "P": 16}, "estimator": {"n": 40}}),
    ("run", {"model": {"builtin": "mvn", "d": 4, "rho": 0.8}, "query": {"kind": "entropy", "targets": ["z2", "z3"]},
             "proposal": {"kind": "smc", "P": 8, "T": 2}, "estimator": {"n": 20, "m": 2}}),
    ("run", {"model": {"builtin": "pinned-disease"}, "query": {"kind": "entropy", "targets": ["symptom1"]},
             "proposal": "prior", "estimator": {"n": 20, "m": 3, "mcmc_steps": 1}}),
    ("experiment-mvn", {"d": 4, "P_grid": [4, 16], "estimator": {"n": 50}, "n_train": 500}),
    ("experiment-rank", {"model": {"builtin": "pinned-disease"}, "target": ["disease1"],
                         "candidates": ["symptom3", "symptom4", "symptom5"],
                         "proposal": {"kind": "sir", "P": 16}, "estimator": {"n": 30}}),
    ("experiment-pair-grid", {"ssm": {"horizon": 3}, "proposal": {"kind": "smc", "P": 8, "schedule": "trajectory"},
                              "estimator": {"n": 10}}),
    ("baseline-compare", {"model": {"builtin": "mvn", "d": 2}, "targets": ["z1"], "P_grid": [4, 8],
                          "N_grid": [200], "replicates": 2, "estimator": {"n": 10}}),
]


def test_criterion_12_determinism(verdict, tmp_path):
    checks = {}
    for k, (command, doc) in enumerate(DETERMINISM_CONFIGS):
        outputs = []
        for workers in (1, 3, 1):
            doc = json.loads(json.dumps(doc))
            doc.setdefault("estimator", {})["workers"] = workers
            cfg_path = tmp_path / f"c{k}_{workers}.json"
            cfg_path.write_text(json.dumps(doc))
            out = tmp_path / f"o{k}_{workers}_{len(outputs)}.csv"
            assert main([command, str(cfg_path), "--seed", "5", "--output", str(out)]) in (0, 4)
            outputs.append(out.read_bytes())
        checks[f"{command} #{k}"] = outputs[0] == outputs[1] == outputs[2] and len(outputs[0]) > 0
        assert read_csv(outputs[0].decode(), is_text=True)

    model, targets, _ = _mvn_split()
    sel = select(model, targets)
    prop = SIRProposal(PriorProposal(model, sel), 64)
    a = entropy_interval(model, sel, prop, cfg=EstimatorConfig(n=30, seed=1000, workers=1))
    b = entropy_interval(model, sel, prop, cfg=EstimatorConfig(n=30, seed=1000, workers=4))
    checks["criterion-1 run, 1 vs 4 workers"] = (a.lower.terms.tobytes() == b.lower.terms.tobytes()
                                                 and a.upper.terms.tobytes() == b.upper.terms.tobytes())
    verdict(12, "byte-reproducible output regardless of worker count", checks,
            f"{len(DETERMINISM_CONFIGS)} CLI configs x workers 1/3/1")
