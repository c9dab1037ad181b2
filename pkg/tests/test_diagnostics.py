import numpy as np
import pytest
from scipy import integrate, stats

from entropy_bounds.errors import NonpositiveStddev
from entropy_bounds.estimators import coverage_probability, log_weight_diagnostics
from entropy_bounds.models import gaussian_kl


def test_coverage_closed_forms():
    assert coverage_probability(0, 0, 1, 1, 1) == pytest.approx(0.25)
    assert coverage_probability(1e3, 1e3, 1, 1, 1) == pytest.approx(1.0)
    assert coverage_probability(0.3, 0.5, 0.3, 0.5, 1) == pytest.approx(stats.norm.cdf(1) ** 2)
    assert coverage_probability(0.3, 0.5, 0.3, 0.5, 1) == pytest.approx(0.7079, abs=1e-4)


def test_coverage_rejects_bad_inputs():
    with pytest.raises(NonpositiveStddev):
        coverage_probability(0, 0, 0, 1, 1)
    with pytest.raises(ValueError):
        coverage_probability(0, 0, 1, 1, 0)


def test_constant_weights():
    d = log_weight_diagnostics(np.full(10, 2.5))
    assert d.variance == 0 and d.mad == 0 and d.mean == 2.5


def test_gaussian_kl_against_quadrature():
    m0, s0, m1, s1 = 0.3, 0.8, -0.5, 1.4
    g, h = stats.norm(m0, s0), stats.norm(m1, s1)
    quad = integrate.quad(lambda x: g.pdf(x) * (g.logpdf(x) - h.logpdf(x)), -20, 20)[0]
    assert gaussian_kl([m0], [[s0**2]], [m1], [[s1**2]]) == pytest.approx(quad, rel=1e-8)


def test_kl_gap_identity_on_unnormalized_gaussians():
    # h = 3 N(m1, s1), g = 0.5 N(m0, s0); E_g[log h/g] = log(Z_h/Z_g) - KL(g || h)
    rng = np.random.default_rng(0)
    m0, s0, m1, s1 = 0.0, 1.0, 0.7, 1.3
    x = rng.normal(m0, s0, 20000)
    log_w = (np.log(3) + stats.norm.logpdf(x, m1, s1)) - (np.log(0.5) + stats.norm.logpdf(x, m0, s0))
    d = log_weight_diagnostics(log_w, log_z=np.log(6))
    expected = np.log(6) - gaussian_kl([m0], [[s0**2]], [m1], [[s1**2]])
    assert abs(d.mean - expected) < 3 * d.stderr
