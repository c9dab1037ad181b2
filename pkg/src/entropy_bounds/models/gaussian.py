"""Multivariate normal benchmark model with closed-form oracles."""

from __future__ import annotations

from typing import Iterable

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from ..errors import ModelLoadError, SingularSubmatrix
from ..model import Address, JointModel, Real, Selection, as_address
from ..proposals.base import BasicProposal

LOG_2PI = np.log(2 * np.pi)


def _cholesky(cov, what="covariance"):
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise SingularSubmatrix(f"{what} is not positive definite") from None


def gaussian_logpdf(values, mean, chol):
    """Log density of ``N(mean, L L^T)`` at the rows of ``values``."""
    diff = np.asarray(values, dtype=float) - mean
    sol = solve_triangular(chol, np.moveaxis(np.atleast_2d(diff), -1, 0), lower=True)
    quad = np.sum(sol**2, axis=0)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    out = -0.5 * (len(mean) * LOG_2PI + logdet + quad)
    return out.reshape(np.shape(diff)[:-1])


def gaussian_entropy(cov) -> float:
    """``0.5 * log((2 pi e)^k det cov)`` via a Cholesky log-determinant."""
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    chol = _cholesky(cov)
    k = cov.shape[0]
    return float(0.5 * k * (1.0 + LOG_2PI) + np.sum(np.log(np.diag(chol))))


def gaussian_kl(mean0, cov0, mean1, cov1) -> float:
    """``KL(N(mean0, cov0) || N(mean1, cov1))`` in nats."""
    mean0, mean1 = np.atleast_1d(mean0).astype(float), np.atleast_1d(mean1).astype(float)
    cov0, cov1 = np.atleast_2d(cov0).astype(float), np.atleast_2d(cov1).astype(float)
    l0, l1 = _cholesky(cov0), _cholesky(cov1)
    k = len(mean0)
    trace = np.trace(cho_solve((l1, True), cov0))
    diff = mean1 - mean0
    quad = diff @ cho_solve((l1, True), diff)
    logdet = 2.0 * (np.sum(np.log(np.diag(l1))) - np.sum(np.log(np.diag(l0))))
    return float(0.5 * (trace + quad - k + logdet))


class MVNModel(JointModel):
    """Joint Gaussian over scalar addresses ``z0 .. z{d-1}``.

    The address order doubles as the ancestral order: site ``i`` is sampled
    from ``p(z_i | z_<i)``.
    """

    can_simulate_latents = True
    can_resimulate_sites = True

    def __init__(self, mean, cov, names: Iterable[str] | None = None):
        self.mean = np.asarray(mean, dtype=float).reshape(-1)
        self.cov = np.asarray(cov, dtype=float)
        d = len(self.mean)
        if self.cov.shape != (d, d):
            raise ModelLoadError(f"covariance shape {self.cov.shape} does not match mean length {d}")
        if not np.allclose(self.cov, self.cov.T, atol=1e-12):
            raise ModelLoadError("covariance is not symmetric")
        try:
            self.chol = np.linalg.cholesky(self.cov)
        except np.linalg.LinAlgError:
            raise ModelLoadError("covariance is not positive definite") from None
        names = [f"z{i}" for i in range(d)] if names is None else list(names)
        self.addresses = tuple(Address(n) for n in names)
        self.supports = {a: Real() for a in self.addresses}
        self._pos = {a: i for i, a in enumerate(self.addresses)}
        # chain rule: z_i | z_<i ~ N(mean_i + coef[i] . (z - mean), sd_i^2)
        inv = solve_triangular(self.chol, np.eye(d), lower=True)
        diag = np.diag(self.chol)
        self._chain_coef = -diag[:, None] * np.tril(inv, k=-1)
        self._chain_sd = diag

    @property
    def dim(self):
        return len(self.mean)

    def index(self, addresses) -> list[int]:
        return [self._pos[as_address(a)] for a in addresses]

    def _stack(self, a, addresses):
        cols = np.broadcast_arrays(*[np.asarray(a[k], dtype=float) for k in addresses])
        return np.stack(cols, axis=-1)

    def simulate(self, rng, size=None):
        shape = (self.dim,) if size is None else (int(size), self.dim)
        z = self.mean + rng.standard_normal(shape) @ self.chol.T
        return {a: z[..., i] for i, a in enumerate(self.addresses)}

    def _log_joint(self, a):
        return gaussian_logpdf(self._stack(a, self.addresses), self.mean, self.chol)

    def _site_params(self, i, a):
        mean = self.mean[i]
        for j in range(i):
            c = self._chain_coef[i, j]
            if c != 0.0:
                mean = mean + c * (np.asarray(a[self.addresses[j]], dtype=float) - self.mean[j])
        return mean, self._chain_sd[i]

    def site_propose(self, rng, address, a):
        i = self._pos[address]
        mean, sd = self._site_params(i, a)
        z = rng.standard_normal(np.shape(a[address]))
        return mean + sd * z, -0.5 * (LOG_2PI + z**2) - np.log(sd)

    def site_logpdf(self, address, value, a):
        i = self._pos[address]
        mean, sd = self._site_params(i, a)
        z = (np.asarray(value, dtype=float) - mean) / sd
        return -0.5 * (LOG_2PI + z**2) - np.log(sd)

    def simulate_latents_given(self, rng, y, latents, size=None):
        shape = () if size is None else (int(size),)
        latent_set = set(latents)
        a = dict(y)
        x = {}
        log_q = np.zeros(shape)
        for i, addr in enumerate(self.addresses):
            if addr not in latent_set:
                continue
            mean, sd = self._site_params(i, a)
            z = rng.standard_normal(shape)
            a[addr] = x[addr] = mean + sd * z
            log_q = log_q - 0.5 * (LOG_2PI + z**2) - np.log(sd)
        return x, log_q

    def marginal_logpdf(self, a, addresses):
        idx = self.index(addresses)
        sub = self.cov[np.ix_(idx, idx)]
        return gaussian_logpdf(self._stack(a, [self.addresses[i] for i in idx]),
                               self.mean[idx], _cholesky(sub, "submatrix"))

    def exact_entropy(self, targets) -> float:
        return mvn_subset_entropy(self, targets)


def _targets(sel):
    return sel.targets if isinstance(sel, Selection) else [as_address(t) for t in sel]


def mvn_subset_entropy(model: MVNModel, sel) -> float:
    """Closed-form entropy of the coordinates in ``sel`` (nats)."""
    idx = model.index(_targets(sel))
    if not idx:
        raise ValueError("empty selection")
    sub = model.cov[np.ix_(idx, idx)]
    try:
        return gaussian_entropy(sub)
    except SingularSubmatrix:
        raise SingularSubmatrix(f"covariance of {[str(a) for a in _targets(sel)]} is singular") from None


def mvn_conditional_params(model: MVNModel, targets, given):
    """Parameters of ``p(targets | given)``.

    Returns ``(gain, offset, cov)`` such that the conditional mean is
    ``offset + gain @ values(given)``.
    """
    ti, gi = model.index(targets), model.index(given)
    if set(ti) & set(gi):
        raise ValueError("target and conditioning sets overlap")
    mu_t = model.mean[ti]
    if not gi:
        return np.zeros((len(ti), 0)), mu_t, model.cov[np.ix_(ti, ti)]
    s_gg = model.cov[np.ix_(gi, gi)]
    s_tg = model.cov[np.ix_(ti, gi)]
    chol = _cholesky(s_gg, "conditioning submatrix")
    gain = cho_solve((chol, True), s_tg.T).T
    offset = mu_t - gain @ model.mean[gi]
    cov = model.cov[np.ix_(ti, ti)] - gain @ s_tg.T
    return gain, offset, 0.5 * (cov + cov.T)


class GaussianConditionalProposal(BasicProposal):
    """The exact posterior ``p(x | y)`` of an :class:`MVNModel` as a proposal."""

    label = "exact"

    def __init__(self, model: MVNModel, selection: Selection):
        super().__init__(model, selection)
        self.gain, self.offset, self.cond_cov = mvn_conditional_params(
            model, selection.latents, selection.targets
        )
        self.chol = _cholesky(self.cond_cov, "conditional covariance")

    def _mean(self, y):
        yv = np.array([y[a] for a in self.selection.targets], dtype=float)
        return self.offset + self.gain @ yv

    def propose(self, rng, y, size=None):
        mean = self._mean(y)
        k = len(mean)
        shape = (k,) if size is None else (int(size), k)
        xv = mean + rng.standard_normal(shape) @ self.chol.T
        x = {a: xv[..., i] for i, a in enumerate(self.selection.latents)}
        return x, gaussian_logpdf(xv, mean, self.chol)

    def assess(self, x, y):
        xv = np.stack([np.asarray(x[a], dtype=float) for a in self.selection.latents], axis=-1)
        return gaussian_logpdf(xv, self._mean(y), self.chol)


def equicorrelated_cov(d, rho=0.5, scale=1.0):
    """``scale * ((1 - rho) I + rho 11^T)``."""
    return scale * ((1.0 - rho) * np.eye(d) + rho * np.ones((d, d)))


def benchmark_mvn(d=10, rho=0.5, seed=None) -> MVNModel:
    """Zero-mean benchmark Gaussian for convergence experiments.

    With ``seed`` unset the covariance is equicorrelated; otherwise it is a
    seeded random correlation matrix blended towards equicorrelation.
    """
    if d < 1:
        raise ValueError("d must be positive")
    cov = equicorrelated_cov(d, rho)
    if seed is not None:
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((d, d))
        w = g @ g.T / d
        s = 1.0 / np.sqrt(np.diag(w))
        cov = 0.5 * cov + 0.5 * (w * s[:, None] * s[None, :])
    return MVNModel(np.zeros(d), cov)


def bivariate_normal(rho=0.5, var_x=1.0, var_y=1.0) -> MVNModel:
    c = rho * np.sqrt(var_x * var_y)
    return MVNModel(np.zeros(2), [[var_x, c], [c, var_y]])
