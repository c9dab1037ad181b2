"""Proposals without auxiliary variables: ancestral prior and Gaussian regression."""

from __future__ import annotations

import numpy as np

from ..errors import CapabilityMissing, InsufficientTrainingData, NonRealVariables
from ..model import JointModel, Selection, Real, split
from .base import BasicProposal

LOG_2PI = np.log(2 * np.pi)
VARIANCE_FLOOR = 1e-8


class PriorProposal(BasicProposal):
    """Ancestral sampling of the latents with the targets held fixed."""

    label = "prior"

    def __init__(self, model: JointModel, selection: Selection):
        if not model.can_simulate_latents:
            raise CapabilityMissing(f"{type(model).__name__} cannot ancestrally sample latents")
        super().__init__(model, selection)

    def propose(self, rng, y, size=None):
        return self.model.simulate_latents_given(rng, y, self.selection.latents, size)

    def assess(self, x, y):
        a = dict(y)
        a.update(x)
        total = 0.0
        for addr in self.selection.latents:
            total = total + self.model.site_logpdf(addr, x[addr], a)
        return total


def prior_propose(model, rng, y, selection):
    return PriorProposal(model, selection).propose(rng, y)


class GaussianRegressionProposal(BasicProposal):
    """Independent Gaussian per latent, linear in the targets.

    ``x_k ~ N(intercept_k + coef_k . y, resid_var_k)``.
    """

    label = "regression"

    def __init__(self, model, selection, intercept, coef, resid_var, n_train):
        super().__init__(model, selection)
        self.intercept = np.asarray(intercept, dtype=float)
        self.coef = np.asarray(coef, dtype=float)
        self.resid_var = np.maximum(np.asarray(resid_var, dtype=float), VARIANCE_FLOOR)
        self.n_train = int(n_train)
        self._sd = np.sqrt(self.resid_var)
        self._log_norm = -0.5 * (LOG_2PI + np.log(self.resid_var))

    def _mean(self, y):
        yv = np.array([y[a] for a in self.selection.targets], dtype=float)
        return self.intercept + self.coef @ yv

    def propose(self, rng, y, size=None):
        mean = self._mean(y)
        shape = (len(mean),) if size is None else (int(size), len(mean))
        z = rng.standard_normal(shape)
        xv = mean + self._sd * z
        log_q = np.sum(self._log_norm - 0.5 * z**2, axis=-1)
        x = {a: xv[..., k] for k, a in enumerate(self.selection.latents)}
        return x, log_q

    def assess(self, x, y):
        mean = self._mean(y)
        xv = np.stack([np.asarray(x[a], dtype=float) for a in self.selection.latents], axis=-1)
        z = (xv - mean) / self._sd
        return np.sum(self._log_norm - 0.5 * z**2, axis=-1)


def fit_regression_proposal(model: JointModel, selection: Selection, n_train: int, rng):
    """Least-squares fit of each latent on the targets over simulated pairs."""
    for a in selection.targets + selection.latents:
        if not isinstance(model.supports[a], Real):
            raise NonRealVariables(f"address {a} is not real-valued")
    n_y = len(selection.targets)
    if n_train < 10 * (n_y + 1):
        raise InsufficientTrainingData(
            f"n_train={n_train} < 10*(dim(y)+1)={10 * (n_y + 1)}"
        )
    sims = model.simulate(rng, size=n_train)
    y, x = split(sims, selection)
    Y = np.stack([np.asarray(y[a], dtype=float) for a in selection.targets], axis=1)
    X = np.stack([np.asarray(x[a], dtype=float) for a in selection.latents], axis=1)
    y_mean, x_mean = Y.mean(axis=0), X.mean(axis=0)
    Yc, Xc = Y - y_mean, X - x_mean
    # minimum-norm solution gives zero slope on constant regressors
    beta, *_ = np.linalg.lstsq(Yc, Xc, rcond=None)
    coef = beta.T
    intercept = x_mean - coef @ y_mean
    rank = np.linalg.matrix_rank(Yc)
    dof = max(n_train - rank - 1, 1)
    resid = Xc - Yc @ beta
    resid_var = np.maximum((resid**2).sum(axis=0) / dof, VARIANCE_FLOOR)
    return GaussianRegressionProposal(model, selection, intercept, coef, resid_var, n_train)
