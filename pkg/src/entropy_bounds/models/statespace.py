"""Scalar linear-Gaussian state-space model with an optional discrete gain.

For ``t = 0 .. horizon-1``::

    x[0] = m0 + g u[0] + N(0, v0)
    x[t] = a x[t-1] + g u[t] + N(0, q)
    y[t] = c x[t] + N(0, r)

``u`` is a fixed, exogenous input schedule.  The input gain ``g`` is either
the constant ``b`` or, when a ``gain_grid`` is given, ``gain_grid[theta]``
for a discrete latent ``theta`` drawn once from ``gain_prior``.  Given
``theta`` the model is linear-Gaussian, so exact marginals come from Kalman
filtering or from assembling the joint covariance directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import logsumexp

from ..errors import IndexOutOfHorizon, InvalidSelection, InvalidSMCConfig, ModelLoadError
from ..logspace import sample_categorical, sample_rows
from ..model import Address, Discrete, JointModel, Real, Selection, as_address
from ..proposals.base import BasicProposal
from ..proposals.smc import SMCSteps
from .gaussian import LOG_2PI, gaussian_entropy, gaussian_logpdf

THETA = Address("theta")


def _normal_logpdf(x, mean, var):
    return -0.5 * (LOG_2PI + np.log(var) + (x - mean) ** 2 / var)


@dataclass(frozen=True)
class SSMParams:
    horizon: int
    a: float = 0.8
    q: float = 0.5
    c: float = 1.0
    r: float = 0.5
    m0: float = 0.0
    v0: float = 1.0
    b: float = 1.0
    inputs: tuple = ()
    gain_grid: tuple = ()
    gain_prior: tuple = ()

    @classmethod
    def from_dict(cls, doc):
        known = set(cls.__dataclass_fields__)
        extra = set(doc) - known
        if extra:
            raise ModelLoadError(f"unknown state-space parameters {sorted(extra)}")
        doc = dict(doc)
        for key in ("inputs", "gain_grid", "gain_prior"):
            if key in doc:
                doc[key] = tuple(float(v) for v in doc[key])
        return cls(**doc)

    def to_dict(self):
        return {k: (list(v) if isinstance(v, tuple) else v)
                for k, v in self.__dict__.items()}


class LinearGaussianSSM(JointModel):
    """Joint model over ``theta`` (optional), ``x[t]`` and ``y[t]``."""

    can_simulate_latents = True
    can_resimulate_sites = True

    def __init__(self, params: SSMParams | None = None, **kwargs):
        p = params if params is not None else SSMParams(**kwargs)
        if p.horizon < 1:
            raise ModelLoadError("horizon must be >= 1")
        for name in ("q", "r", "v0"):
            if not getattr(p, name) > 0:
                raise ModelLoadError(f"noise variance {name} must be positive")
        self.params = p
        self.horizon = int(p.horizon)
        self.inputs = np.zeros(self.horizon) if not p.inputs else np.asarray(p.inputs, dtype=float)
        if self.inputs.shape != (self.horizon,):
            raise ModelLoadError(f"inputs must have length {self.horizon}")
        self.has_gain = bool(p.gain_grid)
        if self.has_gain:
            self.gain_grid = np.asarray(p.gain_grid, dtype=float)
            prior = (np.full(len(self.gain_grid), 1.0 / len(self.gain_grid))
                     if not p.gain_prior else np.asarray(p.gain_prior, dtype=float))
            if prior.shape != self.gain_grid.shape or abs(prior.sum() - 1.0) > 1e-9 or np.any(prior < 0):
                raise ModelLoadError("gain_prior must be a distribution over gain_grid")
            self.gain_prior = prior
            with np.errstate(divide="ignore"):
                self._log_gain_prior = np.log(prior)
        else:
            self.gain_grid = np.array([p.b])
            self.gain_prior = np.array([1.0])
            self._log_gain_prior = np.zeros(1)
        addrs = [THETA] if self.has_gain else []
        for t in range(self.horizon):
            addrs += [Address("x", t), Address("y", t)]
        self.addresses = tuple(addrs)
        self.supports = {a: Real() for a in self.addresses}
        if self.has_gain:
            self.supports[THETA] = Discrete(len(self.gain_grid))

    # --- site conditionals --------------------------------------------------

    def _gain(self, a):
        if not self.has_gain:
            return self.params.b
        th = np.asarray(a[THETA])
        ok = Discrete(len(self.gain_grid)).contains(th)
        return np.where(ok, self.gain_grid[np.clip(np.where(ok, th, 0).astype(np.int64), 0, None)], np.nan)

    def _site_mean_var(self, addr, a):
        p, t = self.params, addr.time
        if addr.name == "x":
            g = self._gain(a)
            if t == 0:
                return p.m0 + g * self.inputs[0], p.v0
            return p.a * np.asarray(a[Address("x", t - 1)], dtype=float) + g * self.inputs[t], p.q
        return p.c * np.asarray(a[Address("x", t)], dtype=float), p.r

    def site_logpdf(self, address, value, a):
        if address == THETA:
            th = np.asarray(value)
            ok = Discrete(len(self.gain_grid)).contains(th)
            lp = self._log_gain_prior[np.clip(np.where(ok, th, 0).astype(np.int64), 0, len(self.gain_grid) - 1)]
            return np.where(ok, lp, -np.inf)
        mean, var = self._site_mean_var(address, a)
        with np.errstate(invalid="ignore"):
            out = _normal_logpdf(np.asarray(value, dtype=float), mean, var)
        return np.where(np.isnan(out), -np.inf, out)

    def site_propose(self, rng, address, a):
        shape = np.shape(a[address])
        return self._sample_site(rng, address, a, shape)

    def _sample_site(self, rng, addr, a, shape):
        if addr == THETA:
            probs = np.broadcast_to(self.gain_prior, shape + self.gain_prior.shape)
            th = sample_rows(rng, probs)
            return th, self._log_gain_prior[th]
        mean, var = self._site_mean_var(addr, a)
        z = rng.standard_normal(shape)
        value = mean + np.sqrt(var) * z
        return value, -0.5 * (LOG_2PI + np.log(var) + z**2)

    def simulate(self, rng, size=None):
        shape = () if size is None else (int(size),)
        a = {}
        for addr in self.addresses:
            a[addr], _ = self._sample_site(rng, addr, a, shape)
        return a

    def simulate_latents_given(self, rng, y, latents, size=None):
        shape = () if size is None else (int(size),)
        latent_set = set(latents)
        a = dict(y)
        x, log_q = {}, np.zeros(shape)
        for addr in self.addresses:
            if addr in latent_set:
                value, lq = self._sample_site(rng, addr, a, shape)
                a[addr] = x[addr] = value
                log_q = log_q + lq
        return x, log_q

    def _log_joint(self, a):
        total = 0.0
        for addr in self.addresses:
            total = total + self.site_logpdf(addr, a[addr], a)
        return np.asarray(total, dtype=float)

    # --- exact Gaussian structure --------------------------------------------

    def _check_times(self, times):
        times = [int(t) for t in times]
        if len(set(times)) != len(times):
            raise InvalidSelection(f"duplicate time indexes {times}")
        for t in times:
            if not 0 <= t < self.horizon:
                raise IndexOutOfHorizon(f"time {t} outside horizon 0..{self.horizon - 1}")
        return times

    def state_moments(self, gain):
        """Mean and covariance of ``x[0..H-1]`` for a fixed input gain."""
        p, H = self.params, self.horizon
        lag = np.arange(H)[:, None] - np.arange(H)[None, :]
        M = np.where(lag >= 0, p.a ** np.maximum(lag, 0), 0.0)
        drive = gain * self.inputs
        drive[0] += p.m0
        D = np.full(H, p.q)
        D[0] = p.v0
        return M @ drive, (M * D) @ M.T

    def joint_moments(self, gain):
        """Mean and covariance of the stacked vector ``(x[0..H-1], y[0..H-1])``."""
        p, H = self.params, self.horizon
        mx, Sx = self.state_moments(gain)
        mean = np.concatenate([mx, p.c * mx])
        cov = np.empty((2 * H, 2 * H))
        cov[:H, :H] = Sx
        cov[:H, H:] = p.c * Sx
        cov[H:, :H] = p.c * Sx
        cov[H:, H:] = p.c**2 * Sx + p.r * np.eye(H)
        return mean, cov

    def observation_moments(self, times, gain=None):
        times = self._check_times(times)
        g = self.params.b if gain is None else gain
        mean, cov = self.joint_moments(g)
        idx = [self.horizon + t for t in times]
        return mean[idx], cov[np.ix_(idx, idx)]

    def _vector_index(self, addr):
        return addr.time + (self.horizon if addr.name == "y" else 0)

    def kalman_log_marginal(self, y_values, gain=None) -> float:
        """``log p(y[0..H-1])`` by Kalman filtering (marginalizing ``theta`` if present)."""
        y_values = np.asarray(y_values, dtype=float)
        if gain is not None or not self.has_gain:
            return self._kalman(y_values, self.params.b if gain is None else gain)
        terms = [lp + self._kalman(y_values, g) for lp, g in zip(self._log_gain_prior, self.gain_grid)]
        return float(logsumexp(terms))

    def _kalman(self, y, gain):
        p = self.params
        mean, var = p.m0 + gain * self.inputs[0], p.v0
        total = 0.0
        for t in range(self.horizon):
            if t > 0:
                mean = p.a * mean + gain * self.inputs[t]
                var = p.a**2 * var + p.q
            s = p.c**2 * var + p.r
            total += _normal_logpdf(y[t], p.c * mean, s)
            k = var * p.c / s
            mean = mean + k * (y[t] - p.c * mean)
            var = (1.0 - k * p.c) * var
        return float(total)

    def direct_log_marginal(self, y_values, gain=None) -> float:
        """``log p(y[0..H-1])`` from the assembled observation covariance."""
        y_values = np.asarray(y_values, dtype=float)
        times = range(self.horizon)
        if gain is not None or not self.has_gain:
            m, S = self.observation_moments(times, gain)
            return float(gaussian_logpdf(y_values, m, np.linalg.cholesky(S)))
        terms = []
        for lp, g in zip(self._log_gain_prior, self.gain_grid):
            m, S = self.observation_moments(times, g)
            terms.append(lp + gaussian_logpdf(y_values, m, np.linalg.cholesky(S)))
        return float(logsumexp(terms))

    def exact_entropy(self, targets):
        """Closed form for observation-only selections of a model without ``theta``."""
        targets = [as_address(t) for t in targets]
        if self.has_gain or any(t.name != "y" for t in targets):
            raise NotImplementedError("closed form only for observations without a gain latent")
        return ssm_observation_entropy(self, [t.time for t in targets])


def ssm_observation_entropy(model: LinearGaussianSSM, times, gain=None) -> float:
    """Gaussian entropy of the observations at ``times`` for a fixed gain.

    The observation covariance does not depend on the gain, so for models
    with a gain latent this is the conditional entropy ``H(Y_times | theta)``.
    """
    _, cov = model.observation_moments(times, gain)
    return gaussian_entropy(cov)


def ssm_mixture_entropy(model: LinearGaussianSSM, times, n_grid=401, width=9.0) -> float:
    """Entropy of ``Y_times`` marginalized over ``theta``, by grid quadrature.

    Only one or two times are supported (the mixture is integrated on a
    tensor grid spanning ``width`` standard deviations around the
    component means).
    """
    times = model._check_times(times)
    if len(times) not in (1, 2):
        raise ValueError("quadrature supports one or two observation times")
    comps = [model.observation_moments(times, g) for g in model.gain_grid]
    cov = comps[0][1]
    means = np.array([m for m, _ in comps])
    sd = np.sqrt(np.diag(cov))
    lo = means.min(axis=0) - width * sd
    hi = means.max(axis=0) + width * sd
    axes = [np.linspace(lo[k], hi[k], n_grid) for k in range(len(times))]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    chol = np.linalg.cholesky(cov)
    logs = np.stack([lp + gaussian_logpdf(mesh, m, chol)
                     for lp, m in zip(model._log_gain_prior, means) if np.isfinite(lp)])
    log_mix = logsumexp(logs, axis=0)
    integrand = -np.exp(log_mix) * log_mix
    out = integrand
    for ax in reversed(axes):
        out = trapezoid(out, ax, axis=-1)
    return float(out)


def ssm_gain_cmi(model: LinearGaussianSSM, times) -> float:
    """Exact ``I(theta : Y_times)`` = mixture entropy minus component entropy."""
    if not model.has_gain:
        return 0.0
    return ssm_mixture_entropy(model, times) - ssm_observation_entropy(model, times, model.gain_grid[0])


class SSMPosteriorProposal(BasicProposal):
    """Exact ``p(x | y)`` for any selection of a :class:`LinearGaussianSSM`.

    ``theta``, if latent, is drawn from its exact posterior; the real-valued
    latents follow by Gaussian conditioning.
    """

    label = "exact"

    def __init__(self, model: LinearGaussianSSM, selection: Selection):
        super().__init__(model, selection)
        self.theta_latent = model.has_gain and THETA in selection.latents
        self.real_latents = [a for a in selection.latents if a != THETA]
        self.real_targets = [a for a in selection.targets if a != THETA]
        self._li = [model._vector_index(a) for a in self.real_latents]
        self._ti = [model._vector_index(a) for a in self.real_targets]
        self._cond = {}
        for k, g in enumerate(model.gain_grid):
            mean, cov = model.joint_moments(g)
            self._cond[k] = self._condition(mean, cov)

    def _condition(self, mean, cov):
        li, ti = self._li, self._ti
        s_tt = cov[np.ix_(ti, ti)]
        s_lt = cov[np.ix_(li, ti)]
        if ti:
            gain = np.linalg.solve(s_tt, s_lt.T).T
            ccov = cov[np.ix_(li, li)] - gain @ s_lt.T
            chol_t = np.linalg.cholesky(s_tt)
        else:
            gain = np.zeros((len(li), 0))
            ccov = cov[np.ix_(li, li)]
            chol_t = None
        chol = np.linalg.cholesky(0.5 * (ccov + ccov.T)) if li else None
        return mean[li], mean[ti], gain, chol, chol_t

    def _theta_log_post(self, yv):
        logs = []
        for k, lp in enumerate(self.model._log_gain_prior):
            _, mt, _, _, chol_t = self._cond[k]
            logs.append(lp + (gaussian_logpdf(yv, mt, chol_t) if chol_t is not None else 0.0))
        logs = np.asarray(logs, dtype=float)
        return logs - logsumexp(logs)

    def _theta_index(self, y):
        if not self.model.has_gain:
            return None
        if self.theta_latent:
            return None
        return int(y[THETA])

    def propose(self, rng, y, size=None):
        shape = () if size is None else (int(size),)
        yv = np.array([y[a] for a in self.real_targets], dtype=float)
        log_q = np.zeros(shape)
        x = {}
        if self.theta_latent:
            lpost = self._theta_log_post(yv)
            th = np.asarray(sample_categorical(rng, lpost, size=size))
            x[THETA] = th
            log_q = log_q + lpost[th]
            comps = th
        else:
            k = self._theta_index(y) or 0
            comps = np.full(shape, k, dtype=np.int64)
        if self.real_latents:
            z = rng.standard_normal(shape + (len(self.real_latents),))
            xv = np.empty_like(z)
            for k in np.unique(comps):
                ml, mt, gain, chol, _ = self._cond[int(k)]
                sel = comps == k
                mean = ml + gain @ (yv - mt)
                xv[sel] = mean + z[sel] @ chol.T
                log_q = np.where(sel, log_q + gaussian_logpdf(xv, mean, chol), log_q)
            for i, a in enumerate(self.real_latents):
                x[a] = xv[..., i]
        return x, log_q

    def assess(self, x, y):
        yv = np.array([y[a] for a in self.real_targets], dtype=float)
        if self.theta_latent:
            lpost = self._theta_log_post(yv)
            comps = np.asarray(x[THETA]).astype(np.int64)
            log_q = lpost[comps]
        else:
            k = self._theta_index(y) or 0
            comps = None
            log_q = 0.0
        if self.real_latents:
            xv = np.stack([np.asarray(x[a], dtype=float) for a in self.real_latents], axis=-1)
            if comps is None:
                ml, mt, gain, chol, _ = self._cond[k]
                log_q = log_q + gaussian_logpdf(xv, ml + gain @ (yv - mt), chol)
            else:
                out = np.zeros(np.shape(comps))
                for c in np.unique(comps):
                    ml, mt, gain, chol, _ = self._cond[int(c)]
                    out = np.where(comps == c, gaussian_logpdf(xv, ml + gain @ (yv - mt), chol), out)
                log_q = log_q + out
        return log_q


class TrajectorySteps(SMCSteps):
    """Particle-filter scheme over time for a :class:`LinearGaussianSSM`.

    Step ``t`` extends each particle by its latents at time ``t`` (plus
    ``theta`` at step 0), drawn from their ancestral conditionals.  The
    intermediate target ``p~_t`` is the density of every address at times
    ``<= t``; the backward kernel drops the time-``t+1`` latents, so it has
    unit density.
    """

    uses_forward_density = True
    schedule_label = "trajectory"

    def __init__(self, model: LinearGaussianSSM, selection: Selection):
        self.model = model
        self.selection = selection
        self.n_steps = model.horizon - 1
        lat, tgt = set(selection.latents), set(selection.targets)
        self._latent_at = [[] for _ in range(model.horizon)]
        self._target_at = [[] for _ in range(model.horizon)]
        for addr in model.addresses:
            t = 0 if addr.time is None else addr.time
            (self._latent_at if addr in lat else self._target_at)[t].append(addr)
        if not self._latent_at[0]:
            raise InvalidSMCConfig("trajectory SMC needs at least one latent at time 0")
        self._prefix = [tuple(a for a in model.addresses if (0 if a.time is None else a.time) <= t)
                        for t in range(model.horizon)]

    def _extend(self, rng, t, x_prev, y, size):
        a = dict(y)
        a.update(x_prev)
        x = dict(x_prev)
        log_q = np.zeros((size,))
        for addr in self._latent_at[t]:
            value, lq = self.model._sample_site(rng, addr, a, (size,))
            a[addr] = x[addr] = value
            log_q = log_q + lq
        return x, log_q

    def _site_sum(self, addrs, x, y):
        a = dict(y)
        a.update(x)
        n = len(next(iter(x.values()))) if x else 1
        total = np.zeros(n)
        for addr in addrs:
            total = total + self.model.site_logpdf(addr, a[addr], a)
        return total

    def initial(self, rng, y, size):
        return self._extend(rng, 0, {}, y, size)

    def initial_logpdf(self, x0, y):
        return self._site_sum(self._latent_at[0], x0, y)

    def log_target(self, t, x, y):
        return self._site_sum(self._prefix[t], x, y)

    def forward(self, rng, t, x_prev, y):
        n = len(next(iter(x_prev.values())))
        return self._extend(rng, t, x_prev, y, n)

    def forward_logpdf(self, t, x_new, x_prev, y):
        return self._site_sum(self._latent_at[t], x_new, y)

    def backward(self, rng, t, x_next, y):
        drop = set(self._latent_at[t + 1])
        return {k: v for k, v in x_next.items() if k not in drop}

    def backward_logpdf(self, t, x_t, x_next, y):
        n = len(next(iter(x_next.values())))
        return np.zeros(n)

    def log_incremental(self, t, x_prev, x_new, y, log_q=None):
        # p~_t / p~_{t-1} only involves the time-t sites
        sites = self._latent_at[t] + self._target_at[t]
        if log_q is None:
            log_q = self.forward_logpdf(t, x_new, x_prev, y)
        return self._site_sum(sites, x_new, y) - log_q


def trajectory_smc(model: LinearGaussianSSM, selection: Selection, n_particles: int):
    from ..proposals.smc import SMCConfig, SMCProposal

    return SMCProposal(model, selection, SMCConfig(n_particles, TrajectorySteps(model, selection)))


def default_gain_model(horizon=6, inputs=None, gain_grid=(0.5, 1.0, 1.5, 2.0), pulse=2.0,
                       r=0.2, **kwargs):
    """Stand-in for a physiological model with one unknown sensitivity.

    By default a single input pulse of size ``pulse`` is applied at time 1.
    """
    if inputs is None:
        inputs = np.zeros(horizon)
        if horizon > 1:
            inputs[1] = pulse
    return LinearGaussianSSM(SSMParams(horizon=horizon, inputs=tuple(np.asarray(inputs, float)),
                                       gain_grid=tuple(gain_grid), r=r, **kwargs))


@dataclass
class PairGrid:
    """CMI intervals for every ordered pair of observation times."""

    cells: dict = field(default_factory=dict)

    @property
    def argmax(self):
        """Pair with the largest interval midpoint (earliest pair on ties)."""
        return max(sorted(self.cells), key=lambda k: self.cells[k].midpoint)


def ssm_measurement_pair_grid(model: LinearGaussianSSM, target, factory, cfg, times=None,
                              shared_outer=True) -> PairGrid:
    """``I(target : (y[t1], y[t2]))`` intervals for all ``t1 < t2``.

    The input schedule is part of the model (exogenous inputs), so each
    cell conditions on it implicitly.
    """
    from ..measures import cmi_interval

    times = list(range(model.horizon)) if times is None else model._check_times(times)
    if len(times) < 2:
        raise IndexOutOfHorizon("a pair grid needs at least two observation times")
    grid = PairGrid()
    for j, (t1, t2) in enumerate((a, b) for i, a in enumerate(times) for b in times[i + 1:]):
        pair = [Address("y", t1), Address("y", t2)]
        grid.cells[(t1, t2)] = cmi_interval(model, target, pair, None, factory, cfg,
                                            shared_outer=shared_outer, key=(j,))
    return grid
