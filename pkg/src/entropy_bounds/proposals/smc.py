"""Sequential Monte Carlo proposal and its conditional-SMC auxiliary.

An :class:`SMCSteps` object supplies the intermediate unnormalized targets
``log p~_t(x; y)`` (t = 0..T, with ``p~_T = p(x, y)``), the initial kernel
``q_0``, forward kernels ``q_t`` and backward kernels ``l_t``.  Particle
states are batched assignments.  The incremental weight at step ``t`` is

    p~_t(x_t) l_{t-1}(x_{t-1}; x_t) / (p~_{t-1}(x_{t-1}) q_t(x_t; x_{t-1}))

with ``x_{t-1}`` the resampled ancestor.  The forward log weight is
``sum_t log mean_j w_t^j``; the conditional run returns its negation.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from ..errors import BackwardKernelUnavailable, InvalidSMCConfig, ParticleCollapse
from ..logspace import logmeanexp, sample_categorical
from ..model import merge, split, take
from .base import BasicProposal, WeightedProposal

VALIDATION_TOL = 1e-9


class SMCSteps(ABC):
    """Targets and kernels of one SMC scheme."""

    n_steps: int
    # False when log_incremental never needs q_t densities
    uses_forward_density = True
    schedule_label = "custom"

    @abstractmethod
    def initial(self, rng, y, size):
        """Draw ``size`` particles from ``q_0``; return ``(x0, log_q0)``."""

    @abstractmethod
    def initial_logpdf(self, x0, y):
        ...

    @abstractmethod
    def log_target(self, t, x, y):
        ...

    @abstractmethod
    def forward(self, rng, t, x_prev, y):
        """Move particles with ``q_t``; return ``(x_new, log_q)`` (``log_q`` may be None)."""

    def forward_logpdf(self, t, x_new, x_prev, y):
        raise NotImplementedError

    def backward(self, rng, t, x_next, y):
        """Draw one state from ``l_t(.; x_{t+1}, y)``."""
        raise BackwardKernelUnavailable(f"no backward kernel for step {t}")

    def backward_logpdf(self, t, x_t, x_next, y):
        raise BackwardKernelUnavailable(f"no backward kernel density for step {t}")

    def log_incremental(self, t, x_prev, x_new, y, log_q=None):
        if log_q is None:
            log_q = self.forward_logpdf(t, x_new, x_prev, y)
        return (
            self.log_target(t, x_new, y)
            + self.backward_logpdf(t - 1, x_prev, x_new, y)
            - self.log_target(t - 1, x_prev, y)
            - log_q
        )

    def to_latents(self, x_final):
        """Map a final SMC state to a latent assignment."""
        return x_final

    def from_latents(self, x):
        return x


@dataclass(frozen=True)
class SMCConfig:
    n_particles: int
    steps: SMCSteps = field(compare=False)

    def __post_init__(self):
        if self.n_particles < 1:
            raise InvalidSMCConfig("n_particles must be >= 1")
        if self.steps.n_steps < 0:
            raise InvalidSMCConfig("n_steps must be >= 0")

    @property
    def n_steps(self):
        return self.steps.n_steps

    def to_dict(self):
        out = {"particles": self.n_particles, "steps": self.n_steps,
               "schedule": self.steps.schedule_label}
        betas = getattr(self.steps, "betas", None)
        if betas is not None:
            out["betas"] = [float(b) for b in betas]
        return out


@dataclass
class SMCState:
    """Auxiliary record ``v = (I_T, ancestors, particles)``."""

    final_index: int
    ancestors: list
    particles: list
    log_weights: list
    retained: list | None = None


def _put(batch, index, single):
    out = {}
    for k, v in batch.items():
        arr = np.array(v, copy=True)
        arr[index] = np.asarray(single[k])
        out[k] = arr
    return out


def _batch1(x):
    return {k: np.asarray(v)[None] for k, v in x.items()}


class SMCProposal(WeightedProposal):
    def __init__(self, model, selection, config: SMCConfig, validate=True):
        self.model = model
        self.selection = selection
        self.config = config
        self.steps = config.steps
        self.n_particles = config.n_particles
        self.label = f"smc-{self.steps.schedule_label}"
        if validate:
            self._validate()

    def _validate(self, n_points=3):
        rng = np.random.default_rng(0)
        T = self.steps.n_steps
        for _ in range(n_points):
            y, x = split(self.model.simulate(rng), self.selection)
            lp = float(self.model.log_joint(merge(x, y)))
            xT = self.steps.from_latents(_batch1(x))
            lt = float(np.asarray(self.steps.log_target(T, xT, y)).reshape(-1)[0])
            if not abs(lp - lt) <= VALIDATION_TOL:
                raise InvalidSMCConfig(
                    f"final target differs from p(x, y): {lt!r} vs {lp!r}"
                )

    @staticmethod
    def _lme(log_w, t):
        log_w = np.asarray(log_w, dtype=float)
        if np.all(np.isneginf(log_w)):
            raise ParticleCollapse(f"all particle weights are zero at step {t}")
        return float(logmeanexp(log_w))

    def propose(self, rng, y):
        P, steps = self.n_particles, self.steps
        x, log_q0 = steps.initial(rng, y, P)
        log_w = np.asarray(steps.log_target(0, x, y) - log_q0, dtype=float)
        total = self._lme(log_w, 0)
        particles, ancestors, weights = [x], [], [log_w]
        for t in range(1, steps.n_steps + 1):
            a = sample_categorical(rng, log_w, size=P)
            x_prev = take(x, a)
            x, log_q = steps.forward(rng, t, x_prev, y)
            log_w = np.asarray(steps.log_incremental(t, x_prev, x, y, log_q), dtype=float)
            total += self._lme(log_w, t)
            particles.append(x)
            ancestors.append(a)
            weights.append(log_w)
        k = int(sample_categorical(rng, log_w))
        x_out = {a: np.asarray(v)[0] for a, v in steps.to_latents(take(x, [k])).items()}
        return SMCState(k, ancestors, particles, weights), x_out, total

    def propose_aux(self, rng, x, y):
        P, steps = self.n_particles, self.steps
        T = steps.n_steps
        idx = [0] * (T + 1)
        retained = [None] * (T + 1)
        idx[T] = int(rng.integers(P))
        retained[T] = steps.from_latents(_batch1(x))
        for t in range(T - 1, -1, -1):
            idx[t] = int(rng.integers(P))
            retained[t] = steps.backward(rng, t, retained[t + 1], y)

        # draw the P - 1 free initial particles and slot the retained one in at
        # idx[0]; with no steps this consumes the stream exactly as conditional SIR
        k0 = idx[0]
        keep = {k: np.asarray(v) for k, v in retained[0].items()}
        if P > 1:
            free, _ = steps.initial(rng, y, P - 1)
            xs = {k: np.concatenate([free[k][:k0], keep[k], free[k][k0:]]) for k in keep}
        else:
            xs = keep
        log_q0 = np.asarray(steps.initial_logpdf(xs, y), dtype=float).reshape(-1)
        log_w = np.asarray(steps.log_target(0, xs, y) - log_q0, dtype=float)
        total = self._lme(log_w, 0)
        particles, ancestors, weights = [xs], [], [log_w]
        for t in range(1, T + 1):
            a = sample_categorical(rng, log_w, size=P)
            a[idx[t]] = idx[t - 1]
            x_prev = take(xs, a)
            xs, log_q = steps.forward(rng, t, x_prev, y)
            xs = _put(xs, idx[t], {k: v[0] for k, v in retained[t].items()})
            if steps.uses_forward_density:
                log_q = np.array(log_q, dtype=float, copy=True)
                log_q[idx[t]] = np.asarray(
                    steps.forward_logpdf(t, retained[t], take(x_prev, [idx[t]]), y)
                ).reshape(-1)[0]
            log_w = np.asarray(steps.log_incremental(t, x_prev, xs, y, log_q), dtype=float)
            total += self._lme(log_w, t)
            particles.append(xs)
            ancestors.append(a)
            weights.append(log_w)
        return SMCState(idx[T], ancestors, particles, weights, retained=idx), -total


def smc_propose(config: SMCConfig, model, selection, rng, y):
    return SMCProposal(model, selection, config, validate=False).propose(rng, y)


def csmc_aux_propose(config: SMCConfig, model, selection, rng, x, y):
    return SMCProposal(model, selection, config, validate=False).propose_aux(rng, x, y)


class TemperedSteps(SMCSteps):
    """Geometric path from a base proposal to the joint, for static models.

    ``log p~_t = beta_t log p(x, y) + (1 - beta_t) log q0(x; y)`` with a linear
    ``beta`` grid.  Forward kernels are ``mh_moves`` independence
    Metropolis-Hastings moves (proposal ``q0``) leaving ``p~_t`` invariant;
    the backward kernels are their reversals, which for these reversible
    kernels are the kernels themselves.  The incremental weight then reduces
    to ``p~_t(x_{t-1}) / p~_{t-1}(x_{t-1})``.
    """

    uses_forward_density = False
    schedule_label = "tempered"

    def __init__(self, model, selection, base: BasicProposal, n_steps: int, mh_moves=1, betas=None):
        self.model = model
        self.selection = selection
        self.base = base
        self.n_steps = int(n_steps)
        self.mh_moves = int(mh_moves)
        if betas is None:
            betas = np.linspace(0.0, 1.0, self.n_steps + 1) if self.n_steps > 0 else np.array([1.0])
        self.betas = np.asarray(betas, dtype=float)
        if len(self.betas) != self.n_steps + 1 or self.betas[-1] != 1.0:
            raise InvalidSMCConfig("beta schedule must have n_steps + 1 entries ending at 1")

    def _parts(self, x, y):
        lp = np.asarray(self.model.log_joint(merge(x, y)), dtype=float)
        lq = np.asarray(self.base.assess(x, y), dtype=float)
        return lp, lq

    def initial(self, rng, y, size):
        return self.base.propose(rng, y, size=size)

    def initial_logpdf(self, x0, y):
        return self.base.assess(x0, y)

    def log_target(self, t, x, y):
        beta = self.betas[t]
        lp, lq = self._parts(x, y)
        if beta == 1.0:
            return lp
        if beta == 0.0:
            return lq
        return beta * lp + (1.0 - beta) * lq

    def _mh(self, rng, beta, x, y):
        n = len(next(iter(x.values())))
        lp, lq = self._parts(x, y)
        for _ in range(self.mh_moves):
            prop, lq_new = self.base.propose(rng, y, size=n)
            lp_new = np.asarray(self.model.log_joint(merge(prop, y)), dtype=float)
            with np.errstate(invalid="ignore"):
                log_alpha = beta * ((lp_new - lq_new) - (lp - lq))
            accept = np.log(rng.random(n)) < np.nan_to_num(log_alpha, nan=-np.inf)
            x = {k: np.where(accept, prop[k], v) for k, v in x.items()}
            lp = np.where(accept, lp_new, lp)
            lq = np.where(accept, lq_new, lq)
        return x

    def forward(self, rng, t, x_prev, y):
        return self._mh(rng, self.betas[t], x_prev, y), None

    def log_incremental(self, t, x_prev, x_new, y, log_q=None):
        lp, lq = self._parts(x_prev, y)
        return (self.betas[t] - self.betas[t - 1]) * (lp - lq)

    def backward(self, rng, t, x_next, y):
        return self._mh(rng, self.betas[t + 1], x_next, y)


def tempered_smc(model, selection, base: BasicProposal, n_particles: int, n_steps: int, mh_moves=1):
    steps = TemperedSteps(model, selection, base, n_steps, mh_moves)
    return SMCProposal(model, selection, SMCConfig(n_particles, steps))
