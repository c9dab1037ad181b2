"""Single-site Metropolis-Hastings refresh of latents with targets fixed."""

from __future__ import annotations

import numpy as np

from ..errors import CapabilityMissing
from ..model import merge


def mh_sweep(model, sel, y, x, rng, kernel=None):
    """One sweep over the latents in model order.

    Each site is proposed from ``kernel(rng, address, a) -> (value, log_k)``
    (default: the model's ancestral site kernel, which depends only on the
    site's parents) and accepted with the Metropolis-Hastings ratio.

    Returns
    -------
    x_next : dict
    accept_probs : list of float
        Acceptance probability of each site move.
    """
    if not sel.latents:
        return dict(x), []
    if kernel is None:
        if not model.can_resimulate_sites:
            raise CapabilityMissing(f"{type(model).__name__} has no single-site kernels")
        kernel = model.site_propose
        kernel_logpdf = model.site_logpdf
    else:
        kernel_logpdf = kernel.logpdf
        kernel = kernel.propose
    a = merge(x, y)
    lp = float(model.log_joint(a))
    probs = []
    for addr in sel.latents:
        old = a[addr]
        new, log_k_new = kernel(rng, addr, a)
        b = dict(a)
        b[addr] = new
        lp_new = float(model.log_joint(b))
        log_k_old = float(kernel_logpdf(addr, old, b))
        with np.errstate(invalid="ignore"):
            log_ratio = lp_new + log_k_old - lp - float(log_k_new)
        if np.isnan(log_ratio):
            log_ratio = -np.inf
        prob = float(np.exp(min(0.0, log_ratio)))
        probs.append(prob)
        if rng.random() < prob:
            a, lp = b, lp_new
    return {k: a[k] for k in sel.latents}, probs


def mcmc_refresh(model, sel, y, x_current, rng):
    """One sweep leaving ``p(x | y)`` invariant."""
    return mh_sweep(model, sel, y, x_current, rng)[0]
