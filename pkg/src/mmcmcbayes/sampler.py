"""Metropolis-within-Gibbs sampler for the ASGN posterior.

The chain runs over ``(alpha, nu, log delta2)`` with Gaussian random-walk
proposals, one coordinate at a time in that order.  Proposal scales follow a
Robbins-Monro recursion during burn-in and are frozen afterwards, so the
retained draws come from a fixed kernel.

All random numbers are drawn up front from a ``numpy`` generator seeded by
the caller; the compiled kernel itself is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np

from .asgn import (
    GAMMA_1_2,
    GAMMA_3_2,
    LOG_2PI,
    LOG_SQRT2,
    VARIANCE_FLOOR,
    AsgnParams,
    AsgnPriors,
    finite_values,
)
from .errors import ConfigError, TooFewObservationsError

INITIAL_SCALE = 0.5
TARGET_ACCEPTANCE = 0.35
_ADAPT_EXPONENT = 0.6
_MIN_LOG_SCALE = math.log(1e-6)
_MAX_LOG_SCALE = math.log(1e3)


@dataclass(frozen=True)
class McmcConfig:
    nburn: int = 5000
    niter: int = 10000
    thin: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.nburn < 0:
            raise ConfigError("nburn must be >= 0")
        if self.niter < 1 or self.thin < 1:
            raise ConfigError("niter and thin must be >= 1")
        if self.niter // self.thin < 2:
            raise ConfigError("niter // thin must leave at least 2 retained draws")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    @property
    def n_retained(self) -> int:
        return self.niter // self.thin


@dataclass(frozen=True)
class PosteriorSummary:
    mean: AsgnParams
    ci_lower: tuple[float, float, float]
    ci_upper: tuple[float, float, float]
    acceptance_rates: tuple[float, float, float]
    n_retained: int
    # (n_retained, 3) draws of (alpha, nu, delta2); None when not kept
    samples: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def interval(self, name: str) -> tuple[float, float]:
        i = ("alpha", "nu", "delta2").index(name)
        return self.ci_lower[i], self.ci_upper[i]


@numba.njit(cache=True)
def _log_lik(y, alpha, nu, delta2):
    const = LOG_SQRT2 - math.log(4.0 * (GAMMA_3_2 * alpha * alpha + GAMMA_1_2)) - 0.5 * math.log(delta2)
    inv_d = 1.0 / math.sqrt(delta2)
    total = 0.0
    for i in range(y.shape[0]):
        z = (y[i] - nu) * inv_d
        p = 1.0 - alpha * z
        total += const + math.log1p(p * p) - 0.5 * z * z
    return total


@numba.njit(cache=True)
def _log_target(y, alpha, nu, log_d2, hyper):
    mu_a, s2_a, mu_n, s2_n, a_d, b_d = hyper[0], hyper[1], hyper[2], hyper[3], hyper[4], hyper[5]
    delta2 = math.exp(log_d2)
    if not (delta2 > 0.0 and delta2 < np.inf):
        return -np.inf
    ll = _log_lik(y, alpha, nu, delta2)
    lp = -0.5 * (LOG_2PI + math.log(s2_a)) - (alpha - mu_a) ** 2 / (2.0 * s2_a)
    lp += -0.5 * (LOG_2PI + math.log(s2_n)) - (nu - mu_n) ** 2 / (2.0 * s2_n)
    lp += a_d * math.log(b_d) - math.lgamma(a_d) - (a_d + 1.0) * log_d2 - b_d / delta2
    # Jacobian of delta2 = exp(log_d2)
    return ll + lp + log_d2


@numba.njit(cache=True, nogil=True)
def _run_chain(y, hyper, init, log_scales, z, log_u, nburn, niter, thin):
    state = init.copy()
    current = _log_target(y, state[0], state[1], state[2], hyper)
    n_keep = niter // thin
    out = np.empty((n_keep, 3))
    accepted = np.zeros(3)
    k = 0
    for t in range(nburn + niter):
        for j in range(3):
            old = state[j]
            state[j] = old + math.exp(log_scales[j]) * z[t, j]
            proposed = _log_target(y, state[0], state[1], state[2], hyper)
            acc = proposed > -np.inf and log_u[t, j] < proposed - current
            if acc:
                current = proposed
            else:
                state[j] = old
            if t < nburn:
                gain = 1.0 / (t + 1.0) ** _ADAPT_EXPONENT
                log_scales[j] += gain * ((1.0 if acc else 0.0) - TARGET_ACCEPTANCE)
                log_scales[j] = min(max(log_scales[j], _MIN_LOG_SCALE), _MAX_LOG_SCALE)
            elif acc:
                accepted[j] += 1.0
        if t >= nburn:
            i = t - nburn + 1
            if i % thin == 0:
                out[k, 0] = state[0]
                out[k, 1] = state[1]
                out[k, 2] = math.exp(state[2])
                k += 1
    return out, accepted / niter, log_scales


def asgn_fit(data, priors: AsgnPriors, mcmc: McmcConfig, keep_samples: bool = True) -> PosteriorSummary:
    """Posterior means and 95% percentile intervals for (alpha, nu, delta2).

    Missing / non-finite entries of ``data`` are dropped; at least three
    finite values must remain.  The result depends only on
    ``(data, priors, mcmc)``.
    """
    y = finite_values(data)
    if y.size < 3:
        raise TooFewObservationsError(f"need at least 3 finite observations, got {y.size}")
    if not isinstance(mcmc, McmcConfig):
        raise ConfigError("mcmc must be a McmcConfig")

    init = np.array([0.0, float(np.mean(y)), math.log(max(float(np.var(y, ddof=1)), VARIANCE_FLOOR))])
    rng = np.random.default_rng(mcmc.seed)
    total = mcmc.nburn + mcmc.niter
    z = rng.standard_normal((total, 3))
    log_u = np.log(rng.random((total, 3)))
    hyper = np.array(priors.as_tuple(), dtype=float)
    log_scales = np.full(3, math.log(INITIAL_SCALE))

    draws, acc, _ = _run_chain(y, hyper, init, log_scales, z, log_u, mcmc.nburn, mcmc.niter, mcmc.thin)

    mean = draws.mean(axis=0)
    lower, upper = np.percentile(draws, [2.5, 97.5], axis=0)
    return PosteriorSummary(
        mean=AsgnParams(float(mean[0]), float(mean[1]), float(mean[2])),
        ci_lower=tuple(float(v) for v in lower),
        ci_upper=tuple(float(v) for v in upper),
        acceptance_rates=tuple(float(v) for v in acc),
        n_retained=draws.shape[0],
        samples=draws if keep_samples else None,
    )
