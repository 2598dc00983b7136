"""Alpha-skew generalized normal (ASGN) density and its priors.

With ``z = (y - v) / d`` and ``d = sqrt(d2)`` the density is::

    f(y | a, v, d2) = sqrt(2) * ((1 - a*z)**2 + 1) / (4 * (G(3/2)*a**2 + G(1/2)))
                      * exp(-z**2 / 2) / d

which integrates to one for every real ``a``.  At ``a = 0`` it reduces to the
normal density N(v, d2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, TooFewObservationsError

GAMMA_3_2 = math.sqrt(math.pi) / 2.0
GAMMA_1_2 = math.sqrt(math.pi)
LOG_SQRT2 = 0.5 * math.log(2.0)
LOG_2PI = math.log(2.0 * math.pi)

#: floor applied to data-derived prior scales so constant data stays usable
VARIANCE_FLOOR = 0.01


def skew_denominator(alpha: float) -> float:
    return GAMMA_3_2 * alpha * alpha + GAMMA_1_2


@dataclass(frozen=True)
class AsgnParams:
    alpha: float
    nu: float
    delta2: float

    def __post_init__(self):
        if not (self.delta2 > 0 and math.isfinite(self.delta2)):
            raise DomainError(f"delta2 must be a finite positive number, got {self.delta2}")
        if not (math.isfinite(self.alpha) and math.isfinite(self.nu)):
            raise DomainError("alpha and nu must be finite")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha, self.nu, self.delta2)


@dataclass(frozen=True)
class AsgnPriors:
    """Hyperparameters: N(mu_a, sigma2_a) on alpha, N(mu_n, sigma2_n) on nu,
    inverse-gamma(A_d, B_d) (shape, rate) on delta2."""

    mu_a: float
    sigma2_a: float
    mu_n: float
    sigma2_n: float
    A_d: float
    B_d: float

    def __post_init__(self):
        for name in ("sigma2_a", "sigma2_n", "A_d", "B_d"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be a finite positive number, got {value}")
        for name in ("mu_a", "mu_n"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    def as_tuple(self) -> tuple[float, ...]:
        return (self.mu_a, self.sigma2_a, self.mu_n, self.sigma2_n, self.A_d, self.B_d)

    @classmethod
    def from_triple(cls, alpha: float, mu: float, sigma2: float) -> "AsgnPriors":
        """Build priors from the user-facing ``alpha=, mu=, sigma2=`` triple.

        ``alpha`` -> mu_a, ``mu`` -> mu_n, ``sigma2`` -> A_d; the remaining
        hyperparameters are fixed at sigma2_a = sigma2_n = B_d = 1.
        """
        return cls(mu_a=alpha, sigma2_a=1.0, mu_n=mu, sigma2_n=1.0, A_d=sigma2, B_d=1.0)


def asgn_log_density(y, params: AsgnParams):
    """Log ASGN density; ``y`` may be a scalar or an array."""
    alpha, nu, delta2 = params.alpha, params.nu, params.delta2
    if not delta2 > 0:
        raise DomainError("delta2 must be positive")
    z = (np.asarray(y, dtype=float) - nu) / math.sqrt(delta2)
    out = (
        LOG_SQRT2
        - math.log(4.0 * skew_denominator(alpha))
        - 0.5 * math.log(delta2)
        + np.log1p((1.0 - alpha * z) ** 2)
        - 0.5 * z * z
    )
    return float(out) if out.ndim == 0 else out


def asgn_density(y, params: AsgnParams):
    out = np.exp(asgn_log_density(y, params))
    return float(out) if np.ndim(out) == 0 else out


def _log_normal(x: float, mu: float, var: float) -> float:
    return -0.5 * (LOG_2PI + math.log(var)) - (x - mu) ** 2 / (2.0 * var)


def log_inverse_gamma(x: float, shape: float, rate: float) -> float:
    if not x > 0:
        raise DomainError(f"inverse-gamma support is x > 0, got {x}")
    return shape * math.log(rate) - math.lgamma(shape) - (shape + 1.0) * math.log(x) - rate / x


def log_prior(params: AsgnParams, priors: AsgnPriors) -> float:
    return (
        _log_normal(params.alpha, priors.mu_a, priors.sigma2_a)
        + _log_normal(params.nu, priors.mu_n, priors.sigma2_n)
        + log_inverse_gamma(params.delta2, priors.A_d, priors.B_d)
    )


def finite_values(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float).ravel()
    return arr[np.isfinite(arr)]


def default_priors(data) -> AsgnPriors:
    """Weakly informative priors centred on the observed data.

    The inverse-gamma shape is 2, so its mean equals ``B_d``, which is set to
    the (floored) sample variance.
    """
    y = finite_values(data)
    if y.size < 3:
        raise TooFewObservationsError(f"need at least 3 finite observations, got {y.size}")
    var = max(float(np.var(y, ddof=1)), VARIANCE_FLOOR)
    return AsgnPriors(mu_a=0.0, sigma2_a=1.0, mu_n=float(np.mean(y)), sigma2_n=var, A_d=2.0, B_d=var)


def child_priors(parent) -> AsgnPriors:
    """Priors for a subsegment, carried forward from the parent's posterior means."""
    mean = parent.mean
    return AsgnPriors(
        mu_a=mean.alpha, sigma2_a=1.0, mu_n=mean.nu, sigma2_n=1.0, A_d=2.0, B_d=mean.delta2
    )
