"""Multistage MCMC detection of differentially methylated regions."""

from .asgn import (
    AsgnParams,
    AsgnPriors,
    asgn_density,
    asgn_log_density,
    child_priors,
    default_priors,
    log_prior,
)
from .sampler import McmcConfig, PosteriorSummary, asgn_fit

__version__ = "0.1.0"

__all__ = [
    "AsgnParams",
    "AsgnPriors",
    "McmcConfig",
    "PosteriorSummary",
    "asgn_density",
    "asgn_fit",
    "asgn_log_density",
    "child_priors",
    "default_priors",
    "log_prior",
]
