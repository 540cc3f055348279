"""Standard location-scale kernels and log-location-scale distributions.

A log-location-scale lifetime T has ``log T = mu + sigma * Z`` where Z follows
one of four standard kernels:

========  =====================  =====================
kind      distribution of log T  distribution of T
========  =====================  =====================
normal    normal                 lognormal
sev       smallest extreme value Weibull
lev       largest extreme value  Frechet
logistic  logistic               loglogistic
========  =====================  =====================

Everything tail-sensitive is computed on the log scale; the plain versions are
thin wrappers around the log versions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special

__all__ = [
    "Family",
    "as_family",
    "LSParams",
    "WeibullParams",
    "ReparamPoint",
    "std_cdf",
    "std_sf",
    "std_logcdf",
    "std_logsf",
    "std_pdf",
    "std_logpdf",
    "std_dlogpdf",
    "std_quantile",
    "lls_cdf",
    "lls_sf",
    "lls_pdf",
    "lls_logpdf",
    "hazard",
    "quantile",
    "weibull_to_ls",
    "ls_to_weibull",
    "reparam_to_ls",
    "ls_to_reparam",
    "zeta",
]


class Family(str, Enum):
    """Standard kernel of a log-location-scale family."""

    NORMAL = "normal"
    SEV = "sev"
    LEV = "lev"
    LOGISTIC = "logistic"


_ALIASES = {
    "normal": Family.NORMAL,
    "lognormal": Family.NORMAL,
    "sev": Family.SEV,
    "weibull": Family.SEV,
    "lev": Family.LEV,
    "frechet": Family.LEV,
    "logistic": Family.LOGISTIC,
    "loglogistic": Family.LOGISTIC,
}


def as_family(family) -> Family:
    """Coerce a `Family` or a name such as ``"weibull"`` to a `Family`."""
    if isinstance(family, Family):
        return family
    try:
        return _ALIASES[str(family).lower()]
    except KeyError:
        raise ValueError(f"unknown distribution family {family!r}") from None


# ---------------------------------------------------------------------------
# Standard kernels.  All of these accept scalars or arrays and broadcast.


def _log1mexp(x):
    """log(1 - exp(x)) for x <= 0, accurate at both ends."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(x > -math.log(2.0), np.log(-np.expm1(x)), np.log1p(-np.exp(x)))


def std_logcdf(z, family):
    family = as_family(family)
    z = np.asarray(z, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        if family is Family.NORMAL:
            return special.log_ndtr(z)
        if family is Family.SEV:
            return _log1mexp(-np.exp(z))
        if family is Family.LEV:
            return -np.exp(-z)
        return -np.logaddexp(0.0, -z)


def std_logsf(z, family):
    family = as_family(family)
    z = np.asarray(z, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        if family is Family.NORMAL:
            return special.log_ndtr(-z)
        if family is Family.SEV:
            return -np.exp(z)
        if family is Family.LEV:
            return _log1mexp(-np.exp(-z))
        return -np.logaddexp(0.0, z)


def std_cdf(z, family):
    """Standard cdf Phi(z).

    Examples
    --------
    >>> float(std_cdf(0.0, "sev"))  # doctest: +ELLIPSIS
    0.632120558...
    """
    family = as_family(family)
    z = np.asarray(z, dtype=float)
    if family is Family.NORMAL:
        return special.ndtr(z)
    if family is Family.SEV:
        with np.errstate(over="ignore"):
            return -np.expm1(-np.exp(z))
    if family is Family.LOGISTIC:
        return special.expit(z)
    return np.exp(std_logcdf(z, family))


def std_sf(z, family):
    """Standard survival function 1 - Phi(z)."""
    family = as_family(family)
    z = np.asarray(z, dtype=float)
    if family is Family.NORMAL:
        return special.ndtr(-z)
    if family is Family.LEV:
        with np.errstate(over="ignore"):
            return -np.expm1(-np.exp(-z))
    if family is Family.LOGISTIC:
        return special.expit(-z)
    return np.exp(std_logsf(z, family))


def std_logpdf(z, family):
    family = as_family(family)
    z = np.asarray(z, dtype=float)
    with np.errstate(over="ignore"):
        if family is Family.NORMAL:
            return -0.5 * z * z - 0.5 * math.log(2.0 * math.pi)
        if family is Family.SEV:
            return z - np.exp(z)
        if family is Family.LEV:
            return -z - np.exp(-z)
        return -z - 2.0 * np.logaddexp(0.0, -z)


def std_pdf(z, family):
    return np.exp(std_logpdf(z, family))


def std_dlogpdf(z, family):
    """phi'(z) / phi(z), the derivative of the log density."""
    family = as_family(family)
    z = np.asarray(z, dtype=float)
    with np.errstate(over="ignore"):
        if family is Family.NORMAL:
            return -z
        if family is Family.SEV:
            return 1.0 - np.exp(z)
        if family is Family.LEV:
            return np.exp(-z) - 1.0
        return 1.0 - 2.0 * special.expit(z)


def std_quantile(p, family):
    """Inverse of `std_cdf`.

    Raises
    ------
    ValueError
        If any ``p`` lies outside the open interval (0, 1).
    """
    family = as_family(family)
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0.0) & (p < 1.0))):
        raise ValueError("probability must lie strictly between 0 and 1")
    if family is Family.NORMAL:
        return special.ndtri(p)
    if family is Family.SEV:
        return np.log(-np.log1p(-p))
    if family is Family.LEV:
        return -np.log(-np.log(p))
    return special.logit(p)


# ---------------------------------------------------------------------------
# Parameter containers


@dataclass(frozen=True)
class LSParams:
    """Location ``mu`` (log-time units) and scale ``sigma`` > 0."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise ValueError("mu must be finite")
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise ValueError("sigma must be positive and finite")


@dataclass(frozen=True)
class WeibullParams:
    """Weibull scale ``eta`` and shape ``beta``."""

    eta: float
    beta: float

    def __post_init__(self):
        if not (self.eta > 0.0 and self.beta > 0.0):
            raise ValueError("Weibull eta and beta must be positive")


@dataclass(frozen=True)
class ReparamPoint:
    """Quantile parameterization: ``t_pr`` is the ``p_r`` quantile."""

    t_pr: float
    sigma: float
    p_r: float

    def __post_init__(self):
        if not self.t_pr > 0.0:
            raise ValueError("t_pr must be positive")
        if not self.sigma > 0.0:
            raise ValueError("sigma must be positive")
        if not 0.0 < self.p_r < 1.0:
            raise ValueError("p_r must lie strictly between 0 and 1")


def weibull_to_ls(w: WeibullParams) -> LSParams:
    return LSParams(math.log(w.eta), 1.0 / w.beta)


def ls_to_weibull(p: LSParams) -> WeibullParams:
    return WeibullParams(math.exp(p.mu), 1.0 / p.sigma)


def reparam_to_ls(r: ReparamPoint, family) -> LSParams:
    z = float(std_quantile(r.p_r, family))
    return LSParams(math.log(r.t_pr) - z * r.sigma, r.sigma)


def ls_to_reparam(p: LSParams, p_r: float, family) -> ReparamPoint:
    if not 0.0 < p_r < 1.0:
        raise ValueError("p_r must lie strictly between 0 and 1")
    z = float(std_quantile(p_r, family))
    return ReparamPoint(math.exp(p.mu + z * p.sigma), p.sigma, p_r)


# ---------------------------------------------------------------------------
# Distribution functions of T


def _standardize(t, p: LSParams):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0.0)):
        raise ValueError("times must be positive")
    return (np.log(t) - p.mu) / p.sigma


def lls_cdf(t, p: LSParams, family):
    """F(t; mu, sigma) = Phi((log t - mu) / sigma)."""
    return std_cdf(_standardize(t, p), family)


def lls_sf(t, p: LSParams, family):
    return std_sf(_standardize(t, p), family)


def lls_logpdf(t, p: LSParams, family):
    z = _standardize(t, p)
    return std_logpdf(z, family) - math.log(p.sigma) - np.log(t)


def lls_pdf(t, p: LSParams, family):
    return np.exp(lls_logpdf(t, p, family))


def hazard(t, p: LSParams, family):
    """Hazard rate f(t) / (1 - F(t)), evaluated as a log-ratio."""
    z = _standardize(t, p)
    return np.exp(std_logpdf(z, family) - std_logsf(z, family)) / (p.sigma * np.asarray(t, float))


def quantile(prob, p: LSParams, family):
    """Time quantile t_p = exp(mu + Phi^{-1}(p) sigma)."""
    return np.exp(p.mu + std_quantile(prob, family) * p.sigma)


def zeta(t_e, p: LSParams):
    """Standardized log time (log t_e - mu) / sigma, so Phi(zeta) = F(t_e)."""
    return _standardize(t_e, p)
