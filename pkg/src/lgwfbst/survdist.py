"""Lognormal, gamma and Weibull survival models indexed by mean and variance.

Every family is written in terms of the same two connecting parameters, the
population mean ``mu`` and variance ``sigma2``. The functions here convert
those moments to each family's native parameters and evaluate log-density,
survival and hazard functions, all in log space.
"""

from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

from . import _kernels as _k
from .exceptions import DomainError, SolverError

__all__ = [
    "Family",
    "SharedMoments",
    "LognormalParams",
    "GammaParams",
    "WeibullParams",
    "lognormal_from_moments",
    "gamma_from_moments",
    "weibull_from_moments",
    "weibull_shape_residual",
    "native_params",
    "log_pdf",
    "log_survival",
    "pdf",
    "survival",
    "hazard",
    "sample",
]

WEIBULL_SHAPE_BRACKET = (0.05, 700.0)


class Family(Enum):
    """Survival family tag; the value is the lowercase name used in files."""

    LOGNORMAL = "lognormal"
    GAMMA = "gamma"
    WEIBULL = "weibull"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise DomainError(f"unknown family {name!r}") from None

    @property
    def short(self):
        return self.value[0].upper()


_CODES = {Family.LOGNORMAL: _k.LOGNORMAL, Family.GAMMA: _k.GAMMA, Family.WEIBULL: _k.WEIBULL}


@dataclass(frozen=True)
class SharedMoments:
    """Population mean and variance shared by every mixture component."""

    mu: float
    sigma2: float

    def __post_init__(self):
        mu, sigma2 = float(self.mu), float(self.sigma2)
        if not (math.isfinite(mu) and math.isfinite(sigma2)) or mu <= 0 or sigma2 <= 0:
            raise DomainError(f"moments must be finite and positive, got mu={mu}, sigma2={sigma2}")
        mu_sq = mu * mu
        if not (0 < mu_sq < math.inf and 0 < sigma2 / mu_sq < math.inf):
            raise DomainError(f"moments out of floating-point range: mu={mu}, sigma2={sigma2}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma2", sigma2)

    @property
    def cv2(self):
        """Squared coefficient of variation."""
        return self.sigma2 / (self.mu * self.mu)


@dataclass(frozen=True)
class LognormalParams:
    alpha1: float  # mean of log T
    alpha2: float  # variance of log T


@dataclass(frozen=True)
class GammaParams:
    gamma1: float  # scale
    gamma2: float  # shape


@dataclass(frozen=True)
class WeibullParams:
    beta1: float  # scale
    beta2: float  # shape


def lognormal_from_moments(m):
    alpha2 = math.log1p(m.cv2)
    alpha1 = math.log(m.mu) - 0.5 * alpha2
    return LognormalParams(alpha1, alpha2)


def gamma_from_moments(m):
    return GammaParams(m.sigma2 / m.mu, m.mu * m.mu / m.sigma2)


def weibull_shape_residual(shape, cv2):
    """Zero exactly when a Weibull of this shape has squared CV ``cv2``."""
    return _k.weibull_residual(float(shape), float(cv2))


def weibull_from_moments(m):
    """Solve for the Weibull scale and shape matching ``m``.

    The shape is the root of the squared-CV equation, found by Newton's
    method safeguarded by bisection on ``WEIBULL_SHAPE_BRACKET``. Raises
    :class:`SolverError` when the root is outside the bracket or the
    residual does not reach 1e-10.
    """
    lo, hi = WEIBULL_SHAPE_BRACKET
    shape, resid, status = _k.weibull_shape(m.cv2, lo, hi, 200)
    if status == 1:
        raise SolverError(
            f"squared CV {m.cv2:g} has no Weibull shape in {WEIBULL_SHAPE_BRACKET}", residual=resid
        )
    if status != 0 or abs(resid) > 1e-10:
        raise SolverError(f"Weibull shape solver did not converge for cv2={m.cv2:g}", residual=resid)
    scale = m.mu / math.exp(math.lgamma(1.0 + 1.0 / shape))
    return WeibullParams(scale, shape)


def native_params(family, m):
    family = Family.parse(family)
    if family is Family.LOGNORMAL:
        return lognormal_from_moments(m)
    if family is Family.GAMMA:
        return gamma_from_moments(m)
    return weibull_from_moments(m)


def _times(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("survival times must be positive")
    return t


def _param_pair(params):
    if isinstance(params, LognormalParams):
        return params.alpha1, params.alpha2
    if isinstance(params, GammaParams):
        return params.gamma1, params.gamma2
    return params.beta1, params.beta2


def _log_pdf(family, params, t):
    return _k.logpdf_ufunc(_CODES[family], t, *_param_pair(params))


def _log_survival(family, params, t):
    return _k.logsf_ufunc(_CODES[family], t, *_param_pair(params))


def log_pdf(family, m, t):
    """Log-density of ``family`` with moments ``m`` at times ``t > 0``."""
    family = Family.parse(family)
    t = _times(t)
    return _log_pdf(family, native_params(family, m), t)


def log_survival(family, m, t):
    """Log of the survival function S(t) = P(T > t)."""
    family = Family.parse(family)
    t = _times(t)
    return _log_survival(family, native_params(family, m), t)


def pdf(family, m, t):
    return np.exp(log_pdf(family, m, t))


def survival(family, m, t):
    return np.exp(log_survival(family, m, t))


def hazard(family, m, t):
    """Hazard f(t) / S(t), evaluated as a log-space difference.

    The Weibull hazard uses its closed form. Raises :class:`OverflowError`
    when the survival function underflows in log space.
    """
    family = Family.parse(family)
    t = _times(t)
    params = native_params(family, m)
    if family is Family.WEIBULL:
        return params.beta2 / params.beta1 * (t / params.beta1) ** (params.beta2 - 1.0)
    log_s = _log_survival(family, params, t)
    if np.any(np.isneginf(log_s)):
        raise OverflowError("survival function underflows; hazard undefined in floating point")
    return np.exp(_log_pdf(family, params, t) - log_s)


def sample(family, m, rng, n):
    """Draw ``n`` i.i.d. survival times from ``family`` using generator ``rng``."""
    family = Family.parse(family)
    if n < 1:
        raise DomainError("n must be at least 1")
    params = native_params(family, m)
    if family is Family.LOGNORMAL:
        return np.exp(params.alpha1 + math.sqrt(params.alpha2) * rng.standard_normal(n))
    if family is Family.GAMMA:
        return params.gamma1 * rng.standard_gamma(params.gamma2, n)
    u = rng.random(n)
    return params.beta1 * (-np.log1p(-u)) ** (1.0 / params.beta2)
