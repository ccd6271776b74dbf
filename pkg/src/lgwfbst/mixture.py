"""Posterior of the shared-moment survival mixture.

The parameter point is theta = (mu, sigma2, p) where every component uses
the same mean and variance and p lies on the probability simplex. Right
censored observations contribute the mixture survival function, deaths the
mixture density.

Sampling and optimization work in an unconstrained space
z = (log mu, log sigma2, stick-breaking logits of p).
"""

from dataclasses import dataclass, field
from functools import cached_property
import math
from typing import NamedTuple

import numpy as np

from . import _kernels as _k
from .exceptions import DataError, DomainError, SolverError
from .survdist import _CODES, Family, SharedMoments, _log_pdf, _log_survival, _param_pair, native_params

__all__ = [
    "CensoredObservation",
    "Dataset",
    "MixtureParams",
    "log_likelihood",
    "log_prior",
    "log_posterior",
    "to_unconstrained",
    "from_unconstrained",
    "PRIOR_SHAPE",
    "PRIOR_SCALE",
    "BOUNDARY_EPS",
]

PRIOR_SHAPE = 0.01
PRIOR_SCALE = 100.0
BOUNDARY_EPS = 1e-12

LGW = (Family.LOGNORMAL, Family.GAMMA, Family.WEIBULL)


class CensoredObservation(NamedTuple):
    y: float
    delta: int


@dataclass(frozen=True, eq=False)
class Dataset:
    """Right-censored survival times and the ordered mixture components.

    Parameters
    ----------
    time : array_like
        Observed times ``y_j = min(T_j, C_j)``, all positive.
    event : array_like
        1 when the event was observed, 0 when censored.
    families : sequence of Family
        Component order used by weights and hypotheses. A family may repeat,
        which gives exactly exchangeable components.
    """

    time: np.ndarray
    event: np.ndarray
    families: tuple = LGW

    def __post_init__(self):
        time = np.asarray(self.time, dtype=float).ravel()
        event = np.asarray(self.event).ravel()
        if time.size == 0:
            raise DataError("dataset is empty")
        if time.shape != event.shape:
            raise DataError("time and event lengths differ")
        if not np.all(np.isfinite(time)) or np.any(time <= 0):
            raise DataError("observed times must be finite and positive")
        if not np.all((event == 0) | (event == 1)):
            raise DataError("event indicators must be 0 or 1")
        families = tuple(Family.parse(f) for f in self.families)
        if len(families) < 2:
            raise DomainError("need at least two mixture components")
        time.setflags(write=False)
        event = event.astype(np.int8)
        event.setflags(write=False)
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "event", event)
        object.__setattr__(self, "families", families)

    @classmethod
    def from_observations(cls, observations, families=LGW):
        obs = list(observations)
        return cls([o[0] for o in obs], [o[1] for o in obs], families)

    def observations(self):
        return [CensoredObservation(float(y), int(d)) for y, d in zip(self.time, self.event)]

    def with_families(self, families):
        return Dataset(self.time, self.event, families)

    @property
    def n(self):
        return self.time.size

    @property
    def m(self):
        return len(self.families)

    @cached_property
    def _split(self):
        dead = self.event == 1
        t_dead = np.ascontiguousarray(self.time[dead])
        t_cens = np.ascontiguousarray(self.time[~dead])
        return t_dead, np.log(t_dead), t_cens, np.log(t_cens)


@dataclass(frozen=True, eq=False)
class MixtureParams:
    moments: SharedMoments
    weights: np.ndarray = field(repr=True)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        total = float(w.sum())
        if w.size < 2 or not abs(total - 1.0) <= 1e-12 or w.min() < 0:
            raise DomainError(f"weights must lie on the simplex, got {w}")
        object.__setattr__(self, "weights", w)

    @classmethod
    def make(cls, mu, sigma2, weights):
        return cls(SharedMoments(mu, sigma2), weights)

    @property
    def mu(self):
        return self.moments.mu

    @property
    def sigma2(self):
        return self.moments.sigma2

    @property
    def m(self):
        return self.weights.size


def component_terms(dataset, moments, active=None):
    """Per-component log f (deaths) and log S (censored) rows.

    Returns an array of shape ``(len(active), n_dead + n_censored)``, deaths
    first. Used for diagnostics and curve output; the likelihood itself runs
    in a fused compiled loop.
    """
    t_dead, _, t_cens, _ = dataset._split
    if active is None:
        active = range(dataset.m)
    rows = []
    for k in active:
        fam = dataset.families[k]
        params = native_params(fam, moments)
        rows.append(np.concatenate([_log_pdf(fam, params, t_dead), _log_survival(fam, params, t_cens)]))
    return np.array(rows)


def log_likelihood(dataset, theta):
    """Censored mixture log-likelihood.

    Each death contributes ``log sum_k p_k f_k(y)`` and each censored time
    ``log sum_k p_k S_k(y)``; the sums run in log space over components with
    nonzero weight. Returns ``-inf`` instead of raising when an observation
    has zero mixture density or a component's parameters cannot be formed.
    """
    w = theta.weights
    if w.size != dataset.m:
        raise DomainError(f"{w.size} weights for {dataset.m} components")
    active = np.flatnonzero(w > 0)
    codes = np.empty(active.size, dtype=np.int64)
    pa = np.empty(active.size)
    pb = np.empty(active.size)
    try:
        for i, k in enumerate(active):
            fam = dataset.families[k]
            codes[i] = _CODES[fam]
            pa[i], pb[i] = _param_pair(native_params(fam, theta.moments))
    except SolverError:
        return -math.inf
    with np.errstate(divide="ignore"):
        log_w = np.log(w[active])
    total = _k.mixture_loglik(*dataset._split, codes, pa, pb, log_w)
    return total if not math.isnan(total) else -math.inf


def _log_gamma_prior(x):
    return (
        (PRIOR_SHAPE - 1.0) * math.log(x)
        - x / PRIOR_SCALE
        - math.lgamma(PRIOR_SHAPE)
        - PRIOR_SHAPE * math.log(PRIOR_SCALE)
    )


def log_prior(theta):
    """Independent Gamma(shape 0.01, scale 100) priors on mu and sigma2 and a
    flat Dirichlet on the weights, whose log density is log((m - 1)!)."""
    return (
        _log_gamma_prior(theta.mu)
        + _log_gamma_prior(theta.sigma2)
        + math.lgamma(theta.m)
    )


def log_posterior(dataset, theta):
    """Unnormalized log posterior density in the original parameter space."""
    ll = log_likelihood(dataset, theta)
    if ll == -math.inf:
        return ll
    return ll + log_prior(theta)


def _stick_offsets(m):
    # makes z = 0 map to uniform weights
    return np.log(np.arange(m - 1, 0, -1, dtype=float))


def to_unconstrained(theta):
    """Map theta to ``z = (log mu, log sigma2, logit_1 ... logit_{m-1})``.

    Weights are clamped to ``[BOUNDARY_EPS, 1]`` and renormalized first so
    that vertices and faces of the simplex map to finite points.
    """
    w = np.maximum(theta.weights, BOUNDARY_EPS)
    w = w / w.sum()
    m = w.size
    remaining = 1.0 - np.concatenate([[0.0], np.cumsum(w[:-1])])
    v = np.clip(w[:-1] / remaining[:-1], BOUNDARY_EPS, 1.0 - BOUNDARY_EPS)
    logits = np.log(v) - np.log1p(-v) + _stick_offsets(m)
    return np.concatenate([[math.log(theta.mu), math.log(theta.sigma2)], logits])


def weights_from_logits(logits):
    """Stick-breaking map from ``m - 1`` logits to ``m`` weights, with the log
    Jacobian determinant of ``logits -> p_1 ... p_{m-1}``."""
    m = len(logits) + 1
    w = np.empty(m)
    log_jac = 0.0
    log_rem = 0.0
    for k in range(m - 1):
        x = float(logits[k]) - math.log(m - 1 - k)
        # log sigmoid(x), log sigmoid(-x)
        if x >= 0:
            log_v = -math.log1p(math.exp(-x))
            log_1mv = log_v - x
        else:
            log_1mv = -math.log1p(math.exp(x))
            log_v = log_1mv + x
        w[k] = math.exp(log_rem + log_v)
        log_jac += log_rem + log_v + log_1mv
        log_rem += log_1mv
    w[-1] = math.exp(log_rem)
    return w / w.sum(), log_jac


def from_unconstrained(z):
    """Inverse of :func:`to_unconstrained`.

    Returns ``(theta, log_jacobian)`` where ``log_jacobian`` is the log
    absolute determinant of ``d(mu, sigma2, p_1..p_{m-1}) / dz``.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or z.size < 3 or not np.all(np.isfinite(z)):
        raise DomainError(f"invalid unconstrained point {z}")
    w, log_jac = weights_from_logits(z[2:])
    z0, z1 = float(z[0]), float(z[1])
    try:
        moments = SharedMoments(math.exp(z0), math.exp(z1))
    except OverflowError:
        raise DomainError(f"unconstrained point {z} overflows") from None
    return MixtureParams(moments, w), log_jac + z0 + z1
