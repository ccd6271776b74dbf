"""Adaptive Metropolis sampling of the mixture posterior.

The chain runs in the unconstrained space of :mod:`lgwfbst.mixture` and
targets ``log_posterior(theta(z)) + log|J(z)|``. After ``adaptation_start``
iterations the Gaussian random-walk proposal uses the running empirical
covariance of the whole chain history, scaled by ``2.4**2 / d``, plus a small
ridge (Haario, Saksman and Tamminen, 2001).
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from .exceptions import DomainError, InitializationError
from .mixture import Dataset, MixtureParams, from_unconstrained, log_posterior, to_unconstrained
from .survdist import SharedMoments

__all__ = [
    "SamplerConfig",
    "PosteriorDraws",
    "ChainResult",
    "adaptive_metropolis",
    "initialize",
    "run_chain",
    "ACCEPTANCE_BAND",
]

ACCEPTANCE_BAND = (0.05, 0.6)


@dataclass(frozen=True)
class SamplerConfig:
    iterations: int = 60_000
    burn_in: int = 10_000
    thin: int = 10
    initial_scale: float = 0.01
    adaptation_start: int = 1_000
    regularization: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if not self.iterations > self.burn_in >= 0:
            raise DomainError("need iterations > burn_in >= 0")
        if self.thin < 1:
            raise DomainError("thin must be >= 1")
        if not self.regularization > 0 or not self.initial_scale > 0:
            raise DomainError("initial_scale and regularization must be positive")
        if self.adaptation_start < 2:
            raise DomainError("adaptation_start must be >= 2")


@dataclass(frozen=True)
class ChainResult:
    """Retained states of a generic adaptive Metropolis run."""

    z: np.ndarray
    log_target: np.ndarray
    extra: np.ndarray
    acceptance_rate: float


def adaptive_metropolis(log_target, z0, cfg, rng=None):
    """Run an adaptive Metropolis chain on an arbitrary unconstrained target.

    Parameters
    ----------
    log_target : callable
        Maps a point ``z`` to ``(log_density, extra)``; ``extra`` is any float
        stored alongside retained draws. Returning ``-inf`` rejects the point.
    z0 : array_like
        Starting point with finite log density.
    cfg : SamplerConfig
    rng : numpy.random.Generator, optional
        Defaults to ``np.random.default_rng(cfg.seed)``.

    Returns
    -------
    ChainResult
        States after burn-in, every ``cfg.thin``-th iteration.
    """
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    z = np.array(z0, dtype=float)
    d = z.size
    lp, extra = log_target(z)
    if not math.isfinite(lp):
        raise InitializationError(
            "starting point has zero posterior density; retry from another start (multi-start)"
        )

    n_iter = cfg.iterations
    normals = rng.standard_normal((n_iter, d))
    log_u = np.log(rng.random(n_iter))
    s_d = 2.4**2 / d
    ridge = cfg.regularization * np.eye(d)
    chol = math.sqrt(cfg.initial_scale) * np.eye(d)

    # running mean and co-moment of z_0 .. z_t
    mean = z.copy()
    comoment = np.zeros((d, d))
    count = 1

    keep = range(cfg.burn_in, n_iter, cfg.thin)
    n_keep = len(keep)
    out_z = np.empty((n_keep, d))
    out_lp = np.empty(n_keep)
    out_extra = np.empty(n_keep)
    slot = 0
    accepted = 0

    for t in range(n_iter):
        if t >= cfg.adaptation_start:
            cov = s_d * (comoment / (count - 1) + ridge)
            chol = np.linalg.cholesky(cov)
        proposal = z + chol @ normals[t]
        lp_new, extra_new = log_target(proposal)
        if log_u[t] < lp_new - lp:
            z, lp, extra = proposal, lp_new, extra_new
            accepted += 1
        count += 1
        delta = z - mean
        mean += delta / count
        comoment += np.outer(delta, z - mean)
        if slot < n_keep and t == keep[slot]:
            out_z[slot] = z
            out_lp[slot] = lp
            out_extra[slot] = extra
            slot += 1

    return ChainResult(out_z, out_lp, out_extra, accepted / n_iter)


@dataclass(frozen=True, eq=False)
class PosteriorDraws:
    """Retained posterior draws with their theta-space log posterior.

    ``log_post`` never includes the Jacobian of the unconstrained transform,
    so it can be compared directly with constrained suprema.
    """

    mu: np.ndarray
    sigma2: np.ndarray
    weights: np.ndarray  # (n_draws, m)
    log_post: np.ndarray
    acceptance_rate: float
    families: tuple = ()
    warnings: tuple = field(default=())

    def __len__(self):
        return self.log_post.size

    def __getitem__(self, i):
        return MixtureParams(SharedMoments(self.mu[i], self.sigma2[i]), self.weights[i]), float(self.log_post[i])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def m(self):
        return self.weights.shape[1]

    def matrix(self):
        """Columns ``mu, sigma2, p1 .. pm``."""
        return np.column_stack([self.mu, self.sigma2, self.weights])

    def write_csv(self, path):
        header = ",".join(["mu", "sigma2"] + [f"p{k + 1}" for k in range(self.m)] + ["log_post"])
        np.savetxt(path, np.column_stack([self.matrix(), self.log_post]), delimiter=",",
                   header=header, comments="", fmt="%.17g")


def initialize(dataset, rng=None):
    """Moment-based starting point in unconstrained space.

    Uses the mean and variance of the uncensored times, falling back to all
    times when fewer than two deaths exist, and to ``sigma2 = mu**2`` when the
    variance is degenerate. Weights start uniform.

    Returns
    -------
    z : ndarray
    fallback : bool
        True when any fallback was used.
    """
    times = dataset.time[dataset.event == 1]
    fallback = False
    if times.size < 2:
        times = dataset.time
        fallback = True
    mu0 = float(times.mean())
    var0 = float(times.var(ddof=1)) if times.size > 1 else 0.0
    if not var0 > 1e-12 * mu0 * mu0:
        var0 = mu0 * mu0
        fallback = True
    theta = MixtureParams(SharedMoments(mu0, var0), np.full(dataset.m, 1.0 / dataset.m))
    return to_unconstrained(theta), fallback


def _posterior_target(dataset):
    def target(z):
        try:
            theta, log_jac = from_unconstrained(z)
        except DomainError:
            return -math.inf, -math.inf
        lp = log_posterior(dataset, theta)
        return lp + log_jac, lp

    return target


def run_chain(dataset, cfg=SamplerConfig(), start=None):
    """Sample the mixture posterior of ``dataset``.

    Parameters
    ----------
    dataset : Dataset
    cfg : SamplerConfig
    start : array_like, optional
        Unconstrained starting point; defaults to :func:`initialize`.

    Returns
    -------
    PosteriorDraws
    """
    notes = []
    rng = np.random.default_rng(cfg.seed)
    if start is None:
        start, fallback = initialize(dataset, rng)
        if fallback:
            notes.append("initialization used moment fallback")
    result = adaptive_metropolis(_posterior_target(dataset), start, cfg, rng)

    lo, hi = ACCEPTANCE_BAND
    if not lo < result.acceptance_rate < hi:
        msg = f"acceptance rate {result.acceptance_rate:.3f} outside ({lo}, {hi})"
        notes.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)

    n_draws = len(result.z)
    mu, sigma2 = np.empty(n_draws), np.empty(n_draws)
    weights = np.empty((n_draws, dataset.m))
    for i, z in enumerate(result.z):
        theta = from_unconstrained(z)[0]
        mu[i], sigma2[i], weights[i] = theta.mu, theta.sigma2, theta.weights
    return PosteriorDraws(
        mu=mu,
        sigma2=sigma2,
        weights=weights,
        log_post=result.extra,
        acceptance_rate=result.acceptance_rate,
        families=dataset.families,
        warnings=tuple(notes),
    )
