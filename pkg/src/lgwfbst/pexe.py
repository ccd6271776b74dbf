"""Piecewise exponential survival estimator (Kim and Proschan, 1991).

Between consecutive distinct death times the hazard is constant and equal to
the number of deaths at the right end divided by the total time on test
accumulated inside the interval. The resulting survival curve is continuous
and strictly positive, unlike the Kaplan-Meier step function.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import PexeFitError

__all__ = ["PexeFit", "fit_pexe", "survival_at", "write_curve"]


@dataclass(frozen=True, eq=False)
class PexeFit:
    breakpoints: np.ndarray  # distinct death times t_1 < ... < t_K
    rates: np.ndarray  # hazard on (t_{i-1}, t_i]
    deaths: np.ndarray

    @property
    def support_end(self):
        return float(self.breakpoints[-1])

    def cumulative_hazard(self, t):
        t = np.asarray(t, dtype=float)
        left = np.concatenate([[0.0], self.breakpoints[:-1]])
        h_at_left = np.concatenate([[0.0], np.cumsum(self.rates * (self.breakpoints - left))[:-1]])
        # interval index; times past the last death stay in the final interval
        i = np.clip(np.searchsorted(self.breakpoints, t, side="left"), 0, self.rates.size - 1)
        return h_at_left[i] + self.rates[i] * (t - left[i])

    def extrapolated(self, t):
        """True where ``t`` lies beyond the last death time."""
        return np.asarray(t, dtype=float) > self.support_end


def fit_pexe(dataset):
    """Fit the estimator to a :class:`~lgwfbst.mixture.Dataset` or any object
    with ``time`` and ``event`` arrays."""
    y = np.asarray(dataset.time, dtype=float)
    dead = np.asarray(dataset.event) == 1
    if not dead.any():
        raise PexeFitError("no uncensored observations")
    breaks, deaths = np.unique(y[dead], return_counts=True)
    left = np.concatenate([[0.0], breaks[:-1]])
    # time on test inside (left_i, break_i] summed over subjects
    exposure = np.clip(np.minimum(y[:, None], breaks[None, :]) - left[None, :], 0.0, None).sum(axis=0)
    return PexeFit(breaks, deaths / exposure, deaths)


def survival_at(fit, t):
    """Estimated S(t) = exp(-H(t)) for ``t >= 0``; the last rate is used past
    the final death."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("times must be nonnegative")
    return np.exp(-fit.cumulative_hazard(t))


def write_curve(fit, grid, path):
    """Write ``t,survival`` rows on ``grid``."""
    grid = np.asarray(grid, dtype=float)
    np.savetxt(path, np.column_stack([grid, survival_at(fit, grid)]), delimiter=",",
               header="t,survival", comments="", fmt="%.17g")
