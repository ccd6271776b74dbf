"""Compiled scalar kernels for the three survival families.

Family codes: 0 lognormal (alpha1, alpha2), 1 gamma (scale, shape),
2 Weibull (scale, shape). The array functions in ``survdist`` and the
mixture likelihood both dispatch here, so each formula exists once.
"""

import math

import numpy as np
from numba import njit, vectorize

from .special import _log_q

LOGNORMAL, GAMMA, WEIBULL = 0, 1, 2

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)


@njit(cache=True)
def log_ndtr(x):
    """log Phi(x), accurate in both tails."""
    if x > 5.0:
        return math.log1p(-0.5 * math.erfc(x / _SQRT2))
    if x > -30.0:
        return math.log(0.5 * math.erfc(-x / _SQRT2))
    # asymptotic Mills-ratio series
    r = 1.0 / (x * x)
    s = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r * (1.0 - 9.0 * r * (1.0 - 11.0 * r)))))
    return -0.5 * x * x - math.log(-x) - _HALF_LOG_2PI + math.log(s)


@njit(cache=True)
def consts(code, a, b):
    """Per-component constants (c, aux) shared by every observation."""
    if code == LOGNORMAL:
        return -_HALF_LOG_2PI - 0.5 * math.log(b), math.sqrt(b)
    if code == GAMMA:
        return -math.lgamma(b) - b * math.log(a), 0.0
    return math.log(b / a), math.log(a)


@njit(cache=True)
def logpdf_c(code, t, lt, a, b, c, aux):
    if code == LOGNORMAL:
        d = lt - a
        return -0.5 * d * d / b - lt + c
    if code == GAMMA:
        return (b - 1.0) * lt - t / a + c
    lu = lt - aux
    return c + (b - 1.0) * lu - math.exp(b * lu)


@njit(cache=True)
def logsf_c(code, t, lt, a, b, c, aux):
    if code == LOGNORMAL:
        return log_ndtr(-(lt - a) / aux)
    if code == GAMMA:
        return _log_q(b, t / a)
    return -math.exp(b * (lt - aux))


@njit(cache=True)
def logpdf(code, t, a, b):
    c, aux = consts(code, a, b)
    return logpdf_c(code, t, math.log(t), a, b, c, aux)


@njit(cache=True)
def logsf(code, t, a, b):
    c, aux = consts(code, a, b)
    return logsf_c(code, t, math.log(t), a, b, c, aux)


@vectorize(["float64(int64, float64, float64, float64)"], cache=True)
def logpdf_ufunc(code, t, a, b):
    return logpdf(code, t, a, b)


@vectorize(["float64(int64, float64, float64, float64)"], cache=True)
def logsf_ufunc(code, t, a, b):
    return logsf(code, t, a, b)


@njit(cache=True)
def weibull_residual(shape, cv2):
    return 2.0 * math.lgamma(1.0 + 1.0 / shape) - math.lgamma(1.0 + 2.0 / shape) + math.log1p(cv2)


@njit(cache=True)
def weibull_shape(cv2, lo, hi, maxiter):
    """Safeguarded Newton on the squared-CV equation.

    Returns ``(shape, residual, status)``; status 0 converged, 1 root outside
    the bracket, 2 iteration limit. The slope is a central difference with
    step ``1e-6 * shape``.
    """
    r_lo = weibull_residual(lo, cv2)
    r_hi = weibull_residual(hi, cv2)
    if r_lo > 0.0:
        return lo, r_lo, 1
    if r_hi < 0.0:
        return hi, r_hi, 1
    # Justus-style start, shape ~ cv^-1.086
    x = min(max(cv2 ** -0.543, lo), hi)
    r = weibull_residual(x, cv2)
    for _ in range(maxiter):
        if r == 0.0:
            return x, r, 0
        if r < 0.0:
            lo = x
        else:
            hi = x
        h = 1e-6 * x
        slope = (weibull_residual(x + h, cv2) - weibull_residual(x - h, cv2)) / (2.0 * h)
        x_new = x - r / slope
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        done = abs(x_new - x) <= 1e-15 * x_new
        x = x_new
        r = weibull_residual(x, cv2)
        if done:
            return x, r, 0
    return x, r, 2


@njit(cache=True)
def mixture_loglik(t_dead, lt_dead, t_cens, lt_cens, codes, pa, pb, log_w):
    """Sum over observations of log sum_k w_k f_k (deaths) or w_k S_k (censored)."""
    k = codes.size
    cc = np.empty(k)
    aux = np.empty(k)
    for i in range(k):
        cc[i], aux[i] = consts(codes[i], pa[i], pb[i])
    vals = np.empty(k)
    total = 0.0
    for phase in range(2):
        ts = t_dead if phase == 0 else t_cens
        lts = lt_dead if phase == 0 else lt_cens
        for j in range(ts.size):
            t = ts[j]
            lt = lts[j]
            top = -math.inf
            for i in range(k):
                if phase == 0:
                    v = log_w[i] + logpdf_c(codes[i], t, lt, pa[i], pb[i], cc[i], aux[i])
                else:
                    v = log_w[i] + logsf_c(codes[i], t, lt, pa[i], pb[i], cc[i], aux[i])
                vals[i] = v
                if v > top:
                    top = v
            if not top > -math.inf:
                return -math.inf
            if k == 1:
                total += top
                continue
            s = 0.0
            for i in range(k):
                s += math.exp(vals[i] - top)
            total += top + math.log(s)
    return total
