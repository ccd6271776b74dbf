"""Regularized incomplete gamma functions.

The lower function P(a, x) is summed as a power series when x < a + 1 and
the upper function Q(a, x) = 1 - P(a, x) is evaluated by a modified Lentz
continued fraction otherwise. Both need on the order of sqrt(a) terms near
x = a, so for very large shapes (a >= 1e7) the uniform asymptotic expansion
in a is used instead. The kernels are compiled with numba so they can sit
inside the likelihood without a Python-level loop.
"""

import math

import numpy as np
from numba import njit, vectorize

__all__ = ["gammainc", "gammaincc", "log_gammaincc"]

_EPS = 1e-16
_TINY = 1e-300
_MAXITER = 100_000
_A_ASYMPTOTIC = 1e7
_SQRT_PI = math.sqrt(math.pi)


_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@njit(cache=True)
def _log1pmx(d):
    # log(1 + d) - d without cancellation near d = 0
    if not abs(d) <= 0.5:  # also routes NaN away from the series
        return math.log1p(d) - d
    if d == 0.0:
        return 0.0
    u = d / (2.0 + d)
    u2 = u * u
    term = u2
    total = 0.0
    k = 3.0
    for _ in range(200):  # |u| <= 1/3, so 40 terms already reach 1e-17
        add = term / k
        total += add
        if add <= 1e-17 * total:
            break
        term *= u2
        k += 2.0
    return 2.0 * u * total - d * u


@njit(cache=True)
def _stirling_remainder(a):
    # lgamma(a) - ((a - 1/2) log a - a + log(2 pi) / 2), valid for a >= 10
    r = 1.0 / (a * a)
    return (1.0 / 12.0 - r * (1.0 / 360.0 - r * (1.0 / 1260.0 - r * (1.0 / 1680.0 - r / 1188.0)))) / a


@njit(cache=True)
def _log_prefactor(a, x):
    # log(x^a e^{-x} / Gamma(a)); for large a the leading terms cancel, so
    # write it as a * (log(x/a) - (x/a - 1)) plus a Stirling remainder
    if a < 10.0:
        return a * math.log(x) - x - math.lgamma(a)
    return a * _log1pmx((x - a) / a) + 0.5 * math.log(a) - _HALF_LOG_2PI - _stirling_remainder(a)


@njit(cache=True)
def _series_p(a, x):
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAXITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(_log_prefactor(a, x))


@njit(cache=True)
def _log_cf_q(a, x):
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAXITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return _log_prefactor(a, x) + math.log(h)


@njit(cache=True)
def _erfcx(y):
    # exp(y^2) erfc(y) for y >= 0
    if y < 25.0:
        return math.exp(y * y) * math.erfc(y)
    r = 1.0 / (2.0 * y * y)
    return (1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)))) / (y * _SQRT_PI)


@njit(cache=True)
def _uniform_asymptotic(a, x):
    """Return ``(log_scale, s, upper)`` with the tail equal to ``exp(log_scale) * s``.

    The tail is Q(a, x) when ``upper`` is True and P(a, x) otherwise, so the
    returned quantity is always the smaller of the two.
    """
    d = (x - a) / a
    eta = math.sqrt(-2.0 * _log1pmx(d))
    if d < 0.0:
        eta = -eta
    if abs(eta) < 1e-3:
        c0 = -1.0 / 3.0 + eta * (1.0 / 12.0 - eta * (2.0 / 135.0 - eta / 864.0))
        c1 = -1.0 / 540.0 - eta / 288.0
    else:
        c0 = 1.0 / d - 1.0 / eta
        c1 = 1.0 / eta**3 - 1.0 / d**3 - 1.0 / d**2 - 1.0 / (12.0 * d)
    corr = (c0 + c1 / a) / math.sqrt(2.0 * math.pi * a)
    z = eta * math.sqrt(0.5 * a)
    if eta >= 0.0:
        return -z * z, 0.5 * _erfcx(z) + corr, True
    return -z * z, 0.5 * _erfcx(-z) - corr, False


@njit(cache=True)
def _log_q(a, x):
    if x <= 0.0:
        return 0.0
    if math.isinf(x):
        return math.nan if math.isinf(a) else -math.inf
    if math.isinf(a):
        return 0.0
    if a >= _A_ASYMPTOTIC:
        log_scale, tail, upper = _uniform_asymptotic(a, x)
        if upper:
            return log_scale + math.log(tail)
        return math.log1p(-math.exp(log_scale + math.log(tail)))
    if x < a + 1.0:
        return math.log1p(-_series_p(a, x))
    return _log_cf_q(a, x)


@njit(cache=True)
def _p(a, x):
    if x <= 0.0:
        return 0.0
    if math.isinf(x):
        return math.nan if math.isinf(a) else 1.0
    if math.isinf(a):
        return 0.0
    if a >= _A_ASYMPTOTIC:
        log_scale, tail, upper = _uniform_asymptotic(a, x)
        if upper:
            return -math.expm1(log_scale + math.log(tail))
        return math.exp(log_scale + math.log(tail))
    if x < a + 1.0:
        return _series_p(a, x)
    return -math.expm1(_log_cf_q(a, x))


@vectorize(["float64(float64, float64)"], cache=True)
def _log_gammaincc_ufunc(a, x):
    if not a > 0.0 or math.isnan(x):
        return math.nan
    return _log_q(a, x)


@vectorize(["float64(float64, float64)"], cache=True)
def _gammainc_ufunc(a, x):
    if not a > 0.0 or math.isnan(x):
        return math.nan
    return _p(a, x)


def log_gammaincc(a, x):
    """Logarithm of the regularized upper incomplete gamma function.

    Stays finite far into the upper tail where Q itself underflows.
    Negative or zero ``x`` gives 0 (Q = 1); non-positive ``a`` gives nan.
    """
    return _log_gammaincc_ufunc(np.asarray(a, dtype=float), np.asarray(x, dtype=float))


def gammaincc(a, x):
    """Regularized upper incomplete gamma function Q(a, x)."""
    return np.exp(log_gammaincc(a, x))


def gammainc(a, x):
    """Regularized lower incomplete gamma function P(a, x)."""
    return _gammainc_ufunc(np.asarray(a, dtype=float), np.asarray(x, dtype=float))
