"""Nonlinear conjugate gradient minimization with finite-difference gradients."""

from dataclasses import dataclass
import math

import numpy as np

__all__ = ["CGResult", "central_gradient", "minimize_cg"]


@dataclass(frozen=True)
class CGResult:
    x: np.ndarray
    fun: float
    nit: int
    nfev: int
    success: bool
    message: str


def central_gradient(fun, x, f0=None, rel_step=1e-5):
    """Central-difference gradient with step ``rel_step * max(1, |x_i|)``.

    Components whose stencil leaves the finite domain fall back to a one-sided
    difference using ``f0``.
    """
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    nfev = 0
    for i in range(x.size):
        h = rel_step * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        fp, fm = fun(xp), fun(xm)
        nfev += 2
        if math.isfinite(fp) and math.isfinite(fm):
            g[i] = (fp - fm) / (2.0 * h)
        elif math.isfinite(fp) and f0 is not None:
            g[i] = (fp - f0) / h
        elif math.isfinite(fm) and f0 is not None:
            g[i] = (f0 - fm) / h
        else:
            g[i] = math.nan
    return g, nfev


_GOLD = 0.3819660112501051


def _line_search(phi, f0, step, max_halvings=60, max_doublings=50, max_refine=20, xtol=1e-8):
    """Approximately minimize ``phi(alpha)`` for ``alpha > 0``.

    Brackets a minimum by halving or doubling ``step`` and refines it with
    safeguarded parabolic interpolation. Returns ``(alpha, phi(alpha), nfev)``
    or ``(None, f0, nfev)`` when no decrease is found.
    """
    nfev = 0

    def ev(alpha):
        nonlocal nfev
        nfev += 1
        v = phi(alpha)
        return v if math.isfinite(v) else math.inf

    a, fa = 0.0, f0
    b, fb = step, ev(step)
    c, fc = None, None
    for _ in range(max_halvings):
        if fb < fa:
            break
        c, fc = b, fb
        b *= 0.5
        fb = ev(b)
    else:
        return None, f0, nfev
    if c is None:
        c, fc = 2.0 * b, ev(2.0 * b)
        for _ in range(max_doublings):
            if fc >= fb:
                break
            a, fa, b, fb = b, fb, c, fc
            c, fc = 2.0 * c, ev(2.0 * c)
    # bracket a < b < c with fb < fa and fb <= fc
    for _ in range(max_refine):
        if c - a <= xtol * max(b, 1e-12):
            break
        num = (b - a) ** 2 * (fb - fc) - (b - c) ** 2 * (fb - fa)
        den = (b - a) * (fb - fc) - (b - c) * (fb - fa)
        u = b - 0.5 * num / den if den != 0 and math.isfinite(fc) else math.nan
        lo, hi = a + 0.01 * (c - a), c - 0.01 * (c - a)
        if not (lo < u < hi) or abs(u - b) < 1e-3 * (c - a):
            # golden step into the larger side
            u = b + _GOLD * (c - b) if c - b > b - a else b - _GOLD * (b - a)
        fu = ev(u)
        if fu < fb:
            if u > b:
                a, fa = b, fb
            else:
                c, fc = b, fb
            b, fb = u, fu
        elif u > b:
            c, fc = u, fu
        else:
            a, fa = u, fu
    return b, fb, nfev


def minimize_cg(fun, x0, rel_step=1e-5, gtol=1e-7, ftol=1e-13, maxiter=200):
    """Minimize ``fun`` by Polak-Ribiere conjugate gradients.

    Gradients are central differences and each line search brackets and
    refines a minimum along the search direction. The direction is reset to steepest
    descent every ``len(x0)`` iterations, whenever the PR coefficient turns
    negative, or when it is not a descent direction.

    Stops when the max-norm of the gradient drops below ``gtol`` or the
    objective stalls to relative change ``ftol``. ``success`` is False only
    when the very first line search cannot decrease ``fun``.
    """
    x = np.array(x0, dtype=float)
    n = x.size
    f = fun(x)
    nfev = 1
    if not math.isfinite(f):
        return CGResult(x, f, 0, nfev, False, "objective not finite at start")
    g, k = central_gradient(fun, x, f, rel_step)
    nfev += k
    if not np.all(np.isfinite(g)):
        return CGResult(x, f, 0, nfev, False, "gradient not finite at start")
    p = -g
    step = 1.0 / max(1.0, math.hypot(*g))  # hypot does not overflow for huge gradients
    stalls = 0
    for it in range(1, maxiter + 1):
        if np.max(np.abs(g)) < gtol:
            return CGResult(x, f, it - 1, nfev, True, "gradient below tolerance")
        with np.errstate(over="ignore", invalid="ignore"):
            slope = float(g @ p)
        if not slope < 0:  # not a descent direction, or overflowed
            p = -g
        alpha, f_new, k = _line_search(lambda a: fun(x + a * p), f, step)
        nfev += k
        if alpha is None:
            if it == 1:
                return CGResult(x, f, it, nfev, False, "line search failed")
            return CGResult(x, f, it, nfev, True, "no further decrease along search direction")
        x_new = x + alpha * p
        g_new, k = central_gradient(fun, x_new, f_new, rel_step)
        nfev += k
        if not np.all(np.isfinite(g_new)):
            return CGResult(x_new, f_new, it, nfev, True, "gradient not finite")
        small = abs(f - f_new) <= ftol * max(1.0, abs(f_new))
        stalls = stalls + 1 if small else 0
        with np.errstate(over="ignore", invalid="ignore"):
            beta = float(g_new @ (g_new - g)) / float(g @ g)
            p = -g_new + max(0.0, beta) * p if it % n and math.isfinite(beta) else -g_new
        if not np.all(np.isfinite(p)):
            p = -g_new
        step = alpha
        x, f, g = x_new, f_new, g_new
        if stalls >= 2:
            return CGResult(x, f, it, nfev, True, "objective stalled")
    return CGResult(x, f, maxiter, nfev, True, "iteration limit")
