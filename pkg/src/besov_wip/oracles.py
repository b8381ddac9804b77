"""Slow reference computations used to cross-check the exact routines.

Nothing here shares code with the fast paths: integrals go through adaptive
quadrature and scans through explicit enumeration of every window.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate


def _interp(vertices, t):
    n = len(vertices) - 1
    return np.interp(t, np.linspace(0.0, 1.0, n + 1), vertices)


def quad_power_integral(func, lo, hi, breaks, p):
    """int_lo^hi |func|^p by adaptive quadrature on each piece between breakpoints.

    ``func`` is only sampled at the breakpoints; between them it is the chord,
    which is what a polygon is.
    """
    pts = np.unique(np.concatenate([[lo, hi], [b for b in breaks if lo < b < hi]]))
    vals = func(pts)
    total = 0.0
    with warnings.catch_warnings():
        # roundoff warnings near a root of the integrand are harmless at this tolerance
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b, u, w in zip(pts[:-1], pts[1:], vals[:-1], vals[1:]):
            slope = (w - u) / (b - a)
            val, _ = integrate.quad(lambda t: abs(u + slope * (t - a)) ** p, a, b,
                                    epsabs=1e-15, epsrel=1e-13, limit=200)
            total += val
    return total


def lp_norm_quad(vertices, p):
    n = len(vertices) - 1
    val = quad_power_integral(lambda t: _interp(vertices, t), 0.0, 1.0, np.arange(n + 1) / n, p)
    return val ** (1.0 / p)


def shift_integral_quad(vertices, h, p):
    n = len(vertices) - 1
    grid = np.arange(n + 1) / n
    return quad_power_integral(lambda t: _interp(vertices, np.minimum(t + h, 1.0)) - _interp(vertices, t),
                               0.0, 1.0 - h, np.concatenate([grid, grid - h]), p)


def modulus_quad(vertices, delta, p, hs=None):
    """Max over the shift set (or over ``hs`` when given) of the quadrature shift norms."""
    n = len(vertices) - 1
    if hs is None:
        hs = [k / n for k in range(1, int(math.floor(n * delta)) + 1)] + [delta]
    return max(shift_integral_quad(vertices, h, p) ** (1.0 / p) for h in hs)


def scan_brute(x, p, alpha, kmin, kmax):
    """n^{-1/q} max_k k^{-alpha} (sum_i |x_{i+1} + ... + x_{i+k}|^p)^{1/p} by direct enumeration."""
    x = [float(v) for v in x]
    n = len(x)
    q = 1.0 / (0.5 - alpha + 1.0 / p)
    best = (-1.0, 0, 0)
    for k in range(kmin, kmax + 1):
        wins = [math.fsum(x[i:i + k]) for i in range(n - k + 1)]
        score = k ** -alpha * math.fsum(abs(w) ** p for w in wins) ** (1.0 / p)
        if score > best[0]:
            top = max(abs(w) for w in wins)
            best = (score, k, next(i for i, w in enumerate(wins) if abs(w) == top))
    return n ** (-1.0 / q) * best[0], best[1], best[2]


def schauder_brute(vertices, J):
    """Second differences at every dyadic point, level by level."""
    f = lambda t: float(_interp(vertices, t))
    levels = [[f(0.0), f(1.0)]]
    for j in range(1, J + 1):
        h = 2.0 ** -j
        levels.append([f(r) - 0.5 * (f(r + h) + f(r - h))
                       for r in ((2 * l - 1) * h for l in range(1, 2 ** (j - 1) + 1))])
    return levels
