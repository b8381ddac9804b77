"""Compiled inner loops.

Everything here works on plain float64 arrays and releases the GIL so the
replication engine can run several kernels concurrently.
"""

import numba
import numpy as np

_JIT = dict(nogil=True, cache=True)


def int_exponent(p):
    """Return ``p`` as an int when it is a small even integer, else -1.

    Even integer exponents skip the absolute value and root splitting.
    """
    if float(p).is_integer() and int(p) % 2 == 0 and 2 <= p <= 16:
        return int(p)
    return -1


@numba.njit(**_JIT)
def seg_power_mean(u, w, p, pint):
    """Mean of |g|^p over a segment on which g runs linearly from u to w."""
    if pint == 2:
        return (u * u + u * w + w * w) / 3.0
    if pint == 4:
        u2 = u * u
        w2 = w * w
        return (u2 * u2 + u2 * u * w + u2 * w2 + u * w * w2 + w2 * w2) / 5.0
    if pint > 0:
        # (w^{p+1} - u^{p+1}) / ((p+1)(w-u)) expanded as a homogeneous sum
        acc = 0.0
        ui = 1.0
        for i in range(pint + 1):
            acc += ui * w ** (pint - i)
            ui *= u
        return acc / (pint + 1)
    a = abs(u)
    b = abs(w)
    if u * w < 0.0:
        # sign change inside the segment: split at the root
        return (a ** (p + 1.0) + b ** (p + 1.0)) / ((p + 1.0) * (a + b))
    m = 0.5 * (a + b)
    if m == 0.0:
        return 0.0
    r = 0.5 * (b - a) / m
    if abs(r) < 1e-3:
        r2 = r * r
        return m ** p * (1.0 + p * (p - 1.0) / 6.0 * r2
                         + p * (p - 1.0) * (p - 2.0) * (p - 3.0) / 120.0 * r2 * r2)
    return (b ** (p + 1.0) - a ** (p + 1.0)) / ((p + 1.0) * (b - a))


@numba.njit(**_JIT)
def piecewise_power_integral(x, y, p, pint):
    """Exact integral of |y|^p for the polygon through (x[i], y[i])."""
    acc = 0.0
    for i in range(x.shape[0] - 1):
        h = x[i + 1] - x[i]
        if h > 0.0:
            acc += h * seg_power_mean(y[i], y[i + 1], p, pint)
    return acc


@numba.njit(**_JIT)
def _shift_sum_p2(v, k, n):
    acc = 0.0
    d0 = v[k] - v[0]
    for i in range(n - k):
        d1 = v[i + 1 + k] - v[i + 1]
        acc += d0 * d0 + d0 * d1 + d1 * d1
        d0 = d1
    return acc / 3.0


@numba.njit(**_JIT)
def _shift_sum_p4(v, k, n):
    acc = 0.0
    d0 = v[k] - v[0]
    s0 = d0 * d0
    for i in range(n - k):
        d1 = v[i + 1 + k] - v[i + 1]
        s1 = d1 * d1
        acc += s0 * s0 + s0 * d0 * d1 + s0 * s1 + d0 * d1 * s1 + s1 * s1
        d0 = d1
        s0 = s1
    return acc / 5.0


@numba.njit(**_JIT)
def grid_shift_integrals(v, p, pint, kmin, kmax):
    """Integrals of |x(t + k/n) - x(t)|^p over [0, 1 - k/n] for k in [kmin, kmax].

    ``v`` holds the n+1 vertices of a polygon on the grid i/n.  The
    difference of two grid-aligned polygons is again a polygon on that grid,
    so each integral is a sum of exact segment means.
    """
    n = v.shape[0] - 1
    out = np.zeros(kmax - kmin + 1)
    h = 1.0 / n
    for k in range(kmin, kmax + 1):
        if k >= n:
            continue
        if pint == 2:
            acc = _shift_sum_p2(v, k, n)
        elif pint == 4:
            acc = _shift_sum_p4(v, k, n)
        else:
            acc = 0.0
            d0 = v[k] - v[0]
            for i in range(n - k):
                d1 = v[i + 1 + k] - v[i + 1]
                acc += seg_power_mean(d0, d1, p, pint)
                d0 = d1
        out[k - kmin] = acc * h
    return out


@numba.njit(**_JIT)
def kahan_prefix(x):
    """Prefix sums S_0 = 0, S_k = x_1 + ... + x_k with compensated summation."""
    n = x.shape[0]
    s = np.zeros(n + 1)
    acc = 0.0
    comp = 0.0
    for i in range(n):
        yv = x[i] - comp
        t = acc + yv
        comp = (t - acc) - yv
        acc = t
        s[i + 1] = acc
    return s


@numba.njit(**_JIT)
def _window_sum(s, k, p, pint):
    n = s.shape[0] - 1
    acc = 0.0
    if pint == 2:
        for i in range(n - k + 1):
            d = s[i + k] - s[i]
            acc += d * d
    elif pint == 4:
        for i in range(n - k + 1):
            d = s[i + k] - s[i]
            d2 = d * d
            acc += d2 * d2
    elif pint > 0:
        for i in range(n - k + 1):
            acc += (s[i + k] - s[i]) ** pint
    else:
        for i in range(n - k + 1):
            acc += abs(s[i + k] - s[i]) ** p
    return acc


@numba.njit(**_JIT)
def _window_argmax(s, k):
    n = s.shape[0] - 1
    top = -1.0
    arg = 0
    for i in range(n - k + 1):
        ad = abs(s[i + k] - s[i])
        if ad > top:
            top = ad
            arg = i
    return arg


@numba.njit(**_JIT)
def window_power_sums(s, p, pint, ks):
    """For each window length k in ``ks``: sum over i of |S_{i+k} - S_i|^p."""
    m = ks.shape[0]
    sums = np.zeros(m)
    for j in range(m):
        sums[j] = _window_sum(s, ks[j], p, pint)
    return sums


@numba.njit(**_JIT)
def window_argmax(s, k):
    """First start index i with the largest |S_{i+k} - S_i|."""
    return _window_argmax(s, k)


@numba.njit(**_JIT)
def arch_recursion(eps, a0, a1, burn):
    """X_j = sigma_j eps_j with sigma_j^2 = a0 + a1 X_{j-1}^2; drops ``burn`` steps."""
    total = eps.shape[0]
    out = np.empty(total - burn)
    prev = 0.0
    for j in range(total):
        x = np.sqrt(a0 + a1 * prev * prev) * eps[j]
        if j >= burn:
            out[j - burn] = x
        prev = x
    return out


@numba.njit(**_JIT)
def running_abs_max(s, stop):
    """max_{1 <= k <= stop} |s[k]|."""
    top = 0.0
    for k in range(1, stop + 1):
        a = abs(s[k])
        if a > top:
            top = a
    return top
