"""Statistics that witness tightness of the partial-sum processes, or its failure."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from .core import BesovParams, DomainError, DyadicCoeffs, level_norm
from .mc import replicate_values
from .processes import GeneratorSpec, as_values, sample_increments


class MCEstimate(NamedTuple):
    value: float
    stderr: float


class WindowProfile(NamedTuple):
    ks: np.ndarray
    scores: np.ndarray  # k^{-alpha} (sum_i |S_{i+k} - S_i|^p)^{1/p}
    prefix: np.ndarray


def window_profile(increments, params: BesovParams, ks) -> WindowProfile:
    """Scan scores for each window length in ``ks``.

    Shared by the discrete Holder statistic and the change-point scans.
    """
    x = as_values(increments)
    ks = np.ascontiguousarray(ks, dtype=np.int64)
    s = K.kahan_prefix(x)
    sums = K.window_power_sums(s, float(params.p), params.pint, ks)
    scores = ks.astype(np.float64) ** -params.alpha * sums ** (1.0 / params.p)
    return WindowProfile(ks, scores, s)


def level_statistic(coeffs: DyadicCoeffs, j: int, params: BesovParams) -> float:
    if not 0 <= j <= coeffs.J:
        raise DomainError(f"level {j} outside 0..{coeffs.J}")
    return level_norm(coeffs.levels[j], j, params)


def lln_statistic(increments, params: BesovParams) -> float:
    """n^{-1/q} (sum_k |X_k|^p)^{1/p}; tends to 0 under the tail condition."""
    x = as_values(increments)
    return x.size ** (-1.0 / params.q) * float(np.sum(np.abs(x) ** params.p)) ** (1.0 / params.p)


def necessity_statistic(increments, params: BesovParams) -> float:
    """Level-N statistic built from the odd increments X_1, X_3, ... of a 2^N sample."""
    x = as_values(increments)
    n = x.size
    N = n.bit_length() - 1
    if n < 2 or 2 ** N != n:
        raise DomainError(f"length must be 2^N with N >= 1, got {n}")
    p, a = params.p, params.alpha
    odd = x[0::2]
    inner = 2.0 ** (-N * p / 2) * float(np.sum(np.abs(odd) ** p))
    return 2.0 ** (N * (a - 1.0 / p)) * inner ** (1.0 / p)


def max_partial_sum(increments, stop: int | None = None) -> float:
    x = as_values(increments)
    stop = x.size if stop is None else stop
    return float(K.running_abs_max(K.kahan_prefix(x[:stop]), stop))


def survival_power_integral(sample: np.ndarray, c: float, p: float) -> np.ndarray:
    """int_0^1 x^{p-1} 1{M > x c} dx = min(1, M/c)^p / p, elementwise in M."""
    return np.minimum(1.0, np.asarray(sample) / c) ** p / p


def tightness_summand(spec: GeneratorSpec, N: int, j: int, params: BesovParams,
                      reps: int, seed: int, threads: int | None = None) -> MCEstimate:
    """Monte Carlo estimate of
    2^j int_0^1 x^{p-1} P(2^{-(N-j)/2} max_{k <= 2^{N-j}} |S_k| > x 2^{j/q}) dx.

    The survival function is the empirical one of ``reps`` simulated maxima,
    integrated exactly.
    """
    if not 0 <= j <= N:
        raise DomainError("need 0 <= j <= N")
    if reps < 1:
        raise DomainError("reps must be >= 1")
    m = 2 ** (N - j)

    def one(s):
        return 2.0 ** (-(N - j) / 2) * max_partial_sum(sample_increments(spec, m, s))

    maxima = replicate_values(one, reps, seed, threads)
    terms = 2.0 ** j * survival_power_integral(maxima, 2.0 ** (j / params.q), params.p)
    se = float(terms.std(ddof=1) / math.sqrt(reps)) if reps > 1 else float("nan")
    return MCEstimate(float(terms.mean()), se)


def holder_discrete_statistic(increments, K_: int, params: BesovParams) -> float:
    """n^{-1/q} max_{1<=k<=K} k^{-alpha} (sum_{i=0}^{n-k} |S_{i+k} - S_i|^p)^{1/p}."""
    x = as_values(increments)
    n = x.size
    if not 1 <= K_ <= n:
        raise DomainError(f"K must lie in 1..{n}, got {K_}")
    prof = window_profile(x, params, np.arange(1, K_ + 1))
    return n ** (-1.0 / params.q) * float(prof.scores.max())
