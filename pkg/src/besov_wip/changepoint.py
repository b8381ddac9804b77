"""Scan statistics for an epidemic change in the mean.

Under the null the normalized scan statistic converges to a functional of
Brownian motion; its law is tabulated by simulation and used for critical
values and p-values.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from .core import BesovParams, DomainError, SampledPath
from .diagnostics import window_profile
from .mc import EmpiricalDistribution, quantile, replicate
from .processes import GeneratorSpec, IncrementSeries, as_values, brownian_path, sample_increments

EXACT_SCAN_LIMIT = 2 ** 14
COARSE_RATIO = 1.05


class DegenerateSeriesError(ValueError):
    pass


class RegimeWarning(UserWarning):
    pass


class ScanValue(NamedTuple):
    value: float
    argmax_k: int
    argmax_i: int
    coarse: bool = False


@dataclass(frozen=True)
class MCConfig:
    m: int = 2 ** 13
    reps: int = 4000
    seed: int = 20240601

    def as_dict(self) -> dict:
        return {"m": self.m, "reps": self.reps, "seed": self.seed}


@dataclass
class ScanResult:
    statistic: float
    argmax_k: int
    argmax_i: int
    critical_value: float
    p_value: float
    reject: bool
    params: BesovParams | None = None
    mc: MCConfig | None = None
    n: int | None = None
    level: float | None = None
    coarse: bool = False

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "argmax_k": self.argmax_k,
            "argmax_i": self.argmax_i,
            "critical_value": self.critical_value,
            "p_value": self.p_value,
            "reject": self.reject,
            "params": self.params.as_dict() if self.params else None,
            "mc": self.mc.as_dict() if self.mc else None,
            "n": self.n,
            "level": self.level,
            "coarse_k_grid": self.coarse,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _geometric_grid(lo: int, hi: int, ratio: float = COARSE_RATIO) -> np.ndarray:
    ks = [lo]
    while ks[-1] < hi:
        ks.append(min(hi, max(ks[-1] + 1, int(math.floor(ks[-1] * ratio)))))
    return np.array(ks, dtype=np.int64)


def window_range(n: int, a: float, b: float) -> tuple[int, int]:
    """Window lengths floor(an) < k <= floor(bn) + 1, clipped to k <= n."""
    if not 0 <= a < b <= 1:
        raise DomainError(f"need 0 <= a < b <= 1, got a={a}, b={b}")
    lo = math.floor(a * n) + 1
    hi = min(math.floor(b * n) + 1, n)
    if lo > hi:
        raise DomainError(f"no window lengths for n={n}, a={a}, b={b}")
    return lo, hi


def scan_statistic(increments, params: BesovParams, a: float = 0.0, b: float = 1.0,
                   coarse: bool | None = None) -> ScanValue:
    """n^{-1/q} max_k k^{-alpha} (sum_{i=0}^{n-k} |S^{(i)}_k|^p)^{1/p} over the window set.

    Ties go to the smallest k, then the smallest start i.  Above
    ``EXACT_SCAN_LIMIT`` observations the k-grid is geometric unless
    ``coarse=False``.
    """
    x = as_values(increments)
    n = x.size
    lo, hi = window_range(n, a, b)
    if coarse is None:
        coarse = n > EXACT_SCAN_LIMIT
    ks = _geometric_grid(lo, hi) if coarse else np.arange(lo, hi + 1)
    prof = window_profile(x, params, ks)
    j = int(np.argmax(prof.scores))
    k = int(ks[j])
    return ScanValue(n ** (-1.0 / params.q) * float(prof.scores[j]), k,
                     int(K.window_argmax(prof.prefix, k)), bool(coarse))


def t_statistic(increments, params: BesovParams, coarse: bool | None = None) -> ScanValue:
    """Scan over every window length 1..n."""
    return scan_statistic(increments, params, 0.0, 1.0, coarse=coarse)


def limit_functional(path, params: BesovParams, a: float, b: float) -> float:
    """sup over t = k/m in (a, b] of t^{-alpha} (int_{I_t} |x(s+t) - x(s)|^p ds)^{1/p}."""
    m = path.n
    lo = math.floor(a * m) + 1
    hi = math.floor(b * m)
    if lo > hi:
        raise DomainError(f"no grid shifts in ({a}, {b}] at resolution {m}")
    ints = K.grid_shift_integrals(path.vertices, float(params.p), params.pint, lo, hi)
    t = np.arange(lo, hi + 1) / m
    return float(np.max(t ** -params.alpha * ints ** (1.0 / params.p)))


def bridge(path: SampledPath) -> SampledPath:
    """x(t) - t x(1), the limit shape of partial sums of a mean-centered series."""
    v = path.vertices
    return SampledPath(v - path.grid * v[-1])


def limit_distribution_mc(params: BesovParams, a: float, b: float, m: int, reps: int, seed: int,
                          threads: int | None = None, centered: bool = False) -> EmpiricalDistribution:
    """Simulated law of the Brownian scan functional on paths of resolution m.

    With ``centered`` the functional is applied to the Brownian bridge, the
    null limit once the data are centered by their sample mean.
    """
    if not params.supercritical:
        warnings.warn(f"alpha={params.alpha} <= 1/p={1 / params.p}: outside the regime "
                      "where the scan limit theorem is stated", RegimeWarning, stacklevel=2)
    if m < 64:
        raise DomainError("resolution m must be >= 64")
    return _limit_law(params.p, params.alpha, float(a), float(b), int(m), int(reps), int(seed),
                      threads, bool(centered))


@lru_cache(maxsize=32)
def _limit_law(p, alpha, a, b, m, reps, seed, threads, centered):
    params = BesovParams(p, alpha)

    def draw(s):
        path = brownian_path(m, s)
        return limit_functional(bridge(path) if centered else path, params, a, b)

    dist = replicate(draw, reps, seed, threads)
    meta = {"reps": reps, "seed": seed, "m": m, "a": a, "b": b, "centered": centered,
            **params.as_dict(), "description": "Brownian scan functional"}
    return EmpiricalDistribution(dist.sample, meta)


def standardize(series) -> np.ndarray:
    x = as_values(series)
    if x.size < 2 or np.ptp(x) == 0:
        raise DegenerateSeriesError("series has zero sample variance; cannot standardize")
    sd = x.std(ddof=1)
    if not sd > 0:
        raise DegenerateSeriesError("series has zero sample variance; cannot standardize")
    return (x - x.mean()) / sd


def epidemic_test(series, params: BesovParams, level: float = 0.05, mc: MCConfig | None = None,
                  null: EmpiricalDistribution | None = None, threads: int | None = None) -> ScanResult:
    """Test for an epidemic mean change by the full-range scan statistic.

    The series is centered and scaled by its sample standard deviation, so
    the null law is that of the bridge functional; it is simulated from
    ``mc`` unless ``null`` is given.
    """
    if not 0 < level < 1:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    z = standardize(series)
    if null is None:
        mc = mc or MCConfig()
        null = limit_distribution_mc(params, 0.0, 1.0, mc.m, mc.reps, mc.seed, threads, centered=True)
    sv = t_statistic(z, params)
    crit = quantile(null, 1.0 - level)
    pval = 1.0 - null.cdf(sv.value)
    return ScanResult(sv.value, sv.argmax_k, sv.argmax_i, crit, float(pval), bool(sv.value > crit),
                      params, mc, z.size, level, sv.coarse)


def power_prediction(n: int, h_star: int, mu: float, params: BesovParams) -> float:
    """|mu| (1 - h*/n)^{1/p} (h*/n)^{1-alpha} n^{1/2}."""
    if not 1 <= h_star <= n:
        raise DomainError(f"need 1 <= h* <= n, got h*={h_star}, n={n}")
    r = h_star / n
    return abs(mu) * (1.0 - r) ** (1.0 / params.p) * r ** (1.0 - params.alpha) * math.sqrt(n)


@dataclass(frozen=True)
class EpidemicModel:
    """X_i = mu 1{k* < i <= m*} + eps_i."""

    n: int
    k_star: int
    m_star: int
    mu: float
    noise: GeneratorSpec = field(default_factory=GeneratorSpec.gaussian)

    def __post_init__(self):
        if not 0 <= self.k_star < self.m_star <= self.n:
            raise DomainError("need 0 <= k* < m* <= n")

    @property
    def h_star(self) -> int:
        return self.m_star - self.k_star

    def signal(self) -> np.ndarray:
        s = np.zeros(self.n)
        s[self.k_star:self.m_star] = self.mu
        return s

    def sample(self, seed: int) -> IncrementSeries:
        eps = sample_increments(self.noise, self.n, seed).values
        return IncrementSeries(self.signal() + eps, self.noise, seed)


def epidemic_drift(model: EpidemicModel, params: BesovParams) -> float:
    """Scan statistic of the noise-free signal."""
    return t_statistic(model.signal(), params).value
