"""Seeding, empirical distributions and the replication engine."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    z = (x + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Seed of replicate ``index``; depends only on (seed, index)."""
    return splitmix64((seed + _GOLDEN * index) & MASK64)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator keyed by ``seed``."""
    return np.random.Generator(np.random.Philox(key=seed & MASK64))


def thread_count(threads: int | None = None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("BESOV_WIP_THREADS")
    return max(1, int(env)) if env else 1


class ReplicateError(RuntimeError):
    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"replicate {index} failed: {cause!r}")
        self.index = index


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    sample: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.sort(np.asarray(self.sample, dtype=np.float64).ravel())
        if s.size == 0:
            raise ValueError("empty sample")
        s.setflags(write=False)
        object.__setattr__(self, "sample", s)

    @property
    def reps(self) -> int:
        return self.sample.size

    def cdf(self, x: float) -> float:
        return np.searchsorted(self.sample, x, side="right") / self.reps

    def quantile(self, u: float) -> float:
        return quantile(self, u)

    def median(self) -> float:
        return float(np.median(self.sample))

    def to_csv(self, path: str | Path) -> None:
        """Single-column CSV plus a ``.json`` metadata sidecar."""
        path = Path(path)
        np.savetxt(path, self.sample, fmt="%.17g", header="value", comments="")
        sidecar = path.with_name(path.name + ".json")
        sidecar.write_text(json.dumps({**self.meta, "reps": self.reps}, indent=2, default=str))

    @classmethod
    def from_csv(cls, path: str | Path) -> "EmpiricalDistribution":
        path = Path(path)
        sample = np.loadtxt(path, skiprows=1, ndmin=1)
        sidecar = path.with_name(path.name + ".json")
        meta = json.loads(sidecar.read_text()) if sidecar.exists() else {}
        return cls(sample, meta)


def quantile(dist: EmpiricalDistribution, u: float) -> float:
    """Type-1 empirical quantile: the order statistic of rank ceil(u * reps)."""
    if not 0 < u < 1:
        raise ValueError(f"u must lie in (0, 1), got {u}")
    rank = max(1, math.ceil(u * dist.reps))
    return float(dist.sample[rank - 1])


def ks_distance(d1: EmpiricalDistribution, d2: EmpiricalDistribution) -> float:
    """Sup distance between two empirical CDFs, evaluated at every jump."""
    a, b = d1.sample, d2.sample
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def replicate_values(task: Callable[[int], object], reps: int, seed: int,
                     threads: int | None = None) -> np.ndarray:
    """Task values in replicate order (index 1..reps).

    Tasks may return a scalar or a fixed-length tuple of numbers; the result
    then has one row per replicate.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")

    def run(i):
        try:
            return task(derive_seed(seed, i))
        except Exception as exc:
            raise ReplicateError(i, exc) from exc

    idx = range(1, reps + 1)
    nthreads = thread_count(threads)
    if nthreads == 1:
        return np.array([run(i) for i in idx], dtype=np.float64)
    with ThreadPoolExecutor(max_workers=nthreads) as pool:
        return np.array(list(pool.map(run, idx)), dtype=np.float64)


def replicate(task: Callable[[int], float], reps: int, seed: int,
              threads: int | None = None, description: str = "") -> EmpiricalDistribution:
    """Run ``task`` at derived seeds for replicates 1..reps.

    The result does not depend on the thread count or the completion order.
    """
    values = replicate_values(task, reps, seed, threads)
    return EmpiricalDistribution(values, {"reps": reps, "seed": seed, "description": description})
