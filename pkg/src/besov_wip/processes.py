"""Increment generators and polygonal partial-sum processes."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as K
from .core import SampledPath
from .mc import make_rng

FAMILIES = ("gaussian", "rademacher", "pareto", "arch", "zero")
ARCH_BURN_IN = 1000


class InvalidParameterError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorSpec:
    """Law of a stationary increment sequence.

    ``pareto`` is symmetric with P(|X| > t) = min(1, (scale/t)^beta);
    ``arch`` is X_j = sigma_j eps_j, sigma_j^2 = a0 + a1 X_{j-1}^2.
    ``zero`` is the degenerate law at 0.
    """

    family: str
    sigma: float = 1.0
    beta: float = 4.0
    scale: float = 1.0
    a0: float = 1.0
    a1: float = 0.3
    innovation: str = "gaussian"

    def __post_init__(self):
        f = self.family
        if f not in FAMILIES:
            raise InvalidParameterError(f"unknown family {f!r}; expected one of {FAMILIES}")
        if f == "gaussian" and not self.sigma > 0:
            raise InvalidParameterError("gaussian needs sigma > 0")
        if f == "pareto":
            if not self.beta > 2:
                raise InvalidParameterError(f"pareto needs beta > 2 for finite variance, got {self.beta}")
            if not self.scale > 0:
                raise InvalidParameterError("pareto needs scale > 0")
        if f == "arch":
            if not self.a0 > 0:
                raise InvalidParameterError("arch needs a0 > 0")
            if not 0 <= self.a1 < 1:
                raise InvalidParameterError(f"arch needs 0 <= a1 < 1, got {self.a1}")
            if self.innovation not in ("gaussian", "rademacher"):
                raise InvalidParameterError(f"unknown innovation {self.innovation!r}")

    @classmethod
    def gaussian(cls, sigma=1.0):
        return cls("gaussian", sigma=sigma)

    @classmethod
    def rademacher(cls):
        return cls("rademacher")

    @classmethod
    def pareto(cls, beta, scale=1.0):
        return cls("pareto", beta=beta, scale=scale)

    @classmethod
    def arch(cls, a0=1.0, a1=0.3, innovation="gaussian"):
        return cls("arch", a0=a0, a1=a1, innovation=innovation)

    @property
    def variance(self) -> float:
        """Stationary variance E X^2."""
        f = self.family
        if f == "gaussian":
            return self.sigma ** 2
        if f == "rademacher":
            return 1.0
        if f == "pareto":
            return self.scale ** 2 * self.beta / (self.beta - 2)
        if f == "arch":
            return self.a0 / (1 - self.a1)
        return 0.0

    def describe(self) -> dict:
        keep = {
            "gaussian": ("sigma",), "rademacher": (), "zero": (),
            "pareto": ("beta", "scale"), "arch": ("a0", "a1", "innovation"),
        }[self.family]
        d = asdict(self)
        return {"family": self.family, **{k: d[k] for k in keep}}

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        return cls(**d)


@dataclass(frozen=True, eq=False)
class IncrementSeries:
    values: np.ndarray
    spec: GeneratorSpec | None = None
    seed: int | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).ravel()
        if v.size < 1:
            raise InvalidParameterError("an increment series needs at least one value")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self):
        return self.values.size

    def scaled(self, c: float) -> "IncrementSeries":
        return IncrementSeries(c * self.values, self.spec, self.seed)

    def provenance(self) -> dict:
        return {"spec": self.spec.describe() if self.spec else None, "seed": self.seed, "n": self.n}

    def to_csv(self, path: str | Path, extra: dict | None = None) -> None:
        header = json.dumps({**self.provenance(), **(extra or {})}, sort_keys=True)
        with open(path, "w") as fh:
            fh.write(f"# {header}\n")
            fh.write("value\n")
            for x in self.values:
                fh.write(f"{float(x)!r}\n")


def as_values(x) -> np.ndarray:
    if isinstance(x, IncrementSeries):
        return x.values
    return np.asarray(x, dtype=np.float64).ravel()


def _draw(spec: GeneratorSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    f = spec.family
    if f == "gaussian":
        return spec.sigma * rng.standard_normal(n)
    if f == "rademacher":
        return 2.0 * rng.integers(0, 2, size=n) - 1.0
    if f == "zero":
        return np.zeros(n)
    if f == "pareto":
        u = 1.0 - rng.random(n)  # (0, 1]
        sign = 2.0 * rng.integers(0, 2, size=n) - 1.0
        return sign * spec.scale * u ** (-1.0 / spec.beta)
    if spec.innovation == "gaussian":
        eps = rng.standard_normal(n + ARCH_BURN_IN)
    else:
        eps = 2.0 * rng.integers(0, 2, size=n + ARCH_BURN_IN) - 1.0
    return K.arch_recursion(eps, spec.a0, spec.a1, ARCH_BURN_IN)


def sample_increments(spec: GeneratorSpec, n: int, seed: int) -> IncrementSeries:
    """n draws of the sequence; identical for identical (spec, n, seed)."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    return IncrementSeries(_draw(spec, n, make_rng(seed)), spec, seed)


def partial_sum_path(increments, normalize: bool = False) -> SampledPath:
    """Polygon through (k/n, S_k); scaled by n^{-1/2} when ``normalize``."""
    x = as_values(increments)
    s = K.kahan_prefix(x)
    if normalize:
        s = s / np.sqrt(x.size)
    return SampledPath(s)


def brownian_path(m: int, seed: int) -> SampledPath:
    """Brownian motion sampled exactly at k/m and interpolated linearly.

    For m = 2^J the path is built by midpoint refinement: W(1) first, then
    each dyadic level from the bridge law, drawing level by level from one
    stream.  The same seed at a coarser dyadic resolution therefore yields
    exactly every (m/m')-th vertex, so laws at different resolutions can be
    compared path by path.  Other m use cumulative Gaussian increments.
    """
    if m < 1:
        raise InvalidParameterError("m must be >= 1")
    rng = make_rng(seed)
    J = m.bit_length() - 1
    if 2 ** J != m:
        xi = rng.standard_normal(m)
        return SampledPath(K.kahan_prefix(xi) / np.sqrt(m))
    v = np.array([0.0, rng.standard_normal()])
    for j in range(1, J + 1):
        # midpoint of a bridge over spacing 2^{1-j} has variance 2^{-1-j}
        z = rng.standard_normal(v.size - 1)
        fine = np.empty(2 * v.size - 1)
        fine[0::2] = v
        fine[1::2] = 0.5 * (v[:-1] + v[1:]) + np.sqrt(2.0 ** (-1 - j)) * z
        v = fine
    return SampledPath(v)


def tail_functional(sample, q: float, t_grid) -> np.ndarray:
    """t^q times the empirical frequency of |X| >= t."""
    a = np.sort(np.abs(as_values(sample)))
    t = np.asarray(t_grid, dtype=np.float64)
    if a.size == 0:
        raise InvalidParameterError("empty sample")
    if np.any(t <= 0):
        raise InvalidParameterError("t_grid must be positive")
    frac = (a.size - np.searchsorted(a, t, side="left")) / a.size
    return t ** q * frac


def read_series_csv(path: str | Path) -> IncrementSeries:
    """Parse a single-column CSV; '#' lines are comments, one optional text header."""
    meta = {}
    vals = []
    header_seen = False
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                try:
                    meta.update(json.loads(line[1:]))
                except ValueError:
                    pass
                continue
            try:
                x = float(line.split(",")[0])
            except ValueError:
                if header_seen or vals:
                    raise ValueError(f"{path}:{lineno}: cannot parse {line!r} as a number") from None
                header_seen = True
                continue
            if not np.isfinite(x):
                raise ValueError(f"{path}:{lineno}: non-finite value {line!r}")
            vals.append(x)
    if not vals:
        raise ValueError(f"{path}: no numeric rows")
    spec = GeneratorSpec.from_dict(meta["spec"]) if meta.get("spec") else None
    return IncrementSeries(np.array(vals), spec, meta.get("seed"))
