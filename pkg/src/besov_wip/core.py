"""Exact analysis of polygonal functions on [0, 1].

Paths are stored by their vertices on a uniform grid.  Every integral of
``|linear|^p`` is evaluated in closed form, so the norms below carry no
quadrature error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels as K


class DomainError(ValueError):
    """Argument outside the domain of an operation."""


class DegeneracyError(ArithmeticError):
    """A pivot vanished during orthogonalization."""


def q_of(p: float, alpha: float) -> float:
    """Critical tail exponent ``1 / (1/2 - alpha + 1/p)``."""
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if not 0 <= alpha < 0.5:
        raise DomainError(f"alpha must lie in [0, 1/2), got {alpha}")
    return 1.0 / (0.5 - alpha + 1.0 / p)


@dataclass(frozen=True)
class BesovParams:
    p: float
    alpha: float
    q: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "q", q_of(self.p, self.alpha))

    @property
    def supercritical(self) -> bool:
        """True when alpha > 1/p, where the tail condition matters."""
        return self.alpha > 1.0 / self.p

    @property
    def pint(self) -> int:
        return K.int_exponent(self.p)

    def as_dict(self) -> dict:
        return {"p": self.p, "alpha": self.alpha, "q": self.q}


@dataclass(frozen=True, eq=False)
class SampledPath:
    """Polygon with vertex ``vertices[k]`` at ``t = k/n``."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64)
        if v.ndim != 1 or v.size < 2:
            raise DomainError("a path needs at least two vertices")
        if not np.all(np.isfinite(v)):
            raise DomainError("path vertices must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def n(self) -> int:
        return self.vertices.size - 1

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n + 1)

    def __call__(self, t):
        return eval_path(self, t)

    def scaled(self, c: float) -> "SampledPath":
        return SampledPath(c * self.vertices)

    def __add__(self, other: "SampledPath") -> "SampledPath":
        if other.n != self.n:
            raise DomainError("paths must share a grid")
        return SampledPath(self.vertices + other.vertices)

    def __sub__(self, other: "SampledPath") -> "SampledPath":
        return self + other.scaled(-1.0)


def eval_path(path: SampledPath, t):
    """Linear interpolation of the vertices; exact at grid points."""
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any((t_arr < 0) | (t_arr > 1)) or np.any(np.isnan(t_arr)):
        raise DomainError("t must lie in [0, 1]")
    n = path.n
    v = path.vertices
    s = t_arr * n
    k = np.clip(np.floor(s).astype(np.int64), 0, n - 1)
    frac = s - k
    out = v[k] + frac * (v[k + 1] - v[k])
    # t == k/n must return the vertex bit-for-bit even when t * n rounds below k
    r = np.rint(s).astype(np.int64)
    out = np.where(r / n == t_arr, v[r], out)
    return out if out.ndim else float(out)


def _check_p(p):
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")


def lp_norm(path: SampledPath, p: float) -> float:
    _check_p(p)
    integral = K.piecewise_power_integral(path.grid, path.vertices, float(p), K.int_exponent(p))
    return integral ** (1.0 / p)


def _shift_integral(path: SampledPath, h: float, p: float) -> float:
    """``int_{0}^{1-h} |x(t+h) - x(t)|^p dt`` for a single shift 0 <= h <= 1."""
    n = path.n
    kh = h * n
    if kh == round(kh):
        k = int(round(kh))
        return float(K.grid_shift_integrals(path.vertices, float(p), K.int_exponent(p), k, k)[0])
    # off-grid shift: the difference has breaks at k/n and k/n - h
    g = path.grid
    brk = np.concatenate([g, g - h])
    brk = np.unique(np.clip(brk, 0.0, 1.0 - h))
    diff = eval_path(path, np.minimum(brk + h, 1.0)) - eval_path(path, brk)
    return float(K.piecewise_power_integral(brk, diff, float(p), K.int_exponent(p)))


def modulus(path: SampledPath, delta: float, p: float) -> float:
    """L_p modulus of smoothness with shifts restricted to {k/n <= delta} and delta."""
    _check_p(p)
    if not 0 <= delta <= 1:
        raise DomainError(f"delta must lie in [0, 1], got {delta}")
    if delta == 0:
        return 0.0
    kmax = int(math.floor(path.n * delta))
    best = _shift_integral(path, delta, p)
    if kmax >= 1:
        grid_vals = K.grid_shift_integrals(path.vertices, float(p), K.int_exponent(p), 1, kmax)
        best = max(best, float(grid_vals.max()))
    return best ** (1.0 / p)


def grid_modulus(path: SampledPath, p: float) -> np.ndarray:
    """``modulus(path, k/n, p)`` for k = 1..n in one pass."""
    _check_p(p)
    vals = K.grid_shift_integrals(path.vertices, float(p), K.int_exponent(p), 1, path.n)
    return np.maximum.accumulate(vals) ** (1.0 / p)


class BesovNorm(NamedTuple):
    lp: float
    seminorm: float
    total: float


def besov_seminorm(path: SampledPath, params: BesovParams) -> float:
    n = path.n
    delta = np.arange(1, n + 1) / n
    return float(np.max(delta ** -params.alpha * grid_modulus(path, params.p)))


def besov_norm(path: SampledPath, params: BesovParams) -> BesovNorm:
    lp = lp_norm(path, params.p)
    semi = besov_seminorm(path, params)
    return BesovNorm(lp, semi, lp + semi)


# --- Faber-Schauder ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DyadicCoeffs:
    """Schauder coefficients by level: ``levels[0] = [lambda_0, lambda_1]``,
    ``levels[j]`` holds lambda_r for r = (2l-1)/2^j, l = 1..2^(j-1)."""

    levels: tuple

    def __post_init__(self):
        lv = tuple(np.array(a, dtype=np.float64) for a in self.levels)
        for j, a in enumerate(lv):
            want = 2 if j == 0 else 2 ** (j - 1)
            if a.shape != (want,):
                raise DomainError(f"level {j} needs {want} coefficients, got {a.shape}")
            a.setflags(write=False)
        object.__setattr__(self, "levels", lv)

    @property
    def J(self) -> int:
        return len(self.levels) - 1

    def scaled(self, c: float) -> "DyadicCoeffs":
        return DyadicCoeffs(tuple(c * a for a in self.levels))

    @classmethod
    def zeros(cls, J: int) -> "DyadicCoeffs":
        return cls(tuple(np.zeros(2 if j == 0 else 2 ** (j - 1)) for j in range(J + 1)))


def dyadic_points(j: int) -> np.ndarray:
    if j == 0:
        return np.array([0.0, 1.0])
    return (2.0 * np.arange(1, 2 ** (j - 1) + 1) - 1.0) / 2.0 ** j


def schauder_coeffs(path: SampledPath, J: int) -> DyadicCoeffs:
    if J < 0:
        raise DomainError("J must be non-negative")
    v = path.vertices
    levels = [np.array([v[0], v[-1]])]
    for j in range(1, J + 1):
        r = dyadic_points(j)
        h = 2.0 ** -j
        levels.append(eval_path(path, r) - 0.5 * (eval_path(path, r + h) + eval_path(path, r - h)))
    return DyadicCoeffs(tuple(levels))


def schauder_reconstruct(coeffs: DyadicCoeffs) -> SampledPath:
    """Sum of lambda_r * Lambda_r on the grid of resolution 2^J."""
    lam0, lam1 = coeffs.levels[0]
    v = np.array([lam0, lam1])
    for j in range(1, coeffs.J + 1):
        # hats of level j vanish on the coarser grid and peak at the new midpoints
        fine = np.empty(2 * v.size - 1)
        fine[0::2] = v
        fine[1::2] = 0.5 * (v[:-1] + v[1:]) + coeffs.levels[j]
        v = fine
    return SampledPath(v)


def level_norm(lam: np.ndarray, j: int, params: BesovParams) -> float:
    """2^{j(alpha - 1/p)} * (sum_{r in D_j} |lambda_r|^p)^{1/p}."""
    p = params.p
    return 2.0 ** (j * (params.alpha - 1.0 / p)) * float(np.sum(np.abs(lam) ** p)) ** (1.0 / p)


def level_norms(coeffs: DyadicCoeffs, params: BesovParams) -> np.ndarray:
    return np.array([level_norm(lv, j, params) for j, lv in enumerate(coeffs.levels)])


def sequential_norm(coeffs: DyadicCoeffs, params: BesovParams) -> float:
    return float(np.max(level_norms(coeffs, params)))


# --- Franklin system --------------------------------------------------------


def hat_index_point(k: int) -> tuple[int, float]:
    """Level and peak of the k-th Faber-Schauder function in the usual ordering
    Lambda_0 = 1 - t, Lambda_1 = t, Lambda_2 = Lambda_{1/2}, Lambda_3 = Lambda_{1/4}, ..."""
    if k == 0:
        return 0, 0.0
    if k == 1:
        return 0, 1.0
    j = (k - 1).bit_length()
    l = k - 2 ** (j - 1)
    return j, (2 * l - 1) / 2.0 ** j


def hat_vertices(K_: int, J: int) -> np.ndarray:
    """Vertex values of Lambda_0..Lambda_K on the grid i/2^J, one column per hat."""
    t = np.arange(2 ** J + 1) / 2.0 ** J
    out = np.empty((t.size, K_ + 1))
    for k in range(K_ + 1):
        j, r = hat_index_point(k)
        if k == 0:
            out[:, k] = 1.0 - t
        elif k == 1:
            out[:, k] = t
        else:
            out[:, k] = np.maximum(0.0, 1.0 - 2.0 ** j * np.abs(t - r))
    return out


def p1_inner(x: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact L2 inner products of polygons sharing breakpoints ``x``.

    ``a`` and ``b`` hold vertex values in their columns; returns a.T @ M @ b
    with M the linear-element mass matrix.
    """
    h = np.diff(x)
    a = a.reshape(x.size, -1)
    b = b.reshape(x.size, -1)
    a0, a1 = a[:-1], a[1:]
    b0, b1 = b[:-1], b[1:]
    w = h[:, None] / 6.0
    return (w * (2 * a0)).T @ b0 + (w * a0).T @ b1 + (w * a1).T @ b0 + (w * (2 * a1)).T @ b1


def _level_for(K_: int) -> int:
    return max(hat_index_point(K_)[0], 1)


@dataclass(frozen=True, eq=False)
class FranklinBasis:
    """f_k = sum_{i<=k} coeffs[i, k] Lambda_i."""

    K: int
    coeffs: np.ndarray

    @property
    def J(self) -> int:
        return _level_for(self.K)

    def vertices(self) -> np.ndarray:
        """Vertex values of f_0..f_K on the grid i/2^J."""
        return hat_vertices(self.K, self.J) @ self.coeffs

    def gram(self) -> np.ndarray:
        J = self.J
        x = np.arange(2 ** J + 1) / 2.0 ** J
        f = self.vertices()
        return p1_inner(x, f, f)


def franklin_basis(K_: int) -> FranklinBasis:
    """L2 orthonormalization of Lambda_0..Lambda_K.

    Modified Gram-Schmidt with a second pass, in the hat coordinates with
    the exact Gram matrix of the hats as inner product.
    """
    if K_ < 0:
        raise DomainError("K must be non-negative")
    J = _level_for(K_)
    x = np.arange(2 ** J + 1) / 2.0 ** J
    H = hat_vertices(K_, J)
    G = p1_inner(x, H, H)
    C = np.zeros((K_ + 1, K_ + 1))
    for k in range(K_ + 1):
        c = np.zeros(K_ + 1)
        c[k] = 1.0
        for _ in range(2):
            for i in range(k):
                c -= (C[:, i] @ G @ c) * C[:, i]
        nrm2 = c @ G @ c
        if not nrm2 > 1e-24:
            raise DegeneracyError(f"pivot {k} vanished")
        C[:, k] = c / math.sqrt(nrm2)
    return FranklinBasis(K_, C)


def franklin_coeffs(path: SampledPath, K_: int, basis: FranklinBasis | None = None) -> np.ndarray:
    """Exact coefficients <x, f_k> for k = 0..K."""
    basis = basis if basis is not None and basis.K == K_ else franklin_basis(K_)
    J = basis.J
    x = np.union1d(path.grid, np.arange(2 ** J + 1) / 2.0 ** J)
    hats = np.column_stack([
        np.interp(x, np.arange(2 ** J + 1) / 2.0 ** J, col) for col in hat_vertices(K_, J).T
    ])
    inner = p1_inner(x, eval_path(path, x), hats).ravel()
    return inner @ basis.coeffs
