"""Desk-scale convergence experiments with fixed seeds and pass/fail thresholds.

Each experiment returns a :class:`CriterionResult`; the raw simulated
outputs are kept so two runs can be compared bit for bit.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import oracles
from .changepoint import (EpidemicModel, MCConfig, epidemic_test, limit_distribution_mc,
                          power_prediction, scan_statistic, t_statistic)
from .core import (BesovParams, SampledPath, besov_norm, franklin_basis, lp_norm, modulus,
                   schauder_coeffs, schauder_reconstruct)
from .diagnostics import necessity_statistic
from .mc import EmpiricalDistribution, ks_distance, make_rng, replicate, replicate_values
from .processes import GeneratorSpec, brownian_path, partial_sum_path, sample_increments

# thresholds
EXACT_TOL = 1e-10
ROUNDTRIP_TOL = 1e-12
GRAM_TOL = 1e-9
SUITE_SECONDS = 60.0
DONSKER_KS = 0.08
SUPER_KS_N = 0.10
SUPER_KS_LIMIT = 0.12
GAUSS_DECAY = 1.5
MARTINGALE_KS = 0.12
NULL_BAND = (0.01, 0.12)
POWER_MIN = 0.95
RATIO_BAND = (0.8, 1.3)
RATIO_SHARE = 0.90


@dataclass
class CriterionResult:
    number: str
    name: str
    passed: bool
    metrics: dict
    outputs: dict = field(default_factory=dict, repr=False)
    seconds: float = 0.0
    time_limit: float | None = None

    def line(self) -> str:
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.metrics.items())
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number}. {self.name}: {shown} ({self.seconds:.1f}s)"

    def summary(self) -> dict:
        return {"criterion": self.number, "name": self.name, "passed": self.passed,
                "metrics": {k: _plain(v) for k, v in self.metrics.items()}, "seconds": self.seconds}


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _rel_err(a, b):
    return abs(a - b) / max(1.0, abs(b))


def _timed(fn):
    def wrapper(*args, **kw):
        t0 = time.perf_counter()
        res = fn(*args, **kw)
        res.seconds = time.perf_counter() - t0
        if res.time_limit is not None:
            res.passed = res.passed and res.seconds < res.time_limit
            res.metrics["time_limit_s"] = res.time_limit
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_timed
def exactness_suite(seed: int = 11, instances: int = 100, threads=None) -> CriterionResult:
    """Exact routines against quadrature and enumeration on random small instances."""
    rng = make_rng(seed)
    errs = {"lp_norm": 0.0, "modulus": 0.0, "scan_statistic": 0.0, "t_statistic": 0.0}
    record = []
    for _ in range(instances):
        n = int(rng.integers(1, 65))
        p = float(rng.choice([2.0, 4.0])) if rng.random() < 0.3 else float(rng.uniform(1.0, 6.0))
        alpha = float(rng.uniform(0.0, 0.49))
        params = BesovParams(p, alpha)
        path = SampledPath(rng.standard_normal(n + 1) * rng.uniform(0.2, 3.0))
        errs["lp_norm"] = max(errs["lp_norm"], _rel_err(lp_norm(path, p), oracles.lp_norm_quad(path.vertices, p)))
        delta = float(rng.uniform(0.0, 1.0))
        errs["modulus"] = max(errs["modulus"], _rel_err(modulus(path, delta, p),
                                                        oracles.modulus_quad(path.vertices, delta, p)))
        x = rng.standard_normal(n) + rng.uniform(-1, 1)
        a = float(rng.uniform(0.0, 0.6))
        b = float(rng.uniform(a + 0.05, 1.0))
        lo, hi = math.floor(a * n) + 1, min(math.floor(b * n) + 1, n)
        if lo <= hi:
            got = scan_statistic(x, params, a, b).value
            errs["scan_statistic"] = max(errs["scan_statistic"],
                                         _rel_err(got, oracles.scan_brute(x, p, alpha, lo, hi)[0]))
        got_t = t_statistic(x, params).value
        errs["t_statistic"] = max(errs["t_statistic"], _rel_err(got_t, oracles.scan_brute(x, p, alpha, 1, n)[0]))
        record.append(got_t)
    worst = max(errs.values())
    res = CriterionResult("1", "exactness suite", worst <= EXACT_TOL,
                          {**{f"max_err_{k}": v for k, v in errs.items()}, "instances": instances},
                          {"t_values": np.array(record)}, time_limit=SUITE_SECONDS)
    return res


@_timed
def basis_suite(seed: int = 12, threads=None) -> CriterionResult:
    """Faber-Schauder round trips for J <= 10 and the Franklin Gram matrix at K = 64."""
    rng = make_rng(seed)
    rt = 0.0
    for J in range(0, 11):
        path = partial_sum_path(rng.standard_normal(2 ** J), normalize=True)
        back = schauder_reconstruct(schauder_coeffs(path, J))
        rt = max(rt, float(np.max(np.abs(back.vertices - path.vertices))))
    basis = franklin_basis(64)
    gram_err = float(np.max(np.abs(basis.gram() - np.eye(65))))
    ok = rt <= ROUNDTRIP_TOL and gram_err <= GRAM_TOL
    return CriterionResult("2", "basis suite", ok, {"roundtrip_err": rt, "gram_err": gram_err},
                           {"franklin": basis.coeffs.copy()}, time_limit=SUITE_SECONDS)


@_timed
def donsker(seed: int = 13, threads=None, n: int = 2 ** 12, reps: int = 1000) -> CriterionResult:
    """Besov norm of the normalized Gaussian partial-sum polygon against Brownian paths."""
    params = BesovParams(2.0, 0.25)
    spec = GeneratorSpec.gaussian()
    walk = replicate(lambda s: besov_norm(partial_sum_path(sample_increments(spec, n, s), True), params).total,
                     reps, seed, threads)
    bm = replicate(lambda s: besov_norm(brownian_path(n, s), params).total, reps, seed + 1, threads)
    ks = ks_distance(walk, bm)
    return CriterionResult("3", "Donsker convergence (p=2, alpha=0.25)", ks <= DONSKER_KS,
                           {"ks": ks, "threshold": DONSKER_KS},
                           {"walk": walk.sample, "bm": bm.sample})


def _scan_law(spec, n, params, a, b, reps, seed, threads) -> EmpiricalDistribution:
    scale = 1.0 / math.sqrt(spec.variance)
    return replicate(lambda s: scan_statistic(scale * sample_increments(spec, n, s).values, params, a, b).value,
                     reps, seed, threads)


@_timed
def supercritical(seed: int = 14, threads=None, reps: int = 1000, m: int = 2 ** 13) -> CriterionResult:
    """Pareto(4) scan laws at two sample sizes and the simulated limit law."""
    params = BesovParams(4.0, 0.3)
    spec = GeneratorSpec.pareto(4.0)
    a, b = 0.1, 0.9
    small = _scan_law(spec, 2 ** 11, params, a, b, reps, seed, threads)
    large = _scan_law(spec, 2 ** 13, params, a, b, reps, seed + 1, threads)
    limit = limit_distribution_mc(params, a, b, m, reps, seed + 2, threads)
    ks_n = ks_distance(small, large)
    ks_lim = ks_distance(large, limit)
    ok = ks_n <= SUPER_KS_N and ks_lim <= SUPER_KS_LIMIT
    return CriterionResult("4", "supercritical convergence (Pareto beta=4)", ok,
                           {"ks_2^11_vs_2^13": ks_n, "ks_2^13_vs_limit": ks_lim},
                           {"small": small.sample, "large": large.sample, "limit": limit.sample})


@_timed
def necessity(seed: int = 15, threads=None, reps: int = 200) -> CriterionResult:
    """Level-N odd-increment statistic under a failing tail condition and under Gaussian data."""
    params = BesovParams(4.0, 0.35)
    out = {}
    med = {}
    for label, spec in (("pareto", GeneratorSpec.pareto(2.2)), ("gauss", GeneratorSpec.gaussian())):
        for N in (10, 16):
            vals = replicate_values(lambda s: necessity_statistic(sample_increments(spec, 2 ** N, s), params),
                                    reps, seed + N, threads)
            out[f"{label}_{N}"] = vals
            med[f"{label}_{N}"] = float(np.median(vals))
    decay = med["gauss_10"] / med["gauss_16"]
    ok = med["pareto_16"] >= med["pareto_10"] and decay >= GAUSS_DECAY
    return CriterionResult("5", "necessity divergence (Pareto beta=2.2)", ok,
                           {**{f"median_{k}": v for k, v in med.items()}, "gauss_decay": decay}, out)


@_timed
def martingale(seed: int = 16, threads=None, reps: int = 500) -> CriterionResult:
    """Scan statistic laws for ARCH(1) martingale differences at two sample sizes."""
    params = BesovParams(4.0, 0.3)
    spec = GeneratorSpec.arch(1.0, 0.3)
    laws = [replicate(lambda s: t_statistic(sample_increments(spec, n, s), params).value, reps, seed + i, threads)
            for i, n in enumerate((2 ** 11, 2 ** 13))]
    ks = ks_distance(*laws)
    return CriterionResult("6", "martingale stabilization (ARCH a1=0.3)", ks <= MARTINGALE_KS,
                           {"ks": ks, "threshold": MARTINGALE_KS},
                           {"small": laws[0].sample, "large": laws[1].sample})


NULL_MC = MCConfig(m=2 ** 12, reps=2000, seed=4242)
POWER_PARAMS = BesovParams(4.0, 0.3)


def _null_law(threads):
    return limit_distribution_mc(POWER_PARAMS, 0.0, 1.0, NULL_MC.m, NULL_MC.reps, NULL_MC.seed,
                                 threads, centered=True)


@_timed
def null_calibration(seed: int = 17, threads=None, reps: int = 200, n: int = 2048) -> CriterionResult:
    """Rejection rate of the epidemic test on pure Gaussian noise."""
    null = _null_law(threads)
    spec = GeneratorSpec.gaussian()
    rej = replicate_values(
        lambda s: epidemic_test(sample_increments(spec, n, s), POWER_PARAMS, 0.05, null=null).reject,
        reps, seed, threads)
    rate = float(rej.mean())
    ok = NULL_BAND[0] <= rate <= NULL_BAND[1]
    return CriterionResult("7", "null calibration (level 0.05)", ok,
                           {"rejection_rate": rate, "critical_value": null.quantile(0.95)},
                           {"reject": rej, "null": null.sample})


def power(seed: int = 18, threads=None, reps: int = 200, n: int = 4096, h_star: int = 512,
          mu: float = 1.0) -> list[CriterionResult]:
    """Epidemic alternative: rejection rate, and raw T_n against the leading-term prediction."""
    t0 = time.perf_counter()
    null = _null_law(threads)
    k_star = (n - h_star) // 2
    model = EpidemicModel(n, k_star, k_star + h_star, mu)
    pred = power_prediction(n, h_star, mu, POWER_PARAMS)

    def one(s):
        x = model.sample(s)
        return (epidemic_test(x, POWER_PARAMS, 0.05, null=null).reject,
                t_statistic(x, POWER_PARAMS).value / pred)

    rows = replicate_values(one, reps, seed, threads)
    rate = float(rows[:, 0].mean())
    ratios = rows[:, 1]
    share = float(np.mean((ratios >= RATIO_BAND[0]) & (ratios <= RATIO_BAND[1])))
    outs = {"rows": rows}
    secs = time.perf_counter() - t0
    return [
        CriterionResult("8a", "power: rejection rate", rate >= POWER_MIN, {"rejection_rate": rate}, outs, secs),
        CriterionResult("8b", "power: T_n / prediction in [0.8, 1.3]", share >= RATIO_SHARE,
                        {"share_in_band": share, "median_ratio": float(np.median(ratios)),
                         "prediction": pred}, outs, secs),
    ]


def run_stochastic(threads=None) -> list[CriterionResult]:
    """Criteria 3-8."""
    return [donsker(threads=threads), supercritical(threads=threads), necessity(threads=threads),
            martingale(threads=threads), null_calibration(threads=threads), *power(threads=threads)]


def run_all(threads=None) -> list[CriterionResult]:
    return [exactness_suite(threads=threads), basis_suite(threads=threads), *run_stochastic(threads)]


def same_outputs(a: list[CriterionResult], b: list[CriterionResult]) -> bool:
    if [r.number for r in a] != [r.number for r in b]:
        return False
    for ra, rb in zip(a, b):
        if ra.outputs.keys() != rb.outputs.keys():
            return False
        for key in ra.outputs:
            x, y = np.asarray(ra.outputs[key]), np.asarray(rb.outputs[key])
            if x.shape != y.shape or x.tobytes() != y.tobytes():
                return False
    return True


def determinism(reference: list[CriterionResult], threads_a: int = 1) -> CriterionResult:
    """Re-run everything at another thread count and compare outputs bit for bit."""
    from .changepoint import _limit_law

    t0 = time.perf_counter()
    _limit_law.cache_clear()
    rerun = run_all(threads=threads_a)
    ok = same_outputs(reference, rerun)
    return CriterionResult("9", f"determinism (threads {threads_a} vs reference)", ok,
                           {"experiments": len(reference)}, seconds=time.perf_counter() - t0)
