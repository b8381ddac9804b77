import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from besov_wip import oracles
from besov_wip.changepoint import (COARSE_RATIO, DegenerateSeriesError, EpidemicModel, MCConfig, RegimeWarning,
                                   _geometric_grid, bridge, epidemic_drift, epidemic_test,
                                   limit_distribution_mc, limit_functional, power_prediction, scan_statistic,
                                   t_statistic, window_range)
from besov_wip.core import BesovParams, DomainError
from besov_wip.experiments import NULL_MC
from besov_wip.mc import ks_distance
from besov_wip.processes import brownian_path

P43 = BesovParams(4, 0.3)
P23 = BesovParams(2, 0.3)
series = st.lists(st.floats(-100, 100), min_size=1, max_size=32).map(np.array)


def brute(x, prm, a=0.0, b=1.0):
    lo, hi = window_range(len(x), a, b)
    return oracles.scan_brute(x, prm.p, prm.alpha, lo, hi)


class TestScan:
    def test_zero(self):
        assert scan_statistic(np.zeros(10), P43).value == 0

    def test_spike(self):
        x = np.array([1.0, 0, 0, 0, 0, 0])
        v, k, i = brute(x, P23)
        got = scan_statistic(x, P23)
        assert got.value == pytest.approx(v, rel=1e-13)
        assert (got.argmax_k, got.argmax_i) == (k, i)

    def test_gaussian_32(self, rng):
        x = rng.standard_normal(32)
        v, k, i = brute(x, P43)
        got = t_statistic(x, P43)
        assert got.value == pytest.approx(v, rel=1e-12)
        assert (got.argmax_k, got.argmax_i) == (k, i)

    def test_single(self):
        assert t_statistic(np.array([-2.5]), P43).value == pytest.approx(2.5, rel=1e-15)

    @given(series, st.floats(0.01, 50))
    def test_homogeneous(self, x, c):
        a, b = scan_statistic(c * x, P43), scan_statistic(x, P43)
        assert a.value == pytest.approx(c * b.value, rel=1e-9, abs=1e-9 * c * (1 + np.sum(np.abs(x))))
        if b.value > 0:
            assert a.argmax_k == b.argmax_k or math.isclose(a.value, c * b.value, rel_tol=1e-9)
        assert scan_statistic(-c * x, P43).value == pytest.approx(a.value, rel=1e-12, abs=1e-12)

    @given(series)
    def test_full_range_is_t(self, x):
        assert scan_statistic(x, P43, 0, 1) == t_statistic(x, P43)

    @given(series, st.floats(0, 0.5), st.floats(0.5, 1.0))
    def test_subset_windows(self, x, a, b):
        n = x.size
        try:
            inner = scan_statistic(x, P43, a, b).value
        except DomainError:
            return
        assert inner <= scan_statistic(x, P43, 0, 1).value

    @given(st.integers(1, 32), st.floats(-3, 3))
    def test_constant_shift_brute(self, n, c):
        x = np.random.default_rng(n).standard_normal(n) + c
        v, k, i = brute(x, P43)
        got = t_statistic(x, P43)
        assert got.value == pytest.approx(v, rel=1e-11)

    @pytest.mark.parametrize("n, a, b", [(10, 0.2, 0.7), (17, 0.0, 0.3), (64, 0.5, 1.0), (5, 0.9, 1.0)])
    def test_window_sets_brute(self, n, a, b, rng):
        x = rng.standard_normal(n)
        v, k, i = brute(x, P43, a, b)
        got = scan_statistic(x, P43, a, b)
        assert got.value == pytest.approx(v, rel=1e-12)
        assert (got.argmax_k, got.argmax_i) == (k, i)

    def test_window_range(self):
        assert window_range(10, 0.2, 0.7) == (3, 8)
        assert window_range(10, 0.0, 1.0) == (1, 10)
        with pytest.raises(DomainError):
            window_range(10, 0.7, 0.2)
        with pytest.raises(DomainError):
            scan_statistic(np.ones(3), P43, 0.5, 0.5)
        with pytest.raises(DomainError):
            limit_functional(brownian_path(64, 1), P43, 0.5, 0.51)

    def test_ties_smallest(self):
        # every window of length 1 has the same value; the first start wins
        got = scan_statistic(np.ones(6), BesovParams(1, 0.49), 0, 0.1)
        assert (got.argmax_k, got.argmax_i) == (1, 0)

    def test_coarse_grid(self, rng):
        x = rng.standard_normal(3000)
        exact = t_statistic(x, P43, coarse=False)
        approx = t_statistic(x, P43, coarse=True)
        assert approx.coarse and not exact.coarse
        assert approx.value <= exact.value and approx.value >= 0.97 * exact.value
        ks = _geometric_grid(1, 3000)
        assert ks[0] == 1 and ks[-1] == 3000 and np.all(np.diff(ks) >= 1)
        assert np.all(ks[1:][ks[:-1] > 40] <= np.ceil(ks[:-1][ks[:-1] > 40] * COARSE_RATIO))

    def test_coarse_by_default_above_limit(self, rng):
        assert t_statistic(rng.standard_normal(2 ** 14 + 1), P43).coarse
        assert not t_statistic(rng.standard_normal(512), P43).coarse

    def test_epidemic_upper_bound(self):
        # noise-free epidemic: every window sum is at most mu * min(k, h), which bounds T_n
        for n, h, mu in [(4096, 512, 1.0), (1000, 100, -2.0), (300, 30, 0.5)]:
            model = EpidemicModel(n, (n - h) // 2, (n - h) // 2 + h, mu)
            drift = epidemic_drift(model, P43)
            bound = abs(mu) * n ** (-1 / P43.q) * h ** (1 - P43.alpha) * (n - h + 1) ** (1 / P43.p)
            assert drift <= bound * (1 + 1e-12)
            assert drift >= 0.3 * bound

    def test_stated_lower_bound_fails(self):
        # |mu| n^{-1/q} h^{1-alpha} (n-h)^{1/p} is not a lower bound for a centred epidemic
        n, h = 4096, 512
        model = EpidemicModel(n, (n - h) // 2, (n - h) // 2 + h, 1.0)
        stated = n ** (-1 / P43.q) * h ** (1 - P43.alpha) * (n - h) ** (1 / P43.p)
        assert epidemic_drift(model, P43) < stated


class TestLimitLaw:
    def test_single_draw(self):
        d = limit_distribution_mc(P43, 0, 1, 128, 1, 5)
        assert d.reps == 1 and d.sample[0] >= 0

    def test_b_superset(self):
        lo = limit_distribution_mc(P43, 0.0, 0.5, 256, 200, 3)
        hi = limit_distribution_mc(P43, 0.0, 1.0, 256, 200, 3)
        for u in (0.1, 0.5, 0.9, 0.95):
            assert hi.quantile(u) >= lo.quantile(u)

    def test_pathwise_superset(self):
        path = brownian_path(256, 1)
        assert limit_functional(path, P43, 0, 1) >= limit_functional(path, P43, 0.2, 0.6)

    def test_distinct_nonnegative(self):
        d = limit_distribution_mc(P43, 0.1, 0.9, 128, 2000, 8)
        assert np.all(d.sample >= 0)
        assert np.unique(d.sample).size == 2000

    def test_regime_warning(self):
        with pytest.warns(RegimeWarning):
            limit_distribution_mc(P23, 0, 1, 64, 2, 1)

    def test_min_resolution(self):
        with pytest.raises(DomainError):
            limit_distribution_mc(P43, 0, 1, 32, 2, 1)

    def test_bridge(self):
        path = brownian_path(64, 2)
        br = bridge(path)
        assert br.vertices[0] == 0 and abs(br.vertices[-1]) < 1e-15

    def test_resolution_stability(self):
        coarse = limit_distribution_mc(P43, 0, 1, 2 ** 12, 2000, 77)
        # same seed: the coarse paths are the fine ones on every fourth vertex
        fine = limit_distribution_mc(P43, 0, 1, 2 ** 14, 2000, 77)
        assert ks_distance(coarse, fine) <= 0.05


@pytest.fixture(scope="module")
def null_law():
    return limit_distribution_mc(P43, 0.0, 1.0, NULL_MC.m, NULL_MC.reps, NULL_MC.seed, centered=True)


class TestEpidemicTest:
    def test_invariants(self, null_law, rng):
        for _ in range(20):
            res = epidemic_test(rng.standard_normal(256) + rng.uniform(-1, 1), P43, 0.05, null=null_law)
            assert res.reject == (res.statistic > res.critical_value)
            assert res.p_value == pytest.approx(1 - null_law.cdf(res.statistic), abs=0)
            assert 0 <= res.p_value <= 1

    def test_constant_series(self, null_law):
        with pytest.raises(DegenerateSeriesError):
            epidemic_test(np.full(50, 3.0), P43, null=null_law)

    @pytest.mark.parametrize("level", [0, 1, -0.1])
    def test_level(self, level, null_law):
        with pytest.raises(DomainError):
            epidemic_test(np.arange(10.0), P43, level, null=null_law)

    def test_standardized_invariance(self, null_law, rng):
        x = rng.standard_normal(300)
        a = epidemic_test(x, P43, null=null_law)
        b = epidemic_test(3 * x + 7, P43, null=null_law)
        assert a.statistic == pytest.approx(b.statistic, rel=1e-10)

    def test_power_n2048(self, null_law):
        n = 2048
        h = n // 8
        model = EpidemicModel(n, (n - h) // 2, (n - h) // 2 + h, 1.0)
        rej = [epidemic_test(model.sample(s).values, P43, 0.05, null=null_law).reject for s in range(200)]
        assert np.mean(rej) >= 0.95

    def test_json(self, null_law, rng):
        res = epidemic_test(rng.standard_normal(100), P43, 0.05, mc=NULL_MC, null=null_law)
        d = json.loads(res.to_json())
        assert {"statistic", "argmax_k", "argmax_i", "critical_value", "p_value", "reject", "params", "mc",
                "n"} <= d.keys()
        assert d["params"] == {"p": 4.0, "alpha": 0.3, "q": P43.q}

    def test_simulated_null_default_path(self, rng):
        res = epidemic_test(rng.standard_normal(200), P43, 0.1, mc=MCConfig(64, 50, 3))
        assert res.mc == MCConfig(64, 50, 3) and 0 <= res.p_value <= 1


class TestPowerPrediction:
    def test_examples(self):
        assert power_prediction(100, 100, 1.0, P43) == 0
        assert power_prediction(100, 10, 0.0, P43) == 0
        want = 64 * (7 / 8) ** 0.25 * (1 / 8) ** 0.7
        assert power_prediction(4096, 512, 1.0, P43) == pytest.approx(want, rel=1e-14)
        assert power_prediction(4096, 512, -2.0, P43) == pytest.approx(2 * want, rel=1e-14)

    def test_range(self):
        with pytest.raises(DomainError):
            power_prediction(10, 0, 1.0, P43)

    def test_model(self):
        m = EpidemicModel(10, 2, 5, 1.5)
        assert m.h_star == 3
        np.testing.assert_array_equal(m.signal(), [0, 0, 1.5, 1.5, 1.5, 0, 0, 0, 0, 0])
        with pytest.raises(DomainError):
            EpidemicModel(10, 5, 5, 1.0)
