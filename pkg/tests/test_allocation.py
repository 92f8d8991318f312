import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from nomamimo.allocation import (DWF, EPA, MMIMO, NOMA, PICPA, POLICIES, WF,
                                 AllocationResult, allocate, cluster_powers, dwf_noma, epa_mimo,
                                 epa_noma, picpa_mimo, picpa_noma,
                                 sic_feasibility, water_fill, wf_mimo)
from nomamimo.config import ConfigError, SystemConfig
from nomamimo.geometry import Clustering, DeviceDrop, partition_and_pair

from oracles import bisection_water_fill


def _drop(beta):
    beta = np.asarray(beta, dtype=float)
    return DeviceDrop(distances=np.ones(beta.shape), beta=beta)


def _clusters(b_c, b_e):
    b_c, b_e = np.atleast_1d(np.asarray(b_c, float)), np.atleast_1d(np.asarray(b_e, float))
    n = b_c.size
    return Clustering(center_ids=np.arange(n), edge_ids=np.arange(n, 2 * n)[::-1],
                      beta_center=b_c, beta_edge=b_e)


def _gap_clusters(gaps):
    # edge gain 1, center 1 + gap, so delta_beta equals the requested gaps
    gaps = np.asarray(gaps, float)
    return _clusters(1.0 + gaps, np.ones_like(gaps))


gains = hnp.arrays(float, st.integers(1, 16), elements=st.floats(1e-3, 1e3))


class TestEqualPower:
    @pytest.mark.parametrize("K", [1, 4])
    def test_uniform(self, K):
        res = epa_mimo(SystemConfig(M=8, K=2), K=K)
        assert res.power.shape == (K,)
        assert np.allclose(res.power, 1.0 / K)
        assert res.active.all()

    def test_sum_exact_at_128(self):
        res = epa_mimo(SystemConfig(M=128, K=128))
        assert res.power[0] == 7.8125e-3
        assert res.power.sum() == 1.0

    @pytest.mark.parametrize("K", [2, 4])
    def test_noma_clusters(self, K):
        cfg = SystemConfig(M=8, K=K)
        cl = partition_and_pair(_drop(np.arange(K, 0, -1)))
        res = epa_noma(cfg, cl)
        assert np.allclose(res.cluster_power, 2.0 / K)
        assert np.allclose(res.power, 1.0 / K)

    @given(st.integers(1, 64).map(lambda h: 2 * h))
    def test_noma_equals_mimo(self, K):
        cfg = SystemConfig(M=128, K=K)
        cl = partition_and_pair(_drop(np.linspace(2.0, 1.0, K)))
        assert np.allclose(epa_noma(cfg, cl).power, epa_mimo(cfg).power, rtol=0, atol=1e-15)


class TestInversion:
    @pytest.mark.parametrize("beta,expected", [([1, 1], [0.5, 0.5]),
                                               ([2, 1], [1 / 3, 2 / 3]),
                                               ([4, 2, 1], [1 / 7, 2 / 7, 4 / 7])])
    def test_mimo_examples(self, beta, expected):
        res = picpa_mimo(SystemConfig(M=8, K=2), _drop(beta))
        assert np.allclose(res.power, expected, rtol=1e-12)

    def test_mimo_rejects_zero_gain(self):
        with pytest.raises(ValueError):
            picpa_mimo(SystemConfig(M=8, K=2), _drop([1.0, 0.0]))

    @given(hnp.arrays(float, st.integers(2, 16), elements=st.floats(1e-3, 1e3),
                      unique=True))
    def test_weaker_gets_more(self, beta):
        p = picpa_mimo(SystemConfig(M=32, K=2), _drop(beta)).power
        order = np.argsort(beta)
        assert np.all(np.diff(p[order]) < 0)

    @pytest.mark.parametrize("b_c,p_c", [(5.0, 0.25), (3.0, 0.5), (1.5, 0.5)])
    def test_noma_examples(self, b_c, p_c):
        # K=2 gives p_ref = P_rf = 1
        cfg = SystemConfig(M=8, K=2)
        res = picpa_noma(cfg, _clusters(b_c, 1.0))
        pc, pe = cluster_powers(_clusters(b_c, 1.0), res)
        assert pc[0] == pytest.approx(p_c)
        assert pe[0] == pytest.approx(1.0 - p_c)

    def test_noma_degenerate(self):
        with pytest.raises(ValueError):
            picpa_noma(SystemConfig(M=8, K=2), _clusters(1.0, 1.0))


class TestWaterFilling:
    def test_symmetric(self):
        res = wf_mimo(SystemConfig(M=8, K=2), _drop([1.0, 1.0]))
        assert np.allclose(res.power, 0.5)
        assert res.water_level == pytest.approx(1.5)

    def test_two_pass_drop(self):
        res = wf_mimo(SystemConfig(M=8, K=2), _drop([1.0, 0.4]))
        assert res.power.tolist() == [1.0, 0.0]
        assert res.active.tolist() == [True, False]
        assert res.water_level == pytest.approx(2.0)

    def test_cluster_symmetric(self):
        res = dwf_noma(SystemConfig(M=8, K=4), _gap_clusters([1.0, 1.0]))
        assert np.allclose(res.cluster_power, 0.5)
        assert np.allclose(res.power, 0.25)

    def test_cluster_two_pass_drop(self):
        cl = _gap_clusters([1.0, 0.1])
        res = dwf_noma(SystemConfig(M=8, K=4), cl)
        assert np.allclose(res.cluster_power, [1.0, 0.0])
        assert res.water_level == pytest.approx(1.0 + 1.0)
        pc, pe = cluster_powers(cl, res)
        assert np.allclose(pc, [0.5, 0.0]) and np.allclose(pe, [0.5, 0.0])
        assert res.active.tolist() == [True, False, False, True]

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            water_fill([1.0, -1.0], 1.0)

    @given(gains, st.floats(1e-3, 1e3))
    def test_matches_bisection(self, g, budget):
        p, active, mu = water_fill(g, budget)
        ref, mu_ref = bisection_water_fill(g.tolist(), budget)
        assert np.allclose(p, ref, rtol=1e-9, atol=1e-9 * budget)
        assert mu == pytest.approx(mu_ref, rel=1e-9)

    @given(gains, st.floats(1e-3, 1e3))
    def test_kkt(self, g, budget):
        p, active, mu = water_fill(g, budget)
        assert p.sum() == pytest.approx(budget, rel=1e-9)
        assert np.all(p >= 0)
        assert np.array_equal(active, p > 0)
        assert np.allclose(p[active] + 1 / g[active], mu, rtol=1e-9)
        assert np.all(1 / g[~active] >= mu * (1 - 1e-12))
        assert active[np.argmax(g)]

    @given(gains, st.floats(1e-2, 1e2))
    def test_scale_identity(self, g, c):
        p, active, mu = water_fill(g, 1.0)
        p2, active2, mu2 = water_fill(g * c, 1.0 / c)
        assert np.array_equal(active, active2)
        assert mu2 == pytest.approx(mu / c, rel=1e-9)

    def test_batched_equals_looped(self, rng):
        g = rng.uniform(0.01, 5.0, size=(20, 12))
        p, active, mu = water_fill(g, 1.0)
        for t in range(20):
            pt, at, mt = water_fill(g[t], 1.0)
            assert np.array_equal(pt, p[t]) and mt == mu[t]


@pytest.mark.parametrize("system,policy", [(s, p) for s, ps in POLICIES.items() for p in ps])
@given(seed=st.integers(0, 2**32 - 1), half=st.integers(1, 16))
def test_budget_and_pair_invariants(system, policy, seed, half):
    K = 2 * half
    cfg = SystemConfig(M=64, K=K)
    beta = np.random.default_rng(seed).uniform(0.01, 10.0, size=K)
    drop = _drop(beta)
    cl = partition_and_pair(drop)
    res = allocate(system, policy, cfg, drop, cl)
    assert np.all(res.power >= 0)
    assert res.power[res.active].sum() == pytest.approx(1.0, rel=1e-9)
    if policy in (WF, DWF):
        assert np.array_equal(res.active, res.power > 0)
    else:
        assert res.active.all()
    if system == NOMA:
        assert np.array_equal(res.active[cl.center_ids], res.active[cl.edge_ids])


def test_dispatch_rejects_mismatch():
    cfg = SystemConfig(M=8, K=2)
    with pytest.raises(ValueError):
        allocate(MMIMO, DWF, cfg, _drop([2.0, 1.0]))
    with pytest.raises(ValueError):
        allocate(NOMA, WF, cfg, _drop([2.0, 1.0]))


def test_noma_rejects_odd_population():
    with pytest.raises(ConfigError):
        allocate(NOMA, EPA, SystemConfig(M=8, K=2), _drop([3.0, 2.0, 1.0]))


class TestSic:
    def _alloc(self, cl, p_c, p_e, K):
        power = np.zeros(K)
        power[cl.center_ids] = p_c
        power[cl.edge_ids] = p_e
        return AllocationResult(power, power > 0, EPA, NOMA)

    def test_zero_edge_power(self):
        cl = _clusters(1.0, 0.1)
        cfg = SystemConfig(M=8, K=2)
        margin, ok = sic_feasibility(cl, self._alloc(cl, 1.0, 0.0, 2), cfg)
        assert margin[0] == 0.0 and ok[0]

    def test_edge_reference_margin(self):
        # M=64, K=64 gives M_bar = 33; only one cluster is populated
        cl = _clusters(1.0, 0.1)
        cfg = SystemConfig(M=64, K=64)
        alloc = self._alloc(cl, 0.5, 0.5, 2)
        margin, ok = sic_feasibility(_FakeK(cl, 64), alloc, cfg, mode="edge-reference")
        expected = 16.5 / 17.5 - 0.05 / 1.05
        assert margin[0] == pytest.approx(expected, rel=1e-12)
        assert margin[0] == pytest.approx(0.895, abs=5e-4) and ok[0]

    def test_literal_mode_margin(self):
        cl = _clusters(1.0, 0.1)
        cfg = SystemConfig(M=64, K=64)
        margin, ok = sic_feasibility(_FakeK(cl, 64), self._alloc(cl, 0.5, 0.5, 2), cfg,
                                     mode="paper-eq11")
        assert margin[0] == pytest.approx(16.5 / 17.5 - 16.5, rel=1e-12)
        assert margin[0] == pytest.approx(-15.56, abs=5e-3) and not ok[0]

    def test_rejects_mimo(self):
        cl = _clusters(1.0, 0.1)
        cfg = SystemConfig(M=8, K=2)
        with pytest.raises(ValueError):
            sic_feasibility(cl, epa_mimo(cfg), cfg)


class _FakeK:
    """A one-cluster clustering that reports a larger device population."""

    def __init__(self, cl, K):
        self.center_ids, self.edge_ids = cl.center_ids, cl.edge_ids
        self.beta_center, self.beta_edge = cl.beta_center, cl.beta_edge
        self.K = K
