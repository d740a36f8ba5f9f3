"""Component statistics, variance estimators and the combined test."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from binsurv import (
    ConfigError,
    DegenerateVarianceError,
    NoncentralitySpec,
    StepFunction,
    StudyConfig,
    TrialDataset,
    WeightSpec,
    build_q,
    k_hat,
    km_estimate,
    l_statistic,
    noncentrality,
    sigma_b_hat,
    sigma_bs_hat,
    sigma_s_hat,
    u_binary,
    u_survival,
)
from conftest import random_dataset
from oracles import riemann_tail, riemann_u_survival

ONE = StepFunction(np.array([]), np.array([]), initial_value=1.0)


def two_arm(time0, status0, binary0, time1, status1, binary1):
    return TrialDataset(
        list(time0) + list(time1),
        list(status0) + list(status1),
        list(binary0) + list(binary1),
        [0] * len(time0) + [1] * len(time1),
    )


class TestUBinary:
    def test_hand_value(self):
        # sqrt(100*100/200) * (0.3 - 0.2) = sqrt(50) * 0.1
        ds = TrialDataset(
            np.ones(200), np.ones(200),
            np.r_[np.repeat([1.0, 0.0], [20, 80]), np.repeat([1.0, 0.0], [30, 70])],
            np.repeat([0.0, 1.0], 100))
        u_b, p0, p1 = u_binary(ds, 0.5)
        assert (p0, p1) == (0.2, 0.3)
        assert_allclose(u_b, np.sqrt(50) * 0.1)

    def test_equal_proportions(self, tiny_dataset):
        ds = two_arm([1, 2], [1, 1], [1, 0], [3, 4], [1, 1], [0, 1])
        assert u_binary(ds, 1.0)[0] == 0.0

    def test_antisymmetry(self):
        rng = np.random.default_rng(1)
        ds = random_dataset(rng)
        flipped = TrialDataset(ds.time, ds.status, ds.binary, 1 - ds.group)
        assert_allclose(u_binary(ds, 1.0)[0], -u_binary(flipped, 1.0)[0])


class TestUSurvival:
    def test_identical_samples(self):
        ds = two_arm([1, 2, 3], [1, 0, 1], [1, 1, 0], [1, 2, 3], [1, 0, 1], [1, 1, 0])
        assert u_survival(ds, 0.0, 3.0, ONE) == 0.0

    def test_constant_difference(self):
        # group 0: 5/50 events at 0.25 -> S0 = 0.9 on [0.5, 1.5]; group 1 flat 1
        ds = two_arm(
            [0.25] * 5 + [2.0] * 45, [1] * 5 + [0] * 45, [1] * 50,
            [2.0] * 50, [0] * 50, [1] * 50)
        # sqrt(50*50/100) * 0.1 * (1.5 - 0.5) = 0.5
        assert_allclose(u_survival(ds, 0.5, 1.5, ONE), 0.5)

    def test_matches_riemann_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            ds = random_dataset(rng, n_per_group=12)
            q = build_q(ds, WeightSpec(eta=1.0, gamma=1.0))
            got = u_survival(ds, 0.1, 2.0, q)
            want = riemann_u_survival(ds, 0.1, 2.0, q, total_points=20000)
            assert_allclose(got, want, atol=1e-10)

    def test_bad_window(self, tiny_dataset):
        with pytest.raises(ConfigError):
            u_survival(tiny_dataset, 1.0, 1.0, ONE)


class TestKHat:
    def test_zero_at_tau_star(self):
        s = km_estimate([1.0, 2.0], [1, 1])
        assert k_hat(ONE, s, 3.0, 3.0) == 0.0
        assert k_hat(ONE, s, 4.0, 3.0) == 0.0

    def test_flat_case(self):
        flat = StepFunction(np.array([]), np.array([]), initial_value=1.0)
        assert_allclose(k_hat(ONE, flat, 1.0, 4.0), 3.0)

    def test_single_jump_hand_sum(self):
        s = StepFunction([2.0], [0.5])
        # (2-1)*1 + (3-2)*0.5
        assert_allclose(k_hat(ONE, s, 1.0, 3.0), 1.5)

    def test_matches_riemann_oracle(self):
        rng = np.random.default_rng(31)
        ds = random_dataset(rng, n_per_group=10)
        s = km_estimate(ds.time, ds.status)
        q = build_q(ds, WeightSpec(rho=1.0))
        for t in (0.0, 0.4, 1.3):
            assert_allclose(k_hat(q, s, t, 2.0),
                            riemann_tail(q, s, t, 2.0, total_points=20000),
                            atol=1e-10)


class TestSigmaB:
    def test_pooled_hand_value(self):
        ds = TrialDataset(np.ones(8), np.ones(8),
                          [1, 0, 0, 0, 1, 0, 0, 0], np.repeat([0, 1], 4))
        assert_allclose(sigma_b_hat(ds, 0.5, "pooled"), 0.25 * 0.75)

    def test_balanced_modes_agree(self):
        ds = TrialDataset(np.ones(40), np.ones(40),
                          np.tile([1, 0, 0, 0], 10), np.repeat([0, 1], 20))
        assert_allclose(sigma_b_hat(ds, 1.0, "pooled"),
                        sigma_b_hat(ds, 1.0, "unpooled"))

    def test_degenerate(self):
        ds = TrialDataset(np.ones(4), np.ones(4), np.zeros(4), [0, 0, 1, 1])
        with pytest.raises(DegenerateVarianceError):
            sigma_b_hat(ds, 1.0)


class TestSigmaS:
    def test_no_events_in_window_is_zero(self):
        ds = two_arm([1, 2], [1, 1], [1, 0], [1.5, 2.5], [1, 1], [1, 0])
        assert sigma_s_hat(ds, 3.0, 4.0, ONE) == 0.0

    def test_uncensored_hand_sum(self):
        # pooled events at 1,2,3,4; S = 3/4, 1/2, 1/4, 0; q = 1; tau = 4
        # K(1)=1.5, K(2)=0.75, K(3)=0.25, K(4)=0 (term skipped: S(4)=0)
        # sum: 2.25/0.75*0.25 + 0.5625/0.375*0.25 + 0.0625/0.125*0.25 = 1.25
        ds = two_arm([1, 3], [1, 1], [1, 0], [2, 4], [1, 1], [1, 0])
        assert_allclose(sigma_s_hat(ds, 0.0, 4.0, ONE, "pooled"), 1.25)

    def test_uncensored_hand_sum_unpooled(self):
        # group 0: events 1,3 -> K0(1)=1, term 1.0; group 1: events 2,4 -> K1(2)=1
        # each weighted by 1 - 2/4 = 0.5
        ds = two_arm([1, 3], [1, 1], [1, 0], [2, 4], [1, 1], [1, 0])
        assert_allclose(sigma_s_hat(ds, 0.0, 4.0, ONE, "unpooled"), 1.0)

    def test_positive_on_random_data(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            ds = random_dataset(rng)
            # keep tau inside both groups' support so assumption (i) holds
            tau = 0.8 * min(ds.time[ds.group == 0].max(), ds.time[ds.group == 1].max())
            q = build_q(ds, WeightSpec(gamma=1.0))
            for mode in ("pooled", "unpooled"):
                assert sigma_s_hat(ds, 0.0, tau, q, mode) > 0


class TestSigmaBs:
    def test_no_events_anywhere_is_zero(self):
        ds = two_arm([2, 3], [0, 0], [1, 0], [2.5, 3.5], [0, 0], [1, 0])
        cfg = StudyConfig(tau0=0.0, tau_b=0.5, tau=1.0)
        assert sigma_bs_hat(ds, cfg, ONE) == 0.0

    def test_survival_window_after_binary(self):
        # tau_b <= tau0: only the late-window part contributes, no hazards needed
        rng = np.random.default_rng(12)
        ds = random_dataset(rng)
        cfg = StudyConfig(tau0=0.5, tau_b=0.3, tau=1.5)
        val = sigma_bs_hat(ds, cfg, ONE)
        assert np.isfinite(val)

    def test_modes_run(self):
        rng = np.random.default_rng(13)
        ds = random_dataset(rng, n_per_group=40)
        cfg = StudyConfig(tau0=0.0, tau_b=0.5, tau=1.5)
        q = build_q(ds, WeightSpec(eta=1.0, gamma=1.0))
        for mode in ("pooled", "unpooled"):
            assert np.isfinite(sigma_bs_hat(ds, cfg, q, mode=mode))


class TestLStatistic:
    def test_identical_groups_give_zero(self):
        t = [0.3, 0.8, 1.4, 2.2, 0.9, 1.7]
        s = [1, 0, 1, 1, 1, 0]
        b = [1, 0, 1, 0, 1, 0]
        ds = TrialDataset(t + t, s + s, b + b, [0] * 6 + [1] * 6)
        res = l_statistic(ds, StudyConfig(tau0=0.0, tau_b=0.5, tau=1.5))
        assert res.u_b == 0.0
        assert res.u_s == 0.0
        assert res.z == 0.0
        assert_allclose(res.p_value, 0.5)

    def test_antisymmetry_under_group_swap(self):
        rng = np.random.default_rng(3)
        ds = random_dataset(rng, n_per_group=35)
        flipped = TrialDataset(ds.time, ds.status, ds.binary, 1 - ds.group)
        cfg = StudyConfig(tau0=0.0, tau_b=0.5, tau=1.2, eta=1.0, gamma=1.0)
        a = l_statistic(ds, cfg)
        b = l_statistic(flipped, cfg)
        assert_allclose(a.u_b, -b.u_b)
        assert_allclose(a.u_s, -b.u_s, atol=1e-14)
        assert_allclose(a.l_stat, -b.l_stat, rtol=1e-12)
        assert_allclose(a.var_l, b.var_l, rtol=1e-12)

    def test_time_scale_invariance(self):
        rng = np.random.default_rng(14)
        ds = random_dataset(rng, n_per_group=35)
        scaled = TrialDataset(2.0 * ds.time, ds.status, ds.binary, ds.group)
        cfg = StudyConfig(tau0=0.0, tau_b=0.5, tau=1.2, eta=1.0, gamma=1.0)
        cfg2 = StudyConfig(tau0=0.0, tau_b=1.0, tau=2.4, eta=1.0, gamma=1.0)
        a = l_statistic(ds, cfg)
        b = l_statistic(scaled, cfg2)
        assert_allclose(b.u_b, a.u_b)
        assert_allclose(b.u_s, 2.0 * a.u_s, rtol=1e-12)
        assert_allclose(b.sigma_s_hat, 2.0 * a.sigma_s_hat, rtol=1e-12)
        assert_allclose(b.rho_hat, a.rho_hat, rtol=1e-10)
        assert_allclose(b.z, a.z, rtol=1e-10)

    def test_small_omega_s_approaches_binary_test(self):
        rng = np.random.default_rng(15)
        ds = random_dataset(rng, n_per_group=40)
        cfg = StudyConfig(tau0=0.0, tau_b=0.5, tau=1.2,
                          omega_b=1 - 1e-4, omega_s=1e-4)
        res = l_statistic(ds, cfg)
        z_b = res.u_b / res.sigma_b_hat
        assert abs(res.z - z_b) < 1e-3

    def test_global_test_configuration_identity(self):
        # tau0 = 0, tau_b = tau, equal weights: the statistic is the plain
        # equally weighted sum of the standardized components
        rng = np.random.default_rng(16)
        ds = random_dataset(rng, n_per_group=40)
        cfg = StudyConfig(tau0=0.0, tau_b=1.2, tau=1.2)
        res = l_statistic(ds, cfg)
        expected = 0.5 * res.u_b / res.sigma_b_hat + 0.5 * res.u_s / res.sigma_s_hat
        assert_allclose(res.l_stat, expected)

    def test_result_invariants(self):
        rng = np.random.default_rng(17)
        cfg = StudyConfig(tau0=0.0, tau_b=0.5, tau=1.2, eta=1.0, gamma=1.0,
                          omega_b=0.3, omega_s=0.7)
        for _ in range(5):
            ds = random_dataset(rng, n_per_group=30)
            res = l_statistic(ds, cfg)
            assert -1.0 <= res.rho_hat <= 1.0
            assert res.var_l == (cfg.omega_b ** 2 + cfg.omega_s ** 2
                                 + 2 * cfg.omega_b * cfg.omega_s * res.rho_hat)
            assert res.z == res.l_stat / np.sqrt(res.var_l)
            assert 0.0 < res.p_value < 1.0
            assert res.sigma_b_hat > 0 and res.sigma_s_hat > 0

    def test_better_arm_gives_small_p(self):
        rng = np.random.default_rng(18)
        n = 120
        t0 = rng.exponential(0.8, n)
        t1 = rng.exponential(1.6, n)
        b0 = (rng.random(n) < 0.2).astype(float)
        b1 = (rng.random(n) < 0.5).astype(float)
        ds = TrialDataset(np.r_[t0, t1], np.ones(2 * n), np.r_[b0, b1],
                          np.repeat([0, 1], n))
        res = l_statistic(ds, StudyConfig(tau0=0.0, tau_b=0.5, tau=1.5))
        assert res.z > 2.0
        assert res.p_value < 0.05

    def test_custom_q_override(self):
        rng = np.random.default_rng(19)
        ds = random_dataset(rng, n_per_group=25)
        cfg = StudyConfig(tau0=0.0, tau_b=0.5, tau=1.2)
        res_one = l_statistic(ds, cfg, q=ONE)
        res_default = l_statistic(ds, cfg)
        assert_allclose(res_one.u_s, res_default.u_s)  # default weights are all-zero exponents

    def test_weight_spec_override(self):
        rng = np.random.default_rng(20)
        ds = random_dataset(rng, n_per_group=25)
        cfg = StudyConfig(tau0=0.0, tau_b=0.5, tau=1.2)
        res = l_statistic(ds, cfg, weights=WeightSpec(piecewise_a=0.2))
        assert np.isfinite(res.z)


class TestNoncentrality:
    def test_zero_drift(self):
        cfg = StudyConfig(tau0=0.0, tau_b=0.5, tau=1.0)
        spec = NoncentralitySpec(g=0.0, drift=lambda t: 0.0 * t, q=lambda t: np.ones_like(t))
        assert noncentrality(spec, cfg) == 0.0

    def test_constant_drift(self):
        cfg = StudyConfig(tau0=0.0, tau_b=0.5, tau=1.0, omega_b=0.4, omega_s=0.6)
        spec = NoncentralitySpec(g=2.0, drift=lambda t: np.full_like(t, 3.0),
                                 q=lambda t: np.ones_like(t))
        assert_allclose(noncentrality(spec, cfg), 0.4 * 2.0 + 0.6 * 3.0)

    def test_linear_q(self):
        cfg = StudyConfig(tau0=0.0, tau_b=0.5, tau=1.0)
        spec = NoncentralitySpec(g=1.0, drift=lambda t: np.ones_like(t), q=lambda t: t)
        assert_allclose(noncentrality(spec, cfg), 0.5 * 1.0 + 0.5 * 0.5)

    def test_negative_drift_rejected(self):
        cfg = StudyConfig(tau0=0.0, tau_b=0.5, tau=1.0)
        spec = NoncentralitySpec(g=1.0, drift=lambda t: -np.ones_like(t),
                                 q=lambda t: np.ones_like(t))
        with pytest.raises(ConfigError):
            noncentrality(spec, cfg)

    def test_negative_g_rejected(self):
        with pytest.raises(ConfigError):
            NoncentralitySpec(g=-1.0, drift=lambda t: t, q=lambda t: t)
