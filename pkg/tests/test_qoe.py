import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uavcache import qoe
from uavcache.config import ScenarioConfig
from uavcache.channel import uav_user_pathloss_db, uav_user_snr


def cfg_with_bound_001() -> ScenarioConfig:
    """Scenario whose delay lower bound is exactly L/v_F = 0.01 s."""
    cfg = dataclasses.replace(ScenarioConfig(), content_size_bits=1e6,
                              fronthaul_rate_bps=1e8, uav_bandwidth_hz=1e6)
    assert qoe.delay_lower_bound_s(cfg) == pytest.approx(0.01, rel=1e-12)
    return cfg


class TestDelay:
    def test_cache_link_ratio(self):
        path = qoe.DeliveryPath(kind=qoe.LINK_UAV_CACHE, access_bits_per_slot=5e6)
        assert qoe.delay_s(path, 1e6, 1.0) == pytest.approx(0.2)

    def test_infinite_fronthaul_matches_cache_link(self):
        via_cache = qoe.DeliveryPath(kind=qoe.LINK_UAV_CACHE, access_bits_per_slot=5e6)
        via_fh = qoe.DeliveryPath(kind=qoe.LINK_UAV_FRONTHAUL, access_bits_per_slot=5e6,
                                  fronthaul_bits_per_slot=math.inf)
        assert qoe.delay_s(via_fh, 1e6, 1.0) == qoe.delay_s(via_cache, 1e6, 1.0)

    def test_terrestrial_and_aerial_symmetric(self):
        a = qoe.DeliveryPath(kind=qoe.LINK_RRH, access_bits_per_slot=4e6,
                             fronthaul_bits_per_slot=2e6)
        b = qoe.DeliveryPath(kind=qoe.LINK_UAV_FRONTHAUL, access_bits_per_slot=4e6,
                             fronthaul_bits_per_slot=2e6)
        assert qoe.delay_s(a, 1e6, 1.0) == qoe.delay_s(b, 1e6, 1.0)

    def test_zero_rate_rejected(self):
        path = qoe.DeliveryPath(kind=qoe.LINK_UAV_CACHE, access_bits_per_slot=0.0)
        with pytest.raises(qoe.InfeasibleDelay):
            qoe.delay_s(path, 1e6, 1.0)

    def test_cache_path_refuses_fronthaul_component(self):
        with pytest.raises(ValueError):
            qoe.DeliveryPath(kind=qoe.LINK_UAV_CACHE, access_bits_per_slot=1.0,
                             fronthaul_bits_per_slot=1.0)


class TestDelayLowerBound:
    def test_min_of_both_branches(self):
        cfg = ScenarioConfig()
        wired = cfg.content_size_bits / cfg.fronthaul_rate_bps
        access = cfg.slot_duration_s * cfg.content_size_bits / qoe.max_access_rate_bits(cfg)
        assert qoe.delay_lower_bound_s(cfg) == min(wired, access)

    def test_slow_wired_rate_selects_access_branch(self):
        cfg = dataclasses.replace(ScenarioConfig(), fronthaul_rate_bps=10.0)
        access = cfg.slot_duration_s * cfg.content_size_bits / qoe.max_access_rate_bits(cfg)
        assert qoe.delay_lower_bound_s(cfg) == pytest.approx(access, rel=1e-12)

    def test_fast_wired_rate_selects_wired_branch(self):
        cfg = dataclasses.replace(ScenarioConfig(), fronthaul_rate_bps=1e30)
        assert qoe.delay_lower_bound_s(cfg) == pytest.approx(1e6 / 1e30, rel=1e-12)

    def test_access_branch_hand_value(self):
        cfg = ScenarioConfig()
        best_pl = (78.017 + 10.0 * 2.0 * math.log10(100.0) - 4.0 * 5.3)
        snr = 20.0 / (10.0 ** (best_pl / 10.0) * 10.0 ** (-12.5))
        expected = 1e6 / (1e9 * math.log2(1.0 + snr))
        assert qoe.delay_lower_bound_s(cfg) == pytest.approx(expected, rel=1e-4)


class TestDelayScore:
    def test_bound_scores_one(self):
        cfg = cfg_with_bound_001()
        assert qoe.delay_score(0.01, cfg) == pytest.approx(1.0)

    def test_full_slot_scores_zero(self):
        cfg = cfg_with_bound_001()
        assert qoe.delay_score(1.0, cfg) == pytest.approx(0.0)

    def test_midpoint_scores_half(self):
        cfg = cfg_with_bound_001()
        assert qoe.delay_score((1.0 + 0.01) / 2.0, cfg) == pytest.approx(0.5)

    def test_late_delivery_scores_zero(self):
        cfg = cfg_with_bound_001()
        assert qoe.delay_score(1.5, cfg) == 0.0


class TestDeviceScore:
    def test_boundary_inclusive(self):
        assert qoe.device_score(5e6, 5e6) == 1

    def test_zero_rate(self):
        assert qoe.device_score(0.0, 5e6) == 0

    def test_screen_factor_scales_threshold(self):
        cfg = ScenarioConfig()
        assert cfg.device_rate_bps(1.0, 0) == 5e6
        assert cfg.device_rate_bps(2.0, 0) == 1e7


class TestQoeScore:
    def test_perfect(self):
        q, label = qoe.qoe_score(1.0, np.ones(10), 0.5, 0.5)
        assert q == pytest.approx(1.0)
        assert label == "Excellent"

    def test_worst(self):
        q, label = qoe.qoe_score(0.0, np.zeros(10), 0.5, 0.5)
        assert q == 0.0
        assert label == "Poor"

    def test_half_is_good(self):
        q, label = qoe.qoe_score(1.0, np.zeros(10), 0.5, 0.5)
        assert q == pytest.approx(0.5)
        assert label == "Good"

    def test_bin_edges(self):
        assert qoe.mos_label(0.85) == "Excellent"
        assert qoe.mos_label(0.7) == "Very Good"
        assert qoe.mos_label(0.3) == "Fair"


class TestRateRequirement:
    def test_cached_hand_value(self):
        cfg = cfg_with_bound_001()
        got = qoe.delay_rate_requirement_bits(True, cfg)
        assert got == pytest.approx(1e6 / 0.208, rel=1e-12)

    def test_infinite_fronthaul_matches_cached(self):
        cfg = cfg_with_bound_001()
        cached = qoe.delay_rate_requirement_bits(True, cfg)
        uncached = qoe.delay_rate_requirement_bits(False, cfg, math.inf)
        assert uncached == pytest.approx(cached, rel=1e-12)

    def test_caching_strictly_cheaper(self):
        cfg = cfg_with_bound_001()
        cached = qoe.delay_rate_requirement_bits(True, cfg)
        for fronthaul in (5e6, 2e7, 1e9):
            assert qoe.delay_rate_requirement_bits(False, cfg, fronthaul) > cached

    def test_exhausted_budget_rejected(self):
        cfg = cfg_with_bound_001()
        with pytest.raises(qoe.InfeasibleDelay):
            qoe.delay_rate_requirement_bits(False, cfg, 1e6)  # fronthaul alone takes 1 s


class TestMinPower:
    def test_reference_value(self):
        # 5 Mbit/s over 1 GHz at 100 dB loss and -95 dBm noise
        power = qoe.min_uav_power_w(100.0, 5e6, 1, 1e9, 10.0 ** (-12.5))
        assert power == pytest.approx(1.0979e-5, rel=1e-3)

    def test_zero_rate_zero_power(self):
        assert qoe.min_uav_power_w(100.0, 0.0, 1, 1e9, 1e-12) == 0.0

    def test_sharing_increases_power(self):
        one = qoe.min_uav_power_w(100.0, 5e6, 1, 1e9, 1e-12)
        two = qoe.min_uav_power_w(100.0, 5e6, 2, 1e9, 1e-12)
        assert two > one

    def test_power_rate_roundtrip(self):
        cfg = ScenarioConfig()
        uav, user = np.array([10.0, -20.0, 150.0]), np.array([60.0, 45.0])
        pl = uav_user_pathloss_db(uav, user, cfg.pathloss)
        target = 7.3e6
        power = qoe.min_uav_power_w(pl, target, 3, cfg.uav_bandwidth_hz, cfg.noise_power_w)
        snr = uav_user_snr(power, pl, cfg.noise_power_w)
        achieved = cfg.uav_bandwidth_hz / 3 * math.log2(1.0 + snr)
        assert achieved == pytest.approx(target, rel=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(rate=st.floats(1e5, 5e7), extra=st.floats(0.1, 20.0))
    def test_monotone_in_rate(self, rate, extra):
        lo = qoe.min_uav_power_w(100.0, rate, 1, 1e9, 1e-12)
        hi = qoe.min_uav_power_w(100.0, rate + extra * 1e5, 1, 1e9, 1e-12)
        assert hi > lo
