import numpy as np
import pytest

from fdmimome._rng import substream
from fdmimome.channel import (
    NetworkConfig,
    PowerAllocation,
    sample_channels,
    worst_case_eve_position,
)
from fdmimome.sca import ScaSettings
from fdmimome.tolerance import (
    fixed_rule_margin,
    linear_scan,
    max_tolerable_ne_fixed,
    max_tolerable_ne_instantaneous,
    max_tolerable_ne_opt,
)


def _cfg(n_a=8, n_b=4, alpha=4.0, cap=1000.0):
    return NetworkConfig(n_a, n_b, 1, alpha=alpha, p_a_max=cap, p_b_max=cap)


class TestFixedMetric:
    def test_zero_power(self):
        cfg = _cfg(cap=0.0)
        res = max_tolerable_ne_fixed(cfg, worst_case_eve_position(cfg))
        assert res.value == 0

    def test_binary_equals_linear_scan(self):
        for n_a, alpha in ((4, 4.0), (8, 4.0), (8, 2.0), (16, 4.0)):
            cfg = _cfg(n_a=n_a, n_b=n_a // 2, alpha=alpha)
            pos = worst_case_eve_position(cfg)
            res = max_tolerable_ne_fixed(cfg, pos)
            scan = linear_scan(fixed_rule_margin(cfg, pos), cap=max(4 * res.value, 64))
            assert res.value == scan

    def test_certificate(self):
        cfg = _cfg()
        res = max_tolerable_ne_fixed(cfg, worst_case_eve_position(cfg))
        assert res.value >= 1
        assert res.certificate["margin_at_value"] > 0
        assert res.certificate["margin_above"] <= 0

    def test_nondecreasing_in_n_a(self):
        pos_values = []
        for n_a in (4, 8, 16):
            cfg = _cfg(n_a=n_a, n_b=n_a // 2)
            res = max_tolerable_ne_fixed(cfg, worst_case_eve_position(cfg))
            pos_values.append(res.value)
        assert pos_values == sorted(pos_values)


class TestInstantaneousMetric:
    def test_zero_signal(self):
        cfg = _cfg()
        ch = sample_channels(cfg, cfg.n_b, 0)
        alloc = PowerAllocation(r=cfg.n_b, q_r=np.zeros(cfg.n_b), p_n=0.0, p_b=0.0)
        res = max_tolerable_ne_instantaneous(ch, alloc, cfg, worst_case_eve_position(cfg))
        assert res.value == 0

    def test_certificate_and_agreement_with_fixed(self):
        # alpha = 2 puts the crossing above 8 antennas where concentration
        # makes exact and asymptotic agree within 20%
        cfg = _cfg(alpha=2.0)
        pos = worst_case_eve_position(cfg)
        fixed = max_tolerable_ne_fixed(cfg, pos)
        assert fixed.value > 8
        p_a = cfg.p_a_max
        alloc = PowerAllocation(r=4, q_r=np.full(4, p_a / 8), p_n=p_a / 2, p_b=p_a)
        values = []
        for s in range(5):
            ch = sample_channels(cfg, 4, substream(50, s))
            res = max_tolerable_ne_instantaneous(ch, alloc, cfg, pos, eve_draws=15, seed=s)
            values.append(res.value)
            assert res.certificate["margin_at_value"] > 0
            assert res.certificate["margin_above"] <= 0
        med = float(np.median(values))
        assert abs(med - fixed.value) / fixed.value <= 0.20


class TestOptimizedMetric:
    def test_zero_power(self):
        cfg = _cfg(cap=0.0)
        res = max_tolerable_ne_opt(cfg, worst_case_eve_position(cfg), draws=2, seed=0)
        assert res.value == 0

    def test_dominates_fixed_small(self):
        cfg = _cfg(n_a=4, n_b=2)
        pos = worst_case_eve_position(cfg)
        fixed = max_tolerable_ne_fixed(cfg, pos)
        opt = max_tolerable_ne_opt(cfg, pos, draws=5, seed=1,
                                   settings=ScaSettings(max_iterations=300))
        assert opt.value >= fixed.value
        assert opt.certificate["margin_at_value"] > 0

    def test_single_draw(self):
        cfg = _cfg(n_a=4, n_b=2)
        pos = worst_case_eve_position(cfg)
        res = max_tolerable_ne_opt(cfg, pos, draws=1, seed=3)
        assert res.value >= 0
        assert res.trials == 1
