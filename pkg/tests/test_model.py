import json

import numpy as np
import pytest

from isac_mi.errors import ConfigError
from isac_mi.model import (
    PowerBudget,
    RatePoint,
    RateRegion,
    SlopeEstimate,
    SystemDims,
    TargetResponseStats,
    default_scenario,
    exp_corr_matrix,
    scenario_from_dict,
    scenario_to_dict,
)


class TestSystemDims:
    def test_valid(self):
        dims = SystemDims(4, 4, 2, 16)
        assert dims.l_frame >= dims.m_tx

    def test_frame_shorter_than_array_rejected(self):
        with pytest.raises(ConfigError):
            SystemDims(m_tx=4, n_rx=4, k_users=2, l_frame=3)

    @pytest.mark.parametrize("bad", [0, -1])
    def test_nonpositive_rejected(self, bad):
        with pytest.raises(ConfigError):
            SystemDims(bad, 4, 2, 16)


class TestPowerBudget:
    def test_negative_power_rejected(self):
        with pytest.raises(ConfigError):
            PowerBudget(p_total=-1.0)

    def test_zero_noise_rejected(self):
        with pytest.raises(ConfigError):
            PowerBudget(p_total=1.0, sigma2_c=0.0)


class TestExpCorrMatrix:
    def test_zero_coeff_is_identity(self):
        stats = exp_corr_matrix(2, 0.0)
        assert np.allclose(stats.r_corr, np.eye(2))

    def test_scalar_normalizes_to_one(self):
        stats = exp_corr_matrix(1, 0.9)
        assert np.allclose(stats.r_corr, [[1.0]])

    def test_m3_psd_and_trace(self):
        stats = exp_corr_matrix(3, 0.5)
        eigs = np.linalg.eigvalsh(stats.r_corr)
        assert eigs.min() >= 0.0
        assert abs(np.trace(stats.r_corr).real - 3.0) < 1e-12

    def test_coeff_out_of_range(self):
        with pytest.raises(ConfigError):
            exp_corr_matrix(3, 1.0)
        with pytest.raises(ConfigError):
            exp_corr_matrix(3, -0.1)


class TestTargetResponseStats:
    def test_non_hermitian_rejected(self):
        mat = np.array([[1.0, 0.5], [0.1, 1.0]])
        with pytest.raises(ConfigError):
            TargetResponseStats(mat)

    def test_wrong_trace_rejected(self):
        with pytest.raises(ConfigError):
            TargetResponseStats(2.0 * np.eye(3))

    def test_indefinite_rejected(self):
        mat = np.array([[2.0, 1.5], [1.5, 0.0]])
        mat *= 2.0 / np.trace(mat)
        with pytest.raises(ConfigError):
            TargetResponseStats(mat)


class TestRatePoint:
    def test_tiny_negative_clamped(self):
        pt = RatePoint(-1e-12, 0.5)
        assert pt.cr == 0.0

    def test_large_negative_rejected(self):
        with pytest.raises(ConfigError):
            RatePoint(-1e-3, 0.5)

    def test_dominates(self):
        assert RatePoint(1.0, 1.0).dominates(RatePoint(0.5, 0.5))
        assert not RatePoint(1.0, 1.0).dominates(RatePoint(1.0, 1.0))
        assert not RatePoint(2.0, 0.0).dominates(RatePoint(0.0, 2.0))


class TestRateRegion:
    def test_ordering_enforced(self):
        with pytest.raises(ConfigError):
            RateRegion(frontier=(RatePoint(1.0, 1.0), RatePoint(2.0, 1.5)))

    def test_antichain_property(self):
        region = RateRegion(frontier=(RatePoint(0.0, 2.0), RatePoint(1.0, 1.0), RatePoint(2.0, 0.0)))
        pts = region.frontier
        for a in pts:
            assert not any(b.dominates(a) for b in pts)


class TestSlopeEstimate:
    def test_abs_error_derived(self):
        est = SlopeEstimate(numeric=1.98, analytic=2.0)
        assert est.abs_error == pytest.approx(0.02)


class TestDefaultScenario:
    def test_sa_forces_single_antenna(self):
        sc = default_scenario("downlink-sa")
        assert sc.dims.m_tx == 1 and sc.dims.k_users == 2

    def test_ma_defaults(self):
        sc = default_scenario("downlink-ma")
        assert sc.dims.m_tx == 4 and sc.dims.k_users == 2
        assert sc.rho_grid == sc.alpha_grid == sc.kappa_grid == 41
        assert sc.mc_trials == 500 and sc.seed == 20240001
        assert len(sc.snr_sweep) == 21
        assert sc.snr_sweep[0] == pytest.approx(0.1)
        assert sc.snr_sweep[-1] == pytest.approx(1000.0)

    def test_uplink_reference_power(self):
        sc = default_scenario("uplink")
        assert sc.power.p_total == pytest.approx(10.0)

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            default_scenario("sidelink")


class TestScenarioDict:
    def test_round_trip(self):
        sc = default_scenario("uplink")
        data = scenario_to_dict(sc)
        again = scenario_from_dict(json.loads(json.dumps(data)))
        assert again == sc

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            scenario_from_dict({"kind": "uplink", "bandwidth": 20})

    def test_partial_overlay_uses_defaults(self):
        sc = scenario_from_dict({"kind": "downlink-ma", "mc_trials": 7})
        assert sc.mc_trials == 7
        assert sc.dims.m_tx == 4

    def test_non_increasing_sweep_rejected(self):
        with pytest.raises(ConfigError):
            scenario_from_dict({"kind": "uplink", "snr_sweep": [0, 0, 10]})
