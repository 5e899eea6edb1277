import numpy as np
import pytest

from conftest import rand_complex, small_scenario
from isac_mi import mc
from isac_mi.alloc import sr_optimal_covariance
from isac_mi.errors import ConfigError
from isac_mi.mi_core import White, comm_mi, mmse_sic_user_rates, sensing_interference_power, sensing_mi
from isac_mi.model import RatePoint
from isac_mi.region import contains
from isac_mi.uplink import (
    SicOrder,
    time_share,
    uplink_fdsac_point,
    uplink_isac_region,
    uplink_region_rows,
    uplink_sic_point,
)


def make_instance(rng, scenario, p_sense=None):
    dims = scenario.dims
    h = rand_complex(rng, (dims.n_rx, dims.k_users))
    p = rng.uniform(0.5, 3.0, dims.k_users)
    budget = scenario.power.p_total if p_sense is None else p_sense
    q = sr_optimal_covariance(scenario.target().r_corr, budget, scenario.power.sigma2_s, dims.l_frame)
    return h, p, q


class TestUplinkSicPoint:
    def test_no_comm_signal_sensing_clean(self, rng):
        sc = small_scenario("uplink")
        h, _, q = make_instance(rng, sc)
        pt = uplink_sic_point(h, np.zeros(sc.dims.k_users), q, SicOrder.SENSING_CENTRIC, sc)
        assert pt.cr == 0.0
        clean = sensing_mi(sc.target().r_corr, q, sc.dims.l_frame, sc.dims.n_rx,
                           White(sc.power.sigma2_s)) / sc.dims.l_frame
        assert pt.sr == pytest.approx(clean, abs=1e-12)

    def test_no_probe_comm_clean(self, rng):
        sc = small_scenario("uplink")
        h, p, _ = make_instance(rng, sc)
        q0 = np.zeros((sc.dims.m_tx, sc.dims.m_tx))
        pt = uplink_sic_point(h, p, q0, SicOrder.COMM_CENTRIC, sc)
        assert pt.sr == 0.0
        assert pt.cr == pytest.approx(comm_mi(h, p, White(sc.power.sigma2_c)), abs=1e-12)

    def test_corner_ordering(self, rng):
        sc = small_scenario("uplink")
        for _ in range(10):
            h, p, q = make_instance(rng, sc)
            pt_s = uplink_sic_point(h, p, q, SicOrder.SENSING_CENTRIC, sc)
            pt_c = uplink_sic_point(h, p, q, SicOrder.COMM_CENTRIC, sc)
            assert pt_c.cr >= pt_s.cr
            assert pt_s.sr >= pt_c.sr

    def test_perfect_cancellation_invariance(self, rng):
        sc = small_scenario("uplink")
        for _ in range(20):
            h, p, q = make_instance(rng, sc)
            # Sensing-centric SR must not depend on the user powers.
            sr_a = uplink_sic_point(h, p, q, SicOrder.SENSING_CENTRIC, sc).sr
            sr_b = uplink_sic_point(h, 5.0 * p, q, SicOrder.SENSING_CENTRIC, sc).sr
            assert abs(sr_a - sr_b) <= 1e-12
            # Comm-centric CR must not depend on the probing covariance.
            cr_a = uplink_sic_point(h, p, q, SicOrder.COMM_CENTRIC, sc).cr
            cr_b = uplink_sic_point(h, p, 3.0 * q, SicOrder.COMM_CENTRIC, sc).cr
            assert abs(cr_a - cr_b) <= 1e-12

    def test_sc_noise_model_is_echo_power(self, rng):
        sc = small_scenario("uplink")
        h, p, q = make_instance(rng, sc)
        pt = uplink_sic_point(h, p, q, SicOrder.SENSING_CENTRIC, sc)
        echo = sensing_interference_power(sc.target().r_corr, q)
        expect = comm_mi(h, p, White(sc.power.sigma2_c + echo))
        assert pt.cr == pytest.approx(expect, abs=1e-12)

    def test_mmse_sic_consistency(self, rng):
        sc = small_scenario("uplink")
        for _ in range(10):
            h, p, q = make_instance(rng, sc)
            echo = sensing_interference_power(sc.target().r_corr, q)
            noise = White(sc.power.sigma2_c + echo)
            cr = uplink_sic_point(h, p, q, SicOrder.SENSING_CENTRIC, sc).cr
            rates = mmse_sic_user_rates(h, p, noise, list(range(sc.dims.k_users)))
            assert rates.sum() == pytest.approx(cr, abs=1e-9)


class TestTimeShare:
    def test_endpoints(self):
        p_s, p_c = RatePoint(1.0, 3.0), RatePoint(3.0, 1.0)
        assert time_share(p_s, p_c, 1.0) == p_s
        assert time_share(p_s, p_c, 0.0) == p_c

    def test_midpoint(self):
        got = time_share(RatePoint(1.0, 3.0), RatePoint(3.0, 1.0), 0.5)
        assert (got.cr, got.sr) == (2.0, 2.0)

    def test_out_of_range(self):
        with pytest.raises(ConfigError):
            time_share(RatePoint(1, 1), RatePoint(2, 2), 1.5)


class TestUplinkRegion:
    def test_segment_affine_and_corners_present(self):
        sc = small_scenario("uplink", trials=40)
        region, rows = uplink_region_rows(sc, "isac")
        labels = [row.sweep_param for row in rows]
        assert any("corner=Ps" in lab for lab in labels)
        assert any("corner=Pc" in lab for lab in labels)
        p_s = next(row.point for row in rows if "corner=Ps" in row.sweep_param)
        p_c = next(row.point for row in rows if "corner=Pc" in row.sweep_param)
        for row in rows:
            frac = float(row.sweep_param.split(";")[0].split("=")[1])
            expect = time_share(p_s, p_c, frac)
            assert abs(row.point.cr - expect.cr) <= 1e-12
            assert abs(row.point.sr - expect.sr) <= 1e-12
        # no swept point dominates another (the segment is a frontier)
        for a in region.frontier:
            assert not any(b.dominates(a) for b in region.frontier)

    def test_fdsac_contained(self):
        sc = small_scenario("uplink", trials=40)
        isac = uplink_isac_region(sc)
        fdsac, _ = uplink_region_rows(sc, "fdsac")
        assert contains(isac, fdsac, tol=1e-9)


class TestUplinkFdsac:
    def test_band_edges(self, rng):
        sc = small_scenario("uplink")
        h, _, _ = make_instance(rng, sc)
        assert uplink_fdsac_point(sc, h, 1.0).sr == 0.0
        assert uplink_fdsac_point(sc, h, 0.0).cr == 0.0

    def test_interior_matches_kernels(self, rng):
        sc = small_scenario("uplink")
        h, _, _ = make_instance(rng, sc)
        alpha = 0.4
        pt = uplink_fdsac_point(sc, h, alpha)
        p_users = np.full(sc.dims.k_users, sc.power.p_total)
        cr = alpha * comm_mi(h, p_users, White(alpha * sc.power.sigma2_c))
        band = 1.0 - alpha
        q = sr_optimal_covariance(sc.target().r_corr, sc.power.p_total,
                                  band * sc.power.sigma2_s, sc.dims.l_frame)
        sr = band * sensing_mi(sc.target().r_corr, q, sc.dims.l_frame, sc.dims.n_rx,
                               White(band * sc.power.sigma2_s)) / sc.dims.l_frame
        assert pt.cr == pytest.approx(cr, abs=1e-12)
        assert pt.sr == pytest.approx(sr, abs=1e-12)
