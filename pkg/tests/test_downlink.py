from dataclasses import replace

import numpy as np
import pytest

from conftest import rand_complex, small_scenario
from isac_mi import mc
from isac_mi.alloc import sr_optimal_covariance, sum_power_iwf
from isac_mi.downlink import (
    FdsacSplit,
    NomaAllocation,
    _ma_isac_batch,
    downlink_region,
    downlink_region_rows,
    dpc_rates,
    ma_fdsac_point,
    ma_isac_point,
    sa_fdsac_point,
    sa_isac_corner,
    sa_noma_rates,
)
from isac_mi.errors import ConfigError
from isac_mi.mi_core import White, sensing_mi
from isac_mi.model import PowerBudget, default_scenario


class TestNomaAllocation:
    def test_must_sum_to_one(self):
        with pytest.raises(ConfigError):
            NomaAllocation(0.7, 0.4)

    def test_fdsac_split_bounds(self):
        with pytest.raises(ConfigError):
            FdsacSplit(1.2, 0.5)


class TestSaNomaRates:
    def test_zero_strong_share(self):
        r_strong, _, _ = sa_noma_rates([4.0, 1.0], NomaAllocation(0.0, 1.0), 1.0, 1.0)
        assert r_strong == 0.0

    def test_known_values(self):
        r_strong, r_weak, total = sa_noma_rates([4.0, 1.0], NomaAllocation(0.2, 0.8), 1.0, 1.0)
        assert r_strong == pytest.approx(np.log2(1.8))
        assert r_weak == pytest.approx(np.log2(5.0 / 3.0))
        assert total == pytest.approx(r_strong + r_weak)

    def test_gain_order_applied(self):
        forward = sa_noma_rates([1.0, 4.0], NomaAllocation(0.2, 0.8), 1.0, 1.0)
        backward = sa_noma_rates([4.0, 1.0], NomaAllocation(0.2, 0.8), 1.0, 1.0)
        assert forward == backward

    def test_zero_power(self):
        assert sa_noma_rates([4.0, 1.0], NomaAllocation(0.5, 0.5), 0.0, 1.0) == (0.0, 0.0, 0.0)


class TestSaCorner:
    def test_zero_power(self):
        sc = small_scenario("downlink-sa", trials=10)
        sc = replace(sc, power=PowerBudget(0.0))
        corner = sa_isac_corner(sc)
        assert corner.cr == 0.0 and corner.sr == 0.0

    def test_sr_formula_at_n_equals_l(self):
        sc = small_scenario("downlink-sa", trials=5)
        sc = replace(
            sc,
            dims=replace(sc.dims, n_rx=sc.dims.l_frame),
            power=PowerBudget(1.0),
        )
        corner = sa_isac_corner(sc)
        assert corner.sr == pytest.approx(np.log2(1.0 + sc.dims.l_frame))

    def test_wrong_kind_rejected(self):
        with pytest.raises(ConfigError):
            sa_isac_corner(small_scenario("downlink-ma"))

    def test_region_is_rectangle_with_corner(self):
        sc = small_scenario("downlink-sa", trials=40)
        region = downlink_region(sc, "isac")
        assert len(region.frontier) == 1
        corner = sa_isac_corner(sc)
        assert region.frontier[0] == corner


class TestSaFdsac:
    def test_full_band_to_comm_kills_sensing(self):
        sc = small_scenario("downlink-sa", trials=10)
        assert sa_fdsac_point(sc, FdsacSplit(1.0, 0.5)).sr == 0.0

    def test_no_band_to_comm_kills_comm(self):
        sc = small_scenario("downlink-sa", trials=10)
        assert sa_fdsac_point(sc, FdsacSplit(0.0, 0.5)).cr == 0.0

    def test_grid_dominated_by_corner(self):
        for seed in (20240001, 7, 99):
            sc = replace(small_scenario("downlink-sa", trials=50), seed=seed)
            corner = sa_isac_corner(sc)
            for alpha in np.linspace(0.0, 1.0, 9):
                for kappa in np.linspace(0.0, 1.0, 9):
                    pt = sa_fdsac_point(sc, FdsacSplit(float(alpha), float(kappa)))
                    assert pt.cr <= corner.cr + 1e-9
                    assert pt.sr <= corner.sr + 1e-9

    def test_alpha_continuity_at_edges(self):
        sc = small_scenario("downlink-sa", trials=20)
        for kappa in (0.3, 0.7):
            at_zero = sa_fdsac_point(sc, FdsacSplit(0.0, kappa))
            near_zero = sa_fdsac_point(sc, FdsacSplit(1e-9, kappa))
            assert abs(at_zero.cr - near_zero.cr) <= 1e-6
            assert abs(at_zero.sr - near_zero.sr) <= 1e-6
            at_one = sa_fdsac_point(sc, FdsacSplit(1.0, kappa))
            near_one = sa_fdsac_point(sc, FdsacSplit(1.0 - 1e-9, kappa))
            assert abs(at_one.cr - near_one.cr) <= 1e-6
            assert abs(at_one.sr - near_one.sr) <= 1e-6


class TestDpcRates:
    def test_single_user_scalar(self, rng):
        h = rand_complex(rng, (1, 3))
        q = 2.0 * np.outer(h[0], h[0].conj()) / np.linalg.norm(h[0]) ** 2
        rate = dpc_rates(h, [q], (0,), 1.0)[0]
        assert rate == pytest.approx(np.log2(1.0 + 2.0 * np.linalg.norm(h[0]) ** 2 / 1.0))

    def test_zero_covariance_zero_rate(self, rng):
        h = rand_complex(rng, (2, 3))
        covs = [np.zeros((3, 3)), np.eye(3)]
        rates = dpc_rates(h, covs, (0, 1), 1.0)
        assert rates[0] == 0.0


class TestMaIsacPoint:
    def test_rho_one_kills_comm(self, rng):
        sc = small_scenario("downlink-ma")
        ch = rand_complex(rng, (2, 4))
        pt = ma_isac_point(sc, ch, 1.0)
        assert pt.cr == 0.0 and pt.sr > 0.0

    def test_rho_zero_kills_sensing(self, rng):
        sc = small_scenario("downlink-ma")
        ch = rand_complex(rng, (2, 4))
        pt = ma_isac_point(sc, ch, 0.0)
        assert pt.sr == 0.0 and pt.cr > 0.0

    def test_composition_oracle(self, rng):
        sc = small_scenario("downlink-ma")
        ch = rand_complex(rng, (2, 4))
        pt = ma_isac_point(sc, ch, 0.5)
        stats = sc.target().r_corr
        dims, power = sc.dims, sc.power
        sol = sum_power_iwf(ch, 0.5 * power.p_total, power.sigma2_c)
        q_c = sum(sol.bc_covariances)
        q_s = sr_optimal_covariance(stats, 0.5 * power.p_total, power.sigma2_s, dims.l_frame)
        sr = (
            sensing_mi(stats, q_s + q_c, dims.l_frame, dims.n_rx, White(power.sigma2_s))
            - sensing_mi(stats, q_c, dims.l_frame, dims.n_rx, White(power.sigma2_s))
        ) / dims.l_frame
        assert pt.cr == pytest.approx(sol.sum_rate, abs=1e-10)
        assert pt.sr == pytest.approx(sr, abs=1e-8)

    def test_monotone_in_rho(self, rng):
        sc = small_scenario("downlink-ma")
        rhos = np.linspace(0.0, 1.0, 9)
        for _ in range(20):
            ch = rand_complex(rng, (2, 4))
            pts = [ma_isac_point(sc, ch, float(r)) for r in rhos]
            crs = [p.cr for p in pts]
            srs = [p.sr for p in pts]
            assert np.all(np.diff(crs) <= 1e-9)
            assert np.all(np.diff(srs) >= -1e-9)
            assert all(p.sr >= 0.0 for p in pts)

    def test_batch_matches_single(self, rng):
        sc = small_scenario("downlink-ma")
        channels = rand_complex(rng, (8, 2, 4))
        crs, srs = _ma_isac_batch(sc, channels, 0.4)
        for b in range(8):
            pt = ma_isac_point(sc, channels[b], 0.4)
            assert crs[b] == pytest.approx(pt.cr, abs=1e-12)
            assert srs[b] == pytest.approx(pt.sr, abs=1e-12)


class TestMaFdsacPoint:
    def test_edges(self, rng):
        sc = small_scenario("downlink-ma")
        ch = rand_complex(rng, (2, 4))
        assert ma_fdsac_point(sc, ch, FdsacSplit(1.0, 0.5)).sr == 0.0
        assert ma_fdsac_point(sc, ch, FdsacSplit(0.5, 0.0)).cr == 0.0
        assert ma_fdsac_point(sc, ch, FdsacSplit(0.0, 0.5)).cr == 0.0

    def test_interior_matches_module_oracles(self, rng):
        sc = small_scenario("downlink-ma")
        ch = rand_complex(rng, (2, 4))
        split = FdsacSplit(0.6, 0.4)
        pt = ma_fdsac_point(sc, ch, split)
        power, dims = sc.power, sc.dims
        sol = sum_power_iwf(ch, split.kappa * power.p_total, split.alpha * power.sigma2_c)
        assert pt.cr == pytest.approx(split.alpha * sol.sum_rate, abs=1e-9)
        stats = sc.target().r_corr
        band = 1.0 - split.alpha
        q = sr_optimal_covariance(
            stats, (1.0 - split.kappa) * power.p_total, band * power.sigma2_s, dims.l_frame
        )
        sr = band * sensing_mi(stats, q, dims.l_frame, dims.n_rx, White(band * power.sigma2_s)) / dims.l_frame
        assert pt.sr == pytest.approx(sr, abs=1e-10)


class TestDownlinkRegion:
    def test_ma_no_point_attains_both_maxima(self):
        sc = small_scenario("downlink-ma", trials=30)
        region = downlink_region(sc, "isac")
        crs = [p.cr for p in region.frontier]
        srs = [p.sr for p in region.frontier]
        best_cr_point = region.frontier[int(np.argmax(crs))]
        best_sr_point = region.frontier[int(np.argmax(srs))]
        assert best_cr_point.sr < max(srs)
        assert best_sr_point.cr < max(crs)

    def test_fdsac_contained_in_isac(self):
        from isac_mi.region import contains

        sc = small_scenario("downlink-ma", trials=30, grids=7)
        isac = downlink_region(sc, "isac")
        fdsac = downlink_region(sc, "fdsac")
        assert contains(isac, fdsac, tol=1e-9)

    def test_rows_align_with_frontier(self):
        sc = small_scenario("downlink-ma", trials=20, grids=5)
        region, rows = downlink_region_rows(sc, "isac")
        assert len(rows) == len(region.frontier)
        for row, pt in zip(rows, region.frontier):
            assert row.point == pt
            assert row.sweep_param.startswith("rho=")

    def test_bad_mode_rejected(self):
        with pytest.raises(ConfigError):
            downlink_region(small_scenario("downlink-ma"), "tdma")
