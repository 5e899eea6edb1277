"""Uplink ISAC evaluators.

The base station receives uplink communication signals superposed with the
echo of its own probing waveform and separates them by successive
interference cancellation in one of two orders: sensing-centric (decode
communications first under echo interference, then sense cleanly) or
communications-centric (sense under communication interference, then
decode cleanly).  Time-sharing between the two corner points traces the
achievable region; the frequency-division baseline splits the band only.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import mc, region as region_mod
from .alloc import sr_optimal_covariance
from .errors import ConfigError
from .mi_core import (
    Colored,
    White,
    comm_mi,
    cross_sum_bits,
    sensing_interference_power,
    sensing_mi,
    signal_eigenvalues,
)
from .model import CommChannel, RatePoint, RateRegion, ScenarioConfig

_LN2 = float(np.log(2.0))

REGION_MODES = ("isac", "fdsac")


class SicOrder(enum.Enum):
    """Order of the two-stage interference cancellation at the BS."""

    SENSING_CENTRIC = "sensing-centric"
    COMM_CENTRIC = "comm-centric"


@dataclass(frozen=True)
class RegionRow:
    point: RatePoint
    sweep_param: str
    stderr_cr: float
    stderr_sr: float


def _channel_matrix(channels) -> np.ndarray:
    if isinstance(channels, CommChannel):
        return np.asarray(channels.matrix)
    return np.asarray(channels, dtype=complex)


def _require_uplink(scenario: ScenarioConfig, op: str):
    if scenario.kind != "uplink":
        raise ConfigError(f"{op} requires an uplink scenario, got {scenario.kind!r}")


def uplink_sic_point(channels, user_powers, q_sense, order: SicOrder,
                     scenario: ScenarioConfig) -> RatePoint:
    """Rates of one SIC order for a single channel draw.

    Sensing-centric: communications decoded first, so the echo of the
    probing waveform acts as white interference of power trace(R Q) on the
    communication stage while the sensing stage is clean after perfect
    cancellation.  Communications-centric is the mirror image, with the
    communication signal entering the sensing stage as colored
    interference.
    """
    _require_uplink(scenario, "uplink_sic_point")
    h = _channel_matrix(channels)
    p = np.asarray(user_powers, dtype=float)
    q = np.asarray(q_sense, dtype=complex)
    dims = scenario.dims
    power = scenario.power
    r_corr = np.asarray(scenario.target().r_corr)
    if not isinstance(order, SicOrder):
        raise ConfigError(f"order must be a SicOrder, got {order!r}")

    if order is SicOrder.SENSING_CENTRIC:
        echo = sensing_interference_power(r_corr, q)
        cr = comm_mi(h, p, White(power.sigma2_c + echo))
        sr = sensing_mi(r_corr, q, dims.l_frame, dims.n_rx, White(power.sigma2_s)) / dims.l_frame
    else:
        cr = comm_mi(h, p, White(power.sigma2_c))
        comm_cov = (h * p[None, :]) @ h.conj().T
        noise = Colored(power.sigma2_s * np.eye(dims.n_rx) + comm_cov)
        sr = sensing_mi(r_corr, q, dims.l_frame, dims.n_rx, noise) / dims.l_frame
    return RatePoint(float(cr), float(sr))


def time_share(p_s: RatePoint, p_c: RatePoint, p: float) -> RatePoint:
    """Coordinatewise convex combination p * p_s + (1 - p) * p_c."""
    if not (0.0 <= p <= 1.0):
        raise ConfigError(f"time-share probability must lie in [0, 1], got {p!r}")
    return RatePoint(
        p * p_s.cr + (1.0 - p) * p_c.cr,
        p * p_s.sr + (1.0 - p) * p_c.sr,
    )


def _comm_eigs(channels_arr: np.ndarray, user_powers: np.ndarray) -> np.ndarray:
    """Eigenvalues of H diag(p) H^H per trial, through the K x K Gram."""
    scaled = channels_arr * np.sqrt(user_powers)[None, None, :]
    gram = np.einsum("bnj,bnk->bjk", scaled.conj(), scaled)
    return np.clip(np.linalg.eigvalsh(gram), 0.0, None)


def _corner_stats(scenario: ScenarioConfig, channels_list):
    """Ergodic corner points (P_s, P_c) with standard errors."""
    dims = scenario.dims
    power = scenario.power
    r_corr = np.asarray(scenario.target().r_corr)
    p_users = np.full(dims.k_users, power.p_total)
    q_sense = sr_optimal_covariance(r_corr, power.p_total, power.sigma2_s, dims.l_frame)

    arr = np.stack([np.asarray(ch.matrix) for ch in channels_list])
    lam = _comm_eigs(arr, p_users)

    echo = sensing_interference_power(r_corr, q_sense)
    crs_s = np.sum(np.log1p(lam / (power.sigma2_c + echo)), axis=1) / _LN2
    crs_c = np.sum(np.log1p(lam / power.sigma2_c), axis=1) / _LN2

    sr_clean = sensing_mi(r_corr, q_sense, dims.l_frame, dims.n_rx, White(power.sigma2_s)) / dims.l_frame
    srs_s = np.full(arr.shape[0], sr_clean)

    ell = signal_eigenvalues(r_corr, q_sense, dims.l_frame)
    comm_cov = np.einsum("bnk,k,bmk->bnm", arr, p_users, arr.conj())
    noise_cov = power.sigma2_s * np.eye(dims.n_rx) + comm_cov
    nu = np.linalg.eigvalsh(noise_cov)
    srs_c = cross_sum_bits(np.broadcast_to(ell, (arr.shape[0], ell.size)), nu) / dims.l_frame

    mean_s, se_s = mc.average_points(crs_s, srs_s)
    mean_c, se_c = mc.average_points(crs_c, srs_c)
    return (mean_s, se_s), (mean_c, se_c)


def uplink_region_rows(scenario: ScenarioConfig, mode: str, channels_list=None):
    """Region rows for the CLI: time-shared SIC corners or the FDSAC sweep."""
    _require_uplink(scenario, "uplink_region_rows")
    if mode not in REGION_MODES:
        raise ConfigError(f"mode must be one of {REGION_MODES}, got {mode!r}")
    if channels_list is None:
        channels_list = mc.trial_channels(scenario)
    rows = []
    if mode == "isac":
        (mean_s, se_s), (mean_c, se_c) = _corner_stats(scenario, channels_list)
        for p in np.linspace(0.0, 1.0, scenario.rho_grid):
            point = time_share(mean_s, mean_c, float(p))
            se_cr = p * se_s.cr + (1.0 - p) * se_c.cr
            se_sr = p * se_s.sr + (1.0 - p) * se_c.sr
            if p == 1.0:
                label = f"p={p:.6g};corner=Ps"
            elif p == 0.0:
                label = f"p={p:.6g};corner=Pc"
            else:
                label = f"p={p:.6g}"
            rows.append(RegionRow(point, label, float(se_cr), float(se_sr)))
    else:
        dims = scenario.dims
        power = scenario.power
        r_corr = np.asarray(scenario.target().r_corr)
        p_users = np.full(dims.k_users, power.p_total)
        arr = np.stack([np.asarray(ch.matrix) for ch in channels_list])
        lam = _comm_eigs(arr, p_users)
        for alpha in np.linspace(0.0, 1.0, scenario.alpha_grid):
            alpha = float(alpha)
            if alpha == 0.0:
                crs = np.zeros(arr.shape[0])
            else:
                crs = alpha * np.sum(np.log1p(lam / (alpha * power.sigma2_c)), axis=1) / _LN2
            sr = _uplink_fdsac_sr(scenario, alpha)
            mean, se = mc.average_points(crs, np.full(arr.shape[0], sr))
            rows.append(RegionRow(mean, f"alpha={alpha:.6g}", se.cr, se.sr))

    points = [row.point for row in rows]
    frontier_region = region_mod.convexify(region_mod.pareto_frontier(points))
    by_coords = {}
    for row in rows:
        by_coords.setdefault((row.point.cr, row.point.sr), row)
    kept = [by_coords[(pt.cr, pt.sr)] for pt in frontier_region.frontier]
    return frontier_region, kept


def uplink_isac_region(scenario: ScenarioConfig, channels=None) -> RateRegion:
    """Time-sharing region between the two ergodic SIC corner points.

    channels may be a list of per-trial draws; by default the scenario's
    seeded trials are used.
    """
    frontier_region, _ = uplink_region_rows(scenario, "isac", channels)
    return frontier_region


def _uplink_fdsac_sr(scenario: ScenarioConfig, alpha: float) -> float:
    if alpha == 1.0:
        return 0.0
    dims = scenario.dims
    power = scenario.power
    r_corr = np.asarray(scenario.target().r_corr)
    band = 1.0 - alpha
    q = sr_optimal_covariance(r_corr, power.p_total, band * power.sigma2_s, dims.l_frame)
    mi = sensing_mi(r_corr, q, dims.l_frame, dims.n_rx, White(band * power.sigma2_s))
    return band * mi / dims.l_frame


def uplink_fdsac_point(scenario: ScenarioConfig, channels, alpha: float) -> RatePoint:
    """Frequency-division rates for one draw: the band splits, powers do not.

    Communication power belongs to the users and sensing power to the BS,
    so only the spectrum fraction alpha is swept.
    """
    _require_uplink(scenario, "uplink_fdsac_point")
    if not (0.0 <= alpha <= 1.0):
        raise ConfigError(f"alpha must lie in [0, 1], got {alpha!r}")
    h = _channel_matrix(channels)
    power = scenario.power
    p_users = np.full(scenario.dims.k_users, power.p_total)
    if alpha == 0.0:
        cr = 0.0
    else:
        cr = alpha * comm_mi(h, p_users, White(alpha * power.sigma2_c))
    return RatePoint(float(cr), _uplink_fdsac_sr(scenario, alpha))
