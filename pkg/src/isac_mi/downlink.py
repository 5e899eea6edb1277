"""Downlink ISAC and FDSAC scenario evaluators.

Covers the single-antenna NOMA case with its rectangular region, the
multi-antenna superposition scheme (sensing covariance plus duality-based
communication covariances), and the frequency-division baselines.  The
sweep helpers evaluate whole trial batches at once; the public per-draw
operations wrap the same code with batch size one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import mc, region as region_mod
from .alloc import _iwf_gram, _mac_to_bc_batch, sr_optimal_covariance
from .errors import ConfigError
from .mi_core import White, psd_sqrt, sensing_mi
from .model import CommChannel, RatePoint, RateRegion, ScenarioConfig

_LN2 = float(np.log(2.0))

REGION_MODES = ("isac", "fdsac")


@dataclass(frozen=True)
class NomaAllocation:
    """Power split between the stronger and weaker user."""

    a_strong: float
    a_weak: float

    def __post_init__(self):
        if not (0.0 <= self.a_strong <= 1.0 and 0.0 <= self.a_weak <= 1.0):
            raise ConfigError("NOMA fractions must lie in [0, 1]")
        if abs(self.a_strong + self.a_weak - 1.0) > 1e-12:
            raise ConfigError(
                f"NOMA fractions must sum to 1, got {self.a_strong} + {self.a_weak}"
            )


@dataclass(frozen=True)
class FdsacSplit:
    """Spectrum fraction (alpha) and power fraction (kappa) for communications."""

    alpha: float
    kappa: float

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha!r}")
        if not (0.0 <= self.kappa <= 1.0):
            raise ConfigError(f"kappa must lie in [0, 1], got {self.kappa!r}")


@dataclass(frozen=True)
class RegionRow:
    """One swept operating point with its sweep label and standard errors."""

    point: RatePoint
    sweep_param: str
    stderr_cr: float
    stderr_sr: float


def _channel_matrix(channels) -> np.ndarray:
    if isinstance(channels, CommChannel):
        return np.asarray(channels.matrix)
    return np.asarray(channels, dtype=complex)


def _require_kind(scenario: ScenarioConfig, kind: str, op: str):
    if scenario.kind != kind:
        raise ConfigError(f"{op} requires scenario kind {kind!r}, got {scenario.kind!r}")


def sa_noma_rates(h_gains, alloc: NomaAllocation, p: float, sigma2_c: float):
    """Two-user NOMA rates for scalar channel gains |h|^2.

    The larger gain takes the a_strong share (ties keep input order); the
    weaker user decodes under the stronger user's interference.
    Returns (r_strong, r_weak, cr_sum).
    """
    g = np.asarray(h_gains, dtype=float)
    if g.shape != (2,):
        raise ConfigError(f"h_gains must hold exactly 2 users, got shape {g.shape}")
    if np.any(g < 0):
        raise ConfigError("channel gains must be >= 0")
    if not (p >= 0.0):
        raise ConfigError(f"p must be >= 0, got {p!r}")
    if not (sigma2_c > 0.0):
        raise ConfigError(f"sigma2_c must be > 0, got {sigma2_c!r}")
    order = np.argsort(-g, kind="stable")
    g1, g2 = float(g[order[0]]), float(g[order[1]])
    r_strong = np.log1p(alloc.a_strong * p * g1 / sigma2_c) / _LN2
    r_weak = np.log1p(alloc.a_weak * p * g2 / (alloc.a_strong * p * g2 + sigma2_c)) / _LN2
    return float(r_strong), float(r_weak), float(r_strong + r_weak)


def _sa_gmax(scenario: ScenarioConfig, trials: int | None = None) -> np.ndarray:
    channels = mc.trial_channels(scenario, trials)
    return np.array([float(np.max(np.abs(ch.matrix[:, 0]) ** 2)) for ch in channels])


def _sa_corner_sr(scenario: ScenarioConfig) -> float:
    dims = scenario.dims
    r00 = float(scenario.target().r_corr[0, 0].real)
    p = scenario.power.p_total
    return (dims.n_rx / dims.l_frame) * float(
        np.log1p(dims.l_frame * p * r00 / scenario.power.sigma2_s) / _LN2
    )


def _sa_corner_stats(scenario: ScenarioConfig, trials: int | None = None):
    gmax = _sa_gmax(scenario, trials)
    p = scenario.power.p_total
    # The NOMA sum rate is nondecreasing in the strong user's share, so the
    # per-draw maximum over allocations is the full-power single-user rate.
    crs = np.log1p(p * gmax / scenario.power.sigma2_c) / _LN2
    sr = _sa_corner_sr(scenario)
    return mc.average_points(crs, np.full_like(crs, sr))


def sa_isac_corner(scenario: ScenarioConfig) -> RatePoint:
    """Supremum operating point of the single-antenna downlink system.

    Communication and sensing both run at full power on the same signal:
    the ergodic maximum NOMA sum rate together with the full-power sensing
    rate.
    """
    _require_kind(scenario, "downlink-sa", "sa_isac_corner")
    mean, _ = _sa_corner_stats(scenario)
    return mean


def _sa_fdsac_cr_draws(gmax: np.ndarray, split: FdsacSplit, p: float, sigma2_c: float) -> np.ndarray:
    if split.alpha == 0.0:
        return np.zeros_like(gmax)
    return split.alpha * np.log1p(split.kappa * p * gmax / (split.alpha * sigma2_c)) / _LN2


def _sa_fdsac_sr(scenario: ScenarioConfig, split: FdsacSplit) -> float:
    if split.alpha == 1.0:
        return 0.0
    dims = scenario.dims
    r00 = float(scenario.target().r_corr[0, 0].real)
    band = 1.0 - split.alpha
    p_sense = (1.0 - split.kappa) * scenario.power.p_total
    return band * (dims.n_rx / dims.l_frame) * float(
        np.log1p(dims.l_frame * p_sense * r00 / (band * scenario.power.sigma2_s)) / _LN2
    )


def sa_fdsac_point(scenario: ScenarioConfig, split: FdsacSplit) -> RatePoint:
    """Ergodic frequency-division operating point of the single-antenna case."""
    _require_kind(scenario, "downlink-sa", "sa_fdsac_point")
    gmax = _sa_gmax(scenario)
    crs = _sa_fdsac_cr_draws(gmax, split, scenario.power.p_total, scenario.power.sigma2_c)
    return RatePoint(float(np.mean(crs)), _sa_fdsac_sr(scenario, split))


def dpc_rates(downlink_channels, bc_covariances, order, sigma2_c: float) -> np.ndarray:
    """Per-user dirty-paper rates for the given covariances and encoding order.

    The user encoded i-th sees interference only from users encoded later.
    Rates are returned indexed by user.
    """
    h = _channel_matrix(downlink_channels)
    k = h.shape[0]
    order = list(order)
    if sorted(order) != list(range(k)):
        raise ConfigError(f"order must be a permutation of 0..{k - 1}, got {order!r}")
    if not (sigma2_c > 0.0):
        raise ConfigError(f"sigma2_c must be > 0, got {sigma2_c!r}")
    covs = [np.asarray(q, dtype=complex) for q in bc_covariances]
    rates = np.zeros(k)
    for i, user in enumerate(order):
        hv = h[user]
        signal = float(np.real(hv.conj() @ covs[user] @ hv))
        interference = sigma2_c + sum(
            float(np.real(hv.conj() @ covs[later] @ hv)) for later in order[i + 1:]
        )
        rates[user] = np.log1p(max(signal, 0.0) / interference) / _LN2
    return rates


def _white_sensing_bits(ell: np.ndarray, sigma2: float, n_rx: int) -> np.ndarray:
    """White-noise sensing MI N * sum log2(1 + ell / sigma2) over the last axis."""
    return n_rx * np.sum(np.log1p(np.clip(ell, 0.0, None) / sigma2), axis=-1) / _LN2


def _ma_isac_batch(scenario: ScenarioConfig, channels: np.ndarray, rho: float,
                   tol: float = 1e-9, max_iter: int = 2000):
    """Superposition-scheme rates for a batch of channel draws at one split.

    channels: (B, K, M).  Returns (cr (B,), sr (B,)).
    """
    if not (0.0 <= rho <= 1.0):
        raise ConfigError(f"rho must lie in [0, 1], got {rho!r}")
    dims = scenario.dims
    power = scenario.power
    stats = scenario.target()
    r_corr = np.asarray(stats.r_corr)
    rh = psd_sqrt(r_corr)

    q_sense = sr_optimal_covariance(r_corr, rho * power.p_total, power.sigma2_s, dims.l_frame)

    gram = np.einsum("bjm,bkm->bjk", channels.conj(), channels)  # [j, k] = h_j^H h_k
    p_users, crs, _, _ = _iwf_gram(gram, (1.0 - rho) * power.p_total, power.sigma2_c, tol, max_iter)

    scales, beams = _mac_to_bc_batch(channels, p_users, power.sigma2_c)
    q_comm = np.einsum("bk,bkm,bkn->bmn", scales, beams, beams.conj())

    ell_total = np.linalg.eigvalsh(rh @ (q_comm + q_sense) @ rh) * dims.l_frame
    ell_inter = np.linalg.eigvalsh(rh @ q_comm @ rh) * dims.l_frame
    mi_total = _white_sensing_bits(ell_total, power.sigma2_s, dims.n_rx)
    mi_inter = _white_sensing_bits(ell_inter, power.sigma2_s, dims.n_rx)
    srs = np.maximum(mi_total - mi_inter, 0.0) / dims.l_frame
    return crs, srs


def ma_isac_point(scenario: ScenarioConfig, channels, rho: float) -> RatePoint:
    """Superposition-scheme rates for one channel draw and sensing share rho.

    The sensing covariance water-fills rho of the budget on the target
    statistics; communications run dirty-paper-coded on the rest with no
    sensing interference (users remove the pre-designed sensing signal);
    the sensing rate is the chain-rule difference that treats the
    communication echo as a Gaussian nuisance.
    """
    _require_kind(scenario, "downlink-ma", "ma_isac_point")
    h = _channel_matrix(channels)
    crs, srs = _ma_isac_batch(scenario, h[None, :, :], rho)
    return RatePoint(float(crs[0]), float(srs[0]))


def _ma_fdsac_cr_batch(gram: np.ndarray, split: FdsacSplit, power,
                       tol: float = 1e-9, max_iter: int = 2000) -> np.ndarray:
    if split.alpha == 0.0 or split.kappa == 0.0:
        return np.zeros(gram.shape[0])
    _, rates, _, _ = _iwf_gram(
        gram, split.kappa * power.p_total, split.alpha * power.sigma2_c, tol, max_iter
    )
    return split.alpha * rates


def _ma_fdsac_sr(scenario: ScenarioConfig, split: FdsacSplit) -> float:
    if split.alpha == 1.0 or split.kappa == 1.0:
        return 0.0
    dims = scenario.dims
    power = scenario.power
    r_corr = np.asarray(scenario.target().r_corr)
    band = 1.0 - split.alpha
    q = sr_optimal_covariance(
        r_corr, (1.0 - split.kappa) * power.p_total, band * power.sigma2_s, dims.l_frame
    )
    mi = sensing_mi(r_corr, q, dims.l_frame, dims.n_rx, White(band * power.sigma2_s))
    return band * mi / dims.l_frame


def ma_fdsac_point(scenario: ScenarioConfig, channels, split: FdsacSplit) -> RatePoint:
    """Frequency-division rates for one channel draw of the multi-antenna case."""
    _require_kind(scenario, "downlink-ma", "ma_fdsac_point")
    h = _channel_matrix(channels)
    gram = np.conj(h) @ h.T
    cr = float(_ma_fdsac_cr_batch(gram[None, :, :], split, scenario.power)[0])
    return RatePoint(cr, _ma_fdsac_sr(scenario, split))


def _grid(n: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, n)


def _stack_gram(channels_list) -> tuple:
    arr = np.stack([np.asarray(ch.matrix) for ch in channels_list])
    gram = np.einsum("bjm,bkm->bjk", arr.conj(), arr)  # [j, k] = h_j^H h_k
    return arr, gram


def downlink_region_rows(scenario: ScenarioConfig, mode: str):
    """Swept, ergodic-averaged, Pareto-filtered region rows for the CLI.

    Returns (RateRegion, list of RegionRow in frontier order).
    """
    if mode not in REGION_MODES:
        raise ConfigError(f"mode must be one of {REGION_MODES}, got {mode!r}")
    power = scenario.power
    rows = []
    if scenario.kind == "downlink-sa":
        if mode == "isac":
            mean, se = _sa_corner_stats(scenario)
            rows.append(RegionRow(mean, "corner=Po", se.cr, se.sr))
        else:
            gmax = _sa_gmax(scenario)
            for alpha in _grid(scenario.alpha_grid):
                for kappa in _grid(scenario.kappa_grid):
                    split = FdsacSplit(float(alpha), float(kappa))
                    crs = _sa_fdsac_cr_draws(gmax, split, power.p_total, power.sigma2_c)
                    mean, se = mc.average_points(crs, np.full_like(crs, _sa_fdsac_sr(scenario, split)))
                    rows.append(RegionRow(mean, f"alpha={alpha:.6g};kappa={kappa:.6g}", se.cr, se.sr))
    elif scenario.kind == "downlink-ma":
        channels_list = mc.trial_channels(scenario)
        arr, gram = _stack_gram(channels_list)
        if mode == "isac":
            def eval_rho(rho):
                crs, srs = _ma_isac_batch(scenario, arr, float(rho))
                return mc.average_points(crs, srs)

            results = mc.parallel_map(eval_rho, _grid(scenario.rho_grid))
            for rho, (mean, se) in zip(_grid(scenario.rho_grid), results):
                rows.append(RegionRow(mean, f"rho={rho:.6g}", se.cr, se.sr))
        else:
            splits = [
                FdsacSplit(float(a), float(k))
                for a in _grid(scenario.alpha_grid)
                for k in _grid(scenario.kappa_grid)
            ]

            def eval_split(split):
                crs = _ma_fdsac_cr_batch(gram, split, power)
                srs = np.full_like(crs, _ma_fdsac_sr(scenario, split))
                return mc.average_points(crs, srs)

            results = mc.parallel_map(eval_split, splits)
            for split, (mean, se) in zip(splits, results):
                rows.append(RegionRow(
                    mean, f"alpha={split.alpha:.6g};kappa={split.kappa:.6g}", se.cr, se.sr
                ))
    else:
        raise ConfigError(f"downlink_region requires a downlink scenario, got {scenario.kind!r}")

    points = [row.point for row in rows]
    frontier_region = region_mod.convexify(region_mod.pareto_frontier(points))
    by_coords = {}
    for row in rows:
        by_coords.setdefault((row.point.cr, row.point.sr), row)
    kept = [by_coords[(pt.cr, pt.sr)] for pt in frontier_region.frontier]
    return frontier_region, kept


def downlink_region(scenario: ScenarioConfig, mode: str) -> RateRegion:
    """Ergodic downlink rate region for the requested mode (isac or fdsac)."""
    frontier_region, _ = downlink_region_rows(scenario, mode)
    return frontier_region
