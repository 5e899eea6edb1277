"""Rate-versus-power curves and high-SNR slope runs.

Shared by the `curves` and `slopes` CLI commands.  Downlink sweeps the
total transmit power with the sensing share fixed; uplink sweeps each
functionality's own power with the other held at the scenario default.
The frequency-division baseline uses the fixed splits declared in the
region module.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from . import mc
from .alloc import sr_optimal_covariance
from .downlink import (
    FdsacSplit,
    _ma_fdsac_cr_batch,
    _ma_fdsac_sr,
    _ma_isac_batch,
    _sa_corner_sr,
    _sa_fdsac_cr_draws,
    _sa_fdsac_sr,
    _stack_gram,
)
from .errors import ConfigError
from .mi_core import White, sensing_interference_power, sensing_mi
from .model import PowerBudget, ScenarioConfig, SlopeEstimate
from .region import (
    DOWNLINK_CURVE_ALPHA,
    DOWNLINK_CURVE_KAPPA,
    DOWNLINK_CURVE_RHO,
    SLOPE_POWERS,
    UPLINK_CURVE_ALPHA,
    SlopePair,
    analytic_slopes,
    hisnr_slope,
)

_LN2 = float(np.log(2.0))


def _with_power(scenario: ScenarioConfig, p_total: float) -> ScenarioConfig:
    return replace(scenario, power=PowerBudget(
        p_total=p_total,
        sigma2_c=scenario.power.sigma2_c,
        sigma2_s=scenario.power.sigma2_s,
    ))


def fdsac_curve_alpha(scenario: ScenarioConfig) -> float:
    return UPLINK_CURVE_ALPHA if scenario.kind == "uplink" else DOWNLINK_CURVE_ALPHA


def _downlink_rates(scenario: ScenarioConfig, powers) -> dict:
    split = FdsacSplit(DOWNLINK_CURVE_ALPHA, DOWNLINK_CURVE_KAPPA)
    out = {"cr_isac": [], "sr_isac": [], "cr_fdsac": [], "sr_fdsac": []}
    if scenario.kind == "downlink-sa":
        channels = mc.trial_channels(scenario)
        gmax = np.array([float(np.max(np.abs(ch.matrix[:, 0]) ** 2)) for ch in channels])
        sigma2_c = scenario.power.sigma2_c
        for p in powers:
            sc = _with_power(scenario, float(p))
            out["cr_isac"].append(float(np.mean(np.log1p(p * gmax / sigma2_c) / _LN2)))
            out["sr_isac"].append(_sa_corner_sr(sc))
            out["cr_fdsac"].append(float(np.mean(_sa_fdsac_cr_draws(gmax, split, float(p), sigma2_c))))
            out["sr_fdsac"].append(_sa_fdsac_sr(sc, split))
    else:
        channels = mc.trial_channels(scenario)
        arr, gram = _stack_gram(channels)
        for p in powers:
            sc = _with_power(scenario, float(p))
            crs, srs = _ma_isac_batch(sc, arr, DOWNLINK_CURVE_RHO)
            out["cr_isac"].append(float(np.mean(crs)))
            out["sr_isac"].append(float(np.mean(srs)))
            out["cr_fdsac"].append(float(np.mean(_ma_fdsac_cr_batch(gram, split, sc.power))))
            out["sr_fdsac"].append(_ma_fdsac_sr(sc, split))
    return {key: np.array(val) for key, val in out.items()}


def _uplink_rates(scenario: ScenarioConfig, powers) -> dict:
    """Sensing-centric SIC rates; each curve sweeps its own functionality's power."""
    dims = scenario.dims
    power = scenario.power
    r_corr = np.asarray(scenario.target().r_corr)
    alpha = UPLINK_CURVE_ALPHA
    channels = mc.trial_channels(scenario)
    arr = np.stack([np.asarray(ch.matrix) for ch in channels])
    gram = np.einsum("bnj,bnk->bjk", arr.conj(), arr)
    lam1 = np.clip(np.linalg.eigvalsh(gram), 0.0, None)  # eigs of H H^H at unit power

    q_default = sr_optimal_covariance(r_corr, power.p_total, power.sigma2_s, dims.l_frame)
    echo = sensing_interference_power(r_corr, q_default)

    out = {"cr_isac": [], "sr_isac": [], "cr_fdsac": [], "sr_fdsac": []}
    for p in powers:
        p = float(p)
        noise_sc = power.sigma2_c + echo
        out["cr_isac"].append(float(np.mean(np.sum(np.log1p(p * lam1 / noise_sc), axis=1) / _LN2)))
        q_p = sr_optimal_covariance(r_corr, p, power.sigma2_s, dims.l_frame)
        out["sr_isac"].append(
            sensing_mi(r_corr, q_p, dims.l_frame, dims.n_rx, White(power.sigma2_s)) / dims.l_frame
        )
        out["cr_fdsac"].append(float(np.mean(
            alpha * np.sum(np.log1p(p * lam1 / (alpha * power.sigma2_c)), axis=1) / _LN2
        )))
        band = 1.0 - alpha
        q_band = sr_optimal_covariance(r_corr, p, band * power.sigma2_s, dims.l_frame)
        out["sr_fdsac"].append(
            band * sensing_mi(r_corr, q_band, dims.l_frame, dims.n_rx, White(band * power.sigma2_s))
            / dims.l_frame
        )
    return {key: np.array(val) for key, val in out.items()}


def rate_curves(scenario: ScenarioConfig, powers=None) -> dict:
    """Ergodic ISAC and FDSAC rates over the swept powers.

    Returns arrays keyed cr_isac, sr_isac, cr_fdsac, sr_fdsac plus the
    power axis in dB relative to the communication noise floor.
    """
    if powers is None:
        powers = scenario.snr_sweep
    powers = [float(p) for p in powers]
    if not powers:
        raise ConfigError("curves need a nonempty snr_sweep")
    if scenario.kind == "uplink":
        table = _uplink_rates(scenario, powers)
    else:
        table = _downlink_rates(scenario, powers)
    table["power_db"] = np.array([10.0 * np.log10(p / scenario.power.sigma2_c) for p in powers])
    table["power"] = np.array(powers)
    return table


def slope_run(scenario: ScenarioConfig) -> dict:
    """Numeric slopes at the top two slope powers with analytic references.

    Returns {"isac": SlopePair, "fdsac": SlopePair}.
    """
    table = rate_curves(scenario, SLOPE_POWERS)
    alpha = fdsac_curve_alpha(scenario)
    pairs = {}
    for mode in ("isac", "fdsac"):
        cr_ref, sr_ref = analytic_slopes(scenario, mode, alpha=alpha if mode == "fdsac" else None)
        cr_est = hisnr_slope(zip(SLOPE_POWERS, table[f"cr_{mode}"]), analytic=cr_ref)
        sr_est = hisnr_slope(zip(SLOPE_POWERS, table[f"sr_{mode}"]), analytic=sr_ref)
        pairs[mode] = SlopePair(cr_slope=cr_est, sr_slope=sr_est)
    return pairs


def slope_estimate_dict(estimate: SlopeEstimate) -> dict:
    return {
        "numeric": estimate.numeric,
        "analytic": estimate.analytic,
        "abs_error": estimate.abs_error,
    }
