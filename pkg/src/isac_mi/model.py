"""Shared domain types, scenario configuration, and unit conventions.

All powers are linear (never dB) inside these types; dB shows up only at
the CLI boundary.  Communication rates (cr) are bits/s/Hz per slot,
sensing rates (sr) are bits per frame divided by the frame length, so the
two axes of a rate region are directly comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

SCENARIO_KINDS = ("downlink-sa", "downlink-ma", "uplink")

# Tiny negative rates from float cancellation are clamped to zero; anything
# more negative is a real bug and raises.
_NEG_RATE_TOL = 1e-9


def _as_readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SystemDims:
    """Antenna counts, user count, and sensing frame length."""

    m_tx: int
    n_rx: int
    k_users: int
    l_frame: int

    def __post_init__(self):
        for name in ("m_tx", "n_rx", "k_users", "l_frame"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigError(f"SystemDims.{name} must be an integer >= 1, got {value!r}")
        if self.l_frame < self.m_tx:
            raise ConfigError(
                f"l_frame ({self.l_frame}) must be >= m_tx ({self.m_tx}) "
                "so a full-rank probing waveform fits in one frame"
            )


@dataclass(frozen=True)
class PowerBudget:
    """Linear-scale transmit power and noise levels.

    Downlink: p_total is the base-station budget.  Uplink: p_total is the
    reference level used both as the per-user communication power and as
    the probing power at the base station.
    """

    p_total: float
    sigma2_c: float = 1.0
    sigma2_s: float = 1.0

    def __post_init__(self):
        if not (self.p_total >= 0.0):
            raise ConfigError(f"p_total must be >= 0, got {self.p_total!r}")
        if not (self.sigma2_c > 0.0):
            raise ConfigError(f"sigma2_c must be > 0, got {self.sigma2_c!r}")
        if not (self.sigma2_s > 0.0):
            raise ConfigError(f"sigma2_s must be > 0, got {self.sigma2_s!r}")


@dataclass(frozen=True)
class TargetResponseStats:
    """Second-order statistics of the random target response.

    r_corr is the M x M Hermitian PSD correlation matrix, trace-normalized
    to M.  The convention used throughout is the quadratic form w^H R w:
    a probing vector w returns an echo of average power w^H R w per
    receive antenna and slot.
    """

    r_corr: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r_corr, dtype=complex)
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise ConfigError(f"r_corr must be square, got shape {r.shape}")
        if np.max(np.abs(r - r.conj().T)) > 1e-12:
            raise ConfigError("r_corr is not Hermitian within 1e-12")
        eigs = np.linalg.eigvalsh(r)
        if eigs.min() < -1e-12:
            raise ConfigError(f"r_corr has eigenvalue {eigs.min():.3e} < -1e-12")
        m = r.shape[0]
        if abs(np.trace(r).real - m) > 1e-9:
            raise ConfigError(f"trace(r_corr) = {np.trace(r).real!r} not within 1e-9 of {m}")
        object.__setattr__(self, "r_corr", _as_readonly(r))

    @property
    def m(self) -> int:
        return self.r_corr.shape[0]


@dataclass(frozen=True)
class CommChannel:
    """Communication channel draw.

    Downlink: matrix of shape (K, M) whose rows are the per-user vectors.
    Uplink: matrix of shape (N, K) whose columns are the per-user vectors.
    """

    kind: str
    matrix: np.ndarray

    def __post_init__(self):
        if self.kind not in ("downlink", "uplink"):
            raise ConfigError(f"CommChannel.kind must be 'downlink' or 'uplink', got {self.kind!r}")
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2:
            raise ConfigError(f"channel matrix must be 2-D, got shape {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise ConfigError("channel matrix has non-finite entries")
        object.__setattr__(self, "matrix", _as_readonly(mat))

    def user_vector(self, k: int) -> np.ndarray:
        if self.kind == "downlink":
            return self.matrix[k]
        return self.matrix[:, k]


@dataclass(frozen=True)
class RatePoint:
    """A (communication rate, sensing rate) pair in bits/s/Hz."""

    cr: float
    sr: float

    def __post_init__(self):
        for name in ("cr", "sr"):
            value = float(getattr(self, name))
            if math.isnan(value) or value < -_NEG_RATE_TOL:
                raise ConfigError(f"RatePoint.{name} must be >= 0, got {value!r}")
            object.__setattr__(self, name, max(value, 0.0))

    def dominates(self, other: "RatePoint") -> bool:
        """Coordinatewise >= with at least one strict inequality."""
        ge = self.cr >= other.cr and self.sr >= other.sr
        return ge and (self.cr > other.cr or self.sr > other.sr)


@dataclass(frozen=True)
class RateRegion:
    """Pareto frontier of achievable rate pairs.

    The frontier is ordered with strictly increasing cr and strictly
    decreasing sr; the region itself is the set of points dominated by the
    frontier (closed down to the axes).  convexified marks that the
    time-sharing closure has been applied.
    """

    frontier: tuple
    convexified: bool = False

    def __post_init__(self):
        pts = tuple(self.frontier)
        if not pts:
            raise ConfigError("RateRegion frontier must be nonempty")
        for a, b in zip(pts, pts[1:]):
            if not (b.cr > a.cr and b.sr < a.sr):
                raise ConfigError(
                    f"frontier must have strictly increasing cr and strictly decreasing sr; "
                    f"violated by ({a.cr}, {a.sr}) -> ({b.cr}, {b.sr})"
                )
        object.__setattr__(self, "frontier", pts)

    @property
    def max_cr(self) -> float:
        return self.frontier[-1].cr

    @property
    def max_sr(self) -> float:
        return self.frontier[0].sr


@dataclass(frozen=True)
class SlopeEstimate:
    """High-SNR slope estimate against its closed-form reference.

    Slopes are bits/s/Hz per octave of power (base-2 logarithm of the
    linear power).  abs_error is derived, never passed.
    """

    numeric: float
    analytic: float = float("nan")
    abs_error: float = field(init=False, default=float("nan"))

    def __post_init__(self):
        object.__setattr__(self, "abs_error", abs(self.numeric - self.analytic))


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one evaluation run."""

    kind: str
    dims: SystemDims
    power: PowerBudget
    corr_coeff: float
    rho_grid: int = 41
    alpha_grid: int = 41
    kappa_grid: int = 41
    mc_trials: int = 500
    seed: int = 20240001
    snr_sweep: tuple = ()

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ConfigError(f"unknown scenario kind {self.kind!r}; expected one of {SCENARIO_KINDS}")
        if not (0.0 <= self.corr_coeff < 1.0):
            raise ConfigError(f"corr_coeff must lie in [0, 1), got {self.corr_coeff!r}")
        for name in ("rho_grid", "alpha_grid", "kappa_grid"):
            if getattr(self, name) < 2:
                raise ConfigError(f"{name} must be >= 2, got {getattr(self, name)!r}")
        if self.mc_trials < 1:
            raise ConfigError(f"mc_trials must be >= 1, got {self.mc_trials!r}")
        if self.kind == "downlink-sa" and self.dims.m_tx != 1:
            raise ConfigError("downlink-sa requires m_tx = 1")
        sweep = tuple(float(p) for p in self.snr_sweep)
        if any(b <= a for a, b in zip(sweep, sweep[1:])):
            raise ConfigError("snr_sweep must be strictly increasing")
        if any(p <= 0 for p in sweep):
            raise ConfigError("snr_sweep powers must be positive (linear scale)")
        object.__setattr__(self, "snr_sweep", sweep)

    def target(self) -> TargetResponseStats:
        return exp_corr_matrix(self.dims.m_tx, self.corr_coeff)


def exp_corr_matrix(m: int, coeff: float) -> TargetResponseStats:
    """Exponential-correlation target statistics: entry (i, j) = coeff^|i-j|.

    The matrix is rescaled so its trace equals m exactly.
    """
    if m < 1 or int(m) != m:
        raise ConfigError(f"m must be an integer >= 1, got {m!r}")
    if not (0.0 <= coeff < 1.0):
        raise ConfigError(f"coeff must lie in [0, 1), got {coeff!r}")
    idx = np.arange(m)
    r = coeff ** np.abs(idx[:, None] - idx[None, :]).astype(float)
    r = r * (m / np.trace(r).real)
    return TargetResponseStats(r_corr=r)


_DEFAULT_SNR_SWEEP_DB = tuple(range(-10, 31, 2))


def default_scenario(kind: str) -> ScenarioConfig:
    """Desk-scale defaults: M=4 (1 for the single-antenna case), N=4, K=2, L=16."""
    if kind not in SCENARIO_KINDS:
        raise ConfigError(f"unknown scenario kind {kind!r}; expected one of {SCENARIO_KINDS}")
    m_tx = 1 if kind == "downlink-sa" else 4
    return ScenarioConfig(
        kind=kind,
        dims=SystemDims(m_tx=m_tx, n_rx=4, k_users=2, l_frame=16),
        power=PowerBudget(p_total=10.0, sigma2_c=1.0, sigma2_s=1.0),
        corr_coeff=0.5,
        rho_grid=41,
        alpha_grid=41,
        kappa_grid=41,
        mc_trials=500,
        seed=20240001,
        snr_sweep=tuple(10.0 ** (db / 10.0) for db in _DEFAULT_SNR_SWEEP_DB),
    )


# Scenario file schema: a flat JSON object with these keys.  snr_sweep is in
# dB in the file (the file is CLI I/O) and linear everywhere else.
_CONFIG_KEYS = (
    "kind", "m_tx", "n_rx", "k_users", "l_frame",
    "p_total", "sigma2_c", "sigma2_s", "corr_coeff",
    "rho_grid", "alpha_grid", "kappa_grid", "mc_trials", "seed", "snr_sweep",
)


def scenario_to_dict(scenario: ScenarioConfig) -> dict:
    return {
        "kind": scenario.kind,
        "m_tx": scenario.dims.m_tx,
        "n_rx": scenario.dims.n_rx,
        "k_users": scenario.dims.k_users,
        "l_frame": scenario.dims.l_frame,
        "p_total": scenario.power.p_total,
        "sigma2_c": scenario.power.sigma2_c,
        "sigma2_s": scenario.power.sigma2_s,
        "corr_coeff": scenario.corr_coeff,
        "rho_grid": scenario.rho_grid,
        "alpha_grid": scenario.alpha_grid,
        "kappa_grid": scenario.kappa_grid,
        "mc_trials": scenario.mc_trials,
        "seed": scenario.seed,
        "snr_sweep": [10.0 * math.log10(p) for p in scenario.snr_sweep],
    }


def scenario_from_dict(data: dict) -> ScenarioConfig:
    """Build a ScenarioConfig from a flat config mapping.

    Keys not present fall back to the defaults for the given kind; unknown
    keys are rejected.
    """
    if not isinstance(data, dict):
        raise ConfigError(f"config must be a JSON object, got {type(data).__name__}")
    unknown = set(data) - set(_CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "kind" not in data:
        raise ConfigError("config is missing the required key 'kind'")
    base = default_scenario(data["kind"])
    merged = scenario_to_dict(base)
    merged.update(data)
    try:
        snr_sweep = tuple(10.0 ** (float(db) / 10.0) for db in merged["snr_sweep"])
        return ScenarioConfig(
            kind=merged["kind"],
            dims=SystemDims(
                m_tx=merged["m_tx"], n_rx=merged["n_rx"],
                k_users=merged["k_users"], l_frame=merged["l_frame"],
            ),
            power=PowerBudget(
                p_total=float(merged["p_total"]),
                sigma2_c=float(merged["sigma2_c"]),
                sigma2_s=float(merged["sigma2_s"]),
            ),
            corr_coeff=float(merged["corr_coeff"]),
            rho_grid=int(merged["rho_grid"]),
            alpha_grid=int(merged["alpha_grid"]),
            kappa_grid=int(merged["kappa_grid"]),
            mc_trials=int(merged["mc_trials"]),
            seed=int(merged["seed"]),
            snr_sweep=snr_sweep,
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed config value: {exc}") from exc
