"""Rate-region geometry and high-SNR slope estimation.

Pure geometry over RatePoint collections (Pareto filtering, time-sharing
convexification, containment tests) plus the finite-difference slope
estimator and the rank-derived analytic slope references.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, UnreliableRegimeError
from .model import RatePoint, RateRegion, ScenarioConfig, SlopeEstimate

_LN2 = float(np.log(2.0))

# Slopes are read off between these two powers, appended to the user's
# sweep for slope runs only; the limit is not computable from finite data
# at ordinary operating powers.
SLOPE_POWERS = (1e8, 1e10)
_MIN_SLOPE_POWER = 1e6

# Fixed splits used by the rate-vs-power curve and slope commands.  The
# downlink values keep the frequency-division baseline ahead on sensing
# rate at the bottom of the default sweep while its smaller pre-log factor
# concedes the top, so the crossover lands inside the swept range.
DOWNLINK_CURVE_RHO = 0.3
DOWNLINK_CURVE_ALPHA = 0.8
DOWNLINK_CURVE_KAPPA = 0.1
UPLINK_CURVE_ALPHA = 0.5


@dataclass(frozen=True)
class SlopePair:
    """High-SNR slopes of the communication and sensing rate curves."""

    cr_slope: SlopeEstimate
    sr_slope: SlopeEstimate


def pareto_frontier(points) -> RateRegion:
    """Maximal points under coordinatewise dominance, sorted by increasing cr."""
    pts = list(points)
    if not pts:
        raise ConfigError("pareto_frontier requires at least one point")
    order = sorted(range(len(pts)), key=lambda i: (pts[i].cr, pts[i].sr))
    kept = []
    best_sr = -np.inf
    for idx in reversed(order):
        if pts[idx].sr > best_sr:
            kept.append(pts[idx])
            best_sr = pts[idx].sr
    kept.reverse()
    return RateRegion(frontier=tuple(kept), convexified=False)


def _strictly_below(a: RatePoint, b: RatePoint, c: RatePoint) -> bool:
    """True when b lies strictly below the chord a-c (collinear points stay)."""
    cross = (c.cr - a.cr) * (b.sr - a.sr) - (c.sr - a.sr) * (b.cr - a.cr)
    scale = max(1.0, abs((c.cr - a.cr) * (b.sr - a.sr)), abs((c.sr - a.sr) * (b.cr - a.cr)))
    return cross < -1e-12 * scale


def convexify(region: RateRegion) -> RateRegion:
    """Upper-right concave envelope of the frontier (time-sharing closure).

    Collinear points are retained; the result is idempotent.
    """
    hull = []
    for pt in region.frontier:
        while len(hull) >= 2 and _strictly_below(hull[-2], hull[-1], pt):
            hull.pop()
        hull.append(pt)
    return RateRegion(frontier=tuple(hull), convexified=True)


def contains(outer: RateRegion, inner: RateRegion, tol: float = 1e-9) -> bool:
    """True iff every inner frontier point is dominated, within tol, by the
    convexified outer frontier (closed down to the axes)."""
    env = outer if outer.convexified else convexify(outer)
    crs = np.array([pt.cr for pt in env.frontier])
    srs = np.array([pt.sr for pt in env.frontier])
    for pt in inner.frontier:
        if pt.cr > crs[-1] + tol:
            return False
        # np.interp clamps: left of the frontier the envelope is the max sr.
        limit = float(np.interp(pt.cr, crs, srs))
        if pt.sr > limit + tol:
            return False
    return True


def hisnr_slope(rate_samples, analytic: float = float("nan")) -> SlopeEstimate:
    """Finite-difference high-SNR slope from the last two (power, rate) samples.

    Powers must be strictly increasing with the top power at least 1e6;
    slopes are bits/s/Hz per octave (base-2 logarithm of linear power).
    """
    samples = [(float(p), float(r)) for p, r in rate_samples]
    if len(samples) < 2:
        raise UnreliableRegimeError("hisnr_slope needs at least two samples")
    powers = [p for p, _ in samples]
    if any(b <= a for a, b in zip(powers, powers[1:])):
        raise UnreliableRegimeError("hisnr_slope powers must be strictly increasing")
    if powers[-1] < _MIN_SLOPE_POWER:
        raise UnreliableRegimeError(
            f"top power {powers[-1]:g} below the reliable regime ({_MIN_SLOPE_POWER:g})"
        )
    (p1, r1), (p2, r2) = samples[-2], samples[-1]
    numeric = (r2 - r1) / (np.log2(p2) - np.log2(p1))
    return SlopeEstimate(numeric=float(numeric), analytic=analytic)


def _rank(matrix: np.ndarray) -> int:
    eigs = np.linalg.eigvalsh(np.asarray(matrix))
    return int(np.sum(eigs > max(float(eigs.max()), 0.0) * 1e-12))


def analytic_slopes(scenario: ScenarioConfig, mode: str, alpha: float | None = None):
    """Rank-derived high-SNR slope references (cr_slope, sr_slope).

    The sweep convention is the one used by the curve commands: downlink
    scales the total power with the sensing share fixed; uplink scales each
    functionality's own power with the other held fixed.
    """
    dims = scenario.dims
    rank_r = _rank(scenario.target().r_corr)
    n_over_l = dims.n_rx / dims.l_frame
    if mode == "isac":
        if scenario.kind == "downlink-ma":
            cr = min(dims.m_tx, dims.k_users)
            sr = n_over_l * max(rank_r - min(rank_r, dims.k_users), 0)
        elif scenario.kind == "downlink-sa":
            cr = min(dims.m_tx, dims.k_users)
            sr = n_over_l * rank_r
        else:
            cr = min(dims.n_rx, dims.k_users)
            sr = n_over_l * rank_r
        return float(cr), float(sr)
    if mode == "fdsac":
        if alpha is None:
            raise ConfigError("fdsac slope references need the spectrum fraction alpha")
        if scenario.kind == "uplink":
            cr = alpha * min(dims.n_rx, dims.k_users)
        else:
            cr = alpha * min(dims.m_tx, dims.k_users)
        sr = (1.0 - alpha) * n_over_l * rank_r
        return float(cr), float(sr)
    raise ConfigError(f"mode must be 'isac' or 'fdsac', got {mode!r}")
