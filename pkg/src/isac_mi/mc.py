"""Seeded random channel generation and ergodic averaging.

Substreams are derived with the counter-based Philox generator keyed by
(master_seed, trial_index), so the draw for a given trial never depends on
execution order or worker count.  Reductions always run in trial-index
order to keep outputs bit-stable.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError
from .model import CommChannel, RatePoint, ScenarioConfig, SystemDims

THREADS_ENV_VAR = "ISAC_MI_THREADS"


@dataclass(frozen=True)
class TrialStream:
    """Deterministic per-trial random substream."""

    master_seed: int
    trial_index: int

    def generator(self) -> np.random.Generator:
        key = np.array([self.master_seed, self.trial_index], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    draws = rng.standard_normal(shape + (2,))
    return (draws[..., 0] + 1j * draws[..., 1]) / np.sqrt(2.0)


def channel_kind(scenario_kind: str) -> str:
    return "uplink" if scenario_kind == "uplink" else "downlink"


def sample_channels(stream: TrialStream, dims: SystemDims, kind: str) -> CommChannel:
    """Unit-variance circularly-symmetric Gaussian channel draw.

    Downlink: (K, M) rows are user vectors; uplink: (N, K) columns are user
    vectors.  Identical (master_seed, trial_index) always reproduce the
    same draw bit for bit.
    """
    rng = stream.generator()
    if kind == "downlink":
        mat = _complex_normal(rng, (dims.k_users, dims.m_tx))
    elif kind == "uplink":
        mat = _complex_normal(rng, (dims.n_rx, dims.k_users))
    else:
        raise ConfigError(f"unknown channel kind {kind!r}")
    return CommChannel(kind=kind, matrix=mat)


# Draws depend only on (seed, count, kind, dims); caching them keeps the
# repeated sweeps over the same scenario from re-deriving every substream.
@lru_cache(maxsize=16)
def _cached_trials(master_seed: int, count: int, kind: str, dims: SystemDims) -> tuple:
    return tuple(
        sample_channels(TrialStream(master_seed, t), dims, kind) for t in range(count)
    )


def trial_channels(scenario: ScenarioConfig, trials: int | None = None) -> list:
    """All per-trial channel draws for a scenario, in trial order."""
    count = scenario.mc_trials if trials is None else trials
    if count < 1:
        raise ConfigError(f"trials must be >= 1, got {count!r}")
    return list(_cached_trials(scenario.seed, count, channel_kind(scenario.kind), scenario.dims))


def average_points(crs, srs) -> tuple:
    """Mean and standard error of per-trial rate pairs, in trial order."""
    crs = np.asarray(crs, dtype=float)
    srs = np.asarray(srs, dtype=float)
    if crs.size == 0:
        raise ConfigError("cannot average zero trials")
    mean = RatePoint(float(np.mean(crs)), float(np.mean(srs)))
    if crs.size == 1:
        return mean, RatePoint(0.0, 0.0)
    se = RatePoint(
        float(np.std(crs, ddof=1) / np.sqrt(crs.size)),
        float(np.std(srs, ddof=1) / np.sqrt(srs.size)),
    )
    return mean, se


def ergodic_average(scenario: ScenarioConfig, point_evaluator, trials: int | None = None) -> tuple:
    """Arithmetic mean of point_evaluator over independently seeded channels.

    Returns (mean RatePoint, standard-error RatePoint); accumulation runs in
    trial-index order.
    """
    channels = trial_channels(scenario, trials)
    points = [point_evaluator(ch) for ch in channels]
    return average_points([pt.cr for pt in points], [pt.sr for pt in points])


def thread_count() -> int:
    """Worker count from ISAC_MI_THREADS (default: machine parallelism)."""
    raw = os.environ.get(THREADS_ENV_VAR, "").strip()
    if raw:
        try:
            value = int(raw)
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from exc
        if value < 1:
            raise ConfigError(f"{THREADS_ENV_VAR} must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1


def parallel_map(fn, items) -> list:
    """Map fn over items with the configured worker count.

    Each item is evaluated independently and results are returned in input
    order, so the worker count never changes the output.
    """
    items = list(items)
    workers = min(thread_count(), max(len(items), 1))
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
