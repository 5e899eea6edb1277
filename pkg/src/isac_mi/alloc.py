"""Power-allocation and covariance optimizers.

Contains classic water-filling, the sum-power iterative water-filling for
the dual multiple-access channel, the MAC-to-broadcast duality transform,
and probing-waveform synthesis.  The iterative optimizer works entirely in
Gram space (K x K inner products) so it stays cheap for large trial
batches; `_iwf_gram` is the batched core and the public ops wrap it with
batch size one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ConvergenceError, InfeasibleFrameError
from .mi_core import psd_sqrt

_LN2 = float(np.log(2.0))
_TINY_GAIN = 1e-300


@dataclass(frozen=True)
class WaterFillResult:
    """Outcome of a single water-filling solve."""

    allocations: np.ndarray
    water_level: float
    iterations: int


@dataclass(frozen=True)
class DualMacSolution:
    """Sum-rate-optimal dual-MAC powers and the matching BC covariances."""

    user_powers: np.ndarray
    sum_rate: float
    bc_covariances: tuple
    encoding_order: tuple


def water_fill(gains, budget: float, noise: float) -> WaterFillResult:
    """Allocate `budget` over parallel channels with the given gains.

    Maximizes sum log2(1 + gains_i * q_i / noise) subject to sum(q) = budget,
    q >= 0.  The water level is found by bisection and then polished with an
    exact active-set solve so the budget is met to float precision.
    """
    g = np.asarray(gains, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise ConfigError(f"gains must be a nonempty 1-D array, got shape {g.shape}")
    if np.any(g <= 0.0):
        raise ConfigError("water_fill gains must be > 0")
    if not (noise > 0.0):
        raise ConfigError(f"noise must be > 0, got {noise!r}")
    if not (budget >= 0.0):
        raise ConfigError(f"budget must be >= 0, got {budget!r}")

    floors = noise / g
    if budget == 0.0:
        return WaterFillResult(np.zeros_like(floors), float(floors.min()), 0)

    lo = float(floors.min())
    hi = float(floors.max()) + float(budget)
    iterations = 0
    for _ in range(200):
        iterations += 1
        mid = 0.5 * (lo + hi)
        if np.sum(np.maximum(0.0, mid - floors)) < budget:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, abs(hi)):
            break
    mu = 0.5 * (lo + hi)

    # Exact refinement on the bisection's active set.
    active = floors < mu
    if not np.any(active):
        active = floors == floors.min()
    for _ in range(floors.size + 1):
        mu = (budget + floors[active].sum()) / active.sum()
        new_active = floors < mu
        if not np.any(new_active):
            new_active = floors == floors.min()
        if np.array_equal(new_active, active):
            break
        active = new_active
    q = np.where(active, np.maximum(mu - floors, 0.0), 0.0)
    return WaterFillResult(q, float(mu), iterations)


def _water_fill_exact(floors: np.ndarray, budget) -> np.ndarray:
    """Vectorized exact water-filling over the trailing axis.

    floors has shape (..., n) holding noise/gain; budget broadcasts over the
    leading axes.  Returns allocations of the same shape as floors.
    """
    floors = np.asarray(floors, dtype=float)
    budget = np.asarray(budget, dtype=float)
    n = floors.shape[-1]
    srt = np.sort(floors, axis=-1)
    csum = np.cumsum(srt, axis=-1)
    counts = np.arange(1, n + 1, dtype=float)
    # Candidate water level when the k cheapest channels are active.
    mu_k = (budget[..., None] + csum) / counts
    # Valid iff mu_k exceeds the k-th floor and (for k < n) does not exceed
    # the next floor; the largest valid k is the true active count.
    ok = mu_k >= srt
    k_idx = np.sum(ok, axis=-1) - 1
    k_idx = np.clip(k_idx, 0, n - 1)
    mu = np.take_along_axis(mu_k, k_idx[..., None], axis=-1)
    q = np.maximum(mu - floors, 0.0)
    return np.where(budget[..., None] > 0.0, q, 0.0)


def _project_simplex(y: np.ndarray, budget: float) -> np.ndarray:
    """Euclidean projection of each row of y onto {x >= 0, sum x = budget}."""
    y = np.asarray(y, dtype=float)
    n = y.shape[-1]
    srt = np.sort(y, axis=-1)[..., ::-1]
    csum = np.cumsum(srt, axis=-1)
    counts = np.arange(1, n + 1, dtype=float)
    tau = (csum - budget) / counts
    k_idx = np.sum(srt > tau, axis=-1) - 1
    k_idx = np.clip(k_idx, 0, n - 1)
    tau_star = np.take_along_axis(tau, k_idx[..., None], axis=-1)
    return np.maximum(y - tau_star, 0.0)


def _gram_objective_bits(gram: np.ndarray, p: np.ndarray, sigma2: float) -> np.ndarray:
    """log2 det(I_K + D^{1/2} G D^{1/2} / sigma2) for batched Gram matrices."""
    k = gram.shape[-1]
    if k == 1:
        return np.log1p(np.maximum(p[..., 0] * gram[..., 0, 0].real, 0.0) / sigma2) / _LN2
    if k == 2:
        g11 = gram[..., 0, 0].real
        g22 = gram[..., 1, 1].real
        a12 = np.abs(gram[..., 0, 1]) ** 2
        m11 = 1.0 + p[..., 0] * g11 / sigma2
        m22 = 1.0 + p[..., 1] * g22 / sigma2
        det = m11 * m22 - p[..., 0] * p[..., 1] * a12 / sigma2**2
        return np.log2(np.maximum(det, np.finfo(float).tiny))
    root = np.sqrt(np.maximum(p, 0.0))
    scaled = gram * root[..., :, None] * root[..., None, :] / sigma2
    eye = np.eye(k)
    sign, logdet = np.linalg.slogdet(eye + scaled)
    return logdet / _LN2


def _loo_gains(gram: np.ndarray, p: np.ndarray, sigma2: float) -> np.ndarray:
    """Leave-one-out effective gains h_k^H (sigma2 I + sum_{j != k} p_j h_j h_j^H)^{-1} h_k."""
    b = gram.shape[0]
    k = gram.shape[-1]
    diag = np.einsum("bii->bi", gram).real
    if k == 1:
        return diag[:, 0:1] / sigma2
    if k == 2:
        a12 = np.abs(gram[:, 0, 1]) ** 2
        gain1 = (diag[:, 0] - p[:, 1] * a12 / (sigma2 + p[:, 1] * diag[:, 1])) / sigma2
        gain2 = (diag[:, 1] - p[:, 0] * a12 / (sigma2 + p[:, 0] * diag[:, 0])) / sigma2
        return np.stack([gain1, gain2], axis=1)
    gains = np.empty((b, k))
    idx = np.arange(k)
    for u in range(k):
        rest = idx[idx != u]
        g_sub = gram[np.ix_(np.arange(b), rest, rest)]
        g_col = gram[:, rest, u]
        root = np.sqrt(np.maximum(p[:, rest], 0.0))
        core = sigma2 * np.eye(k - 1) + g_sub * root[:, :, None] * root[:, None, :]
        rhs = (root * g_col)[..., None]
        sol = np.linalg.solve(core, rhs)[..., 0]
        corr = np.real(np.einsum("bi,bi->b", np.conj(root * g_col), sol))
        gains[:, u] = (diag[:, u] - corr) / sigma2
    return np.maximum(gains, 0.0)


def _iwf_gram(gram: np.ndarray, budget: float, sigma2: float,
              tol: float, max_iter: int, trace_out: list | None = None):
    """Batched sum-power iterative water-filling on Gram matrices.

    gram has shape (B, K, K) with entries h_j^H h_k.  Returns
    (powers (B, K), sum_rate_bits (B,), iterations, converged (B,)).
    Raises ConvergenceError if any row fails to reach the stationarity
    tolerance within max_iter iterations.
    """
    gram = np.asarray(gram, dtype=complex)
    b, k, _ = gram.shape
    if not (budget >= 0.0):
        raise ConfigError(f"budget must be >= 0, got {budget!r}")
    if not (sigma2 > 0.0):
        raise ConfigError(f"sigma2_c must be > 0, got {sigma2!r}")
    if not (tol > 0.0):
        raise ConfigError(f"tol must be > 0, got {tol!r}")

    if budget == 0.0 or k == 0:
        p = np.zeros((b, k))
        if trace_out is not None:
            trace_out.append(np.zeros(b))
        return p, np.zeros(b), 0, np.ones(b, dtype=bool)

    p = np.full((b, k), budget / k)
    obj = _gram_objective_bits(gram, p, sigma2)
    if trace_out is not None:
        trace_out.append(obj.copy())
    converged = np.zeros(b, dtype=bool)
    iterations = 0

    for iterations in range(1, max_iter + 1):
        gains = _loo_gains(gram, p, sigma2)
        grad = gains / (1.0 + p * gains) / _LN2
        residual = _project_simplex(p + grad, budget) - p
        converged = np.linalg.norm(residual, axis=1) <= tol
        if np.all(converged):
            iterations -= 1
            break

        floors = np.where(gains > _TINY_GAIN, 1.0 / np.maximum(gains, _TINY_GAIN), np.inf)
        cand = _water_fill_exact(floors, np.full(b, float(budget)))
        # Averaged update keeps the iteration provably convergent for any K.
        step = np.full(b, 1.0 / k if k > 1 else 1.0)
        p_new = p + step[:, None] * (cand - p)
        obj_new = _gram_objective_bits(gram, p_new, sigma2)
        # Monotonicity safeguard: halve the step on rows that lost objective.
        for _ in range(60):
            bad = (~converged) & (obj_new < obj - 1e-13 * np.maximum(1.0, np.abs(obj)))
            if not np.any(bad):
                break
            step = np.where(bad, step / 2.0, step)
            p_new = p + step[:, None] * (cand - p)
            obj_new = _gram_objective_bits(gram, p_new, sigma2)
        p = np.where(converged[:, None], p, p_new)
        obj = np.where(converged, obj, obj_new)
        if trace_out is not None:
            trace_out.append(obj.copy())

    if not np.all(converged):
        raise ConvergenceError(
            f"sum_power_iwf: {int(np.sum(~converged))} of {b} instances not stationary "
            f"within {max_iter} iterations (tol={tol:g})",
            last_iterate=p,
        )
    return p, _gram_objective_bits(gram, p, sigma2), iterations, converged


def _channels_array(downlink_channels) -> np.ndarray:
    h = np.asarray(downlink_channels, dtype=complex)
    if h.ndim != 2:
        raise ConfigError(f"downlink channels must form a (K, M) array, got shape {h.shape}")
    return h


def sum_power_iwf(downlink_channels, budget: float, sigma2_c: float,
                  tol: float = 1e-9, max_iter: int = 2000) -> DualMacSolution:
    """Maximize the dual-MAC sum rate log2 det(I + sigma^-2 sum p_k h_k h_k^H).

    Iterates simultaneous water-filling with (K-1)/K averaging until the
    projected-gradient norm drops below tol, then maps the powers to
    broadcast covariances through the duality transform.
    """
    h = _channels_array(downlink_channels)
    gram = np.conj(h) @ h.T
    p, rate, _, _ = _iwf_gram(gram[None, :, :], budget, sigma2_c, tol, max_iter)
    covs, order = mac_to_bc_transform(h, p[0], sigma2_c)
    return DualMacSolution(
        user_powers=p[0],
        sum_rate=float(rate[0]),
        bc_covariances=tuple(covs),
        encoding_order=order,
    )


def mac_to_bc_transform(downlink_channels, mac_powers, sigma2_c: float):
    """Map dual-MAC powers to broadcast covariances with equal per-user rates.

    Returns (covariances indexed by user, encoding order).  The encoding
    order is fixed to decreasing channel norm; the matching MAC decode
    order is its reverse, and the per-user DPC rates under the returned
    covariances equal the MAC rates.  Total trace equals the total MAC
    power (duality).
    """
    h = _channels_array(downlink_channels)
    p = np.asarray(mac_powers, dtype=float)
    k, m = h.shape
    if p.shape != (k,):
        raise ConfigError(f"mac_powers must have shape ({k},), got {p.shape}")
    if np.any(p < 0):
        raise ConfigError("mac_powers must be >= 0")
    if not (sigma2_c > 0.0):
        raise ConfigError(f"sigma2_c must be > 0, got {sigma2_c!r}")

    norms = np.linalg.norm(h, axis=1)
    encoding_order = tuple(int(u) for u in np.argsort(-norms, kind="stable"))
    decode_order = encoding_order[::-1]

    # Interference-plus-noise suffix covariances in MAC decode order.
    z_suffix = [None] * (k + 1)
    z_suffix[k] = sigma2_c * np.eye(m, dtype=complex)
    for i in range(k - 1, -1, -1):
        u = decode_order[i]
        z_suffix[i] = z_suffix[i + 1] + p[u] * np.outer(h[u], h[u].conj())

    covariances = [np.zeros((m, m), dtype=complex) for _ in range(k)]
    beams = []
    scales = []
    for i, u in enumerate(decode_order):
        hv = h[u]
        if p[u] <= 0.0 or norms[u] == 0.0:
            beams.append(np.zeros(m, dtype=complex))
            scales.append(0.0)
            continue
        direction = np.linalg.solve(z_suffix[i + 1], hv)
        gain = float(np.real(hv.conj() @ direction))
        if gain <= 0.0:
            beams.append(np.zeros(m, dtype=complex))
            scales.append(0.0)
            continue
        sinr = p[u] * gain
        v = direction / np.linalg.norm(direction)
        peak = float(np.abs(hv.conj() @ v) ** 2)
        interference = sigma2_c + sum(
            q * float(np.abs(hv.conj() @ w) ** 2) for q, w in zip(scales, beams)
        )
        q_u = sinr * interference / peak
        covariances[u] = q_u * np.outer(v, v.conj())
        beams.append(v)
        scales.append(q_u)
    return covariances, encoding_order


def _mac_to_bc_batch(channels: np.ndarray, powers: np.ndarray, sigma2_c: float):
    """Batched duality transform.

    channels: (B, K, M) rows h_k per trial; powers: (B, K).  Returns
    (scales (B, K), beams (B, K, M)) indexed by user, from which the BC
    covariance of user k is scales[:, k] * outer(beams[:, k], conj).
    """
    b, k, m = channels.shape
    norms = np.linalg.norm(channels, axis=2)
    decode = np.argsort(norms, axis=1, kind="stable")  # increasing norm
    hd = np.take_along_axis(channels, decode[:, :, None], axis=1)
    pd = np.take_along_axis(powers, decode, axis=1)

    eye = sigma2_c * np.eye(m, dtype=complex)
    z_suffix = [None] * (k + 1)
    z_suffix[k] = np.broadcast_to(eye, (b, m, m)).copy()
    for i in range(k - 1, -1, -1):
        outer = hd[:, i, :, None] * hd[:, i, None, :].conj()
        z_suffix[i] = z_suffix[i + 1] + pd[:, i, None, None] * outer

    beams_d = np.zeros((b, k, m), dtype=complex)
    scales_d = np.zeros((b, k))
    for i in range(k):
        hv = hd[:, i]
        direction = np.linalg.solve(z_suffix[i + 1], hv[..., None])[..., 0]
        gain = np.maximum(np.real(np.einsum("bm,bm->b", hv.conj(), direction)), 0.0)
        dir_norm = np.linalg.norm(direction, axis=1)
        usable = (pd[:, i] > 0.0) & (gain > 0.0) & (dir_norm > 0.0)
        v = np.where(usable[:, None], direction / np.where(dir_norm > 0, dir_norm, 1.0)[:, None], 0.0)
        peak = np.abs(np.einsum("bm,bm->b", hv.conj(), v)) ** 2
        interference = np.full(b, sigma2_c)
        for j in range(i):
            cross = np.abs(np.einsum("bm,bm->b", hv.conj(), beams_d[:, j])) ** 2
            interference = interference + scales_d[:, j] * cross
        sinr = pd[:, i] * gain
        q = np.where(usable, sinr * interference / np.where(peak > 0, peak, 1.0), 0.0)
        beams_d[:, i] = v
        scales_d[:, i] = q

    # Scatter back to user indexing.
    beams = np.zeros_like(beams_d)
    scales = np.zeros_like(scales_d)
    np.put_along_axis(scales, decode, scales_d, axis=1)
    rows = np.repeat(np.arange(b)[:, None], k, axis=1)
    beams[rows, decode] = beams_d
    return scales, beams


def sr_optimal_covariance(r_corr, budget: float, sigma2_s: float,
                          l_frame: int, n_rx: int | None = None) -> np.ndarray:
    """Sensing-rate-optimal transmit covariance.

    Water-fills the budget over the eigen-directions of the target
    correlation matrix against gains lambda_i * L / sigma2_s.  The receive
    antenna count only scales the rate, not the optimizer, and is accepted
    for interface completeness.
    """
    r = np.asarray(r_corr, dtype=complex)
    if not (budget >= 0.0):
        raise ConfigError(f"budget must be >= 0, got {budget!r}")
    if not (sigma2_s > 0.0):
        raise ConfigError(f"sigma2_s must be > 0, got {sigma2_s!r}")
    m = r.shape[0]
    if budget == 0.0:
        return np.zeros((m, m), dtype=complex)
    eigs, vecs = np.linalg.eigh((r + r.conj().T) / 2.0)
    positive = eigs > max(eigs.max(), 0.0) * 1e-14
    if not np.any(positive):
        raise ConfigError("r_corr has no positive eigenvalue to allocate power on")
    gains = eigs[positive] * l_frame / sigma2_s
    alloc = water_fill(gains, budget, 1.0).allocations
    q_diag = np.zeros(m)
    q_diag[positive] = alloc
    return (vecs * q_diag) @ vecs.conj().T


def synthesize_waveform(q_cov, l_frame: int) -> np.ndarray:
    """Realize covariance q_cov as an M x L waveform with flat slot powers.

    Spreads the covariance square root over orthonormal discrete-Fourier
    rows, giving W W^H = L * Q exactly and per-slot power trace(Q) in every
    slot.
    """
    q = np.asarray(q_cov, dtype=complex)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ConfigError(f"q_cov must be square, got shape {q.shape}")
    if l_frame < 1:
        raise ConfigError(f"l_frame must be >= 1, got {l_frame!r}")
    m = q.shape[0]
    eigs, vecs = np.linalg.eigh((q + q.conj().T) / 2.0)
    if eigs.min() < -1e-10 * max(1.0, float(abs(eigs.max()))):
        raise ConfigError(f"q_cov has eigenvalue {eigs.min():.3e}; not PSD")
    keep = eigs > max(float(eigs.max()), 0.0) * 1e-12
    rank = int(np.sum(keep))
    if rank == 0:
        return np.zeros((m, l_frame), dtype=complex)
    if l_frame < rank:
        raise InfeasibleFrameError(
            f"synthesize_waveform: frame length {l_frame} < rank(q_cov) = {rank}"
        )
    roots = vecs[:, keep] * np.sqrt(eigs[keep])
    slots = np.arange(l_frame)
    rows = np.arange(rank)
    dft = np.exp(-2j * np.pi * np.outer(rows, slots) / l_frame) / np.sqrt(l_frame)
    return np.sqrt(l_frame) * roots @ dft
