"""Closed-form mutual-information kernels.

Communication MI is the Shannon log-det rate of a Gaussian MIMO channel.
Sensing MI is the information the echo carries about a random linear
target response whose second-order statistics are given by a correlation
matrix R, probed with a deterministic transmit covariance Q; it reduces to
an eigenvalue cross-sum which is exact for both white and colored
(spatially correlated, slot-independent) interference-plus-noise.

All functions are pure and accept plain numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateNoiseError

_LN2 = float(np.log(2.0))
_DEGENERATE_EIG = 1e-14
_PSD_EIG_TOL = -1e-10


class NoiseModel:
    """Interference-plus-noise model at the receiving array."""


@dataclass(frozen=True)
class White(NoiseModel):
    """Spatially white noise of the given per-antenna power."""

    power: float

    def __post_init__(self):
        if not (self.power > 0.0):
            raise ConfigError(f"white noise power must be > 0, got {self.power!r}")


@dataclass(frozen=True)
class Colored(NoiseModel):
    """Noise with a full Hermitian positive-definite spatial covariance."""

    cov: np.ndarray

    def __post_init__(self):
        cov = np.asarray(self.cov, dtype=complex)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise ConfigError(f"noise covariance must be square, got shape {cov.shape}")
        if np.max(np.abs(cov - cov.conj().T)) > 1e-12:
            raise ConfigError("noise covariance is not Hermitian within 1e-12")
        if np.linalg.eigvalsh(cov).min() <= 0.0:
            raise ConfigError("noise covariance must be positive definite")
        out = np.array(cov, copy=True)
        out.setflags(write=False)
        object.__setattr__(self, "cov", out)


def noise_eigenvalues(noise: NoiseModel, n: int) -> np.ndarray:
    """Eigenvalues of the n x n noise covariance, checked for degeneracy."""
    if isinstance(noise, White):
        eigs = np.full(n, float(noise.power))
    elif isinstance(noise, Colored):
        if noise.cov.shape[0] != n:
            raise ConfigError(f"noise covariance is {noise.cov.shape[0]}x{noise.cov.shape[0]}, expected {n}x{n}")
        eigs = np.linalg.eigvalsh(noise.cov)
    else:
        raise ConfigError(f"unsupported noise model {type(noise).__name__}")
    if eigs.min() <= _DEGENERATE_EIG:
        raise DegenerateNoiseError(
            f"noise covariance min eigenvalue {eigs.min():.3e} <= {_DEGENERATE_EIG:g}"
        )
    return eigs


def _whitened_columns(h_matrix: np.ndarray, noise: NoiseModel) -> np.ndarray:
    """Return S^{-1/2} H for noise covariance S."""
    n = h_matrix.shape[0]
    if isinstance(noise, White):
        noise_eigenvalues(noise, n)
        return h_matrix / np.sqrt(noise.power)
    eigs = noise_eigenvalues(noise, n)
    _, vecs = np.linalg.eigh(np.asarray(noise.cov))
    inv_sqrt = (vecs / np.sqrt(eigs)) @ vecs.conj().T
    return inv_sqrt @ h_matrix


def _gram_logdet_bits(a: np.ndarray) -> float:
    """log2 det(I + A A^H) through the smaller Gram matrix."""
    if a.shape[1] <= a.shape[0]:
        gram = a.conj().T @ a
    else:
        gram = a @ a.conj().T
    eigs = np.clip(np.linalg.eigvalsh(gram), 0.0, None)
    return float(np.sum(np.log1p(eigs)) / _LN2)


def _check_channel_powers(h_matrix, user_powers):
    h = np.asarray(h_matrix, dtype=complex)
    p = np.asarray(user_powers, dtype=float)
    if h.ndim != 2:
        raise ConfigError(f"channel matrix must be 2-D, got shape {h.shape}")
    if p.ndim != 1 or p.shape[0] != h.shape[1]:
        raise ConfigError(
            f"user_powers must be a length-{h.shape[1]} vector, got shape {p.shape}"
        )
    if np.any(p < 0):
        raise ConfigError("user powers must be >= 0")
    return h, p


def comm_mi(h_matrix, user_powers, noise: NoiseModel) -> float:
    """Sum communication MI log2 det(I + S^{-1} H diag(p) H^H) in bits/s/Hz."""
    h, p = _check_channel_powers(h_matrix, user_powers)
    a = _whitened_columns(h, noise) * np.sqrt(p)[None, :]
    return _gram_logdet_bits(a)


def mmse_sic_user_rates(h_matrix, user_powers, noise: NoiseModel, order) -> np.ndarray:
    """Per-user rates of an MMSE-SIC receiver with the given decode order.

    order[0] is decoded first and sees every later user as interference;
    rates are returned indexed by user, and sum to comm_mi for any order.
    """
    h, p = _check_channel_powers(h_matrix, user_powers)
    n, k = h.shape
    order = list(order)
    if sorted(order) != list(range(k)):
        raise ConfigError(f"order must be a permutation of 0..{k - 1}, got {order!r}")
    if isinstance(noise, White):
        noise_eigenvalues(noise, n)
        cov = noise.power * np.eye(n, dtype=complex)
    else:
        noise_eigenvalues(noise, n)
        cov = np.array(noise.cov, dtype=complex)
    rates = np.zeros(k)
    # Walk the order backwards, accumulating decoded-later users into the
    # interference covariance seen by earlier decode stages.
    for user in reversed(order):
        hv = h[:, user]
        gain = float(np.real(hv.conj() @ np.linalg.solve(cov, hv)))
        rates[user] = np.log1p(max(p[user] * gain, 0.0)) / _LN2
        cov = cov + p[user] * np.outer(hv, hv.conj())
    return rates


def psd_sqrt(mat: np.ndarray) -> np.ndarray:
    """Hermitian PSD square root via eigendecomposition."""
    m = np.asarray(mat, dtype=complex)
    eigs, vecs = np.linalg.eigh((m + m.conj().T) / 2.0)
    eigs = np.clip(eigs, 0.0, None)
    return (vecs * np.sqrt(eigs)) @ vecs.conj().T


def _check_psd(mat: np.ndarray, name: str) -> np.ndarray:
    m = np.asarray(mat, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigError(f"{name} must be square, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > 1e-10 * max(1.0, float(np.max(np.abs(m)))):
        raise ConfigError(f"{name} is not Hermitian")
    m = (m + m.conj().T) / 2.0
    eigs = np.linalg.eigvalsh(m)
    if eigs.min() < _PSD_EIG_TOL * max(1.0, float(eigs.max())):
        raise ConfigError(f"{name} has eigenvalue {eigs.min():.3e}; not PSD")
    return m


def cross_sum_bits(ell: np.ndarray, nu: np.ndarray) -> float:
    """Sum over i, j of log2(1 + ell_i / nu_j).

    ell may carry leading batch dimensions; the last axis is summed against
    every noise eigenvalue.
    """
    ell = np.clip(np.asarray(ell, dtype=float), 0.0, None)
    nu = np.asarray(nu, dtype=float)
    ratios = ell[..., None, :] / nu[..., :, None]
    return np.sum(np.log1p(ratios), axis=(-2, -1)) / _LN2


def signal_eigenvalues(r_corr: np.ndarray, q_cov: np.ndarray, l_frame: int) -> np.ndarray:
    """Eigenvalues of L * R^{1/2} Q R^{1/2} (the per-mode echo SNies)."""
    rh = psd_sqrt(r_corr)
    prod = rh @ np.asarray(q_cov, dtype=complex) @ rh
    prod = (prod + prod.conj().T) / 2.0
    return np.clip(np.linalg.eigvalsh(prod), 0.0, None) * float(l_frame)


def sensing_mi(r_corr, q_cov, l_frame: int, n_rx: int, noise: NoiseModel) -> float:
    """Sensing MI in bits per frame for transmit covariance q_cov.

    Equals log2 det(I_NL + B kron S^{-1}) for any waveform W with
    W W^H = L Q and B = W^H R W; with white noise this is
    N * log2 det(I_M + (L / sigma^2) R^{1/2} Q R^{1/2}).
    """
    r = _check_psd(r_corr, "r_corr")
    q = _check_psd(q_cov, "q_cov")
    if q.shape != r.shape:
        raise ConfigError(f"q_cov shape {q.shape} does not match r_corr shape {r.shape}")
    if l_frame < 1 or n_rx < 1:
        raise ConfigError("l_frame and n_rx must be >= 1")
    ell = signal_eigenvalues(r, q, l_frame)
    nu = noise_eigenvalues(noise, n_rx)
    return float(cross_sum_bits(ell, nu))


def sensing_interference_power(r_corr, q_cov) -> float:
    """Average per-slot, per-antenna echo power trace(R Q) of a probing
    waveform carrying covariance q_cov with equal per-slot power."""
    r = _check_psd(r_corr, "r_corr")
    q = _check_psd(q_cov, "q_cov")
    return max(float(np.trace(r @ q).real), 0.0)
