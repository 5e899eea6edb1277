"""Shared helpers for the test suite."""

from dataclasses import replace

import numpy as np
import pytest

from isac_mi.model import default_scenario


def rand_complex(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def rand_psd(rng, n, rank=None):
    a = rand_complex(rng, (n, rank or n))
    return a @ a.conj().T


def rand_corr(rng, m):
    """Random Hermitian PSD matrix with trace m (a valid target correlation)."""
    r = rand_psd(rng, m)
    return r * (m / np.trace(r).real)


def kron_logdet_oracle(r_corr, waveform, noise_cov):
    """Independent NL x NL sensing-MI oracle: log2 det(I + kron(B, S^-1))
    with B = W^H R W built from an explicit waveform realization."""
    b = waveform.conj().T @ r_corr @ waveform
    big = np.kron(b, np.linalg.inv(noise_cov))
    _, logdet = np.linalg.slogdet(np.eye(big.shape[0]) + big)
    return logdet / np.log(2.0)


def small_scenario(kind, trials=60, grids=9):
    """Desk defaults shrunk for module-test speed."""
    base = default_scenario(kind)
    return replace(base, mc_trials=trials, rho_grid=grids, alpha_grid=grids, kappa_grid=grids)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
