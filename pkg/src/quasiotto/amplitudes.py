"""Closed-form amplitudes inside each excitation sector.

A bath number state |n_1 .. n_N> with total n = n_tot couples the qubit in two
independent branches:

* ground branch  |0, n>  <->  |1, n - e_i>   (collective coupling Delta*sqrt(n))
* excited branch |1, n>  <->  |0, n + e_i>   (collective coupling Delta*sqrt(n + N))

Each branch is an effective two-level problem, solved exactly below.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams


@dataclass(frozen=True)
class SectorFrequencies:
    """Frequencies of one excitation sector; primed fields belong to the excited branch."""

    alpha: float
    beta: float
    eta: float
    alpha_p: float
    beta_p: float
    eta_p: float


@dataclass(frozen=True)
class SectorAmplitudes:
    a_coeff: complex
    b_norm_sq: float
    c_coeff: complex
    d_norm_sq: float


def sector_frequencies(params: ModelParams, n_tot: int) -> SectorFrequencies:
    if n_tot < 0:
        raise ValueError("n_tot must be non-negative")
    w, d2, n_modes = params.mode_freq, params.coupling**2, params.n_modes
    beta = params.beta
    return SectorFrequencies(
        alpha=(2 * n_tot - 1) * w,
        beta=beta,
        eta=float(np.sqrt(beta**2 + 4 * n_tot * d2)),
        alpha_p=(2 * n_tot + 1) * w,
        beta_p=-beta,
        eta_p=float(np.sqrt(beta**2 + 4 * (n_tot + n_modes) * d2)),
    )


def sector_eta(params: ModelParams, n_tot):
    """Vectorized (eta, eta') over an array of sector labels."""
    n = np.asarray(n_tot, dtype=float)
    d2 = params.coupling**2
    eta = np.sqrt(params.beta**2 + 4 * n * d2)
    eta_p = np.sqrt(params.beta**2 + 4 * (n + params.n_modes) * d2)
    return eta, eta_p


def ground_sector_amplitudes(params: ModelParams, n_tot: int, t):
    """Return (A_t, sum_i |B_i,t|^2) for the branch started in |0, n>.

    ``t`` may be a scalar or an array; outputs broadcast accordingly.
    """
    f = sector_frequencies(params, n_tot)
    t = np.asarray(t, dtype=float)
    half = f.eta * t / 2
    a = np.exp(-1j * f.alpha * t / 2) * (np.cos(half) - 1j * (f.beta / f.eta) * np.sin(half))
    b_sq = 4 * n_tot * params.coupling**2 * (np.sin(half) / f.eta) ** 2
    return _unwrap(a), _unwrap(b_sq)


def excited_sector_amplitudes(params: ModelParams, n_tot: int, t):
    """Return (C_t, sum_i |D_i,t|^2) for the branch started in |1, n>."""
    f = sector_frequencies(params, n_tot)
    t = np.asarray(t, dtype=float)
    half = f.eta_p * t / 2
    c = np.exp(-1j * f.alpha_p * t / 2) * (np.cos(half) - 1j * (f.beta_p / f.eta_p) * np.sin(half))
    d_sq = 4 * (n_tot + params.n_modes) * params.coupling**2 * (np.sin(half) / f.eta_p) ** 2
    return _unwrap(c), _unwrap(d_sq)


def sector_amplitudes(params: ModelParams, n_tot: int, t: float) -> SectorAmplitudes:
    a, b_sq = ground_sector_amplitudes(params, n_tot, t)
    c, d_sq = excited_sector_amplitudes(params, n_tot, t)
    return SectorAmplitudes(complex(a), float(b_sq), complex(c), float(d_sq))


def mode_amplitudes(params: ModelParams, occupations, t: float):
    """Per-mode amplitudes for an explicit occupation vector.

    Returns ``(A, B, C, D)`` where ``B[i]`` multiplies |1, n - e_i> and ``D[i]``
    multiplies |0, n + e_i>. Only the totals enter the reduced map; the per-mode
    split is exposed for checking the N-mode transition structure.
    """
    occ = np.asarray(occupations, dtype=float)
    if occ.shape != (params.n_modes,) or np.any(occ < 0):
        raise ValueError("occupations must be a non-negative vector of length n_modes")
    n_tot = int(round(occ.sum()))
    f = sector_frequencies(params, n_tot)
    half, half_p = f.eta * t / 2, f.eta_p * t / 2
    phase, phase_p = np.exp(-1j * f.alpha * t / 2), np.exp(-1j * f.alpha_p * t / 2)
    a = phase * (np.cos(half) - 1j * (f.beta / f.eta) * np.sin(half))
    b = -2j * params.coupling * np.sqrt(occ) * phase * np.sin(half) / f.eta
    c = phase_p * (np.cos(half_p) - 1j * (f.beta_p / f.eta_p) * np.sin(half_p))
    d = -2j * params.coupling * np.sqrt(occ + 1) * phase_p * np.sin(half_p) / f.eta_p
    return complex(a), b, complex(c), d


def _unwrap(x):
    return x.item() if np.ndim(x) == 0 else x
