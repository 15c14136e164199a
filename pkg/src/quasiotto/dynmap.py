"""Thermal-averaged dynamical map of the qubit.

With the bath initially thermal and uncorrelated with the qubit, the reduced
state evolves as

    rho_00(t) = (1 - A_t) rho_00 + B_t rho_11
    rho_11(t) = (1 - B_t) rho_11 + A_t rho_00
    rho_01(t) = C_t rho_01

where A_t, B_t, C_t are Boltzmann averages over excitation sectors of the
closed-form branch amplitudes.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .amplitudes import sector_eta
from .model import DEFAULT_POLICY, ModelParams, TruncationPolicy, boltzmann_weights, truncation_level

_CHUNK = 4096


@dataclass(frozen=True)
class MapCoefficients:
    a_pop: float
    b_pop: float
    c_coh: complex
    time: float = 0.0

    @property
    def invertibility_margin(self) -> float:
        """1 - A - B; the population block of the map is singular where this vanishes."""
        return 1.0 - self.a_pop - self.b_pop


@dataclass(frozen=True)
class SectorTable:
    """Precomputed per-sector data for one parameter set."""

    n_max: int
    n: np.ndarray
    weights: np.ndarray
    eta: np.ndarray
    eta_p: np.ndarray
    amp_a: np.ndarray  # 4 n Delta^2 prefactor of the ground-branch transfer
    amp_b: np.ndarray  # 4 (n + N) Delta^2 prefactor of the excited-branch transfer


@lru_cache(maxsize=256)
def sector_table(params: ModelParams, policy: TruncationPolicy = DEFAULT_POLICY) -> SectorTable:
    n_max = truncation_level(params, policy)
    n = np.arange(n_max + 1, dtype=float)
    eta, eta_p = sector_eta(params, n)
    # Renormalize over the retained sectors so the map is exactly the identity at t = 0.
    weights = boltzmann_weights(params, n_max)
    d2 = params.coupling**2
    table = SectorTable(
        n_max=n_max,
        n=n,
        weights=weights / weights.sum(),
        eta=eta,
        eta_p=eta_p,
        amp_a=4 * n * d2,
        amp_b=4 * (n + params.n_modes) * d2,
    )
    for arr in (table.n, table.weights, table.eta, table.eta_p, table.amp_a, table.amp_b):
        arr.setflags(write=False)
    return table


def _chunks(t: np.ndarray):
    for start in range(0, t.size, _CHUNK):
        yield slice(start, start + _CHUNK), t[start:start + _CHUNK, None]


def coefficient_arrays(params: ModelParams, policy: TruncationPolicy, t, order: int = 0):
    """Map coefficients and their analytic time derivatives on a time grid.

    Returns a tuple ``(A, B, C)`` of arrays shaped like ``t`` holding the
    ``order``-th time derivative (0, 1 or 2) of each coefficient. Derivatives
    are taken term by term inside the truncated series.
    """
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    tab = sector_table(params, policy)
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    out_a = np.empty(flat.size)
    out_b = np.empty(flat.size)
    out_c = np.empty(flat.size, dtype=complex)
    w, beta, omega = tab.weights, params.beta, params.mode_freq
    eta, eta_p = tab.eta, tab.eta_p
    for sl, tc in _chunks(flat):
        ph, ph_p = eta * tc / 2, eta_p * tc / 2
        if order == 0:
            out_a[sl] = (np.sin(ph) ** 2 / eta**2) @ (w * tab.amp_a)
            out_b[sl] = (np.sin(ph_p) ** 2 / eta_p**2) @ (w * tab.amp_b)
        elif order == 1:
            out_a[sl] = (np.sin(2 * ph) / (2 * eta)) @ (w * tab.amp_a)
            out_b[sl] = (np.sin(2 * ph_p) / (2 * eta_p)) @ (w * tab.amp_b)
        else:
            out_a[sl] = (np.cos(2 * ph) / 2) @ (w * tab.amp_a)
            out_b[sl] = (np.cos(2 * ph_p) / 2) @ (w * tab.amp_b)
        # Ground-branch factor A-like and conjugated excited-branch factor; both obey x'' = -(eta/2)^2 x.
        a = np.cos(ph) - 1j * (beta / eta) * np.sin(ph)
        cb = np.cos(ph_p) - 1j * (beta / eta_p) * np.sin(ph_p)
        s = (a * cb) @ w
        phase = np.exp(1j * omega * tc[:, 0])
        if order == 0:
            out_c[sl] = phase * s
            continue
        da = -(eta / 2) * np.sin(ph) - 1j * (beta / 2) * np.cos(ph)
        dcb = -(eta_p / 2) * np.sin(ph_p) - 1j * (beta / 2) * np.cos(ph_p)
        ds = (da * cb + a * dcb) @ w
        if order == 1:
            out_c[sl] = phase * (ds + 1j * omega * s)
            continue
        dds = (-(eta**2 + eta_p**2) / 4 * a * cb + 2 * da * dcb) @ w
        out_c[sl] = phase * (dds + 2j * omega * ds - omega**2 * s)
    shape = t.shape
    return out_a.reshape(shape), out_b.reshape(shape), out_c.reshape(shape)


@lru_cache(maxsize=4096)
def map_coefficients(params: ModelParams, policy: TruncationPolicy = DEFAULT_POLICY,
                     t: float = 0.0) -> MapCoefficients:
    if t < 0:
        raise ValueError("time must be non-negative")
    a, b, c = coefficient_arrays(params, policy, float(t))
    return MapCoefficients(float(a), float(b), complex(c), float(t))


def map_derivative(params: ModelParams, policy: TruncationPolicy = DEFAULT_POLICY,
                   t: float = 0.0, order: int = 1) -> MapCoefficients:
    """Time derivative of the coefficients, packed as :class:`MapCoefficients`."""
    a, b, c = coefficient_arrays(params, policy, float(t), order=order)
    return MapCoefficients(float(a), float(b), complex(c), float(t))


def validate_state(rho, atol: float = 1e-12) -> np.ndarray:
    """Return ``rho`` as a 2x2 complex array after checking it is a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError("qubit state must be a 2x2 matrix")
    if not np.allclose(rho, rho.conj().T, atol=atol, rtol=0):
        raise ValueError("qubit state is not Hermitian")
    if abs(np.trace(rho) - 1) > atol:
        raise ValueError("qubit state does not have unit trace")
    if np.linalg.eigvalsh(rho).min() < -atol:
        raise ValueError("qubit state is not positive semidefinite")
    return rho


def apply_coefficients(a, b, c, rho: np.ndarray) -> np.ndarray:
    """Apply the map with coefficients (a, b, c) to any 2x2 operator (linear, no checks)."""
    out = np.empty((2, 2), dtype=complex)
    out[0, 0] = (1 - a) * rho[0, 0] + b * rho[1, 1]
    out[1, 1] = (1 - b) * rho[1, 1] + a * rho[0, 0]
    out[0, 1] = c * rho[0, 1]
    out[1, 0] = np.conj(c) * rho[1, 0]
    return out


def apply_map(coeffs: MapCoefficients, rho0) -> np.ndarray:
    rho0 = validate_state(rho0)
    out = apply_coefficients(coeffs.a_pop, coeffs.b_pop, coeffs.c_coh, rho0)
    out[1, 0] = np.conj(out[0, 1])
    return out


def evolve_state(params: ModelParams, policy: TruncationPolicy, rho0, t) -> np.ndarray:
    """Reduced states on a time grid, shape ``(len(t), 2, 2)``."""
    rho0 = validate_state(rho0)
    a, b, c = coefficient_arrays(params, policy, np.atleast_1d(np.asarray(t, dtype=float)))
    out = np.empty((a.size, 2, 2), dtype=complex)
    out[:, 0, 0] = (1 - a) * rho0[0, 0] + b * rho0[1, 1]
    out[:, 1, 1] = (1 - b) * rho0[1, 1] + a * rho0[0, 0]
    out[:, 0, 1] = c * rho0[0, 1]
    out[:, 1, 0] = np.conj(out[:, 0, 1])
    return out


def choi_matrix(coeffs: MapCoefficients) -> np.ndarray:
    a, b, c = coeffs.a_pop, coeffs.b_pop, coeffs.c_coh
    return np.array([
        [1 - a, 0, 0, c],
        [0, a, 0, 0],
        [0, 0, b, 0],
        [np.conj(c), 0, 0, 1 - b],
    ], dtype=complex)


def choi_margin(coeffs: MapCoefficients) -> float:
    """Smallest Choi eigenvalue; the map is completely positive iff this is >= -1e-10."""
    return float(np.linalg.eigvalsh(choi_matrix(coeffs)).min())


def choi_margin_arrays(a, b, c) -> np.ndarray:
    """Vectorized smallest Choi eigenvalue for coefficient arrays."""
    a, b, c = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float), np.asarray(c, complex))
    # The Choi matrix splits into the 2x2 block [[1-a, c], [c*, 1-b]] and the diagonal (a, b).
    mean = (2 - a - b) / 2
    radius = np.sqrt(((b - a) / 2) ** 2 + np.abs(c) ** 2)
    return np.minimum(np.minimum(a, b), mean - radius)
