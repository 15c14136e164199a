"""Time-local generator of the thermal-averaged map.

Two independent routes give the same canonical form

    d rho/dt = i[rho, U sigma_z] + G_dep (sigma_z rho sigma_z - rho)
               + G_d (s_- rho s_+ - {s_+ s_-, rho}/2)
               + G_a (s_+ rho s_- - {s_- s_+, rho}/2)

with s_+ = |0><1| and s_- = |1><0|:

* closed-form rates built from (A, B, C) and their analytic derivatives;
* the generic route L = dF/dt F^{-1} on the Hermitian Pauli basis, followed by
  reading the rates off the matrix entries.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .dynmap import apply_coefficients, coefficient_arrays, validate_state
from .errors import IntegrationError, SingularMapError
from .model import DEFAULT_POLICY, ModelParams, TruncationPolicy

SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()

PAULI_BASIS = np.array([
    np.eye(2),
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex) / np.sqrt(2)

SINGULAR_TOL = 1e-10
COND_MAX = 1e12


@dataclass(frozen=True)
class LindbladRates:
    u_eff: float
    gamma_dep: float
    gamma_d: float
    gamma_a: float
    time: float = float("nan")

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.u_eff, self.gamma_dep, self.gamma_d, self.gamma_a)


def _check_invertible(lam, cabs2, t, tol):
    bad = (lam <= tol) | (cabs2 <= tol**2)
    if np.any(bad):
        where = np.atleast_1d(t)[np.atleast_1d(bad)][0]
        raise SingularMapError(f"map not invertible at t={where:.6g}: 1-A-B or |C| below {tol:g}")


def rate_arrays(params: ModelParams, policy: TruncationPolicy, t, tol: float = SINGULAR_TOL):
    """Closed-form (U, G_dep, G_d, G_a) on a time grid."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("times must be non-negative")
    a, b, c = coefficient_arrays(params, policy, t)
    da, db, dc = coefficient_arrays(params, policy, t, order=1)
    lam = 1 - a - b
    cabs2 = np.abs(c) ** 2
    _check_invertible(lam, cabs2, t, tol)
    log_lam_dot = -(da + db) / lam
    cross = dc * np.conj(c) / cabs2  # d/dt log C
    half_diff_dot = (da - db) / 2
    u = -0.5 * cross.imag
    g_dep = 0.25 * (log_lam_dot - 2 * cross.real)
    g_d = half_diff_dot - (a - b + 1) / 2 * log_lam_dot
    g_a = -(half_diff_dot - (a - b - 1) / 2 * log_lam_dot)
    return u, g_dep, g_d, g_a


def rates_closed_form(params: ModelParams, policy: TruncationPolicy = DEFAULT_POLICY, t: float = 0.0,
                      tol: float = SINGULAR_TOL) -> LindbladRates:
    """Canonical rates at time ``t``; at t = 0 the dissipative rates vanish exactly."""
    u, g_dep, g_d, g_a = rate_arrays(params, policy, float(t), tol)
    return LindbladRates(float(u), float(g_dep), float(g_d), float(g_a), float(t))


def u_eff_derivative(params: ModelParams, policy: TruncationPolicy, t, tol: float = SINGULAR_TOL):
    """dU/dt from the analytic second derivative of C."""
    t = np.asarray(t, dtype=float)
    _, _, c = coefficient_arrays(params, policy, t)
    _, _, dc = coefficient_arrays(params, policy, t, order=1)
    _, _, ddc = coefficient_arrays(params, policy, t, order=2)
    cabs2 = np.abs(c) ** 2
    if np.any(cabs2 <= tol**2):
        raise SingularMapError("coherence multiplier vanishes")
    im = (dc * np.conj(c)).imag
    re = (dc * np.conj(c)).real
    return -0.5 * ((ddc * np.conj(c)).imag / cabs2 - 2 * im * re / cabs2**2)


def u_eff_ratio_form(c, dc):
    """U written through the ratio Re C / Im C; singular wherever Im C or Re C vanishes."""
    c = np.asarray(c, dtype=complex)
    dc = np.asarray(dc, dtype=complex)
    r = c.real / c.imag
    r_dot = (dc.real * c.imag - c.real * dc.imag) / c.imag**2
    # (1/4)(Im C/Re C) d/dt ln(1 + r^2)
    return 0.25 / r * (2 * r * r_dot / (1 + r**2))


def _derivative_action(da, db, dc, rho):
    out = np.empty((2, 2), dtype=complex)
    out[0, 0] = -da * rho[0, 0] + db * rho[1, 1]
    out[1, 1] = -db * rho[1, 1] + da * rho[0, 0]
    out[0, 1] = dc * rho[0, 1]
    out[1, 0] = np.conj(dc) * rho[1, 0]
    return out


def _superop_matrix(action) -> np.ndarray:
    m = np.empty((4, 4))
    for n, g_n in enumerate(PAULI_BASIS):
        image = action(g_n)
        for k, g_m in enumerate(PAULI_BASIS):
            m[k, n] = np.trace(g_m @ image).real
    return m


def transfer_matrix(a: float, b: float, c: complex) -> np.ndarray:
    """F_mn = Tr[G_m Phi(G_n)] for the map with coefficients (a, b, c)."""
    return _superop_matrix(lambda g: apply_coefficients(a, b, c, g))


def transfer_matrix_derivative(da: float, db: float, dc: complex) -> np.ndarray:
    return _superop_matrix(lambda g: _derivative_action(da, db, dc, g))


def transfer_pair(params: ModelParams, policy: TruncationPolicy, t: float):
    a, b, c = coefficient_arrays(params, policy, float(t))
    da, db, dc = coefficient_arrays(params, policy, float(t), order=1)
    return transfer_matrix(float(a), float(b), complex(c)), transfer_matrix_derivative(float(da), float(db), complex(dc))


def generator_from_transfer(F, Fdot, cond_max: float = COND_MAX) -> np.ndarray:
    """L = dF/dt F^{-1}; raises when F is numerically singular."""
    F = np.asarray(F, dtype=float)
    Fdot = np.asarray(Fdot, dtype=float)
    cond = np.linalg.cond(F)
    if not np.isfinite(cond) or cond > cond_max:
        raise SingularMapError(f"transfer matrix is singular (condition number {cond:.3g})")
    return np.linalg.solve(F.T, Fdot.T).T


def decompose_generator(L, time: float = float("nan")) -> LindbladRates:
    """Read (U, G_dep, G_d, G_a) off a generator of the phase-covariant family."""
    L = np.asarray(L, dtype=float)
    l_zz, l_z0 = L[3, 3], L[3, 0]
    mu_re = (L[1, 1] + L[2, 2]) / 2
    mu_im = (L[1, 2] - L[2, 1]) / 2
    g_sum = -l_zz
    g_diff = l_z0  # G_a - G_d
    return LindbladRates(
        u_eff=float(-mu_im / 2),
        gamma_dep=float(-(mu_re - l_zz / 2) / 2),
        gamma_d=float((g_sum - g_diff) / 2),
        gamma_a=float((g_sum + g_diff) / 2),
        time=float(time),
    )


def rates_from_transfer(params: ModelParams, policy: TruncationPolicy, t: float) -> LindbladRates:
    F, Fdot = transfer_pair(params, policy, t)
    return decompose_generator(generator_from_transfer(F, Fdot), t)


def lindblad_rhs(rho: np.ndarray, rates: LindbladRates) -> np.ndarray:
    u, g_dep, g_d, g_a = rates.as_tuple()
    h = u * SIGMA_Z
    sp, sm = SIGMA_PLUS, SIGMA_MINUS
    out = 1j * (rho @ h - h @ rho)
    out += g_dep * (SIGMA_Z @ rho @ SIGMA_Z - rho)
    pd = sp @ sm
    out += g_d * (sm @ rho @ sp - 0.5 * (pd @ rho + rho @ pd))
    pa = sm @ sp
    out += g_a * (sp @ rho @ sm - 0.5 * (pa @ rho + rho @ pa))
    return out


def integrate_master_equation(params: ModelParams, rho0, t_grid, policy: TruncationPolicy = DEFAULT_POLICY,
                              rtol: float = 1e-10, atol: float = 1e-12) -> np.ndarray:
    """Integrate the canonical master equation; returns states of shape (len(t_grid), 2, 2)."""
    rho0 = validate_state(rho0)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValueError("time grid must be a non-empty 1-d array")
    if t_grid[0] != 0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("time grid must start at 0 and be strictly ascending")
    if t_grid.size == 1:
        return rho0[None].copy()

    def rhs(t, y):
        rates = rates_closed_form(params, policy, t)
        return lindblad_rhs(y.reshape(2, 2), rates).ravel()

    try:
        sol = solve_ivp(rhs, (0.0, t_grid[-1]), rho0.ravel(), method="DOP853",
                        t_eval=t_grid, rtol=rtol, atol=atol)
    except SingularMapError as exc:
        raise SingularMapError(f"generator singular along trajectory: {exc}") from exc
    if not sol.success:
        raise IntegrationError(sol.message)
    return sol.y.T.reshape(-1, 2, 2)


def find_singularities(params: ModelParams, policy: TruncationPolicy, t_grid) -> List[Tuple[float, float]]:
    """Grid intervals on which 1 - A - B changes sign (non-invertible map)."""
    t_grid = np.asarray(t_grid, dtype=float)
    a, b, _ = coefficient_arrays(params, policy, t_grid)
    lam = 1 - a - b
    flips = np.nonzero(np.signbit(lam[:-1]) != np.signbit(lam[1:]))[0]
    return [(float(t_grid[i]), float(t_grid[i + 1])) for i in flips]
