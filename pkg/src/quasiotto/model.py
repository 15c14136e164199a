"""Physical parameters, Fock-space truncation and partition functions.

Natural units are used throughout (hbar = k_B = 1), so every energy is an
angular frequency and the inverse temperature has units of time.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np
from scipy.special import gammaln
from scipy.stats import nbinom

from .errors import ParameterError, TruncationError

PARAM_KEYS = ("n_modes", "qubit_freq", "mode_freq", "coupling", "inv_temp")


@dataclass(frozen=True)
class ModelParams:
    """Qubit coupled to ``n_modes`` degenerate bosonic modes.

    Attributes
    ----------
    n_modes : int
        Number of bath modes N (all at ``mode_freq`` with coupling ``coupling``).
    qubit_freq : float
        Qubit frequency omega_0; the bare qubit Hamiltonian is omega_0 * sigma_z.
    mode_freq : float
        Mode frequency omega.
    coupling : float
        Qubit-mode coupling Delta, required to satisfy 0 <= Delta < omega.
    inv_temp : float
        Inverse bath temperature gamma.
    """

    n_modes: int
    qubit_freq: float
    mode_freq: float
    coupling: float
    inv_temp: float

    def __post_init__(self):
        if isinstance(self.n_modes, bool) or int(self.n_modes) != self.n_modes:
            raise ParameterError(f"n_modes must be an integer, got {self.n_modes!r}")
        object.__setattr__(self, "n_modes", int(self.n_modes))
        for name in ("qubit_freq", "mode_freq", "coupling", "inv_temp"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.n_modes < 1:
            raise ParameterError("need at least one mode (n_modes >= 1)")
        if self.qubit_freq <= 0 or self.mode_freq <= 0:
            raise ParameterError("non-positive frequency: qubit_freq and mode_freq must be > 0")
        if self.inv_temp <= 0:
            raise ParameterError("non-positive inverse temperature: inv_temp must be > 0")
        if self.coupling < 0:
            raise ParameterError("coupling must be non-negative")
        if self.coupling >= self.mode_freq:
            raise ParameterError("coupling exceeds mode frequency (need coupling < mode_freq)")

    @property
    def beta(self) -> float:
        """Detuning-like constant 2*omega_0 + omega shared by every sector."""
        return 2.0 * self.qubit_freq + self.mode_freq

    @property
    def boltzmann_exponent(self) -> float:
        """gamma * omega, the inverse temperature in units of the mode quantum."""
        return self.inv_temp * self.mode_freq

    def replace(self, **changes) -> "ModelParams":
        values = {key: getattr(self, key) for key in PARAM_KEYS}
        values.update(changes)
        return ModelParams(**values)

    def as_dict(self) -> dict:
        return {key: getattr(self, key) for key in PARAM_KEYS}


@dataclass(frozen=True)
class TruncationPolicy:
    """Cut every thermal sum once the normalized Boltzmann tail drops below ``tail_tolerance``."""

    tail_tolerance: float = 1e-12
    max_level_cap: int = 10_000

    def __post_init__(self):
        eps = float(self.tail_tolerance)
        if not 0.0 < eps < 1.0:
            raise ParameterError("tail_tolerance must lie in (0, 1)")
        if int(self.max_level_cap) != self.max_level_cap or self.max_level_cap < 1:
            raise ParameterError("max_level_cap must be a positive integer")
        object.__setattr__(self, "tail_tolerance", eps)
        object.__setattr__(self, "max_level_cap", int(self.max_level_cap))


DEFAULT_POLICY = TruncationPolicy()


def validate_params(raw: Mapping[str, Any]) -> ModelParams:
    """Build :class:`ModelParams` from a plain mapping, rejecting unknown or missing keys."""
    unknown = sorted(set(raw) - set(PARAM_KEYS))
    if unknown:
        raise ParameterError(f"unknown parameter key(s): {', '.join(unknown)}")
    missing = [key for key in PARAM_KEYS if key not in raw]
    if missing:
        raise ParameterError(f"missing parameter key(s): {', '.join(missing)}")
    values = {}
    for key in PARAM_KEYS:
        value = raw[key]
        if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
            raise ParameterError(f"{key} must be a number, got {type(value).__name__}")
        values[key] = value
    return ModelParams(**values)


def degeneracy(n_modes: int, n_tot) -> np.ndarray:
    """Number of N-mode occupation vectors with total photon number ``n_tot``: C(N+n-1, n)."""
    n_tot = np.asarray(n_tot)
    return np.exp(log_degeneracy(n_modes, n_tot))


def log_degeneracy(n_modes: int, n_tot) -> np.ndarray:
    n_tot = np.asarray(n_tot, dtype=float)
    return gammaln(n_modes + n_tot) - gammaln(n_tot + 1.0) - gammaln(n_modes)


def partition_function(params: ModelParams) -> float:
    """Z_N = (1 - exp(-gamma*omega))**(-N), the N-mode bath partition function."""
    x = params.boltzmann_exponent
    return float(np.exp(-params.n_modes * np.log1p(-np.exp(-x))))


def tail_weight(params: ModelParams, n_max: int) -> float:
    """Normalized Boltzmann weight carried by all sectors with total photon number > n_max."""
    # Bath photon number is negative-binomial with N successes and p = 1 - exp(-gamma*omega).
    p = -np.expm1(-params.boltzmann_exponent)
    return float(nbinom.sf(n_max, params.n_modes, p))


def truncation_level(params: ModelParams, policy: TruncationPolicy = DEFAULT_POLICY) -> int:
    """Smallest n_max whose neglected thermal tail weight is at most ``policy.tail_tolerance``."""
    p = -np.expm1(-params.boltzmann_exponent)
    levels = np.arange(policy.max_level_cap + 1)
    tails = nbinom.sf(levels, params.n_modes, p)
    ok = np.flatnonzero(tails <= policy.tail_tolerance)
    if ok.size == 0:
        raise TruncationError(
            f"cap exceeded: tail weight {tails[-1]:.3e} > {policy.tail_tolerance:.1e} "
            f"at max_level_cap={policy.max_level_cap} (gamma*omega={params.boltzmann_exponent:g})"
        )
    return int(ok[0])


def boltzmann_weights(params: ModelParams, n_max: int) -> np.ndarray:
    """g_N(n) exp(-gamma*n*omega) / Z_N for n = 0..n_max, evaluated in log space."""
    n = np.arange(n_max + 1, dtype=float)
    x = params.boltzmann_exponent
    log_w = log_degeneracy(params.n_modes, n) - x * n + params.n_modes * np.log1p(-np.exp(-x))
    return np.exp(log_w)
