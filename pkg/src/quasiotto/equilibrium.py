"""Long-time averages of the map and equilibrium diagnostics.

The infinite-time average of sin^2(eta t / 2) is 1/2, so the averaged
transfer weights are Boltzmann sums of 2 n Delta^2 / eta^2; these sums collapse
to incomplete Beta functions of the Boltzmann factor z = exp(-gamma omega).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad, simpson

from .dynmap import coefficient_arrays, sector_table
from .errors import ParameterError
from .model import DEFAULT_POLICY, ModelParams, TruncationPolicy


class AveragingMethod(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    NUMERIC_AVERAGE = "numeric_average"
    TIME_AVERAGE = "time_average"


@dataclass(frozen=True)
class AveragedCoefficients:
    a_bar: float
    chi: float
    method: AveragingMethod = AveragingMethod.CLOSED_FORM

    @property
    def population_gap(self) -> float:
        return self.chi - self.a_bar


def scaled_incomplete_beta(z: float, a: float, b: float) -> float:
    """z^{-a} B_z(a, b), finite even when z^{-a} alone overflows.

    With t = z exp(-u/a) the defining integral becomes
    (1/a) int_0^inf exp(-u) (1 - z exp(-u/a))^{b-1} du, smooth for z < 1.
    """
    if not 0 <= z < 1:
        raise ParameterError("incomplete Beta needs 0 <= z < 1")
    if a <= 0:
        raise ParameterError("incomplete Beta needs a > 0")
    if z == 0:
        return 1.0 / a

    def integrand(u):
        return math.exp(-u + (b - 1) * math.log1p(-z * math.exp(-u / a)))

    val, _ = quad(integrand, 0, math.inf, epsabs=0, epsrel=1e-13, limit=200)
    return val / a


def incomplete_beta(z: float, a: float, b: float) -> float:
    """B_z(a, b) = int_0^z t^{a-1} (1-t)^{b-1} dt for any real b."""
    if z == 0 and a > 0:
        return 0.0
    return math.exp(a * math.log(z)) * scaled_incomplete_beta(z, a, b) if z > 0 else scaled_incomplete_beta(z, a, b)


def log_incomplete_beta(z: float, a: float, b: float) -> float:
    return a * math.log(z) + math.log(scaled_incomplete_beta(z, a, b))


def _closed_form(params: ModelParams):
    n, d = params.n_modes, params.coupling
    if d == 0:
        return 0.0, 0.0
    z = math.exp(-params.boltzmann_exponent)
    s = params.beta**2 / (4 * d**2)
    norm = (-math.expm1(-params.boltzmann_exponent)) ** n * n / 2
    a_bar = norm * z * scaled_incomplete_beta(z, s + 1, -n)
    chi = norm * (scaled_incomplete_beta(z, s + n, 1 - n) + z * scaled_incomplete_beta(z, s + n + 1, -n))
    return a_bar, chi


def _series(params: ModelParams, policy: TruncationPolicy):
    tab = sector_table(params, policy)
    a_bar = float(np.dot(tab.weights, tab.amp_a / (2 * tab.eta**2)))
    chi = float(np.dot(tab.weights, tab.amp_b / (2 * tab.eta_p**2)))
    return a_bar, chi


def averaged_coefficients(params: ModelParams, policy: TruncationPolicy = DEFAULT_POLICY,
                          method: AveragingMethod | str = AveragingMethod.CLOSED_FORM) -> AveragedCoefficients:
    method = AveragingMethod(method)
    if method is AveragingMethod.CLOSED_FORM:
        a_bar, chi = _closed_form(params)
    elif method is AveragingMethod.NUMERIC_AVERAGE:
        a_bar, chi = _series(params, policy)
    else:
        return time_averaged_coefficients(params, policy)
    return AveragedCoefficients(a_bar, chi, method)


def ratio_from_coefficients(coeffs: AveragedCoefficients, inv_temp: float, qubit_freq: float) -> float:
    gap = coeffs.population_gap
    if abs(gap) >= 1:
        raise ParameterError("|chi - A_bar| must be below 1")
    return math.atanh(gap) / (inv_temp * qubit_freq)


def thermalization_ratio(params: ModelParams, policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """R = artanh(chi - A_bar) / (gamma omega_0); R = 1 exactly when the averaged state is Gibbs."""
    return ratio_from_coefficients(averaged_coefficients(params, policy), params.inv_temp, params.qubit_freq)


def trace_distance_from_coefficients(coeffs: AveragedCoefficients, inv_temp: float, qubit_freq: float) -> float:
    return 0.5 * abs(coeffs.population_gap - math.tanh(inv_temp * qubit_freq))


def optimized_trace_distance(params: ModelParams, policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    return trace_distance_from_coefficients(averaged_coefficients(params, policy), params.inv_temp, params.qubit_freq)


def markovian_finite_average(a_rate: float, gibbs_pop: float, initial_pop: float, horizon: float) -> float:
    """(1/T) int_0^T of p(t) = p0 e^{-a t} + p_G (1 - e^{-a t})."""
    if a_rate <= 0:
        raise ParameterError("relaxation rate must be positive")
    if math.isinf(horizon):
        return gibbs_pop
    x = a_rate * horizon
    return gibbs_pop + (initial_pop - gibbs_pop) * (-math.expm1(-x)) / x


def markovian_average_sanity(a_rate: float, gibbs_pop: float, initial_pop: float = 1.0) -> float:
    """Long-time average population of the exponential-relaxation reference; equals ``gibbs_pop``."""
    return markovian_finite_average(a_rate, gibbs_pop, initial_pop, math.inf)


_ORDER = {"box": 1, "triangle": 2, "hann": 3}


def _window(kind: str, t: np.ndarray, horizon: float) -> np.ndarray:
    s = t / horizon
    if kind == "box":
        return np.full_like(t, 1 / horizon)
    if kind == "triangle":
        return 2 * (1 - s) / horizon
    if kind == "hann":
        return 2 * np.sin(np.pi * s) ** 2 / horizon
    raise ParameterError(f"unknown window {kind!r}")


def time_average(func: Callable[[np.ndarray], np.ndarray], horizon: float, window: str = "box",
                 n_points: int = 20001, richardson: bool = False):
    """Weighted average of ``func`` over [0, horizon] by Simpson's rule.

    ``func`` must be vectorized and may return extra trailing axes. With
    ``richardson`` the averages over T and 2T are combined to cancel the
    leading 1/T^p error of the window (p = 1, 2, 3 for box, triangle, hann).
    """
    if horizon <= 0:
        raise ParameterError("horizon must be positive")
    n_points = n_points | 1

    def once(T, n):
        t = np.linspace(0.0, T, n)
        vals = np.asarray(func(t))
        w = _window(window, t, T).reshape((-1,) + (1,) * (vals.ndim - 1))
        return simpson(vals * w, x=t, axis=0)

    base = once(horizon, n_points)
    if not richardson:
        return base
    p = _ORDER[window]
    longer = once(2 * horizon, 2 * n_points - 1)
    return (2**p * longer - base) / (2**p - 1)


def time_averaged_coefficients(params: ModelParams, policy: TruncationPolicy = DEFAULT_POLICY,
                               horizon: float = 2000.0, window: str = "hann",
                               points_per_period: int = 40, richardson: bool = False) -> AveragedCoefficients:
    """Brute-force time average of A_t and B_t over a finite horizon."""
    tab = sector_table(params, policy)
    eta_max = float(max(tab.eta.max(), tab.eta_p.max()))
    n_points = int(horizon * eta_max / (2 * np.pi) * points_per_period) + 1

    def both(t):
        a, b, _ = coefficient_arrays(params, policy, t)
        return np.stack([a, b], axis=-1)

    a_bar, chi = time_average(both, horizon, window, max(n_points, 2001), richardson)
    return AveragedCoefficients(float(a_bar), float(chi), AveragingMethod.TIME_AVERAGE)
