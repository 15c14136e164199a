"""Four-stroke quasi-Otto cycle driven by the long-time averaged bath contacts.

Strokes: unitary omega_c -> omega_h, hot contact, unitary omega_h -> omega_c,
cold contact. Populations are ground-level weights x = rho_00; a bath contact
maps x -> (1 - A_bar) x + chi (1 - x).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .dynmap import coefficient_arrays, validate_state
from .equilibrium import AveragedCoefficients, averaged_coefficients
from .errors import DegenerateCycleError, ParameterError
from .lindblad import rate_arrays, u_eff_derivative
from .model import DEFAULT_POLICY, ModelParams, TruncationPolicy

DEGENERACY_TOL = 1e-14


@dataclass(frozen=True)
class CycleSpec:
    omega_c: float = 1.0
    omega_h: float = 2.0
    gamma_c: float = 1.0
    gamma_h: float = 0.25
    x1: float = 0.9
    n_modes: int = 1
    coupling: float = 0.3
    coupling_h: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.omega_c < self.omega_h:
            raise ParameterError("need 0 < omega_c < omega_h")
        if not 0 < self.gamma_h < self.gamma_c:
            raise ParameterError("need 0 < gamma_h < gamma_c (hot bath hotter)")
        if not 0 <= self.x1 <= 1:
            raise ParameterError("x1 must lie in [0, 1]")

    @property
    def bath_params_h(self) -> ModelParams:
        d = self.coupling if self.coupling_h is None else self.coupling_h
        return ModelParams(self.n_modes, self.omega_h, self.omega_h, d, self.gamma_h)

    @property
    def bath_params_c(self) -> ModelParams:
        return ModelParams(self.n_modes, self.omega_c, self.omega_c, self.coupling, self.gamma_c)

    @property
    def tau(self) -> float:
        return self.gamma_h * self.omega_h / (self.gamma_c * self.omega_c)

    @property
    def eff_otto(self) -> float:
        return 1 - self.omega_c / self.omega_h

    @property
    def eff_carnot(self) -> float:
        return 1 - self.gamma_h / self.gamma_c

    def replace(self, **changes) -> "CycleSpec":
        return replace(self, **changes)


@dataclass(frozen=True)
class RegimeFlags:
    physical_engine: bool
    beats_otto: bool
    carnot_converged_case: bool
    energy_ratio: float
    band_lower: float
    band_upper: float
    boundary: bool = False


@dataclass
class CycleResult:
    x_seq: np.ndarray
    y_seq: np.ndarray
    w1: float
    w2: float
    dE_h: float
    dE_c: float
    eff_single: float
    eff_cumulative: np.ndarray
    eff_otto: float
    eff_carnot: float
    fixed_point: float
    gap: float
    flags: Optional[RegimeFlags] = None
    q_h: Optional[float] = None
    w_int_h: Optional[float] = None
    q_c: Optional[float] = None
    w_int_c: Optional[float] = None
    hot: Optional[AveragedCoefficients] = field(default=None, repr=False)
    cold: Optional[AveragedCoefficients] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {
            "x_seq": [float(v) for v in self.x_seq],
            "y_seq": [float(v) for v in self.y_seq],
            "works": {"w1": self.w1, "w2": self.w2},
            "energies": {"dE_h": self.dE_h, "dE_c": self.dE_c},
            "eff_single": self.eff_single,
            "eff_cumulative": [float(v) for v in self.eff_cumulative],
            "eff_otto": self.eff_otto,
            "eff_carnot": self.eff_carnot,
            "fixed_point": self.fixed_point,
            "gap": self.gap,
            "flags": None if self.flags is None else asdict(self.flags),
        }
        if self.q_h is not None:
            out["heat_work"] = {"q_h": self.q_h, "w_int_h": self.w_int_h, "q_c": self.q_c, "w_int_c": self.w_int_c}
        return out


def unitary_stroke_work(x: float, omega_from: float, omega_to: float) -> float:
    """Work (omega_from - omega_to)(2x - 1) of a frequency sweep at frozen populations."""
    return (omega_from - omega_to) * (2 * x - 1)


def bath_stroke_target(x, a_bar: float, chi: float):
    return (1 - a_bar) * x + chi * (1 - x)


def quasi_otto_efficiency(x1: float, y1: float, x2: float, omega_c: float, omega_h: float) -> float:
    if abs(y1 - x1) <= DEGENERACY_TOL:
        raise DegenerateCycleError("hot contact leaves the population unchanged (y1 = x1)")
    return 1 - (omega_c / omega_h) * abs((y1 - x2) / (y1 - x1))


def _contact_coefficients(params: ModelParams, policy: TruncationPolicy, contact_time: Optional[float]):
    if contact_time is None:
        return averaged_coefficients(params, policy)
    a, b, _ = coefficient_arrays(params, policy, float(contact_time))
    return AveragedCoefficients(float(a), float(b))


def bath_coefficients(spec: CycleSpec, policy: TruncationPolicy = DEFAULT_POLICY,
                      contact_time: Optional[float] = None):
    """(hot, cold) averaged coefficients; ``contact_time`` swaps in the finite-time map."""
    return (_contact_coefficients(spec.bath_params_h, policy, contact_time),
            _contact_coefficients(spec.bath_params_c, policy, contact_time))


def affine_update(hot: AveragedCoefficients, cold: AveragedCoefficients):
    """(a, b) with x_{i+1} = a x_i + b for one full cycle."""
    h_h = 1 - hot.a_bar - hot.chi
    h_c = 1 - cold.a_bar - cold.chi
    return h_c * h_h, h_c * hot.chi + cold.chi


def population_sequences(x1: float, hot: AveragedCoefficients, cold: AveragedCoefficients, runs: int):
    """x_1 .. x_{r+1} and y_1 .. y_r of ``runs`` consecutive cycles (closed form)."""
    a, b = affine_update(hot, cold)
    x_star = b / (1 - a)
    powers = np.power(a, np.arange(runs + 1, dtype=float))
    x = x_star + powers * (x1 - x_star)
    x[0] = x1
    y = bath_stroke_target(x[:-1], hot.a_bar, hot.chi)
    return x, y, x_star


def cumulative_efficiencies(x: np.ndarray, y: np.ndarray, omega_c: float, omega_h: float) -> np.ndarray:
    """E(r) = 1 - (omega_c/omega_h) |sum (y_i - x_{i+1}) / sum (y_i - x_i)| for r = 1 .. len(y)."""
    released = np.cumsum(y - x[1:])
    absorbed = np.cumsum(y - x[:-1])
    if np.any(np.abs(absorbed) <= DEGENERACY_TOL):
        raise DegenerateCycleError("cumulative hot-contact exchange vanishes")
    return 1 - (omega_c / omega_h) * np.abs(released / absorbed)


def regime_predicates(x1: float, omega_c: float, omega_h: float, gamma_c: float, gamma_h: float,
                      hot: AveragedCoefficients, cold: AveragedCoefficients) -> RegimeFlags:
    """Engine-regime checks on the energy ratio |(y1 - x2)/(y1 - x1)|.

    ``band_lower`` and ``band_upper`` are the two bounds on x1/(1 - x1) of
    the published condition; the boolean flags are decided on the ratio itself.
    """
    tau = gamma_h * omega_h / (gamma_c * omega_c)
    p_term = hot.chi * (1 - cold.a_bar) + cold.chi * (1 - hot.chi)
    q_term = hot.a_bar * (1 - cold.chi) + cold.a_bar * (1 - hot.a_bar)
    num = hot.a_bar * (1 - tau) - q_term
    den = hot.chi * (1 - tau) - p_term
    band_lower = num / den if den != 0 else math.copysign(math.inf, num)
    band_upper = p_term / q_term if q_term != 0 else math.inf
    y1 = bath_stroke_target(x1, hot.a_bar, hot.chi)
    x2 = bath_stroke_target(y1, cold.a_bar, cold.chi)
    boundary = x1 == 1
    odds = math.inf if boundary else x1 / (1 - x1)
    if abs(y1 - x1) <= DEGENERACY_TOL:
        return RegimeFlags(False, False, odds >= band_upper, math.nan, band_lower, band_upper, boundary)
    ratio = abs((y1 - x2) / (y1 - x1))
    efficiency = 1 - (omega_c / omega_h) * ratio
    physical = ratio >= tau and efficiency > 0
    return RegimeFlags(
        physical_engine=bool(physical),
        beats_otto=bool(physical and ratio <= 1),
        carnot_converged_case=bool(odds >= band_upper),
        energy_ratio=float(ratio),
        band_lower=float(band_lower),
        band_upper=float(band_upper),
        boundary=boundary,
    )


def cycle_predicates(spec: CycleSpec, hot: AveragedCoefficients, cold: AveragedCoefficients) -> RegimeFlags:
    return regime_predicates(spec.x1, spec.omega_c, spec.omega_h, spec.gamma_c, spec.gamma_h, hot, cold)


def multi_cycle(spec: CycleSpec, policy: TruncationPolicy = DEFAULT_POLICY, runs: int = 1,
                contact_time: Optional[float] = None, heat_split_time: Optional[float] = None) -> CycleResult:
    """Run ``runs`` consecutive quasi-cycles starting from ``spec.x1``.

    ``heat_split_time`` additionally integrates the heat/internal-work split of
    the first hot and cold contacts over that finite window.
    """
    if runs < 1:
        raise ParameterError("need at least one run")
    hot, cold = bath_coefficients(spec, policy, contact_time)
    x, y, x_star = population_sequences(spec.x1, hot, cold, runs)
    x1, y1, x2 = float(x[0]), float(y[0]), float(x[1])
    eff_single = quasi_otto_efficiency(x1, y1, x2, spec.omega_c, spec.omega_h)
    eff_cum = cumulative_efficiencies(x, y, spec.omega_c, spec.omega_h)
    result = CycleResult(
        x_seq=x,
        y_seq=y,
        w1=unitary_stroke_work(x1, spec.omega_c, spec.omega_h),
        w2=unitary_stroke_work(y1, spec.omega_h, spec.omega_c),
        dE_h=2 * spec.omega_h * (y1 - x1),
        dE_c=2 * spec.omega_c * (y1 - x2),
        eff_single=eff_single,
        eff_cumulative=eff_cum,
        eff_otto=spec.eff_otto,
        eff_carnot=spec.eff_carnot,
        fixed_point=float(x_star),
        gap=float(abs(eff_cum[-1] - spec.eff_otto)),
        flags=cycle_predicates(spec, hot, cold),
        hot=hot,
        cold=cold,
    )
    if heat_split_time is not None:
        result.q_h, result.w_int_h, _ = heat_work_split(spec.bath_params_h, np.diag([x1, 1 - x1]),
                                                        heat_split_time, policy)
        result.q_c, result.w_int_c, _ = heat_work_split(spec.bath_params_c, np.diag([y1, 1 - y1]),
                                                        heat_split_time, policy)
    return result


def single_cycle(spec: CycleSpec, policy: TruncationPolicy = DEFAULT_POLICY, **kwargs) -> CycleResult:
    return multi_cycle(spec, policy, runs=1, **kwargs)


def heat_work_split(params: ModelParams, rho_start, t_end: float, policy: TruncationPolicy = DEFAULT_POLICY):
    """(Q, W_int, dE) for a contact of duration ``t_end`` under the generator's U(t) sigma_z.

    Q = -int U d<sigma_z>/dt, W_int = -int dU/dt <sigma_z>, dE = U(0)<sigma_z>(0) - U(T)<sigma_z>(T),
    so that Q + W_int = dE.
    """
    rho = validate_state(rho_start)
    if t_end < 0:
        raise ParameterError("contact time must be non-negative")
    if t_end == 0:
        return 0.0, 0.0, 0.0
    z0 = float((rho[0, 0] - rho[1, 1]).real)
    probe = np.linspace(0.0, t_end, max(2001, int(40 * t_end) + 1))
    rate_arrays(params, policy, probe)  # raises SingularMapError inside the window

    def sz(t):
        a, b, _ = coefficient_arrays(params, policy, t)
        return (1 - a - b) * z0 + (b - a)

    def sz_dot(t):
        da, db, _ = coefficient_arrays(params, policy, t, order=1)
        return -(da + db) * z0 + (db - da)

    def u(t):
        return rate_arrays(params, policy, t)[0]

    breaks = list(probe[1:-1:max(1, probe.size // 50)])
    opts = dict(limit=2000, epsabs=1e-12, epsrel=1e-12, points=breaks or None)
    q, _ = quad(lambda t: float(-u(t) * sz_dot(t)), 0, t_end, **opts)
    w, _ = quad(lambda t: float(-u_eff_derivative(params, policy, t) * sz(t)), 0, t_end, **opts)
    d_e = float(u(0.0) * sz(0.0) - u(t_end) * sz(t_end))
    return float(q), float(w), d_e
