import mpmath as mp
import numpy as np
import pytest

from conftest import trace_distance
from quasiotto.dynmap import coefficient_arrays, evolve_state
from quasiotto.errors import SingularMapError
from quasiotto.lindblad import (
    LindbladRates,
    decompose_generator,
    find_singularities,
    generator_from_transfer,
    integrate_master_equation,
    lindblad_rhs,
    rate_arrays,
    rates_closed_form,
    rates_from_transfer,
    transfer_matrix,
    u_eff_derivative,
    u_eff_ratio_form,
)
from quasiotto.model import DEFAULT_POLICY, ModelParams, truncation_level

STATES = {
    "ground": np.diag([1.0, 0.0]),
    "excited": np.diag([0.0, 1.0]),
    "plus": np.full((2, 2), 0.5),
}


def _mp_coefficients(p, t, n_max):
    """Independent high-precision evaluation of the thermal sums for N = 1."""
    w0, w, d, x = (mp.mpf(v) for v in (p.qubit_freq, p.mode_freq, p.coupling, p.inv_temp * p.mode_freq))
    beta = 2 * w0 + w
    weights = [mp.exp(-x * n) for n in range(n_max + 1)]
    total = mp.fsum(weights)
    a = b = mp.mpf(0)
    c = mp.mpc(0)
    for n, wt in enumerate(weights):
        eta = mp.sqrt(beta**2 + 4 * n * d**2)
        eta_p = mp.sqrt(beta**2 + 4 * (n + 1) * d**2)
        a += wt * 4 * n * d**2 * mp.sin(eta * t / 2) ** 2 / eta**2
        b += wt * 4 * (n + 1) * d**2 * mp.sin(eta_p * t / 2) ** 2 / eta_p**2
        amp_a = mp.exp(-1j * (2 * n - 1) * w * t / 2) * (mp.cos(eta * t / 2) - 1j * beta / eta * mp.sin(eta * t / 2))
        amp_c = mp.exp(-1j * (2 * n + 1) * w * t / 2) * (mp.cos(eta_p * t / 2) + 1j * beta / eta_p * mp.sin(eta_p * t / 2))
        c += wt * amp_a * mp.conj(amp_c)
    return a / total, b / total, c / total


def _fd_rates(p, t, h=mp.mpf("1e-5")):
    mp.mp.dps = 40
    n_max = truncation_level(p)
    t = mp.mpf(t)

    def f(s):
        a, b, c = _mp_coefficients(p, s, n_max)
        lam = 1 - a - b
        return {
            "half_diff": (a - b) / 2,
            "log_lam": mp.log(lam),
            "log_dep": mp.log(lam / abs(c) ** 2),
            "log_ratio": mp.log(1 + (mp.re(c) / mp.im(c)) ** 2),
            "a": a,
            "b": b,
            "c": c,
        }

    lo, mid, hi = f(t - h), f(t), f(t + h)
    dd = {k: (hi[k] - lo[k]) / (2 * h) for k in ("half_diff", "log_lam", "log_dep", "log_ratio")}
    a, b, c = mid["a"], mid["b"], mid["c"]
    u = mp.im(c) / mp.re(c) * dd["log_ratio"] / 4
    g_dep = dd["log_dep"] / 4
    g_d = dd["half_diff"] - (a - b + 1) / 2 * dd["log_lam"]
    g_a = -(dd["half_diff"] - (a - b - 1) / 2 * dd["log_lam"])
    return [float(v) for v in (u, g_dep, g_d, g_a)]


def test_decoupled_rates_vanish():
    p = ModelParams(2, 1.4, 1.0, 0.0, 1.0)
    for t in (0.5, 3.0, 12.0):
        r = rates_closed_form(p, DEFAULT_POLICY, t)
        assert max(abs(r.gamma_dep), abs(r.gamma_d), abs(r.gamma_a)) <= 1e-14
        assert r.u_eff == pytest.approx(p.qubit_freq, rel=1e-14)


@pytest.mark.parametrize("t", [2.0, 6.3])
def test_rates_match_finite_difference_oracle(single_mode, t):
    got = rates_closed_form(single_mode, DEFAULT_POLICY, t).as_tuple()
    ref = _fd_rates(single_mode, t)
    for g, r in zip(got, ref):
        assert abs(g - r) <= 1e-6 * abs(r)


def test_ratio_form_of_u_agrees_where_defined(single_mode):
    t = np.linspace(0.1, 10, 50)
    _, _, c = coefficient_arrays(single_mode, DEFAULT_POLICY, t)
    _, _, dc = coefficient_arrays(single_mode, DEFAULT_POLICY, t, order=1)
    u = rate_arrays(single_mode, DEFAULT_POLICY, t)[0]
    ok = (np.abs(c.real) > 1e-3) & (np.abs(c.imag) > 1e-3)
    assert np.allclose(u_eff_ratio_form(c, dc)[ok], u[ok], rtol=1e-9, atol=0)


def test_rates_at_time_zero():
    p = ModelParams(2, 1.0, 1.0, 0.5, 0.7)
    r = rates_closed_form(p, DEFAULT_POLICY, 0.0)
    assert (r.gamma_dep, r.gamma_d, r.gamma_a) == (0.0, 0.0, 0.0)
    small = rates_closed_form(p, DEFAULT_POLICY, 1e-6)
    assert max(abs(small.gamma_dep), abs(small.gamma_d), abs(small.gamma_a)) < 1e-5


@pytest.mark.parametrize("t", [0.0, 0.8, 2.0, 7.3])
def test_transfer_route_matches_closed_form(single_mode, t):
    closed = rates_closed_form(single_mode, DEFAULT_POLICY, t).as_tuple()
    generic = rates_from_transfer(single_mode, DEFAULT_POLICY, t).as_tuple()
    assert np.allclose(closed, generic, rtol=1e-6, atol=1e-12)


def test_transfer_matrix_structure():
    F = transfer_matrix(0.1, 0.3, 0.5 + 0.2j)
    assert np.allclose(F[0], [1, 0, 0, 0])
    assert np.allclose(transfer_matrix(0, 0, 1), np.eye(4))


def test_generator_of_identity_is_zero():
    assert np.array_equal(generator_from_transfer(np.eye(4), np.zeros((4, 4))), np.zeros((4, 4)))


def test_singular_transfer_matrix_rejected():
    F = transfer_matrix(0.5, 0.5, 0.0)
    with pytest.raises(SingularMapError):
        generator_from_transfer(F, np.zeros((4, 4)))


def test_decomposition_round_trip():
    rates = LindbladRates(0.7, 0.05, 0.2, -0.03)
    # superoperator matrix of the canonical generator in the Pauli basis
    from quasiotto.lindblad import PAULI_BASIS
    L = np.array([[np.trace(gm @ lindblad_rhs(gn, rates)).real for gn in PAULI_BASIS] for gm in PAULI_BASIS])
    back = decompose_generator(L)
    assert np.allclose(back.as_tuple(), rates.as_tuple(), atol=1e-15)


def test_zero_generator_freezes_state():
    rho = np.array([[0.6, 0.2j], [-0.2j, 0.4]])
    assert np.array_equal(lindblad_rhs(rho, LindbladRates(0, 0, 0, 0)), np.zeros((2, 2)))


def test_decoupled_master_equation_is_free_rotation():
    p = ModelParams(1, 1.2, 1.0, 0.0, 1.0)
    t = np.linspace(0, 5, 11)
    rho = integrate_master_equation(p, STATES["plus"], t)
    assert np.allclose(rho[:, 0, 0], 0.5, atol=1e-12)
    assert np.allclose(rho[:, 0, 1], 0.5 * np.exp(-2j * p.qubit_freq * t), atol=1e-9)


@pytest.mark.parametrize("name", sorted(STATES))
def test_master_equation_reproduces_map(single_mode, name):
    t = np.linspace(0, 10, 101)
    me = integrate_master_equation(single_mode, STATES[name], t)
    direct = evolve_state(single_mode, DEFAULT_POLICY, STATES[name], t)
    assert max(trace_distance(a, b) for a, b in zip(me, direct)) <= 1e-6
    assert np.allclose(np.trace(me, axis1=1, axis2=2), 1, atol=1e-9)


def test_two_mode_master_equation_reproduces_map():
    p = ModelParams(2, 1.0, 1.0, 0.3, 1.0)
    t = np.linspace(0, 6, 31)
    me = integrate_master_equation(p, STATES["plus"], t)
    direct = evolve_state(p, DEFAULT_POLICY, STATES["plus"], t)
    assert max(trace_distance(a, b) for a, b in zip(me, direct)) <= 1e-6


SINGULAR = ModelParams(3, 1.0, 1.0, 0.9, 0.2)


def test_non_invertible_map_raises():
    with pytest.raises(SingularMapError):
        rates_closed_form(SINGULAR, DEFAULT_POLICY, 0.3)


def test_singularities_bracketed():
    t = np.linspace(0, 1, 201)
    brackets = find_singularities(SINGULAR, DEFAULT_POLICY, t)
    assert brackets and brackets[0][0] < brackets[0][1]
    lo, hi = brackets[0]
    a, b, _ = coefficient_arrays(SINGULAR, DEFAULT_POLICY, np.array([lo, hi]))
    lam = 1 - a - b
    assert lam[0] > 0 > lam[1]


def test_master_equation_stops_at_singularity():
    with pytest.raises(SingularMapError):
        integrate_master_equation(SINGULAR, STATES["ground"], np.linspace(0, 1, 11))


def test_negative_rates_appear(single_mode):
    t = np.linspace(0.05, 20, 400)
    _, _, g_d, g_a = rate_arrays(single_mode, DEFAULT_POLICY, t)
    assert g_d.min() < 0 < g_d.max()


def test_u_derivative_matches_finite_difference(single_mode):
    t = np.array([0.4, 3.1, 8.0])
    h = 1e-5
    u_lo = rate_arrays(single_mode, DEFAULT_POLICY, t - h)[0]
    u_hi = rate_arrays(single_mode, DEFAULT_POLICY, t + h)[0]
    assert np.allclose(u_eff_derivative(single_mode, DEFAULT_POLICY, t), (u_hi - u_lo) / (2 * h), atol=1e-8, rtol=0)


def test_rejects_bad_time_grid(single_mode):
    with pytest.raises(ValueError):
        integrate_master_equation(single_mode, STATES["ground"], [0.5, 1.0])
    with pytest.raises(ValueError):
        integrate_master_equation(single_mode, STATES["ground"], [0.0, 2.0, 1.0])
