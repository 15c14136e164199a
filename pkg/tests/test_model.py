import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import comb

from quasiotto.errors import ParameterError, TruncationError
from quasiotto.model import (
    ModelParams,
    TruncationPolicy,
    boltzmann_weights,
    degeneracy,
    partition_function,
    tail_weight,
    truncation_level,
    validate_params,
)


def params(n=1, x=1.0, d=0.1):
    return ModelParams(n, 1.0, 1.0, d, x)


def test_valid_params_accepted():
    p = validate_params({"n_modes": 1, "qubit_freq": 1, "mode_freq": 1, "coupling": 0.1, "inv_temp": 1})
    assert p == ModelParams(1, 1.0, 1.0, 0.1, 1.0)


def test_strong_coupling_rejected():
    with pytest.raises(ParameterError, match="coupling exceeds mode frequency"):
        ModelParams(1, 1.0, 1.0, 1.5, 1.0)


def test_coupling_equal_to_mode_freq_rejected():
    with pytest.raises(ParameterError, match="coupling exceeds"):
        ModelParams(1, 1.0, 1.0, 1.0, 1.0)


def test_zero_modes_rejected():
    with pytest.raises(ParameterError, match="need at least one mode"):
        ModelParams(0, 1.0, 1.0, 0.1, 1.0)


@pytest.mark.parametrize("field", ["qubit_freq", "mode_freq"])
def test_non_positive_frequency_rejected(field):
    raw = {"n_modes": 1, "qubit_freq": 1.0, "mode_freq": 1.0, "coupling": 0.1, "inv_temp": 1.0, field: 0.0}
    with pytest.raises(ParameterError, match="non-positive frequency"):
        validate_params(raw)


def test_validate_params_rejects_unknown_and_missing_keys():
    base = {"n_modes": 1, "qubit_freq": 1.0, "mode_freq": 1.0, "coupling": 0.1, "inv_temp": 1.0}
    with pytest.raises(ParameterError, match="unknown"):
        validate_params({**base, "omega": 2})
    del base["mode_freq"]
    with pytest.raises(ParameterError, match="mode_freq"):
        validate_params(base)


def test_validate_params_rejects_strings():
    with pytest.raises(ParameterError, match="number"):
        validate_params({"n_modes": 1, "qubit_freq": "1", "mode_freq": 1.0, "coupling": 0.1, "inv_temp": 1.0})


def test_truncation_level_values():
    assert truncation_level(params(x=1.0), TruncationPolicy(1e-12)) == 27
    assert truncation_level(params(x=1.0), TruncationPolicy(0.5)) == 0


def test_truncation_cap_exceeded():
    with pytest.raises(TruncationError, match="cap exceeded"):
        truncation_level(params(x=0.001), TruncationPolicy(1e-12, max_level_cap=100))


def test_truncation_level_is_minimal():
    p = params(n=3, x=0.7)
    pol = TruncationPolicy(1e-9)
    n_max = truncation_level(p, pol)
    assert tail_weight(p, n_max) <= 1e-9 < tail_weight(p, n_max - 1)


def test_partition_function_values():
    assert partition_function(params(1, 1.0)) == pytest.approx(1.581977, abs=1e-6)
    assert partition_function(params(2, 1.0)) == pytest.approx(2.502651, abs=1e-6)
    assert partition_function(params(1, 50.0)) == pytest.approx(1.0, abs=1e-20)


def test_degeneracy_matches_binomial():
    n = np.arange(12)
    for modes in (1, 2, 3, 5):
        assert np.allclose(degeneracy(modes, n), comb(modes + n - 1, n))


def test_boltzmann_weights_survive_hot_baths():
    p = params(n=3, x=0.01)
    w = boltzmann_weights(p, 200)
    assert np.all(np.isfinite(w)) and w.sum() < 1


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.floats(0.1, 8.0))
def test_partition_function_equals_truncated_series(n_modes, x):
    p = params(n_modes, x)
    pol = TruncationPolicy(1e-12)
    n_max = truncation_level(p, pol)
    k = np.arange(n_max + 1)
    direct = float(np.sum(degeneracy(n_modes, k) * np.exp(-x * k)))
    assert abs(direct / partition_function(p) - 1) <= 1.01e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.floats(0.1, 6.0), st.floats(1.0, 3.0))
def test_truncation_monotone(n_modes, x, factor):
    pol = TruncationPolicy(1e-10)
    assert truncation_level(params(n_modes, x * factor), pol) <= truncation_level(params(n_modes, x), pol)
    assert truncation_level(params(n_modes + 1, x), pol) >= truncation_level(params(n_modes, x), pol)


def test_replace_revalidates():
    p = params()
    assert p.replace(coupling=0.5).coupling == 0.5
    with pytest.raises(ParameterError):
        p.replace(coupling=2.0)
    assert math.isclose(p.beta, 3.0)
