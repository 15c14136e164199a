import numpy as np
import pytest

from quasiotto.model import ModelParams

_ACCEPTANCE = {}


def rk4(h_matrix, psi0, t_end, steps):
    """Fixed-step RK4 for i dpsi/dt = H psi."""
    psi = np.asarray(psi0, dtype=complex)
    dt = t_end / steps
    f = lambda v: -1j * (h_matrix @ v)
    for _ in range(steps):
        k1 = f(psi)
        k2 = f(psi + dt / 2 * k1)
        k3 = f(psi + dt / 2 * k2)
        k4 = f(psi + dt * k3)
        psi = psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return psi


def trace_distance(a, b):
    return 0.5 * float(np.abs(np.linalg.eigvalsh(np.asarray(a) - np.asarray(b))).sum())


@pytest.fixture
def single_mode():
    return ModelParams(n_modes=1, qubit_freq=1.0, mode_freq=1.0, coupling=0.1, inv_temp=1.0)


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _ACCEPTANCE[report.nodeid] = report.outcome
    elif "test_acceptance.py" in report.nodeid and report.when == "setup" and report.outcome != "passed":
        _ACCEPTANCE[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in _ACCEPTANCE.items():
        name = nodeid.split("::")[-1]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")
