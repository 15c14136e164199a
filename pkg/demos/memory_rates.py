"""Time-local rates of the reduced qubit and where they dip below zero."""
import numpy as np

from quasiotto import DEFAULT_POLICY, ModelParams
from quasiotto.lindblad import find_singularities, rate_arrays

p = ModelParams(1, 1.0, 1.0, 0.3, 1.0)
t = np.linspace(0.01, 30, 3000)
u, g_dep, g_d, g_a = rate_arrays(p, DEFAULT_POLICY, t)

for name, rate in [("dephasing", g_dep), ("decay", g_d), ("absorption", g_a)]:
    neg = t[rate < 0]
    share = neg.size / t.size
    first = f"{neg[0]:.2f}" if neg.size else "never"
    print(f"{name:>10}: min {rate.min():+.3e}  negative {share:5.1%} of the window, first at t={first}")

print("frequency shift at t=0.01:", u[0], " late-time mean:", u[-500:].mean())

# Stronger coupling with several hot modes drives 1 - A - B through zero.
hot = ModelParams(3, 1.0, 1.0, 0.9, 0.2)
print("non-invertible brackets:", find_singularities(hot, DEFAULT_POLICY, np.linspace(0, 5, 501))[:3])
