"""How close the long-time qubit state gets to the Gibbs state as the coupling grows."""
import numpy as np

from quasiotto import ModelParams, averaged_coefficients, optimized_trace_distance, thermalization_ratio
from quasiotto.equilibrium import time_averaged_coefficients

deltas = np.linspace(0.05, 0.95, 10)
print("coupling " + "".join(f"   R(N={n})" for n in (1, 2, 3)))
for d in deltas:
    row = [thermalization_ratio(ModelParams(n, 1.0, 1.0, float(d), 1.0)) for n in (1, 2, 3)]
    print(f"{d:8.2f} " + "".join(f"{r:10.4f}" for r in row))

p = ModelParams(1, 1.0, 1.0, 0.5, 1.0)
print("trace distance to Gibbs at coupling 0.5:", optimized_trace_distance(p))

# The incomplete-Beta closed form against a brute-force windowed average of the map.
closed = averaged_coefficients(p)
brute = time_averaged_coefficients(p, horizon=1000.0)
print(f"A_bar closed {closed.a_bar:.8f}  time-averaged {brute.a_bar:.8f}")
print(f"chi   closed {closed.chi:.8f}  time-averaged {brute.chi:.8f}")
