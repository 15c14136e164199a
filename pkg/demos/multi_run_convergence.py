"""Cumulative efficiency over repeated runs of the cycle.

The starting population is reset only once, so each run begins where the
previous cold stroke left the qubit.
"""
import numpy as np

from quasiotto import CycleSpec, multi_cycle

for gamma_c in (1.0, 5.0):
    print(f"cold inverse temperature {gamma_c}")
    for coupling in (0.6, 0.9):
        spec = CycleSpec(x1=0.95, gamma_c=gamma_c, coupling=coupling)
        res = multi_cycle(spec, runs=10_000)
        z = res.eff_cumulative
        print(f"  coupling {coupling}: first runs {np.round(z[:3], 4)}  "
              f"fixed point {res.fixed_point:.4f}  gap at 1e4 runs {res.gap:.2e}")

# The gap shrinks like 1/r, not geometrically.
res = multi_cycle(CycleSpec(x1=0.95, coupling=0.6), runs=100_000)
gaps = np.abs(res.eff_cumulative - res.eff_otto)
for r in (10, 100, 1_000, 10_000, 100_000):
    print(f"r={r:>6}  gap={gaps[r - 1]:.3e}  r*gap={r * gaps[r - 1]:.4f}")
