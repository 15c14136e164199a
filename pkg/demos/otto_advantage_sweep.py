"""Single-run efficiency against coupling for a few starting populations."""
import numpy as np

from quasiotto import CycleSpec, single_cycle

spec = CycleSpec()
print(f"Otto {spec.eff_otto:.3f}   Carnot {spec.eff_carnot:.3f}")
deltas = np.linspace(0.1, 0.9, 9)
print("coupling" + "".join(f"  x1={x1:<5}" for x1 in (0.85, 0.9, 0.95)))
for d in deltas:
    row = []
    for x1 in (0.85, 0.9, 0.95):
        res = single_cycle(spec.replace(x1=x1, coupling=float(d)))
        mark = "*" if res.flags.beats_otto else " "
        row.append(f"{res.eff_single:9.4f}{mark}")
    print(f"{d:8.2f}  " + "  ".join(row))
print("* marks runs between the Otto and Carnot bounds")
