"""Closed-form map against brute-force diagonalization of the truncated Hamiltonian."""
import numpy as np

from quasiotto import DEFAULT_POLICY, ModelParams
from quasiotto.dynmap import coefficient_arrays
from quasiotto.oracle import reference_coefficient_arrays

t = np.linspace(0, 20, 201)

# One mode: the sector solution is exact, so only roundoff separates the two.
for coupling in (0.05, 0.1, 0.3):
    p = ModelParams(1, 1.0, 1.0, coupling, 1.0)
    a, b, c = coefficient_arrays(p, DEFAULT_POLICY, t)
    ra, rb, rc = reference_coefficient_arrays(p, None, "full", t)
    print(f"N=1 coupling={coupling:<5}  max |dA|={np.abs(a - ra).max():.1e}  max |dC|={np.abs(c - rc).max():.1e}")

# Two modes: exact against the single-hop projection, approximate against the full Hamiltonian.
for coupling in (0.05, 0.1):
    p = ModelParams(2, 1.0, 1.0, coupling, 1.0)
    a, b, c = coefficient_arrays(p, DEFAULT_POLICY, t)
    for variant in ("restricted", "full"):
        ra, rb, rc = reference_coefficient_arrays(p, None, variant, t)
        dev = max(np.abs(a - ra).max(), np.abs(b - rb).max(), np.abs(c - rc).max())
        print(f"N=2 coupling={coupling:<5} {variant:>10}: {dev:.2e}")
