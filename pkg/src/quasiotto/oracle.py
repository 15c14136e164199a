"""Brute-force reference dynamics on a truncated Fock space.

The thermal bath is diagonal in the number basis, so the reduced qubit state is
a Boltzmann mixture of pure-state branches started from |q> |n_1 .. n_N>.
Every branch is propagated exactly:

* ``full``: inside its complete excitation sector of the multi-mode
  Jaynes-Cummings Hamiltonian (eigendecomposition per sector);
* ``restricted``: inside the (1 + N)-dimensional subspace spanned by the
  single-hop transitions out of the initial state, i.e. the full Hamiltonian
  projected onto that subspace.

Nothing here reuses the closed-form amplitudes, so agreement with
:mod:`quasiotto.dynmap` is a genuine check.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .dynmap import MapCoefficients, validate_state
from .errors import DimensionError, ParameterError
from .model import DEFAULT_POLICY, ModelParams, TruncationPolicy, truncation_level

Label = Tuple[int, Tuple[int, ...]]

VARIANTS = ("full", "restricted")
MAX_DIMENSION = 4_000_000
MAX_SECTOR_DIMENSION = 4_000
_TIME_CHUNK = 32


@dataclass(frozen=True)
class TruncatedHamiltonian:
    dimension: int
    matrix: sp.csr_matrix
    index: Dict[Label, int]
    variant: str
    anchor: Optional[Label] = None

    def labels(self) -> List[Label]:
        out = [None] * self.dimension
        for label, i in self.index.items():
            out[i] = label
        return out

    def excitation_number(self) -> np.ndarray:
        """Conserved charge: total photon number plus one if the qubit is in |1>."""
        exc = np.empty(self.dimension)
        for (q, occ), i in self.index.items():
            exc[i] = sum(occ) + q
        return exc


def _diag_energy(params: ModelParams, q: int, occ: Sequence[int]) -> float:
    # sigma_z |0> = +|0>, sigma_z |1> = -|1>
    return (params.qubit_freq if q == 0 else -params.qubit_freq) + params.mode_freq * sum(occ)


def _hops(params: ModelParams, q: int, occ: Tuple[int, ...]):
    """Coupled neighbours of a basis state under Delta * sum_i (|1><0| a_i + |0><1| a_i^dag)."""
    out = []
    for i, n_i in enumerate(occ):
        if q == 0 and n_i > 0:
            new = occ[:i] + (n_i - 1,) + occ[i + 1:]
            out.append(((1, new), params.coupling * np.sqrt(n_i)))
        elif q == 1:
            new = occ[:i] + (n_i + 1,) + occ[i + 1:]
            out.append(((0, new), params.coupling * np.sqrt(n_i + 1)))
    return out


def ansatz_subspace(params: ModelParams, anchor: Label) -> List[Label]:
    """Initial state followed by every state reachable from it in one hop."""
    q, occ = anchor
    return [anchor] + [label for label, _ in _hops(params, q, tuple(occ))]


def build_hamiltonian(params: ModelParams, n_max: int, variant: str = "full",
                      anchor: Optional[Label] = None,
                      max_dimension: int = MAX_DIMENSION) -> TruncatedHamiltonian:
    """Hamiltonian on the product basis with at most ``n_max`` quanta per mode.

    For ``variant="restricted"`` an ``anchor`` basis state is required; all
    couplings outside the anchor's single-hop subspace are removed.
    """
    if variant not in VARIANTS:
        raise ParameterError(f"unknown variant {variant!r}")
    n_modes = params.n_modes
    dim = 2 * (n_max + 1) ** n_modes
    if dim > max_dimension:
        raise DimensionError(f"dimension {dim} exceeds bound {max_dimension}")
    index: Dict[Label, int] = {}
    for q in (0, 1):
        for occ in itertools.product(range(n_max + 1), repeat=n_modes):
            index[(q, occ)] = len(index)
    keep = None
    if variant == "restricted":
        if anchor is None:
            raise ParameterError("restricted variant needs an anchor basis state")
        anchor = (int(anchor[0]), tuple(int(x) for x in anchor[1]))
        keep = set(ansatz_subspace(params, anchor))
    rows, cols, vals = [], [], []
    for (q, occ), i in index.items():
        rows.append(i)
        cols.append(i)
        vals.append(_diag_energy(params, q, occ))
        for target, amp in _hops(params, q, occ):
            j = index.get(target)
            if j is None or amp == 0:
                continue
            if keep is not None and not ((q, occ) in keep and target in keep):
                continue
            rows.append(i)
            cols.append(j)
            vals.append(amp)
    matrix = sp.csr_matrix((np.asarray(vals, dtype=complex), (rows, cols)), shape=(dim, dim))
    return TruncatedHamiltonian(dim, matrix, index, variant, anchor)


def compositions(total: int, parts: int):
    """All occupation vectors of ``parts`` modes with ``total`` quanta, in lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def sector_labels(n_modes: int, k: int) -> List[Label]:
    """Basis of excitation sector k: |0, m> with |m| = k and |1, m> with |m| = k - 1."""
    labels = [(0, occ) for occ in compositions(k, n_modes)]
    if k >= 1:
        labels += [(1, occ) for occ in compositions(k - 1, n_modes)]
    return labels


def sector_hamiltonian(params: ModelParams, labels: Sequence[Label]) -> np.ndarray:
    index = {label: i for i, label in enumerate(labels)}
    h = np.zeros((len(labels), len(labels)), dtype=complex)
    for (q, occ), i in index.items():
        h[i, i] = _diag_energy(params, q, occ)
        for target, amp in _hops(params, q, occ):
            j = index.get(target)
            if j is not None:
                h[i, j] = amp
    return h


def _propagate(h: np.ndarray, init: np.ndarray, times: np.ndarray) -> np.ndarray:
    """exp(-i h t) applied to the columns of ``init``; returns shape (T, d, b)."""
    energies, vecs = np.linalg.eigh(h)
    proj = vecs.conj().T @ init
    phases = np.exp(-1j * np.outer(times, energies))
    return np.einsum("ij,tj,jb->tib", vecs, phases, proj, optimize=True)


def _trace_out(psi_a, labels_a, psi_b, labels_b, weights) -> np.ndarray:
    """sum_b w_b Tr_bath |psi_a,b><psi_b,b| for branch stacks of shape (T, d, b)."""
    out = np.zeros((psi_a.shape[0], 2, 2), dtype=complex)
    where_b = {label: j for j, label in enumerate(labels_b)}
    for i, (q, occ) in enumerate(labels_a):
        for qp in (0, 1):
            j = where_b.get((qp, occ))
            if j is not None:
                out[:, q, qp] += (psi_a[:, i, :] * psi_b[:, j, :].conj()) @ weights
    return out


def _thermal_branches(params: ModelParams, n_max: int, policy: TruncationPolicy):
    x = params.boltzmann_exponent
    raw = np.exp(-x * np.arange(n_max + 1))
    counts = [sum(1 for _ in compositions(k, params.n_modes)) for k in range(n_max + 1)]
    total = float(np.dot(raw, counts))
    tail = 1.0 - total * (-np.expm1(-x)) ** params.n_modes
    if tail > policy.tail_tolerance:
        warnings.warn(f"thermal tail weight {tail:.3e} exceeds tolerance {policy.tail_tolerance:.1e}",
                      RuntimeWarning, stacklevel=3)
    return raw / total


def _blocks_full(params, n_max, weights, times):
    """Return (P0, P1, X): reduced images of |0><0|, |1><1| and |0><1| for the full Hamiltonian."""
    T = times.size
    p0 = np.zeros((T, 2, 2), dtype=complex)
    p1 = np.zeros((T, 2, 2), dtype=complex)
    x = np.zeros((T, 2, 2), dtype=complex)
    cache = {}

    def sector(k):
        if k not in cache:
            labels = sector_labels(params.n_modes, k)
            if len(labels) > MAX_SECTOR_DIMENSION:
                raise DimensionError(f"sector {k} has dimension {len(labels)} > {MAX_SECTOR_DIMENSION}")
            cache[k] = (labels, sector_hamiltonian(params, labels))
        return cache[k]

    for k in range(n_max + 1):
        labels_g, h_g = sector(k)
        labels_e, h_e = sector(k + 1)
        bath = list(compositions(k, params.n_modes))
        w = np.full(len(bath), weights[k])
        pos_g = {label: i for i, label in enumerate(labels_g)}
        pos_e = {label: i for i, label in enumerate(labels_e)}
        init_g = np.zeros((len(labels_g), len(bath)), dtype=complex)
        init_e = np.zeros((len(labels_e), len(bath)), dtype=complex)
        for b, occ in enumerate(bath):
            init_g[pos_g[(0, occ)], b] = 1.0
            init_e[pos_e[(1, occ)], b] = 1.0
        for start in range(0, T, _TIME_CHUNK):
            sl = slice(start, start + _TIME_CHUNK)
            psi_g = _propagate(h_g, init_g, times[sl])
            psi_e = _propagate(h_e, init_e, times[sl])
            p0[sl] += _trace_out(psi_g, labels_g, psi_g, labels_g, w)
            p1[sl] += _trace_out(psi_e, labels_e, psi_e, labels_e, w)
            x[sl] += _trace_out(psi_g, labels_g, psi_e, labels_e, w)
        cache.pop(k, None)
    return p0, p1, x


def _blocks_restricted(params, n_max, weights, times):
    T = times.size
    p0 = np.zeros((T, 2, 2), dtype=complex)
    p1 = np.zeros((T, 2, 2), dtype=complex)
    x = np.zeros((T, 2, 2), dtype=complex)
    one = np.ones(1)
    for k in range(n_max + 1):
        for occ in compositions(k, params.n_modes):
            branches = []
            for q in (0, 1):
                labels = ansatz_subspace(params, (q, occ))
                init = np.zeros((len(labels), 1), dtype=complex)
                init[0, 0] = 1.0
                branches.append((labels, _propagate(sector_hamiltonian(params, labels), init, times)))
            (lab_g, psi_g), (lab_e, psi_e) = branches
            w = weights[k] * one
            p0 += _trace_out(psi_g, lab_g, psi_g, lab_g, w)
            p1 += _trace_out(psi_e, lab_e, psi_e, lab_e, w)
            x += _trace_out(psi_g, lab_g, psi_e, lab_e, w)
    return p0, p1, x


def reduced_blocks(params: ModelParams, n_max: Optional[int], variant: str, times,
                   policy: TruncationPolicy = DEFAULT_POLICY):
    """Reduced images of the operators |0><0|, |1><1| and |0><1| on a time grid."""
    if variant not in VARIANTS:
        raise ParameterError(f"unknown variant {variant!r}")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    if n_max is None:
        n_max = truncation_level(params, policy)
    weights = _thermal_branches(params, n_max, policy)
    if variant == "full":
        return _blocks_full(params, n_max, weights, times)
    return _blocks_restricted(params, n_max, weights, times)


def propagate_reduced(params: ModelParams, n_max: Optional[int], variant: str, rho0, t,
                      policy: TruncationPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Reduced qubit state(s) at time(s) ``t`` from rho0 (x) thermal bath.

    Returns a 2x2 matrix for scalar ``t`` and shape ``(len(t), 2, 2)`` otherwise.
    """
    rho0 = validate_state(rho0)
    p0, p1, x = reduced_blocks(params, n_max, variant, t, policy)
    rho = rho0[0, 0] * p0 + rho0[1, 1] * p1 + rho0[0, 1] * x + rho0[1, 0] * np.conj(np.swapaxes(x, 1, 2))
    return rho[0] if np.ndim(t) == 0 else rho


def reference_coefficient_arrays(params: ModelParams, n_max: Optional[int], variant: str, times,
                                 policy: TruncationPolicy = DEFAULT_POLICY):
    """(A, B, C) read off from the basis inputs diag(1,0), diag(0,1) and |+><+|."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    ground = np.diag([1.0, 0.0]).astype(complex)
    excited = np.diag([0.0, 1.0]).astype(complex)
    plus = np.full((2, 2), 0.5, dtype=complex)
    p0, p1, x = reduced_blocks(params, n_max, variant, times, policy)

    def image(rho):
        return rho[0, 0] * p0 + rho[1, 1] * p1 + rho[0, 1] * x + rho[1, 0] * np.conj(np.swapaxes(x, 1, 2))

    a = image(ground)[:, 1, 1].real
    b = image(excited)[:, 0, 0].real
    c = 2 * image(plus)[:, 0, 1]
    return a, b, c


def reference_coefficients(params: ModelParams, n_max: Optional[int], variant: str, t: float,
                           policy: TruncationPolicy = DEFAULT_POLICY) -> MapCoefficients:
    a, b, c = reference_coefficient_arrays(params, n_max, variant, [t], policy)
    return MapCoefficients(float(a[0]), float(b[0]), complex(c[0]), float(t))
