"""Brute-force ground truth: dense statevector simulation of alternating
circuits, dense matrix exponentials for quenches and generalized mixers,
mixing-operator matrix elements, and the sum-of-paths amplitude expansion.

Layer conventions match the rest of the package: phase e^{-i gamma c(x)}
applied first within each level, then the mixer e^{-i beta B}.
"""
from __future__ import annotations

import struct
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .bits import popcount
from .cost import CostFunction
from .errors import DimensionMismatchError, SizeLimitError
from .mixers import MisMixer, TransverseFieldMixer, XYMixer, one_hot_decode

TRANSVERSE_QUBIT_LIMIT = 24
DENSE_EXP_QUBIT_LIMIT = 12
PATH_LIMIT = 1 << 24
NORM_TOL = 1e-10

Schedule = Sequence[tuple[float, float]]


def as_pairs(schedule) -> list[tuple[float, float]]:
    """Accept either a QaoaSchedule or a plain sequence of (gamma, beta) pairs."""
    if hasattr(schedule, "pairs"):
        return schedule.pairs()
    return [(float(g), float(b)) for (g, b) in schedule]


def plus_state(n: int) -> np.ndarray:
    return np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128)


def basis_state(n: int, x: int) -> np.ndarray:
    psi = np.zeros(1 << n, dtype=np.complex128)
    psi[x] = 1.0
    return psi


def _check_norm(psi: np.ndarray) -> None:
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > NORM_TOL:
        raise FloatingPointError(f"statevector norm drifted to {nrm}")


def apply_phase(psi: np.ndarray, ct: np.ndarray, gamma: float) -> np.ndarray:
    return psi * np.exp(-1j * gamma * ct)


def apply_transverse_mixer(psi: np.ndarray, n: int, beta: float) -> np.ndarray:
    """e^{-i beta sum_j X_j} as n single-qubit rotations."""
    c, s = np.cos(beta), np.sin(beta)
    for q in range(n):
        psi = psi.reshape(1 << (n - 1 - q), 2, 1 << q)
        a0 = psi[:, 0, :].copy()
        a1 = psi[:, 1, :].copy()
        psi[:, 0, :] = c * a0 - 1j * s * a1
        psi[:, 1, :] = c * a1 - 1j * s * a0
        psi = psi.reshape(-1)
    return psi


class _DenseMixer:
    """Mixer unitary via one eigendecomposition, reused across angles."""

    def __init__(self, ham: np.ndarray):
        self.evals, self.evecs = scipy.linalg.eigh(ham)

    def apply(self, psi: np.ndarray, beta: float) -> np.ndarray:
        y = self.evecs.conj().T @ psi
        y *= np.exp(-1j * beta * self.evals)
        return self.evecs @ y


def _mis_hamiltonian(mixer: MisMixer) -> np.ndarray:
    n = mixer.n
    if n > DENSE_EXP_QUBIT_LIMIT:
        raise SizeLimitError(f"dense MIS mixer limited to {DENSE_EXP_QUBIT_LIMIT} qubits")
    dim = 1 << n
    h = np.zeros((dim, dim))
    nb = mixer.graph.neighbors()
    for x in range(dim):
        for j in range(n):
            if all(not (x >> l) & 1 for l in nb[j]):
                h[x ^ (1 << j), x] += 1.0
    return h


def _xy_hamiltonian(mixer: XYMixer) -> np.ndarray:
    n = mixer.n
    if n > DENSE_EXP_QUBIT_LIMIT:
        raise SizeLimitError(f"dense XY mixer limited to {DENSE_EXP_QUBIT_LIMIT} qubits")
    return mixer.pauli().dense(limit=DENSE_EXP_QUBIT_LIMIT).real


def _sequential_mis(psi: np.ndarray, mixer: MisMixer, beta: float) -> np.ndarray:
    """prod_j e^{-i beta B~_j}: each factor rotates controlled flip pairs exactly."""
    n = mixer.n
    nb = mixer.graph.neighbors()
    c, s = np.cos(beta), np.sin(beta)
    for j in range(n):
        out = psi.copy()
        for x in range(1 << n):
            if (x >> j) & 1 == 0 and all(not (x >> l) & 1 for l in nb[j]):
                y = x | (1 << j)
                out[x] = c * psi[x] - 1j * s * psi[y]
                out[y] = c * psi[y] - 1j * s * psi[x]
        psi = out
    return psi


def cost_table_for(cost: CostFunction, mixer) -> np.ndarray:
    if isinstance(mixer, XYMixer):
        # diagonal phase on the encoding register; invalid strings get cost 0
        n, k = mixer.n_vertices, mixer.k
        ct = np.zeros(1 << mixer.n)
        for x in range(1 << mixer.n):
            y = one_hot_decode(x, n, k)
            if y is not None:
                ct[x] = cost(y) if callable(cost) else cost.value_dits(y)
        return ct
    return cost.cost_table()


def simulate(cost: CostFunction, schedule: Schedule, mixer=None,
             initial="plus", mixer_mode: str = "hamiltonian") -> np.ndarray:
    """Alternating phase/mixer evolution; returns the final statevector."""
    schedule = as_pairs(schedule)
    if mixer is None or isinstance(mixer, TransverseFieldMixer):
        n = cost.n
        if n > TRANSVERSE_QUBIT_LIMIT:
            raise SizeLimitError(f"transverse-field path limited to {TRANSVERSE_QUBIT_LIMIT} qubits")
        ct = cost.cost_table()
        psi = _initial_state(initial, n)
        for (gamma, beta) in schedule:
            psi = apply_phase(psi, ct, gamma)
            psi = apply_transverse_mixer(psi, n, beta)
            _check_norm(psi)
        return psi
    n = mixer.n
    ct = cost_table_for(cost, mixer)
    psi = _initial_state(initial, n)
    dense = None
    if mixer_mode == "hamiltonian":
        ham = _mis_hamiltonian(mixer) if isinstance(mixer, MisMixer) else _xy_hamiltonian(mixer)
        dense = _DenseMixer(ham)
    elif mixer_mode != "sequential":
        raise ValueError(f"unknown mixer mode {mixer_mode!r}")
    for (gamma, beta) in schedule:
        psi = apply_phase(psi, ct, gamma)
        if dense is not None:
            psi = dense.apply(psi, beta)
        elif isinstance(mixer, MisMixer):
            psi = _sequential_mis(psi, mixer, beta)
        else:
            raise ValueError("sequential mode is implemented for the MIS mixer only")
        _check_norm(psi)
    return psi


def _initial_state(initial, n: int) -> np.ndarray:
    if isinstance(initial, np.ndarray):
        if initial.shape != (1 << n,):
            raise DimensionMismatchError("custom initial state has wrong dimension")
        return initial.astype(np.complex128)
    if initial == "plus":
        return plus_state(n)
    if initial == "zeros":
        return basis_state(n, 0)
    raise ValueError(f"unknown initial state {initial!r}")


def expectation(psi: np.ndarray, cost: CostFunction) -> float:
    return float(np.real(np.sum(np.abs(psi) ** 2 * cost.cost_table())))


def probabilities(psi: np.ndarray) -> np.ndarray:
    return np.abs(psi) ** 2


def subspace_leakage(psi: np.ndarray, feasible: Iterable[bool] | np.ndarray) -> float:
    """Total probability outside the feasible subspace."""
    mask = np.asarray(list(feasible), dtype=bool)
    return float(np.sum(np.abs(psi[~mask]) ** 2))


def mixing_matrix_element(beta: float, n: int, d: int) -> complex:
    """<x|e^{-i beta B}|y> for Hamming distance d: cos^n(beta) (-i tan beta)^d.

    Evaluated in the product form (-i sin)^d (cos)^(n-d), which is also the
    correct limit at beta = +-pi/2 where tan diverges.
    """
    if not 0 <= d <= n:
        raise ValueError("Hamming distance outside 0..n")
    return complex((-1j * np.sin(beta)) ** d * np.cos(beta) ** (n - d))


def sum_of_paths_amplitude(cost: CostFunction, schedule: Schedule, x: int) -> complex:
    """Direct path-sum amplitude: independent of the statevector code path."""
    n = cost.n
    schedule = as_pairs(schedule)
    p = len(schedule)
    if p == 0:
        return complex(2.0 ** (-n / 2))
    if (1 << (n * p)) > PATH_LIMIT:
        raise SizeLimitError("path enumeration exceeds its size limit")
    ct = cost.cost_table()
    total = 0.0 + 0.0j
    strings = range(1 << n)
    # iterate over p-tuples of intermediate strings z_1..z_p, z_{p} -> x last
    stack = [(1, z1, np.exp(-1j * schedule[0][0] * ct[z1])) for z1 in strings]
    while stack:
        depth, z, amp = stack.pop()
        if depth == p:
            d = int(popcount(np.array([z ^ x]))[0])
            total += amp * mixing_matrix_element(schedule[depth - 1][1], n, d)
            continue
        for znext in strings:
            d = int(popcount(np.array([z ^ znext]))[0])
            hop = mixing_matrix_element(schedule[depth - 1][1], n, d)
            phase = np.exp(-1j * schedule[depth][0] * ct[znext])
            stack.append((depth + 1, znext, amp * hop * phase))
    return complex(total * 2.0 ** (-n / 2))


def quench_simulate(cost: CostFunction, a: float, b: float, tau: float) -> np.ndarray:
    """|tau> = e^{-i tau (aC + bB)} |s> via one eigendecomposition."""
    n = cost.n
    if n > DENSE_EXP_QUBIT_LIMIT:
        raise SizeLimitError(f"quench simulation limited to {DENSE_EXP_QUBIT_LIMIT} qubits")
    dim = 1 << n
    h = np.diag(a * cost.cost_table())
    for x in range(dim):
        for j in range(n):
            h[x ^ (1 << j), x] += b
    mix = _DenseMixer(h)
    psi = mix.apply(plus_state(n), tau)
    _check_norm(psi)
    # a quench conserves <H>; drift here would mean a broken exponential
    h0 = _quench_energy(h, plus_state(n))
    ht = _quench_energy(h, psi)
    if abs(ht - h0) > 1e-9 * max(1.0, abs(h0)):
        raise FloatingPointError(f"quench energy drifted: {h0} -> {ht}")
    return psi


def _quench_energy(h: np.ndarray, psi: np.ndarray) -> float:
    return float(np.real(np.vdot(psi, h @ psi)))


# -- amplitude dump ------------------------------------------------------------

_MAGIC = b"QAOAVEC1"


def write_amplitudes(path: str, psi: np.ndarray, n: int) -> None:
    """Binary dump: 16-byte header (magic, u32 n, u32 reserved), then
    little-endian complex128 amplitude pairs."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", n, 0))
        fh.write(psi.astype("<c16").tobytes())


def read_amplitudes(path: str) -> tuple[int, np.ndarray]:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError("bad amplitude file magic")
        n, _reserved = struct.unpack("<II", fh.read(8))
        psi = np.frombuffer(fh.read(), dtype="<c16")
    if psi.shape != (1 << n,):
        raise ValueError("amplitude payload length mismatch")
    return n, psi.astype(np.complex128)
