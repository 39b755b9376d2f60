"""Diagonal cost Hamiltonians and the diagonal-operator calculus.

C acts as C|x> = c(x)|x>.  Built clause-by-clause: each clause is expanded in
the Z basis by a Walsh-Hadamard transform over its own support (2^|N_j| work),
then merged, so construction stays polynomial for bounded-width problems.
"""
from __future__ import annotations

import numpy as np

from .bits import popcount
from .cost import CostFunction, QuboCost
from .errors import SizeLimitError
from .pauli import PauliSum

CLAUSE_SUPPORT_LIMIT = 20
PROJECTOR_QUBIT_LIMIT = 20


def _wht(vals: np.ndarray) -> np.ndarray:
    """In-place-style Walsh-Hadamard transform, normalized by 2^-w."""
    v = vals.astype(np.float64).copy()
    h = 1
    while h < len(v):
        v = v.reshape(-1, 2 * h)
        a = v[:, :h].copy()
        b = v[:, h:].copy()
        v[:, :h] = a + b
        v[:, h:] = a - b
        v = v.reshape(-1)
        h *= 2
    return v / len(v)


class DiagonalHam:
    """Wrapper of a diagonal PauliSum with cached locality partitions."""

    def __init__(self, pauli: PauliSum, cost: CostFunction | None = None):
        if not pauli.is_diagonal():
            raise ValueError("DiagonalHam requires a diagonal Pauli sum")
        self.pauli = pauli
        self.n = pauli.n
        self.cost = cost
        self._cache: dict = {}

    @property
    def a0(self) -> float:
        return self.pauli.identity_coefficient().real

    def locality(self) -> int:
        return self.pauli.max_weight()

    def weight_partition(self) -> dict[int, PauliSum]:
        """C_(k): the strictly k-local part, for k = 0..max weight."""
        part = self._cache.get("weight_partition")
        if part is None:
            w = popcount(self.pauli.zmasks)
            part = {}
            for k in range(self.locality() + 1):
                keep = w == k
                part[k] = PauliSum(self.n, self.pauli.xmasks[keep],
                                   self.pauli.zmasks[keep], self.pauli.coeffs[keep])
            self._cache["weight_partition"] = part
        return part

    def per_qubit_part(self, j: int) -> PauliSum:
        """C^{j}: the terms containing a Z_j factor."""
        keep = (self.pauli.zmasks >> j) & 1 == 1
        return PauliSum(self.n, self.pauli.xmasks[keep],
                        self.pauli.zmasks[keep], self.pauli.coeffs[keep])

    def traceless_part(self) -> PauliSum:
        keep = self.pauli.zmasks != 0
        return PauliSum(self.n, self.pauli.xmasks[keep],
                        self.pauli.zmasks[keep], self.pauli.coeffs[keep])

    def diagonal(self) -> np.ndarray:
        return self.pauli.diagonal().real

    def z_terms(self) -> list[tuple[int, float]]:
        """Non-identity terms as (zmask, real coefficient)."""
        keep = self.pauli.zmasks != 0
        return [(int(z), float(c.real))
                for z, c in zip(self.pauli.zmasks[keep], self.pauli.coeffs[keep])]


def to_hamiltonian(cost: CostFunction) -> DiagonalHam:
    """Exact Pauli-Z expansion of a cost function, clause-wise then merged."""
    if isinstance(cost, QuboCost):
        terms = [(0, m, a) for m, a in cost.z_coefficients().items()]
        return DiagonalHam(PauliSum.from_terms(cost.n, terms, tol=0.0), cost)
    coeffs: dict[int, float] = {0: cost.constant}
    for cl in cost.clauses:
        sup = cl.support
        w = len(sup)
        if w > CLAUSE_SUPPORT_LIMIT:
            raise SizeLimitError(
                f"clause support {w} exceeds the per-clause transform limit {CLAUSE_SUPPORT_LIMIT}")
        vals = np.empty(1 << w)
        for a in range(1 << w):
            x = 0
            for i, q in enumerate(sup):
                if (a >> i) & 1:
                    x |= 1 << q
            vals[a] = cl.value(x)
        # b_S = 2^-w sum_a vals[a] (-1)^{|a & S|}: a plain normalized WHT
        b = _wht(vals)
        for s in range(1 << w):
            if b[s] == 0.0:
                continue
            zmask = 0
            for i, q in enumerate(sup):
                if (s >> i) & 1:
                    zmask |= 1 << q
            coeffs[zmask] = coeffs.get(zmask, 0.0) + float(b[s])
    terms = [(0, m, a) for m, a in coeffs.items() if a != 0.0 or m == 0]
    return DiagonalHam(PauliSum.from_terms(cost.n, terms, tol=1e-14), cost)


def partial_diff_ham(ham: DiagonalHam, j: int) -> DiagonalHam:
    """The diagonal Hamiltonian of the j-th partial difference: -2 C^{j}."""
    if not 0 <= j < ham.n:
        raise IndexError(f"qubit index {j} outside 0..{ham.n - 1}")
    return DiagonalHam(ham.per_qubit_part(j).scale(-2.0))


def divergence_ham(ham: DiagonalHam, order: int = 1) -> DiagonalHam:
    """D^order C = (-2)^order * sum_k k^order C_(k)."""
    if order < 1:
        raise ValueError("divergence order must be >= 1")
    total = PauliSum.zero(ham.n)
    for k, part in ham.weight_partition().items():
        if k == 0 or part.is_zero():
            continue
        total = total + part.scale((-2.0 * k) ** order)
    return DiagonalHam(total)


def projector_ham(y: int, n: int) -> DiagonalHam:
    """H_y = |y><y| as a 2^n-term Z polynomial with coefficients +-2^-n."""
    if n > PROJECTOR_QUBIT_LIMIT:
        raise SizeLimitError(f"projector Hamiltonian capped at {PROJECTOR_QUBIT_LIMIT} qubits")
    masks = np.arange(1 << n, dtype=np.int64)
    signs = 1.0 - 2.0 * (popcount(masks & y) & 1)
    coeffs = signs * (2.0 ** -n)
    ps = PauliSum(n, np.zeros(1 << n, dtype=np.int64), masks, coeffs.astype(np.complex128))
    return DiagonalHam(ps)
