"""Mixing Hamiltonians beyond the transverse field, and the neighborhood
structures they induce on constrained solution spaces.

Max-Independent-Set uses per-vertex controlled bit flips; graph coloring uses
an XY mixer on a one-hot (k qubits per vertex) encoding, equivalent to left
and right shifts of k-dit variables on the valid-coloring subspace.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cost import CostFunction, Graph
from .errors import SizeLimitError
from .pauli import PauliSum

MIS_DEGREE_LIMIT = 12


@dataclass(frozen=True)
class TransverseFieldMixer:
    """B = sum_j X_j."""

    n: int
    kind = "transverse_field"

    def pauli(self) -> PauliSum:
        return PauliSum.from_terms(self.n, [(1 << j, 0, 1.0) for j in range(self.n)])


@dataclass(frozen=True)
class MisMixer:
    """B~_j = X_j prod_{l in nbd(j)} (I + Z_l)/2: bit flips controlled on all
    neighbors being unoccupied, so independent sets map to independent sets."""

    graph: Graph
    kind = "mis"

    @property
    def n(self) -> int:
        return self.graph.n

    def pauli(self) -> PauliSum:
        nb = self.graph.neighbors()
        maxdeg = max((len(s) for s in nb), default=0)
        if maxdeg > MIS_DEGREE_LIMIT:
            raise SizeLimitError(
                f"MIS mixer expansion with degree {maxdeg} exceeds limit {MIS_DEGREE_LIMIT}")
        terms = []
        for j in range(self.n):
            nbrs = sorted(nb[j])
            scale = 2.0 ** -len(nbrs)
            for r in range(len(nbrs) + 1):
                for sub in itertools.combinations(nbrs, r):
                    zmask = 0
                    for l in sub:
                        zmask |= 1 << l
                    terms.append((1 << j, zmask, scale))
        return PauliSum.from_terms(self.n, terms, tol=0.0)

    def feasible(self, x: int) -> bool:
        return all(not ((x >> u) & 1 and (x >> v) & 1) for (u, v) in self.graph.edges)

    def control(self, j: int, x: int) -> bool:
        """True when flipping bit j cannot break the independent-set property."""
        return all(not (x >> l) & 1 for l in self.graph.neighbors()[j])


def one_hot_encode(y: tuple[int, ...], k: int) -> int:
    """Coloring y (k-dit string) as a bitstring on k*len(y) qubits."""
    x = 0
    for j, c in enumerate(y):
        x |= 1 << (j * k + c)
    return x


def one_hot_decode(x: int, n: int, k: int) -> tuple[int, ...] | None:
    """Inverse of one_hot_encode, or None when x is not a valid coloring."""
    y = []
    for j in range(n):
        block = (x >> (j * k)) & ((1 << k) - 1)
        if block == 0 or block & (block - 1):
            return None
        y.append(block.bit_length() - 1)
    return tuple(y)


@dataclass(frozen=True)
class XYMixer:
    """XY mixer on the one-hot coloring encoding: ring or complete per vertex.

    On the valid-coloring subspace each B~_j acts as L_j + R_j for the ring
    (modular color shifts), and as all-direction shifts for the complete kind.
    """

    n_vertices: int
    k: int
    complete: bool = False

    @property
    def kind(self) -> str:
        return "xy_complete" if self.complete else "xy_ring"

    @property
    def n(self) -> int:
        return self.n_vertices * self.k

    def _hops(self) -> list[tuple[int, int]]:
        if self.complete:
            return list(itertools.combinations(range(self.k), 2))
        return [(l, (l + 1) % self.k) for l in range(self.k)]

    def pauli(self) -> PauliSum:
        terms = []
        for j in range(self.n_vertices):
            for (a, b) in self._hops():
                qa, qb = j * self.k + a, j * self.k + b
                m = (1 << qa) | (1 << qb)
                terms.append((m, 0, 0.5))           # XX/2
                terms.append((m, m, 0.5))           # YY/2
        return PauliSum.from_terms(self.n, terms, tol=0.0)

    def feasible(self, x: int) -> bool:
        return one_hot_decode(x, self.n_vertices, self.k) is not None


# -- generalized partial differences -----------------------------------------

def mis_partial_difference(cost: CostFunction, mixer: MisMixer, j: int, x: int) -> float:
    """Partial difference restricted to independent sets: 0 when the move is blocked."""
    if not mixer.feasible(x):
        raise ValueError("bitstring is not an independent set")
    if not mixer.control(j, x):
        return 0.0
    return cost.partial_difference(j, x)


def coloring_partial_difference(cost_dits: Callable[[tuple[int, ...]], float],
                                k: int, j: int, direction: str,
                                y: tuple[int, ...]) -> float:
    """Left/right j-th partial difference of a cost over k-dit strings."""
    if direction not in ("L", "R"):
        raise ValueError("direction must be 'L' or 'R'")
    step = -1 if direction == "L" else 1
    shifted = list(y)
    shifted[j] = (shifted[j] + step) % k
    return cost_dits(tuple(shifted)) - cost_dits(y)


def max_k_cut_value(graph: Graph, y: tuple[int, ...]) -> float:
    """Edges whose endpoints have different colors."""
    return float(sum(1 for (u, v) in graph.edges if y[u] != y[v]))


def generalized_partial_difference(cost, neighborhood, move, x):
    """Dispatch the constrained partial difference for the given neighborhood.

    MIS: ``move`` is a vertex index, ``x`` an independent-set bitstring.
    Coloring: ``neighborhood`` is an XYMixer, ``move`` is (j, 'L'|'R') and
    ``x`` a k-dit tuple; ``cost`` must then be a callable over dit strings.
    """
    if isinstance(neighborhood, MisMixer):
        return mis_partial_difference(cost, neighborhood, move, x)
    if isinstance(neighborhood, XYMixer):
        j, direction = move
        return coloring_partial_difference(cost, neighborhood.k, j, direction, x)
    raise TypeError(f"unsupported neighborhood {type(neighborhood).__name__}")
