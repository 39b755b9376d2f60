"""Classical cost functions, clause decompositions, and the difference calculus.

A cost function is c(x) = constant + sum_j c_j(x) over clauses with supports
N_j.  Bitstrings are integers with bit q = variable q+1 (see bits.py).
Costs are real doubles even for integer-valued problems.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .bits import popcount
from .errors import InstanceFormatError, SizeLimitError

TABLE_QUBIT_LIMIT = 24


@dataclass(frozen=True)
class Clause:
    support: tuple[int, ...]
    value: Callable[[int], float]


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph; edges as (u, v) with u < v, 0-based."""

    n: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        seen = set()
        for (u, v) in self.edges:
            if u == v:
                raise InstanceFormatError(f"self-loop at vertex {u + 1}")
            if not (0 <= u < v < self.n):
                raise InstanceFormatError(f"edge ({u + 1},{v + 1}) outside vertex range or unordered")
            if (u, v) in seen:
                raise InstanceFormatError(f"duplicate edge ({u + 1},{v + 1})")
            seen.add((u, v))
        if self.weights is not None and len(self.weights) != len(self.edges):
            raise InstanceFormatError("weight list length differs from edge list length")

    @property
    def m(self) -> int:
        return len(self.edges)

    def degrees(self) -> list[int]:
        d = [0] * self.n
        for (u, v) in self.edges:
            d[u] += 1
            d[v] += 1
        return d

    def neighbors(self) -> list[set[int]]:
        nb = [set() for _ in range(self.n)]
        for (u, v) in self.edges:
            nb[u].add(v)
            nb[v].add(u)
        return nb

    def triangles_per_edge(self) -> dict[tuple[int, int], int]:
        """f_uv: number of 3-cycles containing each edge."""
        nb = self.neighbors()
        return {(u, v): len(nb[u] & nb[v]) for (u, v) in self.edges}

    def edge_weight(self, i: int) -> float:
        return 1.0 if self.weights is None else self.weights[i]

    def is_unweighted(self) -> bool:
        return self.weights is None or all(w == 1.0 for w in self.weights)


class CostFunction:
    """Base: evaluable classical objective with clause decomposition."""

    kind = "custom"

    def __init__(self, n: int, constant: float, clauses: list[Clause]):
        self.n = n
        self.constant = float(constant)
        self.clauses = clauses
        self._cache: dict = {}
        self._by_var: list[list[Clause]] = [[] for _ in range(n)]
        for cl in clauses:
            for q in cl.support:
                self._by_var[q].append(cl)

    # -- evaluation --------------------------------------------------------
    def value(self, x: int) -> float:
        return self.constant + sum(cl.value(x) for cl in self.clauses)

    def cost_table(self) -> np.ndarray:
        """Vector of c(x) over all 2^n bitstrings (n <= TABLE_QUBIT_LIMIT)."""
        if self.n > TABLE_QUBIT_LIMIT:
            raise SizeLimitError(f"cost table of {self.n} variables exceeds limit {TABLE_QUBIT_LIMIT}")
        ct = self._cache.get("cost_table")
        if ct is None:
            ct = self._build_table()
            self._cache["cost_table"] = ct
        return ct

    def _build_table(self) -> np.ndarray:
        out = np.full(1 << self.n, self.constant, dtype=np.float64)
        for cl in self.clauses:
            sup = cl.support
            w = len(sup)
            vals = np.empty(1 << w)
            for a in range(1 << w):
                x = 0
                for i, q in enumerate(sup):
                    if (a >> i) & 1:
                        x |= 1 << q
                vals[a] = cl.value(x)
            idx = np.zeros(1 << self.n, dtype=np.int64)
            xs = np.arange(1 << self.n, dtype=np.int64)
            for i, q in enumerate(sup):
                idx |= ((xs >> q) & 1) << i
            out += vals[idx]
        return out

    # -- difference calculus -------------------------------------------------
    def partial_difference(self, j: int, x: int) -> float:
        """c(x with bit j flipped) - c(x)."""
        if not 0 <= j < self.n:
            raise IndexError(f"variable index {j} outside 0..{self.n - 1}")
        y = x ^ (1 << j)
        return sum(cl.value(y) - cl.value(x) for cl in self._by_var[j])

    def divergence(self, x: int, order: int = 1) -> float:
        """d^order c(x), the iterated sum of partial differences."""
        if order < 1:
            raise ValueError("divergence order must be >= 1")
        if self.n <= TABLE_QUBIT_LIMIT:
            return float(self.divergence_table(order)[x])
        return self._divergence_recursive(x, order)

    def _divergence_recursive(self, x: int, order: int) -> float:
        if order == 1:
            return sum(self.partial_difference(j, x) for j in range(self.n))
        return sum(self._divergence_recursive(x ^ (1 << j), order - 1)
                   - self._divergence_recursive(x, order - 1) for j in range(self.n))

    def divergence_table(self, order: int = 1) -> np.ndarray:
        key = ("div", order)
        if key not in self._cache:
            base = self.cost_table() if order == 1 else self.divergence_table(order - 1)
            xs = np.arange(1 << self.n, dtype=np.int64)
            out = -float(self.n) * base
            for j in range(self.n):
                out = out + base[xs ^ (1 << j)]
            self._cache[key] = out
        return self._cache[key]

    def mixed_difference(self, js: Iterable[int], x: int) -> float:
        """Iterated partial differences over distinct indices (order-free)."""
        js = list(js)
        if len(set(js)) != len(js):
            raise ValueError("repeated index in mixed_difference; "
                             "use partial_power for the (-2)^(k-1) identity")
        total = 0.0
        for r in range(len(js) + 1):
            for sub in itertools.combinations(js, r):
                y = x
                for j in sub:
                    y ^= 1 << j
                total += (-1) ** (len(js) - r) * self.value(y)
        return total

    def partial_power(self, j: int, k: int, x: int) -> float:
        """The k-th iterate of a single partial difference: (-2)^(k-1) times it."""
        if k < 1:
            raise ValueError("power must be >= 1")
        return (-2.0) ** (k - 1) * self.partial_difference(j, x)

    def maximizers(self) -> np.ndarray:
        ct = self.cost_table()
        return np.nonzero(ct == ct.max())[0]

    def is_constant(self) -> bool:
        if self.n <= TABLE_QUBIT_LIMIT:
            ct = self.cost_table()
            return bool(np.all(ct == ct[0]))
        return not self.clauses


class MaxCutCost(CostFunction):
    kind = "maxcut"

    def __init__(self, graph: Graph):
        self.graph = graph
        clauses = []
        for i, (u, v) in enumerate(graph.edges):
            w = graph.edge_weight(i)
            clauses.append(Clause((u, v), _cut_clause(u, v, w)))
        super().__init__(graph.n, 0.0, clauses)

    def _build_table(self) -> np.ndarray:
        xs = np.arange(1 << self.n, dtype=np.int64)
        out = np.zeros(1 << self.n)
        for i, (u, v) in enumerate(self.graph.edges):
            out += self.graph.edge_weight(i) * (((xs >> u) ^ (xs >> v)) & 1)
        return out


def _cut_clause(u: int, v: int, w: float) -> Callable[[int], float]:
    return lambda x: w * (((x >> u) ^ (x >> v)) & 1)


class QuboCost(CostFunction):
    """Quadratic cost in the Pauli-Z coefficient form:

    c(x) = a0 + sum_j a_j s_j + sum_{i<j} a_ij s_i s_j,  s_q = (-1)^(bit q of x).
    """

    kind = "qubo"

    def __init__(self, n: int, a0: float, linear: dict[int, float],
                 quadratic: dict[tuple[int, int], float]):
        self.a0 = float(a0)
        self.linear = {j: float(a) for j, a in linear.items() if a != 0.0}
        self.quadratic = {}
        for (i, j), a in quadratic.items():
            if i == j:
                raise InstanceFormatError("quadratic term with equal indices")
            key = (min(i, j), max(i, j))
            if key in self.quadratic:
                raise InstanceFormatError(f"duplicate quadratic pair {key}")
            if a != 0.0:
                self.quadratic[key] = float(a)
        clauses = [Clause((j,), _z_clause((j,), a)) for j, a in self.linear.items()]
        clauses += [Clause(pair, _z_clause(pair, a)) for pair, a in self.quadratic.items()]
        super().__init__(n, a0, clauses)

    def _build_table(self) -> np.ndarray:
        xs = np.arange(1 << self.n, dtype=np.int64)
        out = np.full(1 << self.n, self.a0)
        for j, a in self.linear.items():
            out += a * (1.0 - 2.0 * ((xs >> j) & 1))
        for (i, j), a in self.quadratic.items():
            out += a * (1.0 - 2.0 * (((xs >> i) ^ (xs >> j)) & 1))
        return out

    def z_coefficients(self) -> dict[int, float]:
        """Pauli-Z expansion {zmask: coefficient} including the identity."""
        out = {0: self.a0}
        for j, a in self.linear.items():
            out[1 << j] = out.get(1 << j, 0.0) + a
        for (i, j), a in self.quadratic.items():
            m = (1 << i) | (1 << j)
            out[m] = out.get(m, 0.0) + a
        return {m: a for m, a in out.items() if a != 0.0 or m == 0}


def _z_clause(sup: tuple[int, ...], a: float) -> Callable[[int], float]:
    mask = 0
    for q in sup:
        mask |= 1 << q
    return lambda x: a * (1.0 - 2.0 * (bin(x & mask).count("1") & 1))


class MaxKSatCost(CostFunction):
    """Max-k-SAT: clauses are tuples of literals (var index, negated)."""

    kind = "maxksat"

    def __init__(self, n: int, clause_literals: list[tuple[tuple[int, bool], ...]]):
        self.clause_literals = [tuple(lits) for lits in clause_literals]
        clauses = []
        for lits in self.clause_literals:
            vars_ = tuple(sorted({v for v, _ in lits}))
            if len(vars_) != len(lits):
                raise InstanceFormatError("repeated variable inside a clause")
            clauses.append(Clause(vars_, _sat_clause(lits)))
        super().__init__(n, 0.0, clauses)

    def _build_table(self) -> np.ndarray:
        xs = np.arange(1 << self.n, dtype=np.int64)
        out = np.zeros(1 << self.n)
        for lits in self.clause_literals:
            unsat = np.ones(1 << self.n, dtype=bool)
            for v, neg in lits:
                bit = ((xs >> v) & 1).astype(bool)
                unsat &= ~bit if not neg else bit
            out += 1.0 - unsat
        return out


def _sat_clause(lits) -> Callable[[int], float]:
    def val(x: int) -> float:
        for v, neg in lits:
            bit = (x >> v) & 1
            if (bit == 1 and not neg) or (bit == 0 and neg):
                return 1.0
        return 0.0
    return val


class BalancedMax2SatCost(MaxKSatCost):
    """Max-2-SAT where every variable appears negated and unnegated equally
    often and each variable pair occurs in at most one clause."""

    kind = "balanced_max2sat"

    def __init__(self, n: int, signed_edges: list[tuple[int, int, int, int]]):
        # signed edge: (i, si, j, sj) with s=+1 unnegated, s=-1 negated
        lits = []
        pos = [0] * n
        neg = [0] * n
        pairs = set()
        for (i, si, j, sj) in signed_edges:
            if i == j:
                raise InstanceFormatError("clause on a single variable pair (i, i)")
            key = (min(i, j), max(i, j))
            if key in pairs:
                raise InstanceFormatError(f"variable pair {key} appears in more than one clause")
            pairs.add(key)
            for v, s in ((i, si), (j, sj)):
                if s not in (1, -1):
                    raise InstanceFormatError("literal sign must be +1 or -1")
                (pos if s == 1 else neg)[v] += 1
            lits.append(((i, si == -1), (j, sj == -1)))
        for v in range(n):
            if pos[v] != neg[v]:
                raise InstanceFormatError(
                    f"variable {v + 1} appears {pos[v]} times unnegated but {neg[v]} negated")
        self.signed_edges = [tuple(e) for e in signed_edges]
        super().__init__(n, [tuple(l) for l in lits])

    def graph(self) -> Graph:
        return Graph(self.n, tuple(sorted((min(i, j), max(i, j))
                                          for (i, _, j, _) in self.signed_edges)))

    def edge_parity(self) -> dict[tuple[int, int], int]:
        """+1 when both or neither literal is negated, else -1."""
        return {(min(i, j), max(i, j)): si * sj for (i, si, j, sj) in self.signed_edges}

    def triangle_parity_counts(self) -> tuple[int, int]:
        """(F+, F-): triangles of the clause graph by product of edge parities."""
        g = self.graph()
        par = self.edge_parity()
        nb = g.neighbors()
        fp = fm = 0
        for (u, v) in g.edges:
            for k in nb[u] & nb[v]:
                if k > v:  # count each triangle once (u < v < k)
                    p = par[(u, v)] * par[(min(u, k), max(u, k))] * par[(min(v, k), max(v, k))]
                    fp, fm = (fp + 1, fm) if p > 0 else (fp, fm + 1)
        return fp, fm


class HammingRampCost(CostFunction):
    """c(x) = alpha * |x| (Hamming weight)."""

    kind = "hamming_ramp"

    def __init__(self, n: int, alpha: float = 1.0):
        if alpha == 0:
            raise InstanceFormatError("ramp slope must be nonzero")
        self.alpha = float(alpha)
        clauses = [Clause((j,), _ramp_clause(j, alpha)) for j in range(n)]
        super().__init__(n, 0.0, clauses)

    def _build_table(self) -> np.ndarray:
        xs = np.arange(1 << self.n, dtype=np.int64)
        return self.alpha * popcount(xs).astype(np.float64)


def _ramp_clause(j: int, alpha: float) -> Callable[[int], float]:
    return lambda x: alpha * ((x >> j) & 1)


class GroverCost(CostFunction):
    """Indicator of a single marked string: c(x) = [x == marked]."""

    kind = "grover"

    def __init__(self, n: int, marked: int):
        if not 0 <= marked < (1 << n):
            raise InstanceFormatError("marked string outside range")
        self.marked = marked
        super().__init__(n, 0.0, [Clause(tuple(range(n)), lambda x: float(x == marked))])

    def _build_table(self) -> np.ndarray:
        out = np.zeros(1 << self.n)
        out[self.marked] = 1.0
        return out


class TruthTableCost(CostFunction):
    kind = "truth_table"
    MAX_N = 20

    def __init__(self, n: int, table):
        if n > self.MAX_N:
            raise SizeLimitError(f"truth-table cost capped at {self.MAX_N} variables")
        table = np.asarray(table, dtype=np.float64)
        if table.shape != (1 << n,):
            raise InstanceFormatError("truth table length must be 2^n")
        self.table = table
        super().__init__(n, 0.0, [Clause(tuple(range(n)), lambda x: float(table[x]))])

    def _build_table(self) -> np.ndarray:
        return self.table.copy()


# -- instance generators -------------------------------------------------------

def _rng(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox 4x64-10): reproducible across platforms."""
    return np.random.Generator(np.random.Philox(key=seed))


def random_max_ksat(n: int, m: int, k: int, seed: int) -> MaxKSatCost:
    """Random k-SAT: k distinct variables per clause, each negated with prob 1/2."""
    if k > n:
        raise InstanceFormatError("clause width exceeds variable count")
    distinct = math.comb(n, k) * (2 ** k)
    if m > distinct:
        raise InstanceFormatError(f"{m} clauses exceed the {distinct} distinct possibilities")
    rng = _rng(seed)
    clauses = []
    for _ in range(m):
        vars_ = rng.choice(n, size=k, replace=False)
        negs = rng.integers(0, 2, size=k)
        clauses.append(tuple((int(v), bool(s)) for v, s in zip(vars_, negs)))
    return MaxKSatCost(n, clauses)


def random_graph(n: int, m: int, seed: int, weighted: bool = False) -> Graph:
    all_edges = list(itertools.combinations(range(n), 2))
    if m > len(all_edges):
        raise InstanceFormatError(f"{m} edges exceed the {len(all_edges)} possible")
    rng = _rng(seed)
    idx = rng.choice(len(all_edges), size=m, replace=False)
    edges = tuple(sorted(all_edges[i] for i in idx))
    weights = tuple(float(w) for w in rng.uniform(0.2, 2.0, size=m)) if weighted else None
    return Graph(n, edges, weights)


def random_qubo(n: int, m_quadratic: int, seed: int, with_linear: bool = True,
                dyadic: bool = False) -> QuboCost:
    """Random QUBO in Z-coefficient form.

    dyadic=True draws coefficients as multiples of 1/8, so products and sums
    stay exactly representable (used by tolerance-0 identity tests).
    """
    rng = _rng(seed)

    def draw(size):
        if dyadic:
            vals = rng.integers(1, 17, size=size) * np.where(rng.integers(0, 2, size=size), 1, -1)
            return vals / 8.0
        return rng.uniform(-1.0, 1.0, size=size)

    linear = {}
    if with_linear:
        linear = {int(j): float(a) for j, a in zip(range(n), draw(n))}
    pairs = list(itertools.combinations(range(n), 2))
    if m_quadratic > len(pairs):
        raise InstanceFormatError("too many quadratic terms requested")
    idx = rng.choice(len(pairs), size=m_quadratic, replace=False)
    quad = {pairs[i]: float(a) for i, a in zip(idx, draw(m_quadratic))}
    a0 = float(draw(1)[0])
    return QuboCost(n, a0, linear, quad)


def random_balanced_max2sat(n: int, target_m: int, seed: int,
                            all_positive: bool = False, max_tries: int = 2000) -> BalancedMax2SatCost:
    """Balanced Max-2-SAT built as an edge-disjoint union of cycles.

    Cycles give every vertex even degree; negated endpoints are then chosen
    per vertex, half of its endpoints each, which enforces the balance
    condition exactly.  With all_positive=True only even cycles are used and
    the clause pattern alternates (x or y) / (!x or !y) around each cycle, so
    every clause parity is +1.
    """
    rng = _rng(seed)
    used = set()
    cycles = []
    m = 0
    tries = 0
    while m < target_m and tries < max_tries:
        tries += 1
        if all_positive:
            length = int(rng.choice([4, 6]))
        else:
            length = int(rng.choice([3, 4, 5]))
        if length > n:
            continue
        verts = [int(v) for v in rng.choice(n, size=length, replace=False)]
        cyc = [(verts[i], verts[(i + 1) % length]) for i in range(length)]
        keys = [(min(u, v), max(u, v)) for (u, v) in cyc]
        if any(k in used for k in keys):
            continue
        used.update(keys)
        cycles.append(cyc)
        m += length
    if m == 0:
        raise InstanceFormatError("could not place any cycle; relax parameters")
    edges = []
    if all_positive:
        for cyc in cycles:
            for i, (u, v) in enumerate(cyc):
                s = 1 if i % 2 == 0 else -1
                edges.append((u, s, v, s))
    else:
        # choose, per vertex, which incident endpoints are negated (half of them)
        incident: dict[int, list[int]] = {}
        flat = [e for cyc in cycles for e in cyc]
        for idx, (u, v) in enumerate(flat):
            incident.setdefault(u, []).append(2 * idx)
            incident.setdefault(v, []).append(2 * idx + 1)
        signs = {}
        for v, slots in incident.items():
            half = len(slots) // 2
            negated = set(rng.choice(len(slots), size=half, replace=False))
            for i, slot in enumerate(slots):
                signs[slot] = -1 if i in negated else 1
        for idx, (u, v) in enumerate(flat):
            edges.append((u, signs[2 * idx], v, signs[2 * idx + 1]))
    return BalancedMax2SatCost(n, edges)


def balanced_triangle_instance() -> BalancedMax2SatCost:
    """Three clauses on a triangle, one negated literal each: (F+, F-) = (0, 1)."""
    return BalancedMax2SatCost(3, [(0, 1, 1, -1), (1, 1, 2, -1), (2, 1, 0, -1)])


def balanced_two_triangle_instance() -> BalancedMax2SatCost:
    """Five variables, two triangles sharing a vertex: (F+, F-) = (2, 0)."""
    return BalancedMax2SatCost(5, [(0, 1, 1, 1), (1, 1, 2, -1), (2, 1, 0, -1),
                                   (1, -1, 3, -1), (1, -1, 4, -1), (3, 1, 4, 1)])


def generate_instance(kind: str, params: dict, seed: int) -> CostFunction:
    """Seed-reproducible instance generation; used by the CLI `generate` command."""
    if kind in ("max3sat", "maxksat"):
        k = int(params.get("k", 3))
        return random_max_ksat(int(params["n"]), int(params["m"]), k, seed)
    if kind == "maxcut":
        g = random_graph(int(params["n"]), int(params["m"]), seed,
                         weighted=bool(params.get("weighted", False)))
        return MaxCutCost(g)
    if kind == "qubo":
        return random_qubo(int(params["n"]), int(params["m"]), seed,
                           with_linear=bool(params.get("linear", True)))
    if kind == "balanced_max2sat":
        return random_balanced_max2sat(int(params["n"]), int(params["m"]), seed,
                                       all_positive=bool(params.get("all_positive", False)))
    if kind == "hamming_ramp":
        return HammingRampCost(int(params["n"]), float(params.get("alpha", 1.0)))
    if kind == "grover":
        return GroverCost(int(params["n"]), int(params.get("marked", 0)))
    raise InstanceFormatError(f"unknown instance kind {kind!r}")
