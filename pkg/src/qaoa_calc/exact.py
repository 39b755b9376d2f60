"""Exact arbitrary-angle expectation values for level-p circuits.

The general evaluator conjugates each cost term layer by layer in the
Heisenberg picture.  Mixer layers rotate Z -> cos(2b) Z + sin(2b) Y per
qubit.  Phase layers multiply a Pauli string sigma on the right by
exp(i g (X_S C X_S - C)), a commuting Z polynomial over the terms of C that
anticommute with sigma's X support; its finite product-of-rotations
expansion is exact, and term growth is automatically confined to the
term's lightcone.

Per-problem closed forms (MaxCut, QUBO, Balanced-Max-2-SAT, Hamming ramp)
and the small-mixing / small-phase specializations are provided alongside.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .bits import MAX_QUBITS, indices_from_mask, popcount
from .cost import BalancedMax2SatCost, CostFunction, Graph, QuboCost
from .errors import SizeLimitError, TermBudgetError
from .grad import DEFAULT_TERM_BUDGET
from .hamop import DiagonalHam, to_hamiltonian
from .oracle import Schedule, as_pairs, plus_state, simulate
from .pauli import DEFAULT_PRUNE_TOL
from .series import _as_ham

LIGHTCONE_ENUM_LIMIT = 22
IMAG_RESIDUE_TOL = 1e-10


# -- lightcones -----------------------------------------------------------------

@dataclass(frozen=True)
class Lightcone:
    """Nested qubit sets L_{j,0} = N_j through L_{j,p} for one clause."""

    clause_index: int
    levels: tuple[frozenset[int], ...]

    def level(self, ell: int) -> frozenset[int]:
        return self.levels[ell]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1


def _grow_lightcone(supports: list[frozenset[int]], start: frozenset[int],
                    depth: int) -> tuple[frozenset[int], ...]:
    levels = [start]
    cur = start
    for _ in range(depth):
        grown = set(cur)
        for sup in supports:
            if sup & cur:
                grown |= sup
        cur = frozenset(grown)
        levels.append(cur)
    return tuple(levels)


def lightcone(cost: CostFunction, clause_index: int, depth: int) -> Lightcone:
    """Lightcone of one problem clause with respect to the clause supports."""
    supports = [frozenset(cl.support) for cl in cost.clauses]
    if not 0 <= clause_index < len(supports):
        raise IndexError(f"clause index {clause_index} outside 0..{len(supports) - 1}")
    return Lightcone(clause_index,
                     _grow_lightcone(supports, supports[clause_index], depth))


def lightcone_size_bound(k: int, max_degree: int, ell: int, n: int) -> int:
    """|L_{j,ell}| <= min(k ((D-1)(k-1))^ell, n)."""
    return min(k * max(((max_degree - 1) * (k - 1)), 1) ** ell, n)


# -- array-level conjugation kernels ---------------------------------------------

def _merge(xm, zm, co, tol):
    if len(xm) == 0:
        return xm, zm, co
    key = (xm << MAX_QUBITS) | zm
    ukey, inv = np.unique(key, return_inverse=True)
    out = np.zeros(len(ukey), dtype=np.complex128)
    np.add.at(out, inv, co)
    keep = np.abs(out) > tol
    ukey, out = ukey[keep], out[keep]
    return (ukey >> MAX_QUBITS), (ukey & ((1 << MAX_QUBITS) - 1)), out


_MERGE_FLOOR = 1 << 15


def _mixer_conjugate(xm, zm, co, beta, tol):
    """Per-qubit rotation Z -> c Z + s Y, Y -> c Y - s Z with c,s = cos,sin(2 beta)."""
    c2, s2 = math.cos(2.0 * beta), math.sin(2.0 * beta)
    active = 0
    for z in zm:
        active |= int(z)
    last = max(len(xm), _MERGE_FLOOR)
    for q in indices_from_mask(active):
        bit = np.int64(1 << q)
        sel = (zm & bit) != 0
        if not sel.any():
            continue
        signs = np.where((xm[sel] & bit) != 0, -1.0, 1.0)
        xm = np.concatenate([xm[~sel], xm[sel], xm[sel] ^ bit])
        zm = np.concatenate([zm[~sel], zm[sel], zm[sel]])
        co = np.concatenate([co[~sel], c2 * co[sel], s2 * signs * co[sel]])
        # merging is deferred until the array has doubled; a merge pass costs
        # a sort, so per-qubit merging would dominate the whole evaluation
        if len(xm) > 2 * last:
            xm, zm, co = _merge(xm, zm, co, tol)
            last = max(len(xm), _MERGE_FLOOR)
    return _merge(xm, zm, co, tol)


_I_POW = np.array([1.0, 1.0j, -1.0, -1.0j], dtype=np.complex128)


def _phase_conjugate(xm, zm, co, gamma, zterms, tol):
    """Right-multiply by the product over anticommuting C terms of
    cos(2 g a) I + i sin(2 g a) Z_T (with the sigma.Z_T phase folded in)."""
    last = max(len(xm), _MERGE_FLOOR)
    for (zt, a) in zterms:
        zt64 = np.int64(zt)
        odd = (popcount(xm & zt64) & 1) == 1
        if not odd.any():
            continue
        cos_f = math.cos(2.0 * gamma * a)
        sin_f = math.sin(2.0 * gamma * a)
        nx_ = popcount(zt64 & xm[odd] & ~zm[odd])
        ny_ = popcount(zt64 & xm[odd] & zm[odd])
        phase = _I_POW[(ny_ - nx_) % 4] * (-1j * sin_f)
        xm = np.concatenate([xm[~odd], xm[odd], xm[odd]])
        zm = np.concatenate([zm[~odd], zm[odd], zm[odd] ^ zt64])
        co = np.concatenate([co[~odd], cos_f * co[odd], phase * co[odd]])
        if len(xm) > 2 * last:
            xm, zm, co = _merge(xm, zm, co, tol)
            last = max(len(xm), _MERGE_FLOOR)
    return _merge(xm, zm, co, tol)


def _conjugate_term(zmask: int, coeff: float, zterms, schedule: Schedule,
                    budget: int, tol: float) -> complex:
    """<s| Q^dag (coeff Z_zmask) Q |s> by layerwise conjugation."""
    xm = np.array([0], dtype=np.int64)
    zm = np.array([zmask], dtype=np.int64)
    co = np.array([coeff], dtype=np.complex128)
    for (gamma, beta) in reversed(as_pairs(schedule)):
        xm, zm, co = _mixer_conjugate(xm, zm, co, beta, tol)
        if len(xm) > budget:
            raise TermBudgetError("mixer conjugation exceeded term budget",
                                  terms=len(xm), budget=budget)
        xm, zm, co = _phase_conjugate(xm, zm, co, gamma, zterms, tol)
        if len(xm) > budget:
            raise TermBudgetError("phase conjugation exceeded term budget",
                                  terms=len(xm), budget=budget)
    keep = zm == 0
    return complex(co[keep].sum())


# -- lightcone-isomorphism deduplication -----------------------------------------

def _subinstance(zterms, cone: frozenset[int], observable: int):
    """Terms falling inside the cone, with the observable term marked."""
    inside = [(z, a) for (z, a) in zterms if not (z & ~_mask(cone))]
    return inside, observable


def _mask(qubits) -> int:
    m = 0
    for q in qubits:
        m |= 1 << q
    return m


def _instance_graph(inside, observable: int) -> nx.Graph:
    g = nx.Graph()
    qubits = set()
    for (z, _a) in inside:
        qubits |= set(indices_from_mask(z))
    for q in qubits:
        g.add_node(("q", q), kind="q")
    for idx, (z, a) in enumerate(inside):
        g.add_node(("t", idx), kind="t", coeff=round(float(a), 10), obs=(z == observable))
        for q in indices_from_mask(z):
            g.add_edge(("t", idx), ("q", q))
    return g


def _invariant_signature(inside, observable: int):
    return tuple(sorted((round(float(a), 10), popcount(np.array([z]))[0], z == observable)
                        for (z, a) in inside))


def _node_match(a, b):
    return a.get("kind") == b.get("kind") and a.get("coeff") == b.get("coeff") \
        and a.get("obs") == b.get("obs")


class _IsoGroups:
    """Groups clause computations that are equal by qubit relabeling.

    Candidates share an invariant signature; equivalence is then re-verified
    by an attributed graph isomorphism check, so hash collisions cannot
    silently merge inequivalent clauses.
    """

    def __init__(self):
        self._by_sig: dict = {}

    def lookup(self, inside, observable: int):
        sig = _invariant_signature(inside, observable)
        bucket = self._by_sig.setdefault(sig, [])
        g = _instance_graph(inside, observable)
        for rep_graph, value in bucket:
            if nx.is_isomorphic(g, rep_graph, node_match=_node_match):
                return value, g, bucket
        return None, g, bucket


def expectation_exact_detail(cost: CostFunction, schedule: Schedule, *, dedup: bool = True,
                             budget: int = DEFAULT_TERM_BUDGET,
                             tol: float = DEFAULT_PRUNE_TOL) -> dict:
    """<C>_p via per-term conjugation; returns value plus per-term diagnostics."""
    ham = _as_ham(cost)
    zterms = ham.z_terms()
    supports = [frozenset(indices_from_mask(z)) for (z, _a) in zterms]
    p = len(as_pairs(schedule))
    groups = _IsoGroups()
    per_term = []
    unique = 0
    total = ham.a0
    for j, (z, a) in enumerate(zterms):
        cone = _grow_lightcone(supports, supports[j], p)[-1]
        inside, obs = _subinstance(zterms, cone, z)
        value = None
        if dedup:
            value, g, bucket = groups.lookup(inside, obs)
        if value is None:
            try:
                value = _conjugate_term(z, a, zterms, schedule, budget, tol)
            except TermBudgetError as exc:
                raise TermBudgetError(f"term {j} (support {sorted(supports[j])}): {exc}",
                                      terms=exc.terms, budget=budget,
                                      context=f"term {j}") from exc
            unique += 1
            if dedup:
                bucket.append((g, value))
        if abs(value.imag) > IMAG_RESIDUE_TOL * max(1.0, abs(value.real)):
            raise FloatingPointError(f"imaginary residue {value.imag} in term {j}")
        per_term.append(value.real)
        total += value.real
    return {"value": float(total), "per_term": per_term,
            "unique_evaluations": unique, "term_count": len(zterms)}


def expectation_exact(cost: CostFunction, schedule: Schedule, *, dedup: bool = True,
                      budget: int = DEFAULT_TERM_BUDGET,
                      tol: float = DEFAULT_PRUNE_TOL) -> float:
    return expectation_exact_detail(cost, schedule, dedup=dedup, budget=budget, tol=tol)["value"]


# -- level-1 closed forms ---------------------------------------------------------

def maxcut_p1_parts(graph: Graph, gamma: float) -> tuple[float, float]:
    """(<gamma| i nabla C |gamma>, <gamma| nabla^2 C |gamma>) for MaxCut."""
    if not graph.is_unweighted():
        raise ValueError("the MaxCut closed form requires an unweighted graph")
    degs = graph.degrees()
    tri = graph.triangles_per_edge()
    grad1 = math.sin(gamma) * sum(d * math.cos(gamma) ** (d - 1) for d in degs)
    grad2 = 2.0 * sum(
        math.cos(gamma) ** (degs[u] + degs[v] - 2 * tri[(u, v)] - 2)
        * (1.0 - math.cos(2.0 * gamma) ** tri[(u, v)])
        for (u, v) in graph.edges)
    return grad1, grad2


def maxcut_p1(graph: Graph, gamma: float, beta: float) -> float:
    """Exact <C>_1 for MaxCut at arbitrary angles."""
    grad1, grad2 = maxcut_p1_parts(graph, gamma)
    return (graph.m / 2.0 + (math.sin(4.0 * beta) / 4.0) * grad1
            - (math.sin(2.0 * beta) ** 2 / 8.0) * grad2)


def _alternating_binomial(fp: int, fm: int, ell: int) -> float:
    """sum_k C(fp, ell-k) C(fm, k) (-1)^k: the finite form of the
    hypergeometric factor, with no special-function dependence."""
    return float(sum(math.comb(fp, ell - k) * math.comb(fm, k) * (-1) ** k
                     for k in range(0, ell + 1)))


def _triangle_parity_factor(fp: int, fm: int, gamma: float) -> float:
    c2 = math.cos(gamma / 2.0) ** 2
    s2 = math.sin(gamma / 2.0) ** 2
    f = fp + fm
    total = 0.0
    for ell in range(1, f + 1, 2):
        total += c2 ** (f - ell) * s2 ** ell * _alternating_binomial(fp, fm, ell)
    return total


def balanced_max2sat_p1(inst: BalancedMax2SatCost, gamma: float, beta: float) -> float:
    """Exact <C>_1 for Balanced-Max-2-SAT at arbitrary angles."""
    g = inst.graph()
    par = inst.edge_parity()
    nb = g.neighbors()
    deg = g.degrees()
    ch = math.cos(gamma / 2.0)
    term1 = 0.0
    term2 = 0.0
    for (u, v) in g.edges:
        d, e = deg[u] - 1, deg[v] - 1
        term1 += ch ** d + ch ** e
        fp = fm = 0
        for k in nb[u] & nb[v]:
            p = par[(u, v)] * par[(min(u, k), max(u, k))] * par[(min(v, k), max(v, k))]
            fp, fm = (fp + 1, fm) if p > 0 else (fp, fm + 1)
        term2 += ch ** (d + e - 2 * fp - 2 * fm) * _triangle_parity_factor(fp, fm, gamma)
    return (0.75 * g.m
            + (math.sin(4.0 * beta) * math.sin(gamma / 2.0) / 8.0) * term1
            - (math.sin(2.0 * beta) ** 2 / 4.0) * term2)


def hamming_ramp_p1(alpha: float, n: int, gamma: float, beta: float) -> float:
    """<C>_1 = alpha n / 2 + (alpha n / 2) sin(alpha gamma) sin(2 beta);
    maximized to alpha*n at gamma = pi/(2 alpha), beta = pi/4."""
    return alpha * n / 2.0 + (alpha * n / 2.0) * math.sin(alpha * gamma) * math.sin(2.0 * beta)


def _local_masks(zterms, cone: tuple[int, ...]):
    pos = {q: i for i, q in enumerate(cone)}
    out = []
    for (z, a) in zterms:
        qs = indices_from_mask(z)
        if all(q in pos for q in qs):
            out.append((_mask(pos[q] for q in qs), a))
    return pos, out


def _signs_table(width: int, mask: int) -> np.ndarray:
    xs = np.arange(1 << width, dtype=np.int64)
    return 1.0 - 2.0 * (popcount(xs & mask) & 1)


def qubo_p1(qubo: QuboCost | DiagonalHam, gamma: float, beta: float) -> float:
    """Exact <C>_1 for QUBO costs via lightcone-restricted classical sums."""
    ham = _as_ham(qubo)
    if ham.locality() > 2:
        raise ValueError("qubo_p1 requires an at most 2-local cost Hamiltonian")
    zterms = ham.z_terms()
    supports = [frozenset(indices_from_mask(z)) for (z, _a) in zterms]
    e_lin = 0.0
    e_quad = 0.0
    e_grad2 = 0.0
    for j, (z, a) in enumerate(zterms):
        cone = tuple(sorted(_grow_lightcone(supports, supports[j], 1)[-1]))
        width = len(cone)
        if width > LIGHTCONE_ENUM_LIMIT:
            raise SizeLimitError(
                f"lightcone of size {width} exceeds the enumeration limit "
                f"{LIGHTCONE_ENUM_LIMIT}; use expectation_exact or the oracle")
        pos, local = _local_masks(zterms, cone)
        qs = sorted(supports[j])
        cj = a * _signs_table(width, _mask(pos[q] for q in qs))
        # partial differences of the full cost over the cone
        def pdiff(q):
            out = np.zeros(1 << width)
            for (lm, la) in local:
                if (lm >> pos[q]) & 1:
                    out += -2.0 * la * _signs_table(width, lm)
            return out
        if len(qs) == 1:
            e_lin += -(2.0 / 2 ** width) * float(np.sum(cj * np.sin(gamma * pdiff(qs[0]))))
        else:
            u, v = qs
            du, dv = pdiff(u), pdiff(v)
            e_quad += -(2.0 / 2 ** width) * float(np.sum(cj * (np.sin(gamma * du)
                                                               + np.sin(gamma * dv))))
            dd = np.zeros(1 << width)
            for (lm, la) in local:
                if (lm >> pos[u]) & 1 and (lm >> pos[v]) & 1:
                    dd += 4.0 * la * _signs_table(width, lm)
            e_grad2 += -(8.0 / 2 ** width) * float(np.sum(
                cj * np.sin(gamma * (du + 0.5 * dd))
                * np.sin(gamma * (dv + 0.5 * dd))))
    return (ham.a0 + 0.5 * math.sin(2.0 * beta) * e_lin
            + 0.25 * math.sin(4.0 * beta) * e_quad
            - 0.125 * math.sin(2.0 * beta) ** 2 * e_grad2)


# -- partially small angles --------------------------------------------------------

def small_beta_p1(cost: CostFunction, gamma: float, beta: float):
    """First order in the mixing angle, arbitrary phase angle.

    P(x) = 2^-n - (2 beta / 2^n) sum_j sin(gamma d_j c(x)).
    Returns (probability function, expectation estimate).
    """
    n = cost.n
    ct = cost.cost_table()
    xs = np.arange(1 << n, dtype=np.int64)
    sin_sum = np.zeros(1 << n)
    for j in range(n):
        sin_sum += np.sin(gamma * (ct[xs ^ (1 << j)] - ct))
    probs = 2.0 ** -n - (2.0 * beta / 2.0 ** n) * sin_sum
    expectation = float(np.sum(ct * probs))
    return (lambda x: float(probs[x])), expectation


def small_gamma_p1(qubo: QuboCost | DiagonalHam, gamma: float, beta: float) -> float:
    """Second order in the phase angle, arbitrary mixing angle (QUBO only)."""
    ham = _as_ham(qubo)
    if ham.locality() > 2:
        raise ValueError("small_gamma_p1 requires an at most 2-local cost Hamiltonian")
    lin: dict[int, float] = {}
    quad: dict[tuple[int, int], float] = {}
    for z, a in ham.z_terms():
        qs = indices_from_mask(z)
        if len(qs) == 1:
            lin[qs[0]] = lin.get(qs[0], 0.0) + a
        else:
            quad[qs] = quad.get(qs, 0.0) + a
    nbrs: dict[int, dict[int, float]] = {}
    for (i, j), a in quad.items():
        nbrs.setdefault(i, {})[j] = a
        nbrs.setdefault(j, {})[i] = a
    first = (math.sin(2.0 * beta) * sum(a * a for a in lin.values())
             + math.sin(4.0 * beta) * sum(a * a for a in quad.values()))
    second = 0.0
    for (i, j), a in quad.items():
        cross = lin.get(i, 0.0) * lin.get(j, 0.0)
        common = set(nbrs.get(i, {})) & set(nbrs.get(j, {}))
        cross += sum(nbrs[i][k] * nbrs[j][k] for k in common)
        second += a * cross
    return ham.a0 + 2.0 * gamma * first + 4.0 * gamma ** 2 * math.sin(2.0 * beta) ** 2 * second


# -- effect of one extra level ------------------------------------------------------

def _apply_b(psi: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros_like(psi)
    xs = np.arange(1 << n)
    for j in range(n):
        out += psi[xs ^ (1 << j)]
    return out


def level_p_delta(cost: CostFunction, schedule: Schedule,
                  state: np.ndarray | None = None) -> float:
    """Second-order estimate of <C>_p - <C>_{p-1} from the level-(p-1) state.

    Uses the three state expectations <i nabla C>, <nabla^2 C>, <nabla_C nabla C>
    evaluated densely on the state after the first p-1 levels.
    """
    sched = as_pairs(schedule)
    if not sched:
        raise ValueError("schedule must contain at least one level")
    gamma_p, beta_p = sched[-1]
    psi = state if state is not None else simulate(cost, sched[:-1])
    n = cost.n
    ct = cost.cost_table()
    bpsi = _apply_b(psi, n)
    cpsi = ct * psi
    i_grad = np.vdot(psi, 1j * (_apply_b(cpsi, n) - ct * bpsi))
    grad2 = np.vdot(psi, _apply_b(_apply_b(cpsi, n), n)
                    - 2.0 * _apply_b(ct * bpsi, n) + ct * _apply_b(bpsi, n))
    grad_cc = np.vdot(psi, 2.0 * ct * _apply_b(cpsi, n)
                      - ct * ct * bpsi - _apply_b(ct * cpsi, n))
    return float(beta_p * i_grad.real - 0.5 * beta_p ** 2 * grad2.real
                 - gamma_p * beta_p * grad_cc.real)


def small_beta_level_p(cost: CostFunction, state: np.ndarray,
                       gamma: float, beta: float) -> np.ndarray:
    """First-order-in-beta probability change of one more level applied to
    ``state``.

    In polar form, with q*_{x^(j)} q_x = r_xj e^{-i alpha_xj}, the change is
    2 beta sum_j r_xj sin(alpha_xj - gamma d_j c(x)); for real nonnegative
    amplitudes (alpha = 0) this is the first-order small-mixing distribution.
    """
    n = cost.n
    ct = cost.cost_table()
    xs = np.arange(1 << n, dtype=np.int64)
    delta = np.zeros(1 << n)
    for j in range(n):
        w = np.conj(state) * state[xs ^ (1 << j)]
        dj = ct[xs ^ (1 << j)] - ct
        delta += np.imag(w * np.exp(-1j * gamma * dj))
    return 2.0 * beta * delta
