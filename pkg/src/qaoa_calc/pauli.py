"""Exact algebra of n-qubit Pauli sums in symplectic bitmask form.

Each term is (xmask, zmask, coeff) with the usual encoding per qubit:
I=(0,0), X=(1,0), Z=(0,1), Y=(1,1).  The stored coefficient multiplies the
true Pauli letters (Y itself, not the XZ product); the i-per-Y phase of
Y = iXZ is handled inside multiplication so stored masks stay canonical.
Consequences: the adjoint is plain coefficient conjugation, and a sum is
Hermitian iff all stored coefficients are real.

Sums are immutable; terms are merged, pruned at ``tol`` (default 1e-14,
pass 0.0 for exactness tests) and kept sorted by (xmask, zmask).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .bits import MAX_QUBITS, indices_from_mask, mask_from_indices, popcount
from .errors import DimensionMismatchError, SizeLimitError

DEFAULT_PRUNE_TOL = 1e-14
DENSE_QUBIT_LIMIT = 14

_I_POWERS = np.array([1.0, 1.0j, -1.0, -1.0j], dtype=np.complex128)

_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _merge(n: int, xm: np.ndarray, zm: np.ndarray, co: np.ndarray, tol: float) -> tuple:
    """Merge duplicate (xmask, zmask) pairs, prune small coefficients, sort."""
    if len(xm) == 0:
        return xm.astype(np.int64), zm.astype(np.int64), co.astype(np.complex128)
    key = (xm.astype(np.int64) << MAX_QUBITS) | zm.astype(np.int64)
    ukey, inv = np.unique(key, return_inverse=True)
    merged = np.zeros(len(ukey), dtype=np.complex128)
    np.add.at(merged, inv, co)
    keep = np.abs(merged) > tol
    ukey = ukey[keep]
    merged = merged[keep]
    return (ukey >> MAX_QUBITS).astype(np.int64), (ukey & ((1 << MAX_QUBITS) - 1)).astype(np.int64), merged


@dataclass(frozen=True)
class PauliSum:
    """Complex-weighted sum of n-qubit Pauli strings."""

    n: int
    xmasks: np.ndarray = field(repr=False)
    zmasks: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)

    # -- construction -----------------------------------------------------
    @staticmethod
    def from_terms(n: int, terms: Iterable[tuple[int, int, complex]],
                   tol: float | None = None) -> "PauliSum":
        if n < 0 or n > MAX_QUBITS:
            raise SizeLimitError(f"qubit count {n} outside supported range 0..{MAX_QUBITS}")
        terms = list(terms)
        xm = np.array([t[0] for t in terms], dtype=np.int64)
        zm = np.array([t[1] for t in terms], dtype=np.int64)
        co = np.array([t[2] for t in terms], dtype=np.complex128)
        if len(terms) and (xm >> n).any() or len(terms) and (zm >> n).any():
            raise DimensionMismatchError("mask bit outside qubit range")
        t = DEFAULT_PRUNE_TOL if tol is None else tol
        return PauliSum(n, *_merge(n, xm, zm, co, t))

    @staticmethod
    def zero(n: int) -> "PauliSum":
        return PauliSum.from_terms(n, [])

    @staticmethod
    def identity(n: int, coeff: complex = 1.0) -> "PauliSum":
        return PauliSum.from_terms(n, [(0, 0, coeff)])

    @staticmethod
    def single(n: int, letter: str, qubit: int, coeff: complex = 1.0) -> "PauliSum":
        return PauliSum.from_string(n, {qubit: letter}, coeff)

    @staticmethod
    def from_string(n: int, letters: dict[int, str], coeff: complex = 1.0) -> "PauliSum":
        """Build a single term from {qubit: 'X'|'Y'|'Z'} (0-based qubits)."""
        xm = zm = 0
        for q, p in letters.items():
            if not 0 <= q < n:
                raise DimensionMismatchError(f"qubit {q} outside 0..{n - 1}")
            if p in ("X", "Y"):
                xm |= 1 << q
            if p in ("Z", "Y"):
                zm |= 1 << q
            if p not in ("X", "Y", "Z"):
                raise ValueError(f"unknown Pauli letter {p!r}")
        return PauliSum.from_terms(n, [(xm, zm, coeff)])

    # -- basic structure ---------------------------------------------------
    @property
    def num_terms(self) -> int:
        return len(self.coeffs)

    def terms(self) -> list[tuple[int, int, complex]]:
        return [(int(x), int(z), complex(c))
                for x, z, c in zip(self.xmasks, self.zmasks, self.coeffs)]

    def is_zero(self) -> bool:
        return self.num_terms == 0

    def is_diagonal(self) -> bool:
        return not self.xmasks.any()

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.coeffs.imag) <= tol))

    def max_weight(self) -> int:
        if self.num_terms == 0:
            return 0
        return int(popcount(self.xmasks | self.zmasks).max())

    def identity_coefficient(self) -> complex:
        hit = (self.xmasks == 0) & (self.zmasks == 0)
        return complex(self.coeffs[hit].sum()) if hit.any() else 0.0

    # -- arithmetic ---------------------------------------------------------
    def _check_same_n(self, other: "PauliSum") -> None:
        if self.n != other.n:
            raise DimensionMismatchError(f"qubit counts differ: {self.n} vs {other.n}")

    def __add__(self, other: "PauliSum") -> "PauliSum":
        self._check_same_n(other)
        return PauliSum(self.n, *_merge(
            self.n,
            np.concatenate([self.xmasks, other.xmasks]),
            np.concatenate([self.zmasks, other.zmasks]),
            np.concatenate([self.coeffs, other.coeffs]),
            0.0))

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> "PauliSum":
        if c == 0:
            return PauliSum.zero(self.n)
        return PauliSum(self.n, self.xmasks, self.zmasks, self.coeffs * c)

    def prune(self, tol: float | None = None) -> "PauliSum":
        t = DEFAULT_PRUNE_TOL if tol is None else tol
        keep = np.abs(self.coeffs) > t
        return PauliSum(self.n, self.xmasks[keep], self.zmasks[keep], self.coeffs[keep])

    def adjoint(self) -> "PauliSum":
        return PauliSum(self.n, self.xmasks, self.zmasks, np.conj(self.coeffs))

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        return mul(self, other)

    # -- restriction and expectations ---------------------------------------
    def restrict(self, qubits: Iterable[int]) -> "PauliSum":
        """Keep only terms acting trivially outside ``qubits``."""
        allowed = mask_from_indices(qubits)
        keep = ((self.xmasks | self.zmasks) & ~allowed) == 0
        return PauliSum(self.n, self.xmasks[keep], self.zmasks[keep], self.coeffs[keep])

    def support(self) -> tuple[int, ...]:
        m = 0
        for x, z in zip(self.xmasks, self.zmasks):
            m |= int(x) | int(z)
        return indices_from_mask(m)

    def plus_expectation(self) -> complex:
        """<s|A|s> for |s> = |+>^n: only pure I/X strings contribute."""
        hit = self.zmasks == 0
        return complex(self.coeffs[hit].sum())

    # -- dense export --------------------------------------------------------
    def dense(self, limit: int = DENSE_QUBIT_LIMIT) -> np.ndarray:
        """Dense 2^n x 2^n matrix; a Pauli string is a signed permutation."""
        if self.n > limit:
            raise SizeLimitError(f"dense export of {self.n} qubits exceeds limit {limit}")
        dim = 1 << self.n
        out = np.zeros((dim, dim), dtype=np.complex128)
        cols = np.arange(dim, dtype=np.int64)
        for x, z, c in zip(self.xmasks, self.zmasks, self.coeffs):
            rows = cols ^ int(x)
            ny = int(popcount(np.array([x & z]))[0])
            signs = 1.0 - 2.0 * (popcount(cols & int(z)) & 1)
            out[rows, cols] += c * _I_POWERS[ny % 4] * signs
        return out

    def diagonal(self, limit: int = 26) -> np.ndarray:
        """Diagonal values as a 2^n vector (diagonal sums only)."""
        if not self.is_diagonal():
            raise ValueError("diagonal() requires a diagonal Pauli sum")
        if self.n > limit:
            raise SizeLimitError(f"diagonal of {self.n} qubits exceeds limit {limit}")
        x = np.arange(1 << self.n, dtype=np.int64)
        out = np.zeros(1 << self.n, dtype=np.complex128)
        for z, c in zip(self.zmasks, self.coeffs):
            out += c * (1.0 - 2.0 * (popcount(x & int(z)) & 1))
        return out

    # -- rendering -----------------------------------------------------------
    def __str__(self) -> str:
        if self.num_terms == 0:
            return "0"
        parts = []
        for x, z, c in self.terms():
            letters = []
            for q in range(self.n):
                xb, zb = (x >> q) & 1, (z >> q) & 1
                if xb or zb:
                    letters.append(("X" if not zb else "Y" if xb else "Z") + str(q + 1))
            body = " ".join(letters) if letters else "I"
            parts.append(f"({_fmt_coeff(c)}) {body}")
        return " + ".join(parts)


def _fmt_coeff(c: complex) -> str:
    if c.imag == 0:
        return f"{c.real:.10g}"
    sign = "+" if c.imag >= 0 else "-"
    return f"{c.real:.10g}{sign}{abs(c.imag):.10g}i"


# -- products and commutators ------------------------------------------------

def _pair_products(n, xa, za, ca, xb, zb, cb):
    """All pairwise products: masks XOR, phase by the symplectic sign rule."""
    x3 = xa[:, None] ^ xb[None, :]
    z3 = za[:, None] ^ zb[None, :]
    ya = popcount(xa & za)[:, None]
    yb = popcount(xb & zb)[None, :]
    y3 = popcount(x3 & z3)
    anti = popcount(za[:, None] & xb[None, :])
    e = (ya + yb - y3 + 2 * anti) % 4
    co = ca[:, None] * cb[None, :] * _I_POWERS[e]
    return x3.ravel(), z3.ravel(), co.ravel()


def mul(a: PauliSum, b: PauliSum, tol: float | None = None) -> PauliSum:
    """Exact operator product a @ b."""
    a._check_same_n(b)
    if a.num_terms == 0 or b.num_terms == 0:
        return PauliSum.zero(a.n)
    x3, z3, co = _pair_products(a.n, a.xmasks, a.zmasks, a.coeffs, b.xmasks, b.zmasks, b.coeffs)
    t = DEFAULT_PRUNE_TOL if tol is None else tol
    return PauliSum(a.n, *_merge(a.n, x3, z3, co, t))


def commutator(a: PauliSum, b: PauliSum, tol: float | None = None) -> PauliSum:
    """ab - ba.  Pairs of terms that commute are skipped up front."""
    a._check_same_n(b)
    if a.num_terms == 0 or b.num_terms == 0:
        return PauliSum.zero(a.n)
    # terms anticommute iff the symplectic form <a,b> = |xa&zb| + |za&xb| is odd
    anti = (popcount(a.xmasks[:, None] & b.zmasks[None, :])
            + popcount(a.zmasks[:, None] & b.xmasks[None, :])) & 1
    ia, ib = np.nonzero(anti)
    if len(ia) == 0:
        return PauliSum.zero(a.n)
    xa, za, ca = a.xmasks[ia], a.zmasks[ia], a.coeffs[ia]
    xb, zb, cb = b.xmasks[ib], b.zmasks[ib], b.coeffs[ib]
    x3 = xa ^ xb
    z3 = za ^ zb
    y3 = popcount(x3 & z3)
    e = (popcount(xa & za) + popcount(xb & zb) - y3 + 2 * popcount(za & xb)) % 4
    # for anticommuting strings, ab - ba = 2ab
    co = 2.0 * ca * cb * _I_POWERS[e]
    t = DEFAULT_PRUNE_TOL if tol is None else tol
    return PauliSum(a.n, *_merge(a.n, x3, z3, co, t))


# -- star seminorm -------------------------------------------------------------

class StarNorm(NamedTuple):
    value: float
    method: str


def star_seminorm(a: PauliSum, method: str = "auto",
                  dense_limit: int = DENSE_QUBIT_LIMIT) -> StarNorm:
    """min over identity shifts of the spectral norm, ||A||_* = min_b ||A + bI||.

    Methods: exact_diagonal (spread of the diagonal over all bitstrings),
    coefficient_bound (sum of non-identity |coefficients|, an upper bound),
    dense (spectral, n <= dense_limit).  "auto" picks the tightest available.
    """
    if method == "auto":
        if a.is_diagonal() and a.n <= 26:
            method = "exact_diagonal"
        elif a.n <= dense_limit:
            method = "dense"
        else:
            method = "coefficient_bound"
    if method == "exact_diagonal":
        if not a.is_diagonal():
            raise ValueError("exact_diagonal mode requires a diagonal sum")
        d = a.diagonal().real
        value = float(d.max() - d.min()) / 2.0 if len(d) else 0.0
        return StarNorm(value, method)
    if method == "coefficient_bound":
        nonid = (a.xmasks != 0) | (a.zmasks != 0)
        return StarNorm(float(np.abs(a.coeffs[nonid]).sum()), method)
    if method == "dense":
        if a.n > dense_limit:
            raise SizeLimitError(f"dense seminorm of {a.n} qubits exceeds limit {dense_limit}")
        m = a.dense(limit=dense_limit)
        herm = np.allclose(m, m.conj().T, atol=1e-12)
        skew = np.allclose(m, -m.conj().T, atol=1e-12)
        if herm or skew:
            ev = np.linalg.eigvalsh(m if herm else 1j * m)
            return StarNorm(float(ev.max() - ev.min()) / 2.0, method)
        # general case: convex minimization of the largest singular value
        from scipy.optimize import minimize

        def objective(v):
            return np.linalg.norm(m - (v[0] + 1j * v[1]) * np.eye(m.shape[0]), 2)

        res = minimize(objective, x0=np.zeros(2), method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-12, "maxiter": 4000})
        return StarNorm(float(res.fun), method)
    raise ValueError(f"unknown star_seminorm method {method!r}")


def spectral_norm_dense(a: PauliSum, limit: int = DENSE_QUBIT_LIMIT) -> float:
    return float(np.linalg.norm(a.dense(limit=limit), 2))


def pauli_1q_matrix(letter: str) -> np.ndarray:
    return _PAULI_1Q[letter]
