"""Gradient superoperators: nabla = [B, .], nabla_C = [C, .], words of their
powers applied to a base operator, QUBO closed forms, and norm bounds.

Words are stored leftmost-first and applied right to left, matching the
operator string nabla_C^a nabla^b ... C where the rightmost letter acts on
the base first.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .cost import Graph
from .errors import TermBudgetError
from .hamop import DiagonalHam
from .mixers import MisMixer, TransverseFieldMixer, XYMixer
from .pauli import PauliSum, commutator, star_seminorm

DEFAULT_TERM_BUDGET = 2_000_000

Mixer = TransverseFieldMixer | MisMixer | XYMixer


class Gen(enum.Enum):
    """Word letters: MIXER is the commutator with B, COST with C."""

    MIXER = "Db"
    COST = "Dc"


@dataclass(frozen=True)
class GradientWord:
    """An ordered word of superoperator powers over a base operator.

    letters[(gen, exponent), ...] reads left to right; the rightmost letter is
    applied to the base first.
    """

    letters: tuple[tuple[Gen, int], ...]

    def __post_init__(self):
        for gen, e in self.letters:
            if e < 1:
                raise ValueError("letter exponents must be >= 1")
            if not isinstance(gen, Gen):
                raise TypeError("letters must use the Gen enum")

    @staticmethod
    def parse(spec: str) -> "GradientWord":
        """Parse a compact word spec like "Dc^2 Db^2" (left to right)."""
        letters = []
        for tok in spec.split():
            if "^" in tok:
                name, _, power = tok.partition("^")
                e = int(power)
            else:
                name, e = tok, 1
            try:
                gen = Gen(name)
            except ValueError:
                raise ValueError(f"unknown word letter {name!r}; use Db or Dc") from None
            letters.append((gen, e))
        return GradientWord(tuple(letters)).reduced()

    def order(self) -> int:
        return sum(e for _, e in self.letters)

    def reduced(self) -> "GradientWord":
        """Merge adjacent same-generator letters."""
        out: list[tuple[Gen, int]] = []
        for gen, e in self.letters:
            if out and out[-1][0] == gen:
                out[-1] = (gen, out[-1][1] + e)
            else:
                out.append((gen, e))
        return GradientWord(tuple(out))

    def is_empty(self) -> bool:
        return not self.letters

    def leftmost(self) -> Gen | None:
        return self.letters[0][0] if self.letters else None

    def rightmost(self) -> Gen | None:
        return self.letters[-1][0] if self.letters else None

    def __str__(self) -> str:
        return " ".join(f"{g.value}^{e}" if e > 1 else g.value for g, e in self.letters) or "(empty)"


def apply_word(word: GradientWord, ham: DiagonalHam, mixer: Mixer | None = None,
               base: PauliSum | None = None, budget: int = DEFAULT_TERM_BUDGET,
               tol: float | None = None) -> PauliSum:
    """Exact iterated commutators of the word applied to ``base`` (default C)."""
    cpauli = ham.pauli
    bpauli = (mixer or TransverseFieldMixer(ham.n)).pauli()
    cur = base if base is not None else cpauli
    for gen, e in reversed(word.reduced().letters):
        gen_pauli = cpauli if gen is Gen.COST else bpauli
        for _ in range(e):
            cur = commutator(gen_pauli, cur, tol=tol)
            if cur.num_terms > budget:
                raise TermBudgetError(
                    f"word {word} exceeded {budget} terms ({cur.num_terms})",
                    terms=cur.num_terms, budget=budget, context=str(word))
            if cur.is_zero():
                return cur
    return cur


def qubo_nabla_power(ham: DiagonalHam, order: int) -> PauliSum:
    """Closed form for nabla^order C on at most 2-local C:

    nabla^{2k} C   = 4^k C_(1) + 16^(k-1) nabla^2 C_(2)
    nabla^{2k+1} C = 4^k nabla C_(1) + 16^k nabla C_(2)
    """
    if ham.locality() > 2:
        raise ValueError("closed form requires an at most 2-local cost Hamiltonian")
    if order < 0:
        raise ValueError("order must be >= 0")
    parts = ham.weight_partition()
    c1 = parts.get(1, PauliSum.zero(ham.n))
    c2 = parts.get(2, PauliSum.zero(ham.n))
    if order == 0:
        return ham.pauli
    b = TransverseFieldMixer(ham.n).pauli()
    if order % 2 == 1:
        k = (order - 1) // 2
        return commutator(b, c1, tol=0.0).scale(4.0 ** k) + commutator(b, c2, tol=0.0).scale(16.0 ** k)
    k = order // 2
    nabla2_c2 = commutator(b, commutator(b, c2, tol=0.0), tol=0.0)
    return c1.scale(4.0 ** k) + nabla2_c2.scale(16.0 ** (k - 1))


def norm_bound(word: GradientWord, ham: DiagonalHam, base: PauliSum | None = None) -> float:
    """Product upper bound on the spectral norm of the word applied to base.

    Mixer letters contribute (2k)^e with k the current operator locality;
    cost letters contribute (2 ||C||_*)^e and can grow the locality.
    """
    base_ps = base if base is not None else ham.pauli
    bound = star_seminorm(base_ps, method="auto").value
    cur_locality = max(base_ps.max_weight(), 1)
    c_star = star_seminorm(ham.pauli, method="auto").value
    c_locality = ham.locality()
    for gen, e in reversed(word.reduced().letters):
        if gen is Gen.MIXER:
            bound *= (2.0 * cur_locality) ** e
        else:
            bound *= (2.0 * c_star) ** e
            cur_locality = min(ham.n, cur_locality + e * max(c_locality - 1, 0))
    return bound


def jacobi_identities_check(ham: DiagonalHam, mixer: Mixer | None = None,
                            mis: MisMixer | None = None) -> dict[str, float]:
    """Exact PauliSum identities among gradients; values are max coefficient
    discrepancies and are expected to be exactly 0 in tolerance-0 mode."""
    mixer = mixer or TransverseFieldMixer(ham.n)
    b = mixer.pauli()
    c = ham.pauli

    def cm(x, y):
        return commutator(x, y, tol=0.0)

    report: dict[str, float] = {}
    nabla_c = cm(b, c)
    # nabla nabla_C nabla C == nabla_C nabla^2 C
    lhs = cm(b, cm(c, nabla_c))
    rhs = cm(c, cm(b, nabla_c))
    report["mixed_gradient_exchange"] = _max_coeff(lhs - rhs)
    # gradient with respect to nabla C: [nabla C, A] == (nabla nabla_C - nabla_C nabla) A
    for name, a in (("cross_on_cost", c), ("cross_on_gradient", nabla_c)):
        lhs = cm(nabla_c, a)
        rhs = cm(b, cm(c, a)) - cm(c, cm(b, a))
        report[f"{name}"] = _max_coeff(lhs - rhs)
    # Jacobi for a random-ish triple built from available operators
    f, g, a = c, b, nabla_c
    cyc = cm(f, cm(g, a)) + cm(a, cm(f, g)) + cm(g, cm(a, f))
    report["jacobi_cycle"] = _max_coeff(cyc)
    if mis is not None:
        # controlled-flip mixer on the cardinality objective: [C, [B~, C]] = -B~
        bt = mis.pauli()
        lhs = cm(c, cm(bt, c))
        report["mis_double_gradient_plus_mixer"] = _max_coeff(lhs + bt)
    return report


def _max_coeff(ps: PauliSum) -> float:
    return float(abs(ps.coeffs).max()) if ps.num_terms else 0.0


def mis_cardinality_ham(graph: Graph) -> DiagonalHam:
    """C for the independent-set cardinality objective c(x) = |x|."""
    from .cost import HammingRampCost
    from .hamop import to_hamiltonian

    return to_hamiltonian(HammingRampCost(graph.n, 1.0))
