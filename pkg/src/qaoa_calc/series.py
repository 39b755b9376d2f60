"""Initial-state expectation values of gradient words, the order-truncated
series engine for level-p expectation values and probabilities, leading-order
and fifth-order closed forms, small-angle error bounds, and a 1-D Pade
post-processor for series along angle paths.

Series terms are enumerated as exponent tuples (a_1, b_1, ..., a_p, b_p) over
the superoperator word (i g_1 Dc)^a1 (i b_1 Db)^b1 ... applied to the base
operator; the rightmost factor acts first.  Zero rules prune most tuples:
odd total order, a leading mixer letter, or a trailing cost letter on a
diagonal base all give exactly zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, NamedTuple, Sequence

import numpy as np

from .cost import CostFunction
from .errors import DegeneratePadeError, SizeLimitError
from .grad import DEFAULT_TERM_BUDGET, Gen, GradientWord, apply_word
from .hamop import DiagonalHam, projector_ham, to_hamiltonian
from .bits import popcount
from .pauli import PauliSum

IMAG_RESIDUE_TOL = 1e-12


@dataclass(frozen=True)
class QaoaSchedule:
    """Ordered angle pairs (gamma_1, beta_1, ..., gamma_p, beta_p), radians."""

    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        if len(self.gammas) != len(self.betas):
            raise ValueError("gamma and beta lists must have equal length")

    @property
    def p(self) -> int:
        return len(self.gammas)

    @staticmethod
    def single(gamma: float, beta: float) -> "QaoaSchedule":
        return QaoaSchedule((float(gamma),), (float(beta),))

    @staticmethod
    def from_pairs(pairs: Sequence[tuple[float, float]]) -> "QaoaSchedule":
        return QaoaSchedule(tuple(float(g) for g, _ in pairs),
                            tuple(float(b) for _, b in pairs))

    @staticmethod
    def linear_ramp(p: int, gamma0: float, gamma_step: float,
                    beta0: float, beta_step: float) -> "QaoaSchedule":
        """gamma_j = gamma0 + j*step, beta_j = beta0 + j*step for j = 1..p."""
        return QaoaSchedule(tuple(gamma0 + gamma_step * j for j in range(1, p + 1)),
                            tuple(beta0 + beta_step * j for j in range(1, p + 1)))

    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.gammas, self.betas))

    def effective_gamma_beta(self) -> float:
        """sum_{i <= j} gamma_i beta_j, the leading-order coefficient."""
        total = 0.0
        for j, b in enumerate(self.betas):
            total += b * sum(self.gammas[: j + 1])
        return total

    def scaled(self, factor: float) -> "QaoaSchedule":
        return QaoaSchedule(tuple(g * factor for g in self.gammas),
                            tuple(b * factor for b in self.betas))


class WordExpectation(NamedTuple):
    value: float
    method: str


@dataclass
class SeriesEstimate:
    value: float
    order: int
    terms: list[tuple[tuple[int, ...], float, float]] = field(default_factory=list)
    pruned_count: int = 0
    computed_words: int = 0


def _as_ham(c) -> DiagonalHam:
    if isinstance(c, DiagonalHam):
        return c
    if isinstance(c, CostFunction):
        return to_hamiltonian(c)
    raise TypeError("expected a CostFunction or DiagonalHam")


# -- closed-form expectations ---------------------------------------------------

def grad_square_expectation(ham: DiagonalHam) -> float:
    """< [C,[B,C]] >_0 from coefficients: -4 sum over terms of |support| a^2."""
    w = popcount(ham.pauli.zmasks)
    a2 = np.abs(ham.pauli.coeffs.real) ** 2
    return float(-4.0 * np.sum(w * a2))


def qubo_fourth_order_expectations(ham: DiagonalHam) -> dict[str, float]:
    """The three nonzero order-4 expectations for an at most 2-local C."""
    if ham.locality() > 2:
        raise ValueError("fourth-order closed forms require an at most 2-local C")
    lin: dict[int, float] = {}
    quad: dict[tuple[int, int], float] = {}
    for z, a in ham.z_terms():
        qs = [q for q in range(ham.n) if (z >> q) & 1]
        if len(qs) == 1:
            lin[qs[0]] = lin.get(qs[0], 0.0) + a
        else:
            quad[(qs[0], qs[1])] = quad.get((qs[0], qs[1]), 0.0) + a
    sum_a2 = sum(a * a for a in lin.values())
    sum_q2 = sum(a * a for a in quad.values())
    e13 = -16.0 * sum_a2 - 128.0 * sum_q2
    nbrs: dict[int, dict[int, float]] = {}
    for (i, j), a in quad.items():
        nbrs.setdefault(i, {})[j] = a
        nbrs.setdefault(j, {})[i] = a
    e22 = 0.0
    for (i, j), a in quad.items():
        e22 += 64.0 * a * lin.get(i, 0.0) * lin.get(j, 0.0)
        common = set(nbrs.get(i, {})) & set(nbrs.get(j, {}))
        e22 += 64.0 * sum(a * nbrs[i][k] * nbrs[j][k] for k in common)
    e31 = -16.0 * sum(a ** 4 for a in lin.values()) - 32.0 * sum(a ** 4 for a in quad.values())
    for (i, j), a in quad.items():
        side = lin.get(i, 0.0) ** 2 + lin.get(j, 0.0) ** 2
        side += 0.5 * sum(v * v for k, v in nbrs.get(i, {}).items() if k != j)
        side += 0.5 * sum(v * v for k, v in nbrs.get(j, {}).items() if k != i)
        e31 += -96.0 * a * a * side
    return {"cost_mixer3": e13, "cost2_mixer2": e22, "cost3_mixer": e31}


_WORD_E11 = ((Gen.COST, 1), (Gen.MIXER, 1))
_WORD_E13 = ((Gen.COST, 1), (Gen.MIXER, 3))
_WORD_E22 = ((Gen.COST, 2), (Gen.MIXER, 2))
_WORD_E31 = ((Gen.COST, 3), (Gen.MIXER, 1))
_WORD_E1111 = ((Gen.COST, 1), (Gen.MIXER, 1), (Gen.COST, 1), (Gen.MIXER, 1))


def word_expectation_detail(word: GradientWord, ham: DiagonalHam,
                            base: PauliSum | None = None,
                            mixer=None, budget: int = DEFAULT_TERM_BUDGET) -> WordExpectation:
    """<s| word(base) |s> with fast paths applied before any Pauli algebra."""
    w = word.reduced()
    base_ps = base if base is not None else ham.pauli
    if w.is_empty():
        return WordExpectation(float(base_ps.plus_expectation().real), "base")
    if w.order() % 2 == 1:
        return WordExpectation(0.0, "zero_odd_order")
    if w.leftmost() is Gen.MIXER:
        return WordExpectation(0.0, "zero_leading_mixer")
    if w.rightmost() is Gen.COST and base_ps.is_diagonal():
        return WordExpectation(0.0, "zero_cost_on_diagonal_base")
    if base is None and mixer is None:
        if w.letters == _WORD_E11:
            return WordExpectation(grad_square_expectation(ham), "closed_form_coefficient_squares")
        if ham.locality() <= 2 and w.letters in (_WORD_E13, _WORD_E22, _WORD_E31, _WORD_E1111):
            e = qubo_fourth_order_expectations(ham)
            value = {_WORD_E13: e["cost_mixer3"], _WORD_E22: e["cost2_mixer2"],
                     _WORD_E31: e["cost3_mixer"], _WORD_E1111: e["cost2_mixer2"]}[w.letters]
            return WordExpectation(value, "closed_form_quadratic_fourth_order")
    result = apply_word(w, ham, mixer=mixer, base=base, budget=budget)
    val = result.plus_expectation()
    if abs(val.imag) > IMAG_RESIDUE_TOL * max(1.0, abs(val.real)):
        raise FloatingPointError(f"imaginary residue {val.imag} in word expectation")
    return WordExpectation(float(val.real), "pauli_algebra")


def word_expectation(word: GradientWord, ham, base=None, mixer=None) -> float:
    return word_expectation_detail(word, _as_ham(ham), base=base, mixer=mixer).value


# -- the series engine ----------------------------------------------------------

def _bounded_tuples(slots: int, max_total: int) -> Iterator[tuple[int, ...]]:
    """All nonnegative integer tuples of the given length with sum <= max_total."""
    cur = [0] * slots

    def rec(pos: int, remaining: int):
        if pos == slots:
            yield tuple(cur)
            return
        for v in range(remaining + 1):
            cur[pos] = v
            yield from rec(pos + 1, remaining - v)
        cur[pos] = 0

    yield from rec(0, max_total)


def _tuple_word(exponents: tuple[int, ...]) -> GradientWord:
    letters = []
    for i, e in enumerate(exponents):
        if e:
            letters.append((Gen.COST if i % 2 == 0 else Gen.MIXER, e))
    return GradientWord(tuple(letters)).reduced()


def _tuple_coefficient(exponents: tuple[int, ...], schedule: QaoaSchedule) -> complex:
    coeff = 1.0 + 0.0j
    for level in range(schedule.p):
        a, b = exponents[2 * level], exponents[2 * level + 1]
        if a:
            coeff *= (1j * schedule.gammas[level]) ** a / math.factorial(a)
        if b:
            coeff *= (1j * schedule.betas[level]) ** b / math.factorial(b)
    return coeff


def series_qaoap(c, schedule: QaoaSchedule, order: int, base: PauliSum | None = None,
                 budget: int = DEFAULT_TERM_BUDGET) -> SeriesEstimate:
    """Order-truncated series for <C>_p (or for <base>_p when base is given)."""
    ham = _as_ham(c)
    if order < 0:
        raise ValueError("order must be >= 0")
    if order % 2 == 1:
        order -= 1
    base_ps = base if base is not None else ham.pauli
    base_value = float(base_ps.plus_expectation().real)
    est = SeriesEstimate(value=base_value, order=order)
    if order == 0 or schedule.p == 0:
        return est
    memo: dict[tuple, WordExpectation] = {}
    total = 0.0 + 0.0j
    for exps in _bounded_tuples(2 * schedule.p, order):
        t = sum(exps)
        if t == 0:
            continue
        word = _tuple_word(exps)
        key = word.letters
        we = memo.get(key)
        if we is None:
            we = word_expectation_detail(word, ham, base=base, budget=budget)
            memo[key] = we
            if we.method == "pauli_algebra":
                est.computed_words += 1
        if we.method.startswith("zero"):
            est.pruned_count += 1
            continue
        coeff = _tuple_coefficient(exps, schedule)
        total += coeff * we.value
        est.terms.append((exps, float(coeff.real), we.value))
    if abs(total.imag) > IMAG_RESIDUE_TOL * max(1.0, abs(total.real)):
        raise FloatingPointError(f"imaginary residue {total.imag} in series value")
    est.value = base_value + float(total.real)
    return est


def probability_series_qaoa1(c, x: int, gamma: float, beta: float, order: int,
                             budget: int = DEFAULT_TERM_BUDGET) -> float:
    """Series for the probability of measuring x after one level."""
    ham = _as_ham(c)
    proj = projector_ham(x, ham.n)
    est = series_qaoap(ham, QaoaSchedule.single(gamma, beta), order,
                       base=proj.pauli, budget=budget)
    return est.value


# -- leading-order and fifth-order forms ----------------------------------------

def leading_order_qaoa1(c, gamma: float, beta: float) -> tuple[Callable[[int], float], float]:
    """Third-order-complete estimates: probability function and expectation."""
    ham = _as_ham(c)
    e11 = grad_square_expectation(ham)
    expectation = ham.a0 - gamma * beta * e11
    n = ham.n
    cost = ham.cost

    def prob(x: int) -> float:
        if cost is None:
            raise SizeLimitError("probability estimate needs the classical cost function")
        return 2.0 ** -n - (2.0 * gamma * beta / 2.0 ** n) * cost.divergence(x, 1)

    return prob, expectation


def leading_order_qaoap(c, schedule: QaoaSchedule) -> float:
    ham = _as_ham(c)
    return ham.a0 - schedule.effective_gamma_beta() * grad_square_expectation(ham)


def quench_leading(c, gamma: float, beta: float) -> float:
    """Leading-order cost expectation of a quench with tau H = sqrt2 (beta B + gamma C):
    identical to the level-1 leading order."""
    return leading_order_qaoa1(c, gamma, beta)[1]


def _fifth_order_coefficients(schedule: QaoaSchedule) -> tuple[float, float, float, float]:
    g, b = schedule.gammas, schedule.betas
    p = schedule.p
    a0 = sum(g[i] * b[j] for i in range(p) for j in range(i, p))
    a1 = sum(g[i] * b[j] * b[k] * b[l]
             for i in range(p) for j in range(i, p)
             for k in range(j + 1, p) for l in range(k + 1, p))
    a1 += 0.5 * sum(g[i] * (b[j] ** 2 * b[k] + b[j] * b[k] ** 2)
                    for i in range(p) for j in range(i, p) for k in range(j + 1, p))
    a1 += sum(g[i] * b[j] ** 3 for i in range(p) for j in range(i, p)) / 6.0
    a3 = sum(g[i] * g[j] * g[k] * b[l]
             for i in range(p) for j in range(i + 1, p)
             for k in range(j + 1, p) for l in range(k, p))
    a3 += 0.5 * sum((g[j] ** 2 * g[k] + g[j] * g[k] ** 2) * b[l]
                    for j in range(p) for k in range(j + 1, p) for l in range(k, p))
    a3 += sum(g[i] ** 3 * b[j] for i in range(p) for j in range(i, p)) / 6.0
    a2 = sum(g[i] * g[j] * b[k] * b[l]
             for i in range(p) for j in range(i + 1, p)
             for k in range(j, p) for l in range(k + 1, p))
    a2 += 0.5 * sum(g[i] ** 2 * b[k] * b[l]
                    for i in range(p) for k in range(i, p) for l in range(k + 1, p))
    a2 += 0.5 * sum(g[i] * g[j] * b[k] ** 2
                    for i in range(p) for j in range(i + 1, p) for k in range(j, p))
    a2 += 0.25 * sum(g[i] ** 2 * b[j] ** 2 for i in range(p) for j in range(i, p))
    a2 += sum(g[i] * b[j] * g[k] * b[l]
              for i in range(p) for j in range(i, p)
              for k in range(j + 1, p) for l in range(k, p))
    return a0, a1, a3, a2


def fifth_order_qaoap(c, schedule: QaoaSchedule) -> float:
    """Explicit four-expectation polynomial, complete to fifth order in angles."""
    ham = _as_ham(c)
    a0, a1, a3, a2 = _fifth_order_coefficients(schedule)
    e11 = grad_square_expectation(ham)
    if ham.locality() <= 2:
        e = qubo_fourth_order_expectations(ham)
        e13, e22, e31 = e["cost_mixer3"], e["cost2_mixer2"], e["cost3_mixer"]
    else:
        e13 = word_expectation_detail(GradientWord(_WORD_E13), ham).value
        e22 = word_expectation_detail(GradientWord(_WORD_E22), ham).value
        e31 = word_expectation_detail(GradientWord(_WORD_E31), ham).value
    return ham.a0 - a0 * e11 + a1 * e13 + a3 * e31 + a2 * e22


# -- error bounds and guaranteed improvement -------------------------------------

class CostNorms(NamedTuple):
    locality: int
    norm: float          # ||C||
    traceless_norm: float  # ||C_Z||
    star: float          # ||C||_*
    mode: str


def cost_norms(c, dense_limit: int = 24) -> CostNorms:
    ham = _as_ham(c)
    k = ham.locality()
    if ham.n <= dense_limit:
        d = ham.diagonal()
        return CostNorms(k, float(np.abs(d).max()),
                         float(np.abs(d - ham.a0).max()),
                         float(d.max() - d.min()) / 2.0, "exact_diagonal")
    coeff = float(sum(abs(a) for _, a in ham.z_terms()))
    return CostNorms(k, abs(ham.a0) + coeff, coeff, coeff, "coefficient_bound")


def error_bounds(c, gamma: float, beta: float, eps: float | None = None) -> dict:
    """Rigorous bounds on the leading-order estimate errors, plus the angle
    ranges guaranteeing a target error eps."""
    ham = _as_ham(c)
    norms = cost_norms(ham)
    k, n = norms.locality, ham.n
    cs = norms.star
    expectation_bound = (4.0 * abs(beta) * gamma ** 2 * k * cs ** 3
                         + 4.0 * beta ** 2 * abs(gamma) * k ** 2 * cs ** 2)
    probability_bound = (2.0 / 2.0 ** n) * (
        n ** 2 * beta ** 2 * math.exp(2.0 * n * abs(beta))
        + (4.0 / 3.0) * n * abs(beta) * abs(gamma) ** 3 * cs ** 3
        * math.cosh(2.0 * abs(gamma) * cs))
    out = {
        "expectation_bound": expectation_bound,
        "probability_bound": probability_bound,
        "norms": norms,
    }
    if eps is not None:
        if not 0.0 < eps < 1.0:
            raise ValueError("eps must be in (0, 1)")
        denom = min(norms.traceless_norm, norms.norm)
        out["eps_ranges"] = {
            "gamma_max": eps ** 0.25 / (2.0 * denom),
            "beta_max_expectation": math.sqrt(eps) / (2.0 * k),
            "beta_max_probability": 0.4 * math.sqrt(eps) / n,
            "expectation_error": denom * eps,
            "probability_error": eps / 2.0 ** n,
        }
    return out


def beats_random_guessing(c) -> tuple[float, float, float]:
    """Angles with a guaranteed positive improvement over uniform sampling.

    Returns (gamma, beta, gain) with the certified bound
    <C>_1 - <C>_0 >= gain = gamma*beta*a/2 > 0 for nonconstant costs.
    """
    ham = _as_ham(c)
    a = -grad_square_expectation(ham)
    if a <= 0.0:
        raise ValueError("cost function is constant; no improvement possible")
    norms = cost_norms(ham)
    w = norms.norm
    n = ham.n
    eps = (a / (8.0 * n * w * w)) ** 4
    gamma = eps ** 0.25 / (2.0 * w)
    beta = math.sqrt(eps) / (2.0 * n)
    return gamma, beta, 0.5 * gamma * beta * a


# -- 1-D series tools -------------------------------------------------------------

def series_path_coefficients(c, gamma_dir: Sequence[float], beta_dir: Sequence[float],
                             order: int, budget: int = DEFAULT_TERM_BUDGET) -> np.ndarray:
    """Coefficients of <C>_p as a polynomial in a path scale eps, where
    gamma_j = eps * gamma_dir[j], beta_j = eps * beta_dir[j]."""
    ham = _as_ham(c)
    direction = QaoaSchedule(tuple(gamma_dir), tuple(beta_dir))
    if order % 2 == 1:
        order -= 1
    coeffs = np.zeros(order + 1)
    coeffs[0] = ham.a0
    if order == 0 or direction.p == 0:
        return coeffs
    memo: dict[tuple, WordExpectation] = {}
    for exps in _bounded_tuples(2 * direction.p, order):
        t = sum(exps)
        if t == 0:
            continue
        word = _tuple_word(exps)
        we = memo.get(word.letters)
        if we is None:
            we = word_expectation_detail(word, ham, budget=budget)
            memo[word.letters] = we
        if we.method.startswith("zero") or we.value == 0.0:
            continue
        coeff = _tuple_coefficient(exps, direction)
        if abs(coeff.imag) > IMAG_RESIDUE_TOL * max(1.0, abs(coeff.real)):
            raise FloatingPointError("imaginary residue in path coefficient")
        coeffs[t] += coeff.real * we.value
    return coeffs


class PadeApprox:
    """Rational function p(x)/q(x) matching a truncated series."""

    def __init__(self, numerator: np.ndarray, denominator: np.ndarray):
        self.numerator = numerator
        self.denominator = denominator

    def __call__(self, x):
        num = np.polyval(self.numerator[::-1], x)
        den = np.polyval(self.denominator[::-1], x)
        return num / den


def pade_1d(coeffs: Sequence[float], num_order: int, den_order: int) -> PadeApprox:
    """Standard (num_order, den_order) Pade table entry from series coefficients."""
    a = np.asarray(coeffs, dtype=np.float64)
    need = num_order + den_order + 1
    if len(a) < need:
        raise DegeneratePadeError(
            f"need {need} series coefficients for a ({num_order},{den_order}) entry, got {len(a)}")
    m, nd = num_order, den_order
    if nd == 0:
        return PadeApprox(a[: m + 1].copy(), np.array([1.0]))
    mat = np.empty((nd, nd))
    for i in range(1, nd + 1):
        for k in range(1, nd + 1):
            j = m + i - k
            mat[i - 1, k - 1] = a[j] if j >= 0 else 0.0
    rhs = -a[m + 1: m + nd + 1]
    try:
        bsol = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegeneratePadeError(f"singular Pade system for orders ({m},{nd})") from exc
    b = np.concatenate([[1.0], bsol])
    p = np.zeros(m + 1)
    for j in range(m + 1):
        p[j] = sum(b[k] * a[j - k] for k in range(0, min(j, nd) + 1))
    return PadeApprox(p, b)
