"""The series engine and its closed forms: zero rules, leading order,
fifth order, probability series, error bounds, and the Pade post-processor."""
import math

import numpy as np
import pytest

from conftest import oracle_expectation
from qaoa_calc.cost import (Graph, GroverCost, HammingRampCost, MaxCutCost,
                            random_graph, random_max_ksat, random_qubo)
from qaoa_calc.errors import DegeneratePadeError
from qaoa_calc.grad import Gen, GradientWord, apply_word
from qaoa_calc.hamop import to_hamiltonian
from qaoa_calc.series import (QaoaSchedule, beats_random_guessing, error_bounds,
                              fifth_order_qaoap, grad_square_expectation,
                              leading_order_qaoa1, leading_order_qaoap, pade_1d,
                              probability_series_qaoa1, quench_leading,
                              series_path_coefficients, series_qaoap,
                              word_expectation_detail)


def W(*letters):
    return GradientWord(tuple(letters))


class TestWordExpectation:
    def test_zero_rules_agree_with_algebra(self, rng):
        """Words pruned by a zero rule also vanish under full Pauli algebra."""
        ham = to_hamiltonian(random_qubo(4, 4, 50))
        letters = [(Gen.MIXER, 1), (Gen.MIXER, 2), (Gen.COST, 1), (Gen.COST, 2)]
        checked = 0
        for _ in range(400):
            k = rng.integers(1, 5)
            word = W(*(letters[i] for i in rng.integers(0, 4, size=k)))
            detail = word_expectation_detail(word, ham)
            if detail.method.startswith("zero"):
                raw = apply_word(word, ham).plus_expectation()
                assert abs(raw) < 1e-10
                checked += 1
        assert checked > 50

    def test_closed_forms_agree_with_algebra(self, rng):
        ham = to_hamiltonian(random_qubo(5, 6, 51))
        for letters in [((Gen.COST, 1), (Gen.MIXER, 1)),
                        ((Gen.COST, 1), (Gen.MIXER, 3)),
                        ((Gen.COST, 2), (Gen.MIXER, 2)),
                        ((Gen.COST, 3), (Gen.MIXER, 1)),
                        ((Gen.COST, 1), (Gen.MIXER, 1), (Gen.COST, 1), (Gen.MIXER, 1))]:
            detail = word_expectation_detail(W(*letters), ham)
            assert detail.method.startswith("closed_form")
            raw = apply_word(W(*letters), ham).plus_expectation()
            assert detail.value == pytest.approx(raw.real, abs=1e-9)

    def test_hamming_ramp_value(self):
        for n, alpha in ((4, 1.0), (6, 2.0)):
            ham = to_hamiltonian(HammingRampCost(n, alpha))
            assert grad_square_expectation(ham) == pytest.approx(-alpha ** 2 * n)

    def test_grover_value(self):
        for n in (4, 6):
            ham = to_hamiltonian(GroverCost(n, 3))
            assert grad_square_expectation(ham) == pytest.approx(-2.0 * n / 2 ** n)

    def test_vanishing_third_order(self):
        ham = to_hamiltonian(random_qubo(5, 6, 52))
        for letters in [((Gen.COST, 1), (Gen.MIXER, 2)),
                        ((Gen.COST, 2), (Gen.MIXER, 1)),
                        ((Gen.MIXER, 1), (Gen.COST, 1), (Gen.MIXER, 1))]:
            assert word_expectation_detail(W(*letters), ham).value == 0.0

    def test_max3sat_instance_average(self):
        """Instance average of <[C,[B,C]]>_0 near -3m/4 for random 3-SAT."""
        m = 30
        vals = [grad_square_expectation(to_hamiltonian(random_max_ksat(8, m, 3, s)))
                for s in range(60)]
        mean = float(np.mean(vals))
        se = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
        assert abs(mean - (-3 * m / 4)) < 4 * se


class TestLeadingOrder:
    def test_probability_normalization(self):
        c = random_max_ksat(6, 9, 3, 53)
        prob, _ = leading_order_qaoa1(c, 0.2, 0.1)
        total = sum(prob(x) for x in range(64))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_maxcut_change_is_linear_in_edges(self):
        g = random_graph(7, 11, 54)
        c = MaxCutCost(g)
        gamma, beta = 0.13, 0.07
        _, val = leading_order_qaoa1(c, gamma, beta)
        ham = to_hamiltonian(c)
        assert val - ham.a0 == pytest.approx(2 * gamma * beta * g.m, abs=1e-10)

    def test_zero_angles_uniform(self):
        c = random_qubo(5, 6, 55)
        prob, val = leading_order_qaoa1(c, 0.0, 0.7)
        assert val == pytest.approx(to_hamiltonian(c).a0)
        assert prob(3) == pytest.approx(2.0 ** -5)

    def test_ramp_value(self):
        alpha, n = 1.0, 6
        _, val = leading_order_qaoa1(HammingRampCost(n, alpha), 0.3, 0.2)
        assert val == pytest.approx(alpha * n / 2 + alpha ** 2 * n * 0.3 * 0.2)

    def test_level_p_reductions(self):
        c = random_qubo(5, 6, 56)
        v1 = leading_order_qaoap(c, QaoaSchedule.single(0.2, 0.3))
        _, v1b = leading_order_qaoa1(c, 0.2, 0.3)
        assert v1 == pytest.approx(v1b)
        # equal angles at p = 2: coefficient is 3 g b
        s = QaoaSchedule((0.2, 0.2), (0.3, 0.3))
        assert s.effective_gamma_beta() == pytest.approx(3 * 0.2 * 0.3)

    def test_grover_schedule_composition(self):
        for n in (6, 8):
            c = GroverCost(n, 1)
            for p in (1, 4, 8):
                sched = QaoaSchedule((math.pi,) * p, (math.pi / n,) * p)
                val = leading_order_qaoap(c, sched)
                assert val == pytest.approx((1 + math.pi ** 2 * p * (p + 1)) / 2 ** n,
                                            abs=1e-12)


class TestSeriesEngine:
    def test_order_three_equals_leading(self, rng):
        for p in (1, 2, 4):
            c = random_qubo(6, 7, 57 + p)
            sched = QaoaSchedule.from_pairs(
                [(float(g), float(b)) for g, b in rng.uniform(-0.7, 0.7, (p, 2))])
            est = series_qaoap(c, sched, 3)
            assert est.value == pytest.approx(leading_order_qaoap(c, sched), abs=1e-12)

    def test_order_zero(self):
        c = random_qubo(5, 5, 58)
        est = series_qaoap(c, QaoaSchedule.single(0.4, 0.5), 0)
        assert est.value == pytest.approx(to_hamiltonian(c).a0)

    def test_ramp_fourth_order_formula(self):
        alpha, n = 1.0, 5
        c = HammingRampCost(n, alpha)
        gamma, beta = 0.21, -0.17
        est = series_qaoap(c, QaoaSchedule.single(gamma, beta), 4)
        expected = (alpha * n / 2 + alpha ** 2 * n * gamma * beta
                    - (2 / 3) * alpha ** 2 * n * gamma * beta ** 3
                    - (1 / 6) * alpha ** 4 * n * gamma ** 3 * beta)
        assert est.value == pytest.approx(expected, abs=1e-12)

    def test_monotone_convergence_to_oracle(self):
        c = MaxCutCost(random_graph(6, 8, 59))
        sched = QaoaSchedule.from_pairs([(0.12, 0.1), (-0.08, 0.09)])
        target = oracle_expectation(c, sched)
        errs = [abs(series_qaoap(c, sched, order).value - target)
                for order in (2, 4, 6)]
        assert errs[0] > errs[1] > errs[2]

    def test_halving_angle_slope(self):
        for c in (HammingRampCost(5, 1.0), MaxCutCost(random_graph(6, 8, 60))):
            sched = QaoaSchedule.single(0.22, 0.18)
            half = sched.scaled(0.5)
            for order in (2, 3, 4):
                e_full = abs(series_qaoap(c, sched, order).value
                             - oracle_expectation(c, sched))
                e_half = abs(series_qaoap(c, half, order).value
                             - oracle_expectation(c, half))
                assert e_full / e_half >= 2 ** (order + 1) * 0.8

    def test_pruned_tuples_counted(self):
        c = random_qubo(4, 4, 61)
        est = series_qaoap(c, QaoaSchedule.single(0.3, 0.3), 4)
        assert est.pruned_count > 0 and est.terms


class TestFifthOrder:
    def test_matches_engine(self, rng):
        for t in range(25):
            p = int(rng.integers(1, 5))
            sched = QaoaSchedule.from_pairs(
                [(float(g), float(b)) for g, b in rng.uniform(-0.8, 0.8, (p, 2))])
            c = random_qubo(5, 6, 200 + t)
            assert fifth_order_qaoap(c, sched) == pytest.approx(
                series_qaoap(c, sched, 5).value, abs=1e-10)

    def test_zero_angles(self):
        c = random_qubo(5, 5, 62)
        sched = QaoaSchedule((0.0, 0.0), (0.0, 0.0))
        assert fifth_order_qaoap(c, sched) == pytest.approx(to_hamiltonian(c).a0)

    def test_higher_locality_falls_back_to_algebra(self):
        c = random_max_ksat(5, 6, 3, 63)
        sched = QaoaSchedule.single(0.2, 0.3)
        assert fifth_order_qaoap(c, sched) == pytest.approx(
            series_qaoap(c, sched, 5).value, abs=1e-10)


class TestProbabilitySeries:
    def test_third_order_is_leading(self):
        c = MaxCutCost(random_graph(5, 6, 64))
        prob, _ = leading_order_qaoa1(c, 0.3, 0.2)
        for x in (0, 7, 21):
            assert probability_series_qaoa1(c, x, 0.3, 0.2, 3) == pytest.approx(
                prob(x), abs=1e-12)

    def test_zero_angles_uniform(self):
        c = random_qubo(4, 4, 65)
        assert probability_series_qaoa1(c, 5, 0.0, 0.0, 4) == pytest.approx(2.0 ** -4)

    def test_path_graph_against_oracle_within_bound(self):
        from qaoa_calc import oracle

        c = MaxCutCost(Graph(4, ((0, 1), (1, 2), (2, 3))))
        gamma = beta = 0.1
        probs = oracle.probabilities(oracle.simulate(c, [(gamma, beta)]))
        bound = error_bounds(c, gamma, beta)["probability_bound"]
        for x in range(16):
            est = probability_series_qaoa1(c, x, gamma, beta, 6)
            assert abs(est - probs[x]) <= bound

    def test_normalization_even_orders(self):
        c = random_qubo(5, 6, 66)
        for order in (2, 4):
            total = sum(probability_series_qaoa1(c, x, 0.4, 0.3, order)
                        for x in range(32))
            assert total == pytest.approx(1.0, abs=1e-10)


class TestQuenchLeading:
    def test_equals_level1_leading(self):
        c = random_qubo(5, 6, 67)
        _, lead = leading_order_qaoa1(c, 0.37, -0.21)
        assert quench_leading(c, 0.37, -0.21) == pytest.approx(lead)

    def test_mixing_only_conserves(self):
        c = random_qubo(5, 6, 68)
        assert quench_leading(c, 0.0, 0.4) == pytest.approx(to_hamiltonian(c).a0)


class TestErrorBounds:
    def test_bound_formulas(self):
        c = MaxCutCost(random_graph(6, 8, 69))
        out = error_bounds(c, 0.2, 0.1, eps=0.25)
        k, cs, n = out["norms"].locality, out["norms"].star, 6
        assert out["expectation_bound"] == pytest.approx(
            4 * 0.1 * 0.04 * k * cs ** 3 + 4 * 0.01 * 0.2 * k ** 2 * cs ** 2)
        assert out["probability_bound"] == pytest.approx(
            (2 / 2 ** n) * (n ** 2 * 0.01 * math.exp(2 * n * 0.1)
                            + (4 / 3) * n * 0.1 * 0.008 * cs ** 3 * math.cosh(0.4 * cs)))
        r = out["eps_ranges"]
        denom = min(out["norms"].traceless_norm, out["norms"].norm)
        assert r["gamma_max"] == pytest.approx(0.25 ** 0.25 / (2 * denom))
        assert r["beta_max_expectation"] == pytest.approx(math.sqrt(0.25) / (2 * k))
        assert r["beta_max_probability"] == pytest.approx(0.4 * math.sqrt(0.25) / n)

    def test_degenerate_angles_are_exact(self):
        c = random_qubo(5, 6, 70)
        _, lead0 = leading_order_qaoa1(c, 0.0, 0.9)
        assert abs(oracle_expectation(c, [(0.0, 0.9)]) - lead0) < 1e-12
        _, lead1 = leading_order_qaoa1(c, 0.9, 0.0)
        assert abs(oracle_expectation(c, [(0.9, 0.0)]) - lead1) < 1e-12
        assert error_bounds(c, 0.0, 0.9)["expectation_bound"] == 0.0


class TestBeatsRandomGuessing:
    def test_ramp_recipe(self):
        c = HammingRampCost(4, 1.0)
        gamma, beta, gain = beats_random_guessing(c)
        assert gain > 0
        assert -grad_square_expectation(to_hamiltonian(c)) == pytest.approx(4.0)
        delta = oracle_expectation(c, [(gamma, beta)]) - to_hamiltonian(c).a0
        assert delta >= gain

    def test_constant_rejected(self):
        from qaoa_calc.cost import TruthTableCost

        with pytest.raises(ValueError):
            beats_random_guessing(TruthTableCost(3, np.full(8, 1.0)))

    def test_random_3sat(self):
        c = random_max_ksat(8, 12, 3, 71)
        gamma, beta, gain = beats_random_guessing(c)
        delta = oracle_expectation(c, [(gamma, beta)]) - to_hamiltonian(c).a0
        assert delta >= gain > 0


class TestPade:
    def test_constant_entry(self):
        approx = pade_1d([3.5], 0, 0)
        assert approx(0.7) == pytest.approx(3.5)

    def test_sine_series(self):
        coeffs = [0.0, 1.0, 0.0, -1 / 6, 0.0, 1 / 120]
        approx = pade_1d(coeffs, 3, 2)
        for x in np.linspace(0, 0.6, 7):
            series_val = x - x ** 3 / 6 + x ** 5 / 120
            assert abs(approx(x) - series_val) <= abs(x) ** 6 + 1e-12

    def test_degenerate_table_raises(self):
        coeffs = [0.0, 1.0, 0.0, -1 / 6, 0.0, 1 / 120]
        with pytest.raises(DegeneratePadeError):
            pade_1d(coeffs, 2, 3)
        with pytest.raises(DegeneratePadeError):
            pade_1d([1.0, 2.0], 2, 3)

    def test_ramp_path_coefficients(self):
        n = 6
        c = HammingRampCost(n, 1.0)
        coeffs = series_path_coefficients(c, (math.pi / 2,), (-math.pi / 4,), 5)
        # exact path value n/2 - (n/4)(1 - cos(pi eps)): even series
        assert coeffs[0] == pytest.approx(n / 2)
        assert coeffs[1] == pytest.approx(0.0, abs=1e-14)
        assert coeffs[2] == pytest.approx(-n * math.pi ** 2 / 8)
        assert coeffs[3] == pytest.approx(0.0, abs=1e-14)
        assert coeffs[4] == pytest.approx(n * math.pi ** 4 / 96)
