"""Diagonal Hamiltonians: construction fidelity, the two equivalent
divergence constructions, per-qubit partitions, and projectors."""
import numpy as np
import pytest

from qaoa_calc.cost import (Graph, HammingRampCost, MaxCutCost,
                            balanced_triangle_instance, random_max_ksat,
                            random_qubo)
from qaoa_calc.errors import SizeLimitError
from qaoa_calc.hamop import (DiagonalHam, divergence_ham, partial_diff_ham,
                             projector_ham, to_hamiltonian)
from qaoa_calc.pauli import PauliSum

TRIANGLE = Graph(3, ((0, 1), (0, 2), (1, 2)))


class TestToHamiltonian:
    def test_maxcut_form(self):
        ham = to_hamiltonian(MaxCutCost(TRIANGLE))
        expected = PauliSum.identity(3, 1.5)
        for (u, v) in TRIANGLE.edges:
            expected = expected + PauliSum.from_string(3, {u: "Z", v: "Z"}, -0.5)
        assert (ham.pauli - expected).num_terms == 0

    def test_balanced_max2sat_form(self):
        inst = balanced_triangle_instance()
        ham = to_hamiltonian(inst)
        par = inst.edge_parity()
        expected = PauliSum.identity(3, 0.75 * 3)
        for (u, v), p in par.items():
            expected = expected + PauliSum.from_string(3, {u: "Z", v: "Z"}, -0.25 * p)
        assert (ham.pauli - expected).prune(1e-12).num_terms == 0

    def test_hamming_ramp_form(self):
        alpha, n = 2.0, 4
        ham = to_hamiltonian(HammingRampCost(n, alpha))
        expected = PauliSum.identity(n, alpha * n / 2)
        for j in range(n):
            expected = expected + PauliSum.single(n, "Z", j, -alpha / 2)
        assert (ham.pauli - expected).prune(1e-12).num_terms == 0

    def test_representation_fidelity(self):
        for c in (random_max_ksat(8, 16, 3, 21), random_qubo(9, 12, 22),
                  MaxCutCost(Graph(10, ((0, 1), (2, 3), (4, 5), (6, 7), (8, 9))))):
            ham = to_hamiltonian(c)
            assert np.abs(ham.diagonal() - c.cost_table()).max() < 1e-12

    def test_identity_coefficient_is_mean(self):
        c = random_max_ksat(7, 11, 3, 23)
        assert to_hamiltonian(c).a0 == pytest.approx(c.cost_table().mean())

    def test_partition_sums_reconstruct(self):
        ham = to_hamiltonian(random_qubo(6, 7, 24))
        total = PauliSum.zero(6)
        for part in ham.weight_partition().values():
            total = total + part
        assert (total - ham.pauli).prune(1e-12).num_terms == 0
        for j in range(6):
            recon = ham.per_qubit_part(j)
            rest = ham.pauli - recon
            assert all(not (z >> j) & 1 for _, z, _ in rest.terms())


class TestPartialDiffHam:
    def test_single_z(self):
        ham = DiagonalHam(PauliSum.single(2, "Z", 0))
        assert (partial_diff_ham(ham, 0).pauli
                - PauliSum.single(2, "Z", 0, -2.0)).num_terms == 0
        assert partial_diff_ham(ham, 1).pauli.is_zero()

    def test_matches_classical_difference(self):
        c = random_max_ksat(6, 9, 3, 25)
        ham = to_hamiltonian(c)
        for j in (0, 3, 5):
            d = partial_diff_ham(ham, j).diagonal()
            expected = [c.partial_difference(j, x) for x in range(64)]
            assert np.allclose(d, expected, atol=1e-10)

    def test_maxcut_partial(self):
        ham = to_hamiltonian(MaxCutCost(TRIANGLE))
        dj = partial_diff_ham(ham, 0)
        # -2 * (-1/2)(Z0Z1 + Z0Z2) = Z0Z1 + Z0Z2
        expected = (PauliSum.from_string(3, {0: "Z", 1: "Z"})
                    + PauliSum.from_string(3, {0: "Z", 2: "Z"}))
        assert (dj.pauli - expected).prune(1e-12).num_terms == 0
        assert dj.pauli.plus_expectation() == 0

    def test_order_independence(self):
        ham = to_hamiltonian(random_qubo(5, 6, 26))
        a = partial_diff_ham(partial_diff_ham(ham, 1), 3).pauli
        b = partial_diff_ham(partial_diff_ham(ham, 3), 1).pauli
        assert (a - b).prune(1e-12).num_terms == 0


class TestDivergenceHam:
    def test_maxcut_divergence(self):
        ham = to_hamiltonian(MaxCutCost(TRIANGLE))
        dc = divergence_ham(ham, 1)
        expected = PauliSum.zero(3)
        for (u, v) in TRIANGLE.edges:
            expected = expected + PauliSum.from_string(3, {u: "Z", v: "Z"}, 2.0)
        assert (dc.pauli - expected).prune(1e-12).num_terms == 0
        assert dc.pauli.plus_expectation() == 0

    def test_strictly_k_local_proportionality(self):
        # strictly 2-local: D^l C = (-4)^l C
        c = PauliSum.from_string(4, {0: "Z", 1: "Z"}, 0.7) \
            + PauliSum.from_string(4, {2: "Z", 3: "Z"}, -0.3)
        ham = DiagonalHam(c)
        for ell in (1, 2, 3):
            d = divergence_ham(ham, ell).pauli - c.scale((-4.0) ** ell)
            assert d.prune(1e-12).num_terms == 0

    def test_two_constructions_agree(self):
        """DC from per-qubit partitions equals DC from weight partitions."""
        ham = to_hamiltonian(random_max_ksat(6, 8, 3, 27))
        via_partials = PauliSum.zero(6)
        for j in range(6):
            via_partials = via_partials + partial_diff_ham(ham, j).pauli
        d = via_partials - divergence_ham(ham, 1).pauli
        assert d.prune(1e-10).num_terms == 0

    def test_matches_classical_divergence(self):
        c = random_qubo(6, 7, 28)
        ham = to_hamiltonian(c)
        for order in (1, 2, 3):
            assert np.allclose(divergence_ham(ham, order).diagonal(),
                               c.divergence_table(order), atol=1e-9)


class TestProjector:
    def test_one_qubit(self):
        h = projector_ham(0, 1)
        expected = PauliSum.identity(1, 0.5) + PauliSum.single(1, "Z", 0, 0.5)
        assert (h.pauli - expected).num_terms == 0

    def test_two_qubit_ones(self):
        h = projector_ham(0b11, 2)
        expected = PauliSum.from_terms(2, [(0, 0, 0.25), (0, 1, -0.25),
                                           (0, 2, -0.25), (0, 3, 0.25)])
        assert (h.pauli - expected).num_terms == 0

    def test_projector_diagonal(self):
        for y in (0, 5, 7):
            h = projector_ham(y, 3)
            d = h.diagonal()
            assert d[y] == pytest.approx(1.0)
            assert np.abs(np.delete(d, y)).max() < 1e-12
            assert h.pauli.plus_expectation() == pytest.approx(2.0 ** -3)

    def test_size_limit(self):
        with pytest.raises(SizeLimitError):
            projector_ham(0, 21)
