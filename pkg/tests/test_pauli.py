"""Pauli-sum algebra: products, commutators, restriction, expectations, norms.

Dense 2^n x 2^n matrices serve as the independent oracle throughout.
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_dyadic_sum
from qaoa_calc.errors import DimensionMismatchError, SizeLimitError
from qaoa_calc.pauli import (PauliSum, commutator, mul, spectral_norm_dense,
                             star_seminorm)


def X(n, q, c=1.0):
    return PauliSum.single(n, "X", q, c)


def Y(n, q, c=1.0):
    return PauliSum.single(n, "Y", q, c)


def Z(n, q, c=1.0):
    return PauliSum.single(n, "Z", q, c)


def assert_equal_sums(a: PauliSum, b: PauliSum):
    d = a - b
    assert d.num_terms == 0, f"difference {d}"


class TestMul:
    def test_single_qubit_relations(self):
        assert_equal_sums(mul(X(1, 0), Z(1, 0)), Y(1, 0, -1j))
        assert_equal_sums(mul(Z(1, 0), X(1, 0)), Y(1, 0, 1j))
        assert_equal_sums(mul(X(1, 0), Y(1, 0)), Z(1, 0, 1j))

    def test_zz_involution(self):
        zz = PauliSum.from_string(2, {0: "Z", 1: "Z"})
        assert_equal_sums(mul(zz, zz), PauliSum.identity(2))

    def test_sum_times_single_matches_dense(self):
        a = Z(2, 0) + Z(2, 1)
        b = X(2, 0)
        prod = mul(a, b)
        expected = Y(2, 0, 1j) + mul(X(2, 0), Z(2, 1))
        assert_equal_sums(prod, expected)
        assert np.allclose(prod.dense(), a.dense() @ b.dense(), atol=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            mul(X(1, 0), X(2, 0))

    def test_exhaustive_two_qubit_strings(self):
        """All 16x16 products of two-qubit Pauli strings match dense matmul."""
        strings = []
        for xm in range(4):
            for zm in range(4):
                strings.append(PauliSum.from_terms(2, [(xm, zm, 1.0)]))
        for a in strings:
            for b in strings:
                assert np.allclose(mul(a, b).dense(), a.dense() @ b.dense(), atol=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2 ** 31 - 1), st.integers(2, 4))
    def test_random_sums_match_dense(self, seed, n):
        rng = np.random.Generator(np.random.Philox(key=seed))
        a = random_dyadic_sum(n, 4, rng)
        b = random_dyadic_sum(n, 4, rng)
        assert np.allclose(mul(a, b).dense(), a.dense() @ b.dense(), atol=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2 ** 31 - 1))
    def test_associativity(self, seed):
        rng = np.random.Generator(np.random.Philox(key=seed))
        a, b, c = (random_dyadic_sum(3, 3, rng) for _ in range(3))
        assert_equal_sums(mul(mul(a, b, tol=0.0), c, tol=0.0),
                          mul(a, mul(b, c, tol=0.0), tol=0.0))


class TestCommutator:
    def test_xz(self):
        assert_equal_sums(commutator(X(1, 0), Z(1, 0)), Y(1, 0, -2j))

    def test_self_commutator_empty(self, rng):
        a = random_dyadic_sum(4, 5, rng)
        assert commutator(a, a, tol=0.0).is_zero()

    def test_antisymmetry(self, rng):
        a = random_dyadic_sum(4, 4, rng)
        b = random_dyadic_sum(4, 4, rng)
        assert_equal_sums(commutator(a, b, tol=0.0), commutator(b, a, tol=0.0).scale(-1))

    def test_maxcut_gradient_structure(self):
        """[B, C] for a cut Hamiltonian is i sum over edges of (YZ + ZY)."""
        edges = [(0, 1), (1, 2)]
        n = 3
        b = PauliSum.from_terms(n, [(1 << j, 0, 1.0) for j in range(n)])
        c = PauliSum.identity(n, len(edges) / 2)
        for (u, v) in edges:
            c = c + PauliSum.from_string(n, {u: "Z", v: "Z"}, -0.5)
        expected = PauliSum.zero(n)
        for (u, v) in edges:
            expected = expected + PauliSum.from_string(n, {u: "Y", v: "Z"}, 1j)
            expected = expected + PauliSum.from_string(n, {u: "Z", v: "Y"}, 1j)
        assert_equal_sums(commutator(b, c, tol=0.0), expected)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 2 ** 31 - 1), st.integers(2, 6))
    def test_jacobi_identity_exact(self, seed, n):
        """[F,[G,A]] + [A,[F,G]] + [G,[A,F]] = 0 exactly for dyadic sums."""
        rng = np.random.Generator(np.random.Philox(key=seed))
        f, g, a = (random_dyadic_sum(n, 3, rng) for _ in range(3))
        cyc = (commutator(f, commutator(g, a, tol=0.0), tol=0.0)
               + commutator(a, commutator(f, g, tol=0.0), tol=0.0)
               + commutator(g, commutator(a, f, tol=0.0), tol=0.0))
        assert cyc.is_zero()


class TestRestrict:
    def test_drops_outside_terms(self):
        a = Z(3, 0) + PauliSum.from_string(3, {1: "Z", 2: "Z"})
        assert_equal_sums(a.restrict([0]), Z(3, 0))

    def test_transverse_field(self):
        b = X(3, 0) + X(3, 1) + X(3, 2)
        assert_equal_sums(b.restrict([0, 1]), X(3, 0) + X(3, 1))

    def test_full_set_identity(self, rng):
        a = random_dyadic_sum(4, 5, rng)
        assert_equal_sums(a.restrict(range(4)), a)

    def test_commutes_with_commutator_inside_subset(self, rng):
        a = random_dyadic_sum(5, 4, rng).restrict([0, 1, 2])
        b = random_dyadic_sum(5, 4, rng).restrict([0, 1, 2])
        assert_equal_sums(commutator(a, b, tol=0.0).restrict([0, 1, 2]),
                          commutator(a.restrict([0, 1, 2]), b.restrict([0, 1, 2]), tol=0.0))


class TestPlusExpectation:
    def test_pure_x_terms_survive(self):
        a = Z(2, 0) + X(2, 1, 3.0)
        assert a.plus_expectation() == pytest.approx(3.0)

    def test_matches_dense(self, rng):
        for n in (2, 4, 6):
            a = random_dyadic_sum(n, 6, rng)
            s = np.full(1 << n, 2.0 ** (-n / 2))
            dense_val = s @ a.dense() @ s
            assert a.plus_expectation() == pytest.approx(dense_val, abs=1e-12)


class TestStarSeminorm:
    def test_identity_shift_absorbed(self):
        a = PauliSum.identity(3, 7.5)
        for m in ("exact_diagonal", "coefficient_bound", "dense"):
            assert star_seminorm(a, m).value == pytest.approx(0.0, abs=1e-12)

    def test_z_string_is_one(self):
        for k in (1, 2, 3):
            a = PauliSum.from_terms(k, [(0, (1 << k) - 1, 1.0)])
            assert star_seminorm(a, "dense").value == pytest.approx(1.0, abs=1e-12)

    def test_maxcut_is_half_max_cut(self):
        # triangle: max cut 2, so ||C||_* = 1
        n = 3
        c = PauliSum.identity(n, 1.5)
        for (u, v) in ((0, 1), (1, 2), (0, 2)):
            c = c + PauliSum.from_string(n, {u: "Z", v: "Z"}, -0.5)
        assert star_seminorm(c, "exact_diagonal").value == pytest.approx(1.0)

    def test_coefficient_bound_dominates_dense(self, rng):
        for _ in range(20):
            a = random_dyadic_sum(4, 5, rng)
            cb = star_seminorm(a, "coefficient_bound").value
            dn = star_seminorm(a, "dense").value
            assert cb >= dn - 1e-10

    def test_dense_mode_size_limit(self):
        a = PauliSum.from_terms(20, [(0, 1, 1.0)])
        with pytest.raises(SizeLimitError):
            star_seminorm(a, "dense")

    def test_exact_diagonal_requires_diagonal(self):
        with pytest.raises(ValueError):
            star_seminorm(PauliSum.single(2, "X", 0), "exact_diagonal")


class TestStructure:
    def test_merging_and_pruning(self):
        a = PauliSum.from_terms(2, [(1, 0, 1.0), (1, 0, -1.0), (0, 1, 1e-16)])
        assert a.num_terms == 0
        b = PauliSum.from_terms(2, [(0, 1, 1e-16)], tol=0.0)
        assert b.num_terms == 1

    def test_adjoint_matches_dense(self, rng):
        a = random_dyadic_sum(3, 5, rng) + Y(3, 1, 0.5j)
        assert np.allclose(a.adjoint().dense(), a.dense().conj().T, atol=1e-14)

    def test_hermitian_iff_real_coeffs(self):
        assert (Y(2, 0, 1.0) + Z(2, 1, -0.5)).is_hermitian()
        assert not Y(2, 0, 1j).is_hermitian()

    def test_rendering_golden(self):
        a = PauliSum.from_terms(3, [(0, 5, -0.5), (2, 0, 2.0)])
        assert str(a) == "(-0.5) Z1 Z3 + (2) X2"
        b = PauliSum.from_terms(1, [(1, 1, 1j)]) + PauliSum.identity(1, 0.25)
        assert str(b) == "(0.25) I + (0+1i) Y1"

    def test_rendering_stable_order(self, rng):
        a = random_dyadic_sum(4, 6, rng)
        shuffled = PauliSum.from_terms(4, list(reversed(a.terms())), tol=0.0)
        assert str(a) == str(shuffled)

    def test_spectral_norm_dense(self):
        a = Z(2, 0, 3.0)
        assert spectral_norm_dense(a) == pytest.approx(3.0)
