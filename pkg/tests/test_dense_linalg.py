import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from structroot import dense_linalg as dl
from structroot.errors import RankDeficient, SingularMatrix
from structroot.poly_core import Polynomial

from oracles import multiset_distance


def test_companion_layout():
    C = dl.companion_matrix(Polynomial([6, -5, 1]))
    np.testing.assert_array_equal(C, [[0, -6], [1, 5]])
    assert dl.companion_matrix([1, 1j, 1]).dtype == np.complex128


class TestLU:
    def test_examples(self):
        np.testing.assert_array_equal(dl.lu_invert(np.eye(3)), np.eye(3))
        np.testing.assert_allclose(dl.lu_invert(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]))

    def test_random_residual(self):
        M = np.random.default_rng(0).standard_normal((8, 8))
        assert dl.inf_norm(M @ dl.lu_invert(M) - np.eye(8)) <= 1e-10

    def test_singular(self):
        with pytest.raises(SingularMatrix):
            dl.lu_invert(np.array([[1.0, 2.0], [2.0, 4.0]]))
        with pytest.raises(SingularMatrix):
            dl.lu_invert(np.zeros((3, 3)))

    def test_ill_conditioned_but_regular(self):
        M = np.diag([1.0, 1e-13])
        np.testing.assert_allclose(dl.lu_invert(M), np.diag([1.0, 1e13]))

    def test_not_square(self):
        with pytest.raises(ValueError):
            dl.lu_invert(np.ones((2, 3)))


class TestQR:
    def test_identity(self):
        f = dl.qr(np.eye(4))
        np.testing.assert_allclose(f.Q, np.eye(4))
        np.testing.assert_allclose(f.R, np.eye(4))

    def test_single_column(self):
        v = np.array([[3.0], [4.0]])
        f = dl.qr(v)
        np.testing.assert_allclose(f.Q, v / 5)
        np.testing.assert_allclose(f.R, [[5.0]])

    def test_random_reconstruction(self):
        M = np.random.default_rng(1).standard_normal((8, 3))
        f = dl.qr(M)
        assert np.max(np.abs(f.Q @ f.R - M)) <= 1e-10
        assert np.max(np.abs(f.Q.T @ f.Q - np.eye(3))) <= 1e-10 * 3
        assert np.all(np.diag(f.R) > 0)

    def test_rank_deficient(self):
        with pytest.raises(RankDeficient):
            dl.qr(np.ones((4, 2)))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 10), st.integers(1, 10), st.integers(0, 2**32 - 1))
    def test_unique_and_deterministic(self, m, k, seed):
        rng = np.random.default_rng(seed)
        M = rng.standard_normal((max(m, k), k)) + 1j * rng.standard_normal((max(m, k), k))
        a, b = dl.qr(M), dl.qr(M.copy())
        assert np.array_equal(a.Q, b.Q) and np.array_equal(a.R, b.R)
        np.testing.assert_allclose(np.diag(a.R).imag, 0, atol=1e-14)


class TestRRQR:
    def test_zero(self):
        assert dl.rrqr(np.zeros((3, 3)))[1] == 0

    def test_threshold(self):
        assert dl.rrqr(np.diag([1.0, 1e-12]), 1e-8)[1] == 1

    def test_low_rank_product(self):
        rng = np.random.default_rng(2)
        M = rng.standard_normal((8, 3)) @ rng.standard_normal((3, 8))
        f, r = dl.rrqr(M)
        assert r == 3
        assert np.max(np.abs(f.Q @ f.R - M[:, f.perm])) <= 1e-10 * np.max(np.abs(M))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_rank_under_noise(self, r, seed):
        rng = np.random.default_rng(seed)
        U = np.linalg.qr(rng.standard_normal((12, r)))[0]
        V = np.linalg.qr(rng.standard_normal((12, r)))[0]
        M = U @ np.diag(rng.uniform(1, 10, r)) @ V.T + 1e-11 * rng.standard_normal((12, 12))
        assert dl.rrqr(M, 1e-8)[1] == r


class TestGerschgorin:
    def test_diag(self):
        assert dl.gerschgorin_discs(np.diag([1.0, 5.0])) == [(1, 0), (5, 0)]

    def test_swap(self):
        discs = dl.gerschgorin_discs(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert discs == [(0, 1), (0, 1)]
        assert all(abs(z - c) <= r for z in (1, -1) for c, r in discs)

    def test_companion_contains_roots(self):
        discs = dl.gerschgorin_discs(dl.companion_matrix(Polynomial([4, -5, 1])))
        for z in (1, 4):
            assert any(abs(z - c) <= r for c, r in discs)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 12), st.integers(0, 2**32 - 1))
    def test_union_contains_spectrum(self, n, seed):
        M = np.random.default_rng(seed).standard_normal((n, n))
        discs = dl.gerschgorin_discs(M)
        for z in dl.small_eig(M):
            assert any(abs(z - c) <= r * (1 + 1e-12) + 1e-12 for c, r in discs)


class TestSmallEig:
    def test_examples(self):
        assert multiset_distance(dl.small_eig(np.diag([1.0, 2.0, 3.0])), [1, 2, 3]) < 1e-14
        assert multiset_distance(dl.small_eig(np.array([[0.0, -1.0], [1.0, 0.0]])), [1j, -1j]) < 1e-15
        C = dl.companion_matrix(Polynomial([-6, 11, -6, 1]))
        assert multiset_distance(dl.small_eig(C), [1, 2, 3]) <= 1e-8

    def test_one_by_one_and_empty(self):
        assert dl.small_eig(np.array([[2.5]])).tolist() == [2.5]
        assert dl.small_eig(np.zeros((0, 0))).size == 0

    def test_two_by_two_small_root(self):
        # roots 1e8 and 1e-8: the product form keeps the small one accurate
        ev = dl.small_eig(np.array([[0.0, -1.0], [1.0, 1e8 + 1e-8]]))
        assert multiset_distance(np.sort(np.abs(ev)), [1e-8, 1e8]) < 1e-7
        assert abs(np.min(np.abs(ev)) - 1e-8) < 1e-20

    def test_limit(self):
        with pytest.raises(ValueError):
            dl.small_eig(np.eye(65))
        with pytest.raises(ValueError):
            dl.small_eig(np.ones((2, 3)))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 12), st.integers(0, 2**32 - 1))
    def test_companion_known_roots(self, n, seed):
        rng = np.random.default_rng(seed)
        # distinct roots at least 0.3 apart keep the eigenproblem well conditioned
        grid = np.arange(-6, 6.01, 0.3)
        roots = rng.choice(grid, n, replace=False)
        ev = dl.small_eig(dl.companion_matrix(Polynomial.from_roots(roots)))
        assert multiset_distance(ev, roots) <= 1e-8 * max(1, np.max(np.abs(roots))) ** n / 10**max(0, n - 8) + 1e-8


class TestNorms:
    def test_examples(self):
        one, inf, fro = dl.norms(np.array([[1.0, -2.0], [3.0, 4.0]]))
        assert (one, inf) == (6, 7) and fro == pytest.approx(np.sqrt(30))
        assert dl.norms(np.eye(5)) == (1, 1, pytest.approx(np.sqrt(5)))
        assert dl.norms(np.zeros((3, 3))) == (0, 0, 0)
