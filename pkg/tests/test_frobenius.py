import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from structroot import dense_linalg as dl
from structroot import frobenius as fb
from structroot.errors import ModulusMismatch, SingularElement, DimensionMismatch
from structroot.poly_core import Polynomial

from oracles import controlled_real_poly, multiset_distance, rel_err


def X(mod):
    return fb.FrobeniusElement([0, 1], mod)


def random_element(mod, rng):
    return fb.FrobeniusElement(rng.standard_normal(mod.n) + 1j * rng.standard_normal(mod.n), mod)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


class TestFromPoly:
    def test_square_of_x_mod_x2_plus_1(self):
        e = fb.from_poly(Polynomial([0, 0, 1]), Polynomial([1, 0, 1]))
        np.testing.assert_allclose(e.residue, [-1, 0])

    def test_x_embeds_companion(self):
        p = Polynomial([2, -3, 5, 1])
        e = fb.from_poly(Polynomial([0, 1]), p)
        np.testing.assert_allclose(fb.to_dense(e), dl.companion_matrix(p))

    def test_x5_mod_x3_minus_1(self):
        e = fb.from_poly(Polynomial([0, 0, 0, 0, 0, 1]), Polynomial([-1, 0, 0, 1]))
        np.testing.assert_allclose(e.residue, [0, 0, 1], atol=1e-15)


class TestMul:
    def test_x_times_x(self):
        mod = fb.Modulus(Polynomial([1, 0, 1]))
        np.testing.assert_allclose(fb.mul(X(mod), X(mod)).residue, [-1, 0])

    def test_identity(self, rng):
        mod = fb.Modulus(controlled_real_poly(12, rng))
        a = random_element(mod, rng)
        np.testing.assert_allclose((a * fb.identity(mod)).residue, a.residue, atol=1e-13)

    def test_dense_oracle(self, rng):
        mod = fb.Modulus(controlled_real_poly(32, rng))
        a, b = random_element(mod, rng), random_element(mod, rng)
        D = fb.to_dense(a) @ fb.to_dense(b)
        assert rel_err(fb.to_dense(fb.mul(a, b)), D) <= 1e-10

    def test_mismatched_moduli(self):
        a = X(fb.Modulus(Polynomial([1, 0, 1])))
        b = X(fb.Modulus(Polynomial([2, 0, 1])))
        with pytest.raises(ModulusMismatch):
            fb.mul(a, b)

    def test_equal_polynomials_share_algebra(self):
        a = X(fb.Modulus(Polynomial([1, 0, 1])))
        b = X(fb.Modulus(Polynomial([1, 0, 1])))
        np.testing.assert_allclose((a * b).residue, [-1, 0])

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 32), st.integers(0, 2**32 - 1))
    def test_ring_axioms(self, n, seed):
        rng = np.random.default_rng(seed)
        mod = fb.Modulus(controlled_real_poly(n, rng))
        a, b, c = (random_element(mod, rng) for _ in range(3))
        A, B, Cm = (fb.to_dense(e) for e in (a, b, c))
        assert rel_err(fb.to_dense((a * b) * c), A @ B @ Cm) <= 1e-10
        assert rel_err(fb.to_dense(a * (b * c)), A @ B @ Cm) <= 1e-10
        assert rel_err(fb.to_dense(a * (b + c)), A @ B + A @ Cm) <= 1e-10


class TestInvert:
    def test_x_mod_x2_plus_1(self):
        mod = fb.Modulus(Polynomial([1, 0, 1]))
        for method in ("solve", "euclid"):
            np.testing.assert_allclose(fb.invert(X(mod), method).residue, [0, -1], atol=1e-14)

    def test_shared_factor(self):
        mod = fb.Modulus(Polynomial([-1, 0, 1]))
        a = fb.FrobeniusElement([-1, 1], mod)
        for method in ("solve", "euclid"):
            with pytest.raises(SingularElement):
                fb.invert(a, method)

    def test_dense_oracle_n16(self, rng):
        mod = fb.Modulus(controlled_real_poly(16, rng))
        a = random_element(mod, rng)
        assert rel_err(fb.to_dense(fb.invert(a)), np.linalg.inv(fb.to_dense(a))) <= 1e-8

    def test_euclid_small(self, rng):
        mod = fb.Modulus(controlled_real_poly(8, rng))
        a = random_element(mod, rng)
        assert rel_err(fb.to_dense(fb.invert_euclid(a)), np.linalg.inv(fb.to_dense(a))) <= 1e-8

    def test_linear(self, rng):
        mod = fb.Modulus(controlled_real_poly(10, rng))
        inv = fb.invert_linear(2.0, 0.5 - 1j, mod)
        lin = fb.FrobeniusElement([0.5 - 1j, 2.0], mod)
        np.testing.assert_allclose(fb.to_dense(inv * lin), np.eye(10), atol=1e-10)
        with pytest.raises(SingularElement):
            fb.invert_linear(1.0, -1.0, fb.Modulus(Polynomial([-1, 0, 1])))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 24), st.integers(0, 2**32 - 1))
    def test_involution(self, n, seed):
        rng = np.random.default_rng(seed)
        mod = fb.Modulus(controlled_real_poly(n, rng))
        a = random_element(mod, rng)
        assert rel_err(fb.invert(fb.invert(a)).residue, a.residue) <= 1e-8


class TestPowerSquaring:
    def test_x_mod_x2_plus_1(self):
        mod = fb.Modulus(Polynomial([1, 0, 1]))
        m, scales = fb.power_squaring(X(mod), 1)
        np.testing.assert_allclose(m.residue, [-1, 0])
        assert scales == [1.0]

    def test_involution(self):
        mod = fb.Modulus(Polynomial([-1, 0, 1]))
        m, _ = fb.power_squaring(X(mod), 10)
        np.testing.assert_allclose(m.residue, [1, 0])

    def test_dense_oracle(self, rng):
        mod = fb.Modulus(controlled_real_poly(16, rng))
        a = random_element(mod, rng)
        m, _ = fb.power_squaring(a, 3)
        assert rel_err(fb.to_dense(m), np.linalg.matrix_power(fb.to_dense(a), 8)) <= 1e-8

    def test_scaled_recovers_power(self, rng):
        mod = fb.Modulus(controlled_real_poly(16, rng))
        a = random_element(mod, rng)
        m, scales = fb.power_squaring(a, 3, scaled=True)
        # undo the scaling: each factor was applied before the later squarings
        total = 1.0
        for s in scales:
            total = total**2 * s
        assert rel_err(fb.to_dense(m) / total, np.linalg.matrix_power(fb.to_dense(a), 8)) <= 1e-8


class TestCayley:
    def test_images_of_plus_minus_one(self):
        p = Polynomial([-1, 0, 1])
        imgs = fb.eigen_images(fb.cayley(p), [1, -1])
        np.testing.assert_allclose(imgs, [1j, -1j], atol=1e-14)
        ev = np.linalg.eigvals(fb.to_dense(fb.cayley(p)))
        assert multiset_distance(ev, [1j, -1j]) < 1e-12

    def test_excluded_root(self):
        with pytest.raises(SingularElement):
            fb.cayley(Polynomial([1, 0, 1]))

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=8))
    def test_real_roots_on_circle(self, roots):
        p = Polynomial.from_roots(roots)
        imgs = fb.eigen_images(fb.cayley(p), roots)
        np.testing.assert_allclose(np.abs(imgs), 1, atol=1e-12)

    def test_nonreal_roots_off_circle(self, rng):
        z = rng.uniform(-3, 3, 200) + 1j * rng.uniform(0.1, 3, 200)
        z = z[np.abs(z.imag) >= 0.1 * np.abs(z)]
        for lam in z:
            p = Polynomial.from_roots([lam, np.conj(lam)])
            imgs = fb.eigen_images(fb.cayley(p), [lam, np.conj(lam)])
            assert np.all(np.abs(np.abs(imgs) - 1) >= 1e-3)


class TestApplyToVector:
    def test_identity(self, rng):
        mod = fb.Modulus(controlled_real_poly(6, rng))
        v = rng.standard_normal(6)
        np.testing.assert_allclose(fb.apply_to_vector(fb.identity(mod), v), v)

    def test_shift(self, rng):
        mod = fb.Modulus(controlled_real_poly(5, rng))
        np.testing.assert_allclose(fb.apply_to_vector(X(mod), np.eye(5)[0]), np.eye(5)[1])

    def test_dense_oracle(self, rng):
        mod = fb.Modulus(controlled_real_poly(32, rng))
        a = random_element(mod, rng)
        v = rng.standard_normal(32) + 1j * rng.standard_normal(32)
        assert rel_err(fb.apply_to_vector(a, v), fb.to_dense(a) @ v) <= 1e-10

    def test_wrong_length(self, rng):
        mod = fb.Modulus(controlled_real_poly(4, rng))
        with pytest.raises(DimensionMismatch):
            fb.apply_to_vector(X(mod), np.ones(3))


class TestToDense:
    def test_examples(self):
        mod = fb.Modulus(Polynomial([1, 0, 1]))
        np.testing.assert_allclose(fb.to_dense(X(mod)), [[0, -1], [1, 0]])
        np.testing.assert_allclose(fb.to_dense(fb.identity(mod)), np.eye(2))
        np.testing.assert_allclose(fb.to_dense(X(mod) * X(mod)), -np.eye(2))

    def test_matches_matrix_polynomial(self, rng):
        p = controlled_real_poly(7, rng)
        C = dl.companion_matrix(p)
        r = rng.standard_normal(7)
        dense = sum(c * np.linalg.matrix_power(C, k) for k, c in enumerate(r))
        np.testing.assert_allclose(fb.to_dense(fb.FrobeniusElement(r, fb.Modulus(p))), dense, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_spectral_mapping(self, n, seed):
        rng = np.random.default_rng(seed)
        roots = rng.uniform(-2, 2, n) + 1j * rng.uniform(-2, 2, n)
        mod = fb.Modulus(Polynomial.from_roots(roots))
        a = fb.FrobeniusElement(rng.standard_normal(n), mod)
        ev = dl.small_eig(fb.to_dense(a))
        assert multiset_distance(ev, fb.eigen_images(a, roots)) <= 1e-8 * max(1, np.max(np.abs(ev)))
