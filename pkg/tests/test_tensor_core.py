import numpy as np
import pytest

from conftest import haar_moment, random_hermitian
from qudit_lab.rng import RngStream
from qudit_lab.tensor_core import (
    basis_ket,
    haar_unitaries,
    haar_unitary,
    hermitian_eigs,
    jacobi_hermitian_eigs,
    kron,
    partial_trace,
    partial_transpose_second,
    vec,
    vec_identity_residuals,
)


def ketbra(a, b, d=2):
    return np.outer(basis_ket(a, d), basis_ket(b, d).conj())


class TestKron:
    def test_identity(self):
        assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_diagonal(self):
        assert np.array_equal(kron(np.diag([1, -1]), np.eye(2)), np.diag([1, 1, -1, -1]))

    def test_basis_bookkeeping(self):
        assert np.array_equal(kron(ketbra([0], [1]), ketbra([1], [0])), ketbra([0, 1], [1, 0]))

    def test_associativity_and_mixed_product(self, rng):
        for _ in range(10):
            a, b, c = (rng.complex_normal((2, 3)) for _ in range(3))
            assert np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c)))) <= 1e-12
            p, q, r, s = (rng.complex_normal((3, 3)) for _ in range(4))
            assert np.max(np.abs(kron(p, q) @ kron(r, s) - kron(p @ r, q @ s))) <= 1e-12


class TestPartialTranspose:
    def test_index_bookkeeping(self):
        assert np.array_equal(partial_transpose_second(ketbra([0, 1], [1, 0]), 2), ketbra([0, 0], [1, 1]))

    def test_identity(self):
        assert np.array_equal(partial_transpose_second(np.eye(4), 2), np.eye(4))

    def test_involution(self, rng):
        for _ in range(50):
            x = random_hermitian(rng, 9)
            assert np.max(np.abs(partial_transpose_second(partial_transpose_second(x, 3), 3) - x)) <= 1e-14

    def test_products(self, rng):
        a, b = rng.complex_normal((3, 3)), rng.complex_normal((3, 3))
        assert np.max(np.abs(partial_transpose_second(kron(a, b), 3) - kron(a, b.T))) <= 1e-14

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            partial_transpose_second(np.eye(5), 2)


class TestPartialTrace:
    def test_identity(self):
        for d in (2, 3):
            assert np.allclose(partial_trace(np.eye(d * d), [d, d], keep=[0]), d * np.eye(d))

    def test_product_state(self):
        assert np.array_equal(partial_trace(ketbra([0, 1], [0, 1]), [2, 2], keep=[1]), ketbra([1], [1]))

    def test_output_factor_trace_of_vectorised_pair(self, rng):
        a, b = rng.complex_normal((3, 3)), rng.complex_normal((3, 3))
        outer = np.outer(vec(a), vec(b).conj())
        assert np.max(np.abs(partial_trace(outer, [3, 3], keep=[1]) - a.T @ b.conj())) <= 1e-12

    def test_three_factors_against_einsum(self, rng):
        x = random_hermitian(rng, 24)
        t = x.reshape(2, 3, 4, 2, 3, 4)
        assert np.allclose(partial_trace(x, [2, 3, 4], keep=[1]), np.einsum("aibajb->ij", t))
        assert np.allclose(partial_trace(x, [2, 3, 4], keep=[0, 2]), np.einsum("aibcid->abcd", t).reshape(8, 8))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            partial_trace(np.eye(4), [2, 3], keep=[0])


class TestEigensolver:
    def test_two_by_two(self):
        w, _ = hermitian_eigs(np.array([[0.5, -1.0], [-1.0, 0.5]]))
        assert np.allclose(w, [-0.5, 1.5])

    def test_diagonal(self):
        w, _ = hermitian_eigs(np.diag([3.0, 0.0, 1.0]))
        assert np.allclose(w, [0, 1, 3])

    def test_reconstruction(self, rng):
        for _ in range(50):
            x = random_hermitian(rng, 16)
            w, u = hermitian_eigs(x)
            assert np.all(np.diff(w) >= 0)
            assert np.max(np.abs(u @ np.diag(w) @ u.conj().T - x)) <= 1e-10 * max(1.0, np.linalg.norm(x))

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            hermitian_eigs(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_gram_matrices_are_psd(self, rng):
        for _ in range(20):
            g = rng.complex_normal((6, 4))
            assert hermitian_eigs(g.conj().T @ g)[0][0] >= -1e-10

    @pytest.mark.parametrize("n", [1, 2, 5, 9, 16])
    def test_jacobi_matches_residual_oracle(self, rng, n):
        x = random_hermitian(rng, n)
        w, u = jacobi_hermitian_eigs(x)
        assert np.max(np.abs(u.conj().T @ u - np.eye(n))) <= 1e-12
        assert np.max(np.abs(u @ np.diag(w) @ u.conj().T - x)) <= 1e-10 * max(1.0, np.linalg.norm(x))
        assert np.allclose(w, np.linalg.eigvalsh(x), atol=1e-11)

    def test_jacobi_degenerate_spectrum(self, rng):
        u = haar_unitary(6, rng)
        x = u @ np.diag([1, 1, 1, 2, 2, -3.0]) @ u.conj().T
        w, v = jacobi_hermitian_eigs(x)
        assert np.allclose(w, [-3, 1, 1, 1, 2, 2], atol=1e-12)
        assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - x)) <= 1e-11


class TestHaar:
    def test_unitarity(self, rng):
        us = haar_unitaries(4, 100, rng)
        res = np.einsum("sji,sjk->sik", us.conj(), us) - np.eye(4)
        assert np.max(np.abs(res)) <= 1e-12

    @pytest.mark.parametrize("d,k", [(3, 1), (2, 2)])
    def test_headline_moments(self, d, k):
        us = haar_unitaries(d, 100000, RngStream(11 + d))
        t = np.abs(us[:, 0, 0]) ** (2 * k)
        assert abs(t.mean() - haar_moment(d, k)) <= 0.005

    @pytest.mark.parametrize("d", [2, 3, 4])
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_moments_within_four_standard_errors(self, d, k):
        us = haar_unitaries(d, 40000, RngStream(100 * d + k))
        t = np.abs(us[:, 0, 0]) ** (2 * k)
        assert abs(t.mean() - haar_moment(d, k)) <= 4 * t.std(ddof=1) / np.sqrt(len(t))

    def test_phase_invariance_of_distribution(self):
        # Haar is invariant under left multiplication; compare a phase statistic
        us = haar_unitaries(3, 50000, RngStream(3))
        assert abs(np.mean(us[:, 0, 0])) < 0.01
        assert abs(np.mean(us[:, 0, 0] ** 2)) < 0.01


class TestVecIdentities:
    def test_identity_case(self, rng):
        a = rng.complex_normal((3, 3))
        r1, *_ = vec_identity_residuals(np.eye(3), np.eye(3), a, a)
        assert r1 == 0.0

    def test_tr_input_of_identity_pair(self):
        _, r2, _, _ = vec_identity_residuals(np.eye(2), np.eye(2), np.eye(2), np.eye(2))
        assert r2 == 0.0
        outer = np.outer(vec(np.eye(2)), vec(np.eye(2)))
        assert np.array_equal(partial_trace(outer, [2, 2], keep=[0]), np.eye(2))

    def test_random_square(self, rng):
        for _ in range(100):
            m, n, a, b = (rng.complex_normal((3, 3)) for _ in range(4))
            assert max(vec_identity_residuals(m, n, a, b)) <= 1e-12

    @pytest.mark.parametrize("d2,d1", [(2, 3), (4, 2), (1, 3), (3, 1)])
    def test_random_rectangular(self, rng, d2, d1):
        for _ in range(20):
            m, n = rng.complex_normal((d2, d2)), rng.complex_normal((d1, d1))
            a, b = rng.complex_normal((d2, d1)), rng.complex_normal((d2, d1))
            assert max(vec_identity_residuals(m, n, a, b)) <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            vec_identity_residuals(np.eye(2), np.eye(3), np.ones((3, 3)), np.ones((3, 3)))
