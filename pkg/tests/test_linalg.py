import numpy as np
import pytest

from markov_recovery import linalg
from markov_recovery.errors import (
    DimensionMismatchError,
    EmptyKeepSetError,
    NegativeEigenvalueError,
    NotHermitianError,
    NotSquareError,
)

from oracles import bell_matrix, ghz_amplitudes, partial_trace_bruteforce


def random_hermitian(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (z + z.conj().T) / 2


def random_psd(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return z @ z.conj().T


class TestHermitianEig:
    def test_diagonal_input(self):
        e = linalg.hermitian_eig(np.diag([3.0, 1.0, 2.0]).astype(complex))
        assert np.allclose(e.eigenvalues, [3.0, 2.0, 1.0], atol=1e-14)
        expected = np.zeros((3, 3))
        expected[0, 0] = expected[2, 1] = expected[1, 2] = 1.0
        assert np.abs(e.eigenvectors - expected).max() < 1e-14

    def test_pauli_x(self):
        x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        e = linalg.hermitian_eig(x)
        assert np.allclose(e.eigenvalues, [1.0, -1.0], atol=1e-14)

    def test_reconstruction_random(self, rng):
        for _ in range(20):
            h = random_hermitian(rng, 4)
            e = linalg.hermitian_eig(h)
            lam_max = np.abs(e.eigenvalues).max()
            assert np.abs(e.reconstruct() - h).max() <= 1e-11 * max(lam_max, 1.0)
            v = e.eigenvectors
            assert np.abs(v.conj().T @ v - np.eye(4)).max() <= 1e-12

    def test_eigenvalues_sorted_descending(self, rng):
        for n in (2, 3, 7):
            e = linalg.hermitian_eig(random_hermitian(rng, n))
            assert np.all(np.diff(e.eigenvalues) <= 0)

    def test_not_square(self):
        with pytest.raises(NotSquareError):
            linalg.hermitian_eig(np.zeros((2, 3), dtype=complex))

    def test_not_hermitian(self):
        m = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        with pytest.raises(NotHermitianError):
            linalg.hermitian_eig(m)

    def test_determinism_bit_identical(self, rng):
        h = random_hermitian(rng, 6)
        e1 = linalg.hermitian_eig(h)
        e2 = linalg.hermitian_eig(h.copy())
        assert np.array_equal(e1.eigenvalues, e2.eigenvalues)
        assert np.array_equal(e1.eigenvectors, e2.eigenvectors)

    def test_degenerate_input_deterministic(self):
        m = np.eye(4, dtype=complex)
        e1 = linalg.hermitian_eig(m)
        e2 = linalg.hermitian_eig(np.eye(4, dtype=complex))
        assert np.array_equal(e1.eigenvectors, e2.eigenvectors)

    def test_phase_convention(self, rng):
        h = random_hermitian(rng, 5)
        e = linalg.hermitian_eig(h)
        for col in range(5):
            v = e.eigenvectors[:, col]
            first = v[np.flatnonzero(np.abs(v) > 1e-12)[0]]
            assert abs(first.imag) < 1e-14
            assert first.real > 0


class TestMatrixFuncOnSupport:
    def test_sqrt_diagonal(self):
        out = linalg.matrix_func_on_support(np.diag([4.0, 1.0]).astype(complex), np.sqrt)
        assert np.abs(out - np.diag([2.0, 1.0])).max() < 1e-14

    def test_support_pseudo_inverse_sqrt(self):
        out = linalg.matrix_func_on_support(np.diag([4.0, 0.0]).astype(complex), lambda x: x ** -0.5)
        assert np.abs(out - np.diag([0.5, 0.0])).max() < 1e-14

    def test_sqrt_composition(self, rng):
        for _ in range(10):
            m = random_psd(rng, 5)
            root = linalg.matrix_func_on_support(linalg.matrix_func_on_support(m, np.sqrt), np.sqrt)
            fourth = np.linalg.matrix_power(root, 4)
            assert np.abs(fourth - m).max() <= 1e-10 * max(np.abs(m).max(), 1.0)

    def test_negative_eigenvalue(self):
        with pytest.raises(NegativeEigenvalueError):
            linalg.matrix_func_on_support(np.diag([1.0, -0.5]).astype(complex), np.sqrt)


class TestTensor:
    def test_identity(self):
        assert np.array_equal(linalg.tensor(np.eye(2, dtype=complex), np.eye(2, dtype=complex)), np.eye(4))

    def test_diagonal(self):
        out = linalg.tensor(np.diag([2.0, 3.0]).astype(complex), np.diag([5.0, 7.0]).astype(complex))
        assert np.array_equal(np.diag(out).real, [10.0, 14.0, 15.0, 21.0])

    def test_mixed_product_identity(self, rng):
        for _ in range(10):
            a, b, c, d = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(4))
            lhs = linalg.tensor(a, b) @ linalg.tensor(c, d)
            rhs = linalg.tensor(a @ c, b @ d)
            assert np.abs(lhs - rhs).max() <= 1e-12

    def test_associativity_entrywise(self, rng):
        a, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
        lhs = linalg.tensor(linalg.tensor(a, b), c)
        rhs = linalg.tensor(a, linalg.tensor(b, c))
        assert np.abs(lhs - rhs).max() <= 1e-14


class TestPartialTrace:
    def test_bell_marginal(self):
        out = linalg.partial_trace(bell_matrix(), (2, 2), {0})
        assert np.abs(out - np.eye(2) / 2).max() < 1e-14

    def test_product_factorization(self, rng):
        rho = random_psd(rng, 2)
        sigma = random_psd(rng, 3)
        out = linalg.partial_trace(linalg.tensor(rho, sigma), (2, 3), {0})
        assert np.abs(out - rho * np.trace(sigma)).max() < 1e-12

    def test_ghz_vs_bruteforce(self):
        amps = ghz_amplitudes().reshape(-1)
        rho = np.outer(amps, amps.conj())
        out = linalg.partial_trace(rho, (2, 2, 2), {0, 2})
        oracle = partial_trace_bruteforce(rho, (2, 2, 2), [0, 2])
        assert np.abs(out - oracle).max() < 1e-14
        expected = np.zeros((4, 4))
        expected[0, 0] = expected[3, 3] = 0.5
        assert np.abs(out - expected).max() < 1e-14

    def test_full_trace_matches_scalar(self, rng):
        m = random_psd(rng, 8)
        out = linalg.partial_trace(m, (2, 2, 2), {0, 1, 2})
        assert abs(np.trace(out) - np.trace(m)) <= 1e-12 * abs(np.trace(m))

    def test_trace_preserved(self, rng):
        m = random_psd(rng, 12)
        out = linalg.partial_trace(m, (2, 3, 2), {1})
        assert abs(np.trace(out) - np.trace(m)) <= 1e-12 * abs(np.trace(m))

    def test_composition(self, rng):
        m = random_psd(rng, 8)
        two_step = linalg.partial_trace(linalg.partial_trace(m, (2, 2, 2), {0, 1}), (2, 2), {1})
        one_step = linalg.partial_trace(m, (2, 2, 2), {1})
        assert np.abs(two_step - one_step).max() <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            linalg.partial_trace(np.eye(6, dtype=complex), (2, 2), {0})

    def test_empty_keep(self):
        with pytest.raises(EmptyKeepSetError):
            linalg.partial_trace(np.eye(4, dtype=complex), (2, 2), set())


class TestTraceNormDistance:
    def test_identical(self, rng):
        a = random_psd(rng, 3)
        assert linalg.trace_norm_distance(a, a) == 0.0

    def test_classical_distance(self):
        assert abs(linalg.trace_norm_distance(np.eye(2, dtype=complex) / 2, np.diag([1.0, 0.0]).astype(complex)) - 0.5) < 1e-14

    def test_orthogonal_pure(self):
        assert abs(linalg.trace_norm_distance(np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)) - 1.0) < 1e-14

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            linalg.trace_norm_distance(np.eye(2, dtype=complex), np.eye(3, dtype=complex))
