import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from densecoding import linalg
from densecoding.errors import DimensionMismatchError, NegativeEigenvalueError, NotHermitianError
from densecoding.states import bell_state, random_density_matrix

from .strategies import density_matrices, seeds, unitaries

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]])
Z = np.diag([1.0, -1.0])


def _ptrace_loops(m, da, db, keep):
    """Direct index summation, independent of the einsum implementation."""
    out = np.zeros((da, da) if keep == 0 else (db, db), dtype=complex)
    for i in range(da):
        for j in range(da):
            for k in range(db):
                for l in range(db):
                    v = m[i * db + k, j * db + l]
                    if keep == 0 and k == l:
                        out[i, j] += v
                    elif keep == 1 and i == j:
                        out[k, l] += v
    return out


class TestKron:
    def test_identity(self):
        assert_array_equal(linalg.kron(I2, I2), np.eye(4))

    def test_xx_flips_00_to_11(self):
        ket = np.array([1, 0, 0, 0])
        assert_array_equal(linalg.kron(X, X) @ ket, [0, 0, 0, 1])

    def test_diagonal_product(self):
        assert_array_equal(linalg.kron(np.diag([1, 2]), np.diag([3, 4])), np.diag([3, 4, 6, 8]))

    def test_first_factor_is_most_significant(self):
        # X on subsystem 0 maps |00> to |10>, index 2
        ket = linalg.kron(X, I2) @ np.array([1, 0, 0, 0])
        assert ket[2] == 1

    @given(seeds)
    def test_associative(self, seed):
        r = np.random.default_rng(seed)
        a, b, c = (r.normal(size=(2, 2)) + 1j * r.normal(size=(2, 2)) for _ in range(3))
        # same layout; values differ only by product rounding
        assert_allclose(linalg.kron(linalg.kron(a, b), c), linalg.kron(a, linalg.kron(b, c)), rtol=1e-14, atol=1e-14)

    def test_needs_a_factor(self):
        with pytest.raises(ValueError):
            linalg.kron()


class TestPartialTrace:
    def test_bell_marginal_is_maximally_mixed(self):
        assert_allclose(linalg.partial_trace(bell_state().matrix, [2, 2], {0}), I2 / 2, atol=1e-15)

    def test_product_factor(self, rng):
        a = random_density_matrix(1, rng).matrix
        b = random_density_matrix(1, rng).matrix
        assert_allclose(linalg.partial_trace(np.kron(a, b), [2, 2], {1}), b, atol=1e-14)
        assert_allclose(linalg.partial_trace(np.kron(a, b), [2, 2], {0}), a, atol=1e-14)

    @given(density_matrices(2))
    def test_matches_loop_oracle(self, rho):
        for keep in (0, 1):
            assert_allclose(linalg.partial_trace(rho.matrix, [2, 2], {keep}),
                            _ptrace_loops(rho.matrix, 2, 2, keep), atol=1e-12)

    @given(density_matrices(3))
    def test_trace_preserved(self, rho):
        for keep in ({0}, {1}, {2}, {0, 2}, {1, 2}):
            assert abs(np.trace(linalg.partial_trace(rho.matrix, [2, 2, 2], keep)) - 1.0) < 1e-12

    def test_unequal_dims(self, rng):
        a = rng.normal(size=(3, 3))
        b = rng.normal(size=(2, 2))
        assert_allclose(linalg.partial_trace(np.kron(a, b), [3, 2], {0}), a * np.trace(b), atol=1e-12)

    def test_keep_order_is_ascending(self, rng):
        a, b, c = (random_density_matrix(1, rng).matrix for _ in range(3))
        out = linalg.partial_trace(linalg.kron(a, b, c), [2, 2, 2], [2, 0])
        assert_allclose(out, np.kron(a, c), atol=1e-14)

    def test_bad_dims(self):
        with pytest.raises(DimensionMismatchError):
            linalg.partial_trace(np.eye(4), [2, 3], {0})

    def test_bad_keep(self):
        with pytest.raises(DimensionMismatchError):
            linalg.partial_trace(np.eye(4), [2, 2], {2})
        with pytest.raises(DimensionMismatchError):
            linalg.partial_trace(np.eye(4), [2, 2], set())


class TestEig:
    def test_pauli_z(self):
        w, _ = linalg.hermitian_eig(Z)
        assert_allclose(w, [1, -1])

    def test_bell_projector(self):
        w, _ = linalg.hermitian_eig(bell_state().matrix)
        assert_allclose(w, [1, 0, 0, 0], atol=1e-15)

    @given(seeds)
    def test_trace_identities_and_reconstruction(self, seed):
        r = np.random.default_rng(seed)
        a = r.normal(size=(4, 4)) + 1j * r.normal(size=(4, 4))
        m = a + a.conj().T
        w, v = linalg.hermitian_eig(m)
        assert np.all(np.diff(w) <= 0)
        assert abs(w.sum() - np.trace(m).real) < 1e-9
        assert abs((w**2).sum() - np.trace(m @ m).real) < 1e-9
        assert np.max(np.abs((v * w) @ v.conj().T - m)) <= linalg.RECONSTRUCTION_TOL

    def test_degenerate_allowed(self):
        w, _ = linalg.hermitian_eig(np.eye(3))
        assert_allclose(w, [1, 1, 1])

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            linalg.hermitian_eig(np.array([[0, 1], [0, 0]]))

    def test_tolerance_boundary(self):
        linalg.hermitian_eig(np.array([[0, 1 + 5e-11], [1, 0]]))
        with pytest.raises(NotHermitianError):
            linalg.hermitian_eig(np.array([[0, 1 + 1e-9], [1, 0]]))


class TestSqrt:
    def test_identity(self):
        assert_allclose(linalg.matrix_sqrt(np.eye(4)), np.eye(4))

    def test_diagonal(self):
        assert_allclose(linalg.matrix_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)

    @given(density_matrices(2))
    def test_squares_back(self, rho):
        s = linalg.matrix_sqrt(rho.matrix)
        assert np.max(np.abs(s @ s - rho.matrix)) <= linalg.RECONSTRUCTION_TOL
        assert linalg.is_hermitian(s)
        assert linalg.hermitian_eig(s)[0][-1] >= -1e-12

    def test_clamps_tiny_negative(self):
        s = linalg.matrix_sqrt(np.diag([1.0, -5e-11]))
        assert_allclose(s, np.diag([1.0, 0.0]))

    def test_rejects_negative(self):
        with pytest.raises(NegativeEigenvalueError):
            linalg.matrix_sqrt(np.diag([1.0, -1e-6]))


class TestEmbedding:
    @given(density_matrices(3), unitaries(2), st.integers(0, 2))
    def test_conjugate_matches_full_matrix(self, rho, u, t):
        full = linalg.embed(u, [t], 3)
        assert_allclose(linalg.conjugate(rho.matrix, u, [t], 3), full @ rho.matrix @ full.conj().T, atol=1e-12)

    def test_embed_reversed_targets(self):
        cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
        # control on qubit 1, target qubit 0
        full = linalg.embed(cnot, [1, 0], 2)
        assert_array_equal(full @ np.array([0, 1, 0, 0]), [0, 0, 0, 1])

    def test_duplicate_targets(self):
        with pytest.raises(DimensionMismatchError):
            linalg.embed(np.eye(4), [0, 0], 2)

    def test_out_of_range(self):
        with pytest.raises(DimensionMismatchError):
            linalg.embed(X, [2], 2)

    def test_project_out(self, rng):
        a = random_density_matrix(1, rng).matrix
        b = random_density_matrix(1, rng).matrix
        m = linalg.kron(a, np.diag([0.0, 1.0]), b)
        assert_allclose(linalg.project_out(m, [1], [1], 3), np.kron(a, b), atol=1e-14)
        assert_allclose(linalg.project_out(m, [1], [0], 3), 0, atol=1e-14)

    def test_insert_zero_qubits(self, rng):
        a = random_density_matrix(1, rng).matrix
        b = random_density_matrix(1, rng).matrix
        zero = np.diag([1.0, 0.0])
        out = linalg.insert_zero_qubits(np.kron(a, b), 1, 2, 2)
        assert_allclose(out, linalg.kron(a, zero, zero, b), atol=1e-14)

    @given(density_matrices(3), st.permutations([0, 1, 2]))
    def test_permute_round_trip(self, rho, order):
        inverse = list(np.argsort(order))
        back = linalg.permute_qubits(linalg.permute_qubits(rho.matrix, order), inverse)
        assert_array_equal(back, rho.matrix)
