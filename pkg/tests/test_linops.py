import numpy as np
import pytest

from covertq.errors import DimensionCapError
from covertq.linops import (
    TAU_EIG,
    DensityOperator,
    eig_hermitian,
    partial_trace,
    tensor,
    tensor_power,
    trace_norm,
)
from conftest import random_density


def _rand_hermitian(dim, rng):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (g + g.conj().T) / 2


class TestTensor:
    def test_identity_case(self):
        np.testing.assert_allclose(tensor(np.eye(2), np.eye(2)), np.eye(4))

    def test_basis_projectors(self):
        a = np.diag([1.0, 0.0])
        b = np.diag([0.0, 1.0])
        np.testing.assert_allclose(tensor(a, b), np.diag([0.0, 1.0, 0.0, 0.0]))

    def test_matches_elementwise_definition(self, rng):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        got = tensor(a, b)
        expect = np.zeros((4, 4), dtype=complex)
        for i in range(2):
            for j in range(2):
                expect[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = a[i, j] * b
        np.testing.assert_allclose(got, expect)

    def test_power_cap(self):
        with pytest.raises(DimensionCapError):
            tensor_power(np.eye(2), 11)


class TestPartialTrace:
    def test_bell_marginals(self):
        phi = np.zeros(4, dtype=complex)
        phi[0] = phi[3] = 1 / np.sqrt(2)
        bell = np.outer(phi, phi.conj())
        for keep in ([0], [1]):
            np.testing.assert_allclose(
                partial_trace(bell, [2, 2], keep), np.eye(2) / 2, atol=1e-12
            )

    def test_product_state(self, rng):
        rho = random_density(2, rng).mat
        sigma = random_density(3, rng).mat
        np.testing.assert_allclose(
            partial_trace(tensor(rho, sigma), [2, 3], [0]), rho, atol=1e-12
        )

    def test_three_qubit_against_index_summation(self, rng):
        rho = random_density(8, rng).mat
        got = partial_trace(rho, [2, 2, 2], [0, 2])
        # Direct summation oracle over the traced middle index.
        expect = np.zeros((4, 4), dtype=complex)
        for a in range(2):
            for c in range(2):
                for ap in range(2):
                    for cp in range(2):
                        s = sum(rho[4 * a + 2 * b + c, 4 * ap + 2 * b + cp] for b in range(2))
                        expect[2 * a + c, 2 * ap + cp] = s
        np.testing.assert_allclose(got, expect, atol=1e-12)

    def test_trace_over_everything_is_scalar_trace(self, rng):
        rho = random_density(6, rng).mat
        out = partial_trace(rho, [2, 3], [])
        assert out.shape == (1, 1)
        np.testing.assert_allclose(out[0, 0], np.trace(rho), atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            partial_trace(np.eye(6), [2, 2], [0])


class TestTraceNorm:
    def test_zero_difference(self, rng):
        rho = random_density(3, rng).mat
        assert trace_norm(rho - rho) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_pure_states(self):
        d = np.diag([1.0, 0.0]) - np.diag([0.0, 1.0])
        assert trace_norm(d) == pytest.approx(2.0)

    def test_matches_eigenvalue_oracle(self, rng):
        h = _rand_hermitian(5, rng)
        assert trace_norm(h) == pytest.approx(np.sum(np.abs(np.linalg.eigvalsh(h))))

    def test_norm_axioms_on_random_triples(self, rng):
        for _ in range(50):
            a = _rand_hermitian(4, rng)
            b = _rand_hermitian(4, rng)
            assert trace_norm(a) >= 0
            assert trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-10
        assert trace_norm(np.zeros((3, 3))) == 0.0

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            trace_norm(np.ones((2, 3)))


class TestEigHermitian:
    def test_identity(self):
        vals, _ = eig_hermitian(np.eye(2))
        np.testing.assert_allclose(vals, [1.0, 1.0])

    def test_pauli_z(self):
        vals, _ = eig_hermitian(np.diag([1.0, -1.0]))
        np.testing.assert_allclose(vals, [-1.0, 1.0])

    def test_reconstruction(self, rng):
        h = _rand_hermitian(6, rng)
        vals, vecs = eig_hermitian(h)
        assert np.all(np.diff(vals) >= -1e-12)
        np.testing.assert_allclose((vecs * vals) @ vecs.conj().T, h, atol=TAU_EIG)

    def test_rejects_non_hermitian(self, rng):
        m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        with pytest.raises(ValueError):
            eig_hermitian(m)


class TestDensityOperator:
    def test_accepts_valid(self, rng):
        rho = random_density(4, rng)
        assert rho.dim == 4

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            DensityOperator(np.array([[0.5, 1.0], [0.0, 0.5]]))

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError):
            DensityOperator(np.eye(2))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(ValueError):
            DensityOperator(np.diag([1.5, -0.5]))

    def test_rejects_oversized(self):
        with pytest.raises(DimensionCapError):
            DensityOperator(np.eye(2048) / 2048)

    def test_rejects_nonfinite(self):
        m = np.eye(2) / 2
        m[0, 0] = np.nan
        with pytest.raises(ValueError):
            DensityOperator(m)

    def test_basis_and_mixed_constructors(self):
        assert DensityOperator.basis_state(3, 1).mat[1, 1] == 1.0
        np.testing.assert_allclose(
            DensityOperator.maximally_mixed(4).mat, np.eye(4) / 4
        )


def test_tensor_marginals_consistent(rng):
    rho = random_density(2, rng).mat
    sigma = random_density(2, rng).mat
    joint = tensor(rho, sigma)
    back = tensor(partial_trace(joint, [2, 2], [0]), sigma)
    np.testing.assert_allclose(np.trace(back), np.trace(joint), atol=1e-12)
    np.testing.assert_allclose(back, joint, atol=1e-12)
