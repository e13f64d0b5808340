"""Tests for the truncated SVD and bond-gate exponentials."""

import numpy as np
import pytest
import scipy.linalg as la

from opdyn_cli.engine.common import InvalidInputError
from opdyn_cli.engine.numerics.mps import PAULI
from opdyn_cli.engine.numerics.tensor_core import gate_from_bond_term, is_unitary, svd_truncate

X, I2 = PAULI["sx"], PAULI["id"]


class TestSvdTruncate:
    def test_full_rank_diagonal(self):
        res = svd_truncate(np.diag([3.0, 2.0, 1.0]), max_rank=3)
        np.testing.assert_allclose(res.s, [3.0, 2.0, 1.0])
        assert res.truncation_weight == 0.0

    def test_rank_limited_diagonal(self):
        res = svd_truncate(np.diag([3.0, 2.0, 1.0]), max_rank=2)
        np.testing.assert_allclose(res.s, [3.0, 2.0])
        assert res.truncation_weight == pytest.approx(1.0 / 14.0, abs=1e-15)

    def test_cutoff_drops_light_values(self):
        # relative weights 9/14, 4/14, 1/14
        res = svd_truncate(np.diag([3.0, 2.0, 1.0]), max_rank=10, cutoff=0.1)
        assert res.rank == 2
        assert res.truncation_weight == pytest.approx(1.0 / 14.0)

    def test_cutoff_never_keeps_less_than_one(self):
        res = svd_truncate(np.diag([3.0, 2.0, 1.0]), max_rank=10, cutoff=0.99)
        assert res.rank == 1

    def test_lossless_reconstruction(self, rng):
        m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        res = svd_truncate(m, max_rank=8)
        assert np.max(np.abs(res.reconstruct() - m)) <= 1e-10
        assert np.max(np.abs(res.u.conj().T @ res.u - np.eye(8))) <= 1e-10
        assert np.max(np.abs(res.v_dag @ res.v_dag.conj().T - np.eye(8))) <= 1e-10
        assert np.all(np.diff(res.s) <= 0) and np.all(res.s >= 0)

    def test_truncation_weight_matches_reconstruction_error(self, rng):
        m = rng.normal(size=(6, 10)) + 1j * rng.normal(size=(6, 10))
        res = svd_truncate(m, max_rank=3)
        err = np.linalg.norm(res.reconstruct() - m) ** 2 / np.linalg.norm(m) ** 2
        assert abs(err - res.truncation_weight) <= 1e-10

    def test_truncation_weight_non_increasing_in_rank(self, rng):
        m = rng.normal(size=(8, 8))
        weights = [svd_truncate(m, max_rank=k).truncation_weight for k in range(1, 9)]
        assert all(a >= b for a, b in zip(weights, weights[1:]))
        assert weights[-1] == 0.0

    def test_rejects_zero_matrix(self):
        with pytest.raises(InvalidInputError):
            svd_truncate(np.zeros((3, 3)), max_rank=2)

    def test_rejects_non_finite(self):
        m = np.eye(3)
        m[1, 2] = np.nan
        with pytest.raises(InvalidInputError):
            svd_truncate(m, max_rank=2)

    def test_rejects_zero_rank(self):
        with pytest.raises(InvalidInputError):
            svd_truncate(np.eye(3), max_rank=0)


class TestGateFromBondTerm:
    def test_zero_term_gives_identity(self):
        gate = gate_from_bond_term(np.zeros((4, 4)), 0.3)
        np.testing.assert_allclose(gate, np.eye(4), atol=1e-15)

    def test_pauli_exponential(self):
        theta = 0.37
        term = np.kron(X, I2)
        expected = np.cos(theta) * np.eye(4) - 1j * np.sin(theta) * term
        np.testing.assert_allclose(gate_from_bond_term(term, theta), expected, atol=1e-14)

    def test_half_step(self, random_hermitian):
        h = random_hermitian()
        np.testing.assert_allclose(
            gate_from_bond_term(h, 0.1, half_step=True), gate_from_bond_term(h, 0.05), atol=1e-14
        )

    def test_matches_expm(self, random_hermitian):
        h = random_hermitian()
        np.testing.assert_allclose(gate_from_bond_term(h, 0.05), la.expm(-0.05j * h), atol=1e-12)

    def test_unitary_and_reversible(self, random_hermitian):
        h = random_hermitian()
        forward = gate_from_bond_term(h, 0.05)
        backward = gate_from_bond_term(h, -0.05)
        assert np.max(np.abs(forward.conj().T @ forward - np.eye(4))) <= 1e-12
        assert np.max(np.abs(forward @ backward - np.eye(4))) <= 1e-12
        assert is_unitary(forward)

    def test_rejects_non_hermitian(self):
        with pytest.raises(InvalidInputError):
            gate_from_bond_term(np.triu(np.ones((4, 4))), 0.1)

    def test_rejects_non_finite_step(self, random_hermitian):
        with pytest.raises(InvalidInputError):
            gate_from_bond_term(random_hermitian(), float("inf"))
