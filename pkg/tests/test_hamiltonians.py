"""Tests for the Ising and XXZ bond terms."""

import numpy as np
import pytest

from opdyn_cli.engine.common import InvalidInputError, ModelSpec
from opdyn_cli.engine.numerics.exact_oracle import dense_hamiltonian, embed_bond_term
from opdyn_cli.engine.numerics.hamiltonians import build_bond_terms, field_weights
from opdyn_cli.engine.numerics.mps import PAULI

I2, X, Y, Z = PAULI["id"], PAULI["sx"], PAULI["sy"], PAULI["sz"]


def reassemble(spec: ModelSpec) -> np.ndarray:
    terms = build_bond_terms(spec)
    return sum(embed_bond_term(term, bond, spec.n_sites) for bond, term in enumerate(terms))


def test_ising_two_sites_no_field():
    terms = build_bond_terms(ModelSpec(model="ising", n_sites=2, j=1.0, h=0.0))
    assert len(terms) == 1
    np.testing.assert_array_equal(terms[0], np.diag([-1.0, 1.0, 1.0, -1.0]))


def test_xxz_two_sites():
    spec = ModelSpec(model="xxz", n_sites=2, j=1.0, h=0.5, delta_aniso=0.5)
    expected = -(np.kron(X, X) + np.kron(Y, Y) + 0.5 * np.kron(Z, Z)) - 0.5 * (np.kron(X, I2) + np.kron(I2, X))
    np.testing.assert_allclose(build_bond_terms(spec)[0], expected, atol=1e-15)


def test_ising_three_sites_reassembles_exactly():
    spec = ModelSpec(model="ising", n_sites=3, j=1.0, h=1.0)
    assert np.max(np.abs(reassemble(spec) - dense_hamiltonian(spec))) == 0.0


@pytest.mark.parametrize("model", ["ising", "xxz"])
@pytest.mark.parametrize("n_sites", [2, 3, 4, 5, 8])
def test_reassembly_matches_dense(model, n_sites):
    spec = ModelSpec(model=model, n_sites=n_sites, j=0.7, h=1.3, delta_aniso=-0.4)
    assert np.max(np.abs(reassemble(spec) - dense_hamiltonian(spec))) <= 1e-13


@pytest.mark.parametrize("model", ["ising", "xxz"])
def test_terms_are_hermitian(model):
    terms = build_bond_terms(ModelSpec(model=model, n_sites=6, j=1.0, h=0.5, delta_aniso=0.5))
    assert terms.n_sites == 6
    for term in terms:
        assert np.max(np.abs(term - term.conj().T)) <= 1e-13


def test_ising_without_field_is_diagonal():
    for term in build_bond_terms(ModelSpec(model="ising", n_sites=5, j=1.3, h=0.0)):
        assert np.count_nonzero(term - np.diag(np.diag(term))) == 0


def test_field_weights():
    assert field_weights(0, 2) == (1.0, 1.0)
    assert field_weights(0, 4) == (1.0, 0.5)
    assert field_weights(1, 4) == (0.5, 0.5)
    assert field_weights(2, 4) == (0.5, 1.0)


def test_unknown_model():
    spec = ModelSpec.model_construct(model="heisenberg", n_sites=3, j=1.0, h=0.0, delta_aniso=0.0)
    with pytest.raises(InvalidInputError):
        build_bond_terms(spec)


def test_model_spec_rejects_non_finite():
    with pytest.raises(ValueError):
        ModelSpec(model="ising", n_sites=4, h=float("nan"))
