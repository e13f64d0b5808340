"""Bond Hamiltonians H_{i,i+1} for the transverse-field Ising and XXZ chains."""

from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List

import numpy as np

from ..common.errors import InvalidInputError
from ..common.models import ModelKind, ModelSpec
from .mps import PAULI
from .tensor_core import is_hermitian

_I = PAULI["id"]
_X = PAULI["sx"]
_Y = PAULI["sy"]
_Z = PAULI["sz"]


@dataclass(frozen=True)
class BondTermList:
    """One 4x4 Hermitian term per bond (i, i+1), i = 0 .. n_sites - 2."""

    terms: List[np.ndarray]

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.terms)

    def __getitem__(self, bond: int) -> np.ndarray:
        return self.terms[bond]

    @property
    def n_sites(self) -> int:
        return len(self.terms) + 1


def _ising_coupling(spec: ModelSpec) -> np.ndarray:
    return -spec.j * np.kron(_Z, _Z)


def _xxz_coupling(spec: ModelSpec) -> np.ndarray:
    return -spec.j * (np.kron(_X, _X) + np.kron(_Y, _Y) + spec.delta_aniso * np.kron(_Z, _Z))


_COUPLINGS: Dict[ModelKind, Callable[[ModelSpec], np.ndarray]] = {
    ModelKind.ISING: _ising_coupling,
    ModelKind.XXZ: _xxz_coupling,
}


def field_weights(bond: int, n_sites: int) -> tuple:
    """
    Share of each site's field carried by a bond.

    Interior sites split their field evenly between their two bonds;
    boundary sites put all of it on their only bond.
    """
    left = 1.0 if bond == 0 else 0.5
    right = 1.0 if bond + 1 == n_sites - 1 else 0.5
    return left, right


def build_bond_terms(spec: ModelSpec) -> BondTermList:
    """
    Split the chain Hamiltonian into bond-local terms.

    Ising: -J sz sz - h sx;  XXZ: -J (sx sx + sy sy + Delta sz sz) - h sx.
    The single-site transverse field is absorbed into the bonds so that the
    terms sum exactly to the full Hamiltonian.

    Args:
        spec: Model parameters

    Returns:
        BondTermList with n_sites - 1 Hermitian 4x4 terms
    """
    try:
        kind = ModelKind(spec.model)
    except ValueError as e:
        raise InvalidInputError(f"unknown model '{spec.model}'") from e
    if spec.n_sites < 2:
        raise InvalidInputError(f"n_sites must be >= 2, got {spec.n_sites}")

    coupling = _COUPLINGS[kind](spec)
    field_left = np.kron(_X, _I)
    field_right = np.kron(_I, _X)

    terms = []
    for bond in range(spec.n_sites - 1):
        a, b = field_weights(bond, spec.n_sites)
        term = coupling - spec.h * (a * field_left + b * field_right)
        if not is_hermitian(term):
            raise InvalidInputError(f"bond term {bond} is not Hermitian")
        terms.append(term)
    return BondTermList(terms)
