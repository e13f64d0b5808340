"""
Open-boundary matrix product states for spin-1/2 chains.

Site tensors carry indices (left_bond, physical, right_bond). Physical
index 0 is spin up (sigma^z = +1), index 1 is spin down. Dense vectors
produced by ``MpsState.to_dense`` order the basis with site 0 as the most
significant bit, the same convention as ``numpy.kron``.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from ..common.errors import BondDimensionError, InvalidInputError, ResourceError
from ..common.logging import get_logger
from .tensor_core import HERMITIAN_TOL, is_hermitian, is_unitary, svd_truncate

logger = get_logger(__name__)

PHYS_DIM = 2
DENSE_MAX_SITES = 14

PAULI: Dict[str, np.ndarray] = {
    "id": np.eye(2, dtype=np.complex128),
    "sx": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "sy": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "sz": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


@dataclass(frozen=True)
class LocalOperator:
    """A Hermitian single-site operator."""

    matrix: np.ndarray
    name: str = "op"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (PHYS_DIM, PHYS_DIM):
            raise InvalidInputError(f"local operator must be 2x2, got {m.shape}")
        if not is_hermitian(m, HERMITIAN_TOL):
            raise InvalidInputError(f"local operator '{self.name}' is not Hermitian")
        object.__setattr__(self, "matrix", m)


def pauli(name: str) -> LocalOperator:
    """Pauli operator by label (sx, sy, sz)."""
    key = name.lower()
    if key not in PAULI or key == "id":
        raise InvalidInputError(f"unknown observable '{name}', expected one of sx, sy, sz")
    return LocalOperator(PAULI[key], key)


@dataclass
class MpsState:
    """Matrix product state with open boundaries and physical dimension 2."""

    tensors: List[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        self.tensors = [np.asarray(t, dtype=np.complex128) for t in self.tensors]
        self.validate()

    @classmethod
    def from_tensors(cls, tensors: Iterable[np.ndarray]) -> "MpsState":
        """Build and validate a state from any iterable of (left, phys, right) tensors."""
        return cls(list(tensors))

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> List[int]:
        """Dimensions of the n_sites - 1 internal bonds."""
        return [t.shape[2] for t in self.tensors[:-1]]

    def validate(self) -> None:
        """Check the structural invariants, raising InvalidInputError."""
        if len(self.tensors) < 2:
            raise InvalidInputError(f"an MPS needs at least 2 sites, got {len(self.tensors)}")
        for i, t in enumerate(self.tensors):
            if t.ndim != 3 or t.shape[1] != PHYS_DIM:
                raise InvalidInputError(f"site {i}: expected (left, 2, right) tensor, got {t.shape}")
            if not np.all(np.isfinite(t)):
                raise InvalidInputError(f"site {i}: non-finite entries")
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[2] != 1:
            raise InvalidInputError("boundary bonds must have dimension 1")
        for i in range(len(self.tensors) - 1):
            if self.tensors[i].shape[2] != self.tensors[i + 1].shape[0]:
                raise InvalidInputError(f"bond ({i}, {i + 1}): mismatched dimensions")

    def copy(self) -> "MpsState":
        return MpsState.from_tensors(t.copy() for t in self.tensors)

    def to_dense(self) -> np.ndarray:
        """Full state vector (2**n_sites amplitudes)."""
        if self.n_sites > DENSE_MAX_SITES:
            raise ResourceError(f"dense conversion limited to {DENSE_MAX_SITES} sites")
        psi = self.tensors[0].reshape(PHYS_DIM, -1)
        for t in self.tensors[1:]:
            psi = np.tensordot(psi, t, axes=(1, 0)).reshape(-1, t.shape[2])
        return psi.reshape(-1)


def product_state(n_sites: int, local_state: Union[int, Sequence[int]] = 0) -> MpsState:
    """
    Product state with bond dimension 1.

    Args:
        n_sites: Number of sites (>= 2)
        local_state: Physical index per site, or one index for every site

    Returns:
        Normalized MpsState
    """
    if n_sites < 2:
        raise InvalidInputError(f"n_sites must be >= 2, got {n_sites}")
    if isinstance(local_state, (int, np.integer)):
        local_state = [int(local_state)] * n_sites
    if len(local_state) != n_sites:
        raise InvalidInputError(f"expected {n_sites} local states, got {len(local_state)}")

    tensors = []
    for i, s in enumerate(local_state):
        if s not in (0, 1):
            raise InvalidInputError(f"site {i}: physical index must be 0 or 1, got {s}")
        t = np.zeros((1, PHYS_DIM, 1), dtype=np.complex128)
        t[0, s, 0] = 1.0
        tensors.append(t)
    return MpsState.from_tensors(tensors)


def neel_state(n_sites: int) -> MpsState:
    return product_state(n_sites, [i % 2 for i in range(n_sites)])


def _extend_left(env: np.ndarray, ket: np.ndarray, bra: Optional[np.ndarray] = None) -> np.ndarray:
    # env[ket, bra] -> env[ket', bra']
    bra = ket if bra is None else bra
    t = np.tensordot(env, ket, axes=(0, 0))
    return np.tensordot(t, bra.conj(), axes=([0, 1], [0, 1]))


def _extend_right(env: np.ndarray, a: np.ndarray) -> np.ndarray:
    t = np.tensordot(a, env, axes=(2, 0))
    return np.tensordot(t, a.conj(), axes=([1, 2], [1, 2]))


def _left_environments(state: MpsState) -> List[np.ndarray]:
    envs = [np.ones((1, 1), dtype=np.complex128)]
    for a in state.tensors:
        envs.append(_extend_left(envs[-1], a))
    return envs


def _right_environments(state: MpsState) -> List[np.ndarray]:
    envs = [np.ones((1, 1), dtype=np.complex128)]
    for a in reversed(state.tensors):
        envs.append(_extend_right(envs[-1], a))
    envs.reverse()
    return envs


def _sandwich(left: np.ndarray, a: np.ndarray, op: np.ndarray, right: np.ndarray) -> complex:
    oa = np.tensordot(op, a, axes=(1, 1)).transpose(1, 0, 2)
    return complex(np.sum(_extend_left(left, oa, a) * right))


def norm(state: MpsState) -> float:
    """sqrt(<psi|psi>) by full left-to-right contraction."""
    env = np.ones((1, 1), dtype=np.complex128)
    for a in state.tensors:
        env = _extend_left(env, a)
    return float(np.sqrt(max(env[0, 0].real, 0.0)))


def _real_part(value: complex, scale: float, what: str) -> float:
    if abs(value.imag) > 1e-10 * max(scale, 1.0):
        logger.debug(f"{what}: discarding imaginary part {value.imag:.3e}")
    return value.real


def site_expectation(state: MpsState, op: LocalOperator, site: int) -> float:
    """
    <psi|O_site|psi> / <psi|psi>.

    Args:
        state: MPS to measure
        op: Hermitian single-site operator
        site: Site index

    Returns:
        Real expectation value
    """
    if not 0 <= site < state.n_sites:
        raise InvalidInputError(f"site {site} out of range for {state.n_sites} sites")

    left = np.ones((1, 1), dtype=np.complex128)
    for a in state.tensors[:site]:
        left = _extend_left(left, a)
    right = np.ones((1, 1), dtype=np.complex128)
    for a in reversed(state.tensors[site + 1:]):
        right = _extend_right(right, a)

    a = state.tensors[site]
    norm_sq = complex(np.sum(_extend_left(left, a) * right)).real
    if norm_sq <= 0.0:
        raise InvalidInputError("cannot measure a state with zero norm")
    raw = _sandwich(left, a, op.matrix, right)
    return _real_part(raw, norm_sq, f"<{op.name}_{site}>") / norm_sq


def site_expectations(state: MpsState, op: LocalOperator) -> np.ndarray:
    """Expectation of op on every site, sharing the environments."""
    lefts = _left_environments(state)
    rights = _right_environments(state)
    norm_sq = complex(lefts[-1][0, 0]).real
    if norm_sq <= 0.0:
        raise InvalidInputError("cannot measure a state with zero norm")

    values = np.empty(state.n_sites)
    for k, a in enumerate(state.tensors):
        raw = _sandwich(lefts[k], a, op.matrix, rights[k + 1])
        values[k] = _real_part(raw, norm_sq, f"<{op.name}_{k}>") / norm_sq
    return values


def averaged_expectation(state: MpsState, op: LocalOperator) -> float:
    """Site average of <O_i>."""
    return float(np.mean(site_expectations(state, op)))


def max_bond_dim(state: MpsState) -> int:
    return max(state.bond_dims)


def apply_two_site_gate(
    state: MpsState,
    gate: np.ndarray,
    left_site: int,
    max_bond: int,
    cutoff: float = 0.0,
    absorb: str = "right",
    bond_cap: int = 0,
) -> float:
    """
    Apply a 4x4 gate to sites (left_site, left_site + 1) and re-split by SVD.

    The gate acts on the basis |s_left s_right> with the left site as the
    most significant index. Singular values go into the right tensor for
    left-to-right sweeps (``absorb="right"``) or the left one otherwise.

    Args:
        state: MPS, modified in place
        gate: Unitary 4x4 matrix
        left_site: Left site of the bond
        max_bond: Largest bond dimension to keep
        cutoff: Relative discarded-weight cutoff
        absorb: "right" or "left"
        bond_cap: Hard limit on the new bond dimension (0 disables)

    Returns:
        Truncation weight of the SVD
    """
    if not 0 <= left_site < state.n_sites - 1:
        raise InvalidInputError(f"bond ({left_site}, {left_site + 1}) out of range for {state.n_sites} sites")
    g = np.asarray(gate, dtype=np.complex128)
    if g.shape != (PHYS_DIM ** 2, PHYS_DIM ** 2):
        raise InvalidInputError(f"two-site gate must be 4x4, got {g.shape}")
    if not is_unitary(g):
        raise InvalidInputError(f"gate on bond ({left_site}, {left_site + 1}) is not unitary")
    if absorb not in ("right", "left"):
        raise InvalidInputError(f"absorb must be 'right' or 'left', got {absorb!r}")

    a = state.tensors[left_site]
    b = state.tensors[left_site + 1]
    dl, dr = a.shape[0], b.shape[2]

    theta = np.tensordot(a, b, axes=(2, 0))
    theta = np.tensordot(g.reshape(2, 2, 2, 2), theta, axes=([2, 3], [1, 2]))
    theta = theta.transpose(2, 0, 1, 3).reshape(dl * PHYS_DIM, PHYS_DIM * dr)

    res = svd_truncate(theta, max_bond, cutoff)
    if bond_cap and res.rank > bond_cap:
        raise BondDimensionError(left_site, res.rank, bond_cap)

    if absorb == "right":
        new_a = res.u
        new_b = res.s[:, None] * res.v_dag
    else:
        new_a = res.u * res.s
        new_b = res.v_dag
    state.tensors[left_site] = new_a.reshape(dl, PHYS_DIM, res.rank)
    state.tensors[left_site + 1] = new_b.reshape(res.rank, PHYS_DIM, dr)
    return res.truncation_weight
