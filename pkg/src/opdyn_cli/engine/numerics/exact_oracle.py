"""
Dense state-vector reference for small chains.

The exact propagator comes from a single Hermitian eigendecomposition of
the full Hamiltonian, so recorded series carry no Trotter error. The same
module applies a TrotterSchedule to a state vector, which isolates MPS
bookkeeping from the Trotter approximation in tests.
"""

import time
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np
import scipy.linalg as la
from scipy import sparse

from ..common.config import get_settings
from ..common.errors import InvalidInputError, ResourceError
from ..common.logging import get_logger
from ..common.models import ModelKind, ModelSpec
from .mps import PAULI, LocalOperator
from .tebd import TimeSeries, TrotterSchedule

logger = get_logger(__name__)


def _check_size(n_sites: int) -> None:
    limit = get_settings().exact_max_sites
    if n_sites > limit:
        raise ResourceError(f"exact evolution is limited to {limit} sites, got {n_sites}")
    if n_sites < 2:
        raise InvalidInputError(f"n_sites must be >= 2, got {n_sites}")


@dataclass
class DenseState:
    """State vector over 2**n_sites basis states, site 0 most significant."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        n_sites = int(round(np.log2(amps.size))) if amps.size > 0 else 0
        if amps.size == 0 or 2 ** n_sites != amps.size:
            raise InvalidInputError(f"amplitude count {amps.size} is not a power of two")
        _check_size(n_sites)
        self.amplitudes = amps

    @property
    def n_sites(self) -> int:
        return int(round(np.log2(self.amplitudes.size)))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "DenseState":
        return DenseState(self.amplitudes.copy())


def product_dense_state(local_states: Union[Sequence[int], int], n_sites: int = 0) -> DenseState:
    """Basis state |s_0 s_1 ... s_{n-1}>; an int broadcasts to n_sites sites."""
    if isinstance(local_states, (int, np.integer)):
        local_states = [int(local_states)] * n_sites
    _check_size(len(local_states))
    index = 0
    for s in local_states:
        if s not in (0, 1):
            raise InvalidInputError(f"physical index must be 0 or 1, got {s}")
        index = 2 * index + s
    amps = np.zeros(2 ** len(local_states), dtype=np.complex128)
    amps[index] = 1.0
    return DenseState(amps)


def _embed(ops: Sequence[np.ndarray], first_site: int, n_sites: int) -> sparse.csr_matrix:
    left = sparse.identity(2 ** first_site, dtype=np.complex128, format="csr")
    span = sum(int(op.shape[0]).bit_length() - 1 for op in ops)
    right = sparse.identity(2 ** (n_sites - first_site - span), dtype=np.complex128, format="csr")
    local = ops[0]
    for op in ops[1:]:
        local = np.kron(local, op)
    return sparse.kron(sparse.kron(left, sparse.csr_matrix(local)), right, format="csr")


def embed_bond_term(term: np.ndarray, bond: int, n_sites: int) -> np.ndarray:
    """Dense I x ... x term_(bond, bond+1) x ... x I."""
    _check_size(n_sites)
    if not 0 <= bond < n_sites - 1:
        raise InvalidInputError(f"bond {bond} out of range for {n_sites} sites")
    return _embed([np.asarray(term, dtype=np.complex128)], bond, n_sites).toarray()


def dense_hamiltonian(spec: ModelSpec) -> np.ndarray:
    """
    Full 2**N x 2**N Hamiltonian assembled from Pauli strings.

    Built independently of the bond splitting, so it doubles as a check on
    build_bond_terms.
    """
    _check_size(spec.n_sites)
    try:
        kind = ModelKind(spec.model)
    except ValueError as e:
        raise InvalidInputError(f"unknown model '{spec.model}'") from e

    n = spec.n_sites
    dim = 2 ** n
    x, y, z = PAULI["sx"], PAULI["sy"], PAULI["sz"]
    ham = sparse.csr_matrix((dim, dim), dtype=np.complex128)
    for i in range(n - 1):
        if kind == ModelKind.ISING:
            ham = ham - spec.j * _embed([z, z], i, n)
        else:
            ham = ham - spec.j * (
                _embed([x, x], i, n) + _embed([y, y], i, n) + spec.delta_aniso * _embed([z, z], i, n)
            )
    for i in range(n):
        ham = ham - spec.h * _embed([x], i, n)
    return ham.toarray()


def dense_expectation(state: DenseState, op: LocalOperator, site: int) -> float:
    n = state.n_sites
    if not 0 <= site < n:
        raise InvalidInputError(f"site {site} out of range for {n} sites")
    psi = state.amplitudes.reshape((2,) * n)
    o_psi = np.moveaxis(np.tensordot(op.matrix, psi, axes=(1, site)), 0, site)
    return float(np.vdot(psi, o_psi).real / np.vdot(psi, psi).real)


def dense_averaged_expectation(state: DenseState, op: LocalOperator) -> float:
    return float(np.mean([dense_expectation(state, op, k) for k in range(state.n_sites)]))


def dense_energy(hamiltonian: np.ndarray, state: DenseState) -> float:
    psi = state.amplitudes
    return float(np.vdot(psi, hamiltonian @ psi).real / np.vdot(psi, psi).real)


def apply_gate_dense(state: DenseState, gate: np.ndarray, left_site: int) -> DenseState:
    """Apply a 4x4 gate to sites (left_site, left_site + 1) of a state vector."""
    n = state.n_sites
    if not 0 <= left_site < n - 1:
        raise InvalidInputError(f"bond {left_site} out of range for {n} sites")
    psi = state.amplitudes.reshape(2 ** left_site, 4, 2 ** (n - left_site - 2))
    out = np.einsum("ab,xby->xay", np.asarray(gate, dtype=np.complex128), psi)
    return DenseState(out.reshape(-1))


def dense_trotter_record(
    initial: DenseState,
    sched: TrotterSchedule,
    n_steps: int,
    observable: LocalOperator,
) -> TimeSeries:
    """The TEBD gate sequence applied to a state vector, without truncation."""
    if initial.n_sites != sched.n_sites:
        raise InvalidInputError(f"state has {initial.n_sites} sites, schedule expects {sched.n_sites}")
    state = initial.copy()
    values = [dense_averaged_expectation(state, observable)]
    for _ in range(n_steps):
        for layer in sched.layers():
            for bond, gate in layer:
                state = apply_gate_dense(state, gate, bond)
        values.append(dense_averaged_expectation(state, observable))
    return TimeSeries.uniform(values, sched.delta)


def exact_evolve_states(spec: ModelSpec, initial: DenseState, delta: float, n_steps: int) -> Iterator[DenseState]:
    """
    Yield e^{-i k delta H}|psi_0> for k = 0 .. n_steps.

    The Hamiltonian is diagonalized once; each step multiplies the
    eigenbasis coefficients by the phases e^{-i delta E_k}.
    """
    _check_size(spec.n_sites)
    if initial.n_sites != spec.n_sites:
        raise InvalidInputError(f"initial state has {initial.n_sites} sites, model has {spec.n_sites}")
    if n_steps < 1:
        raise InvalidInputError(f"n_steps must be >= 1, got {n_steps}")

    started = time.perf_counter()
    energies, vectors = la.eigh(dense_hamiltonian(spec))
    logger.info(f"Diagonalized {2 ** spec.n_sites}-dimensional Hamiltonian in {time.perf_counter() - started:.2f}s")

    phases = np.exp(-1j * delta * energies)
    coeffs = vectors.conj().T @ initial.amplitudes
    yield initial.copy()
    for _ in range(n_steps):
        coeffs = phases * coeffs
        yield DenseState(vectors @ coeffs)


def exact_evolve_record(
    spec: ModelSpec,
    initial: DenseState,
    delta: float,
    n_steps: int,
    observable: LocalOperator,
) -> TimeSeries:
    """
    Exact evolution sampled every delta.

    Returns:
        TimeSeries of the site-averaged observable with n_steps + 1 samples
    """
    started = time.perf_counter()
    values = [
        dense_averaged_expectation(state, observable)
        for state in exact_evolve_states(spec, initial, delta, n_steps)
    ]
    elapsed = time.perf_counter() - started
    return TimeSeries.uniform(values, delta, wall_seconds=elapsed)
