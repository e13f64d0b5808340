"""
Dense complex linear-algebra kernels used by the MPS and TEBD layers.

Everything here is a pure function on numpy arrays: truncated SVD with
discarded-weight bookkeeping, and matrix exponentials of small Hermitian
bond Hamiltonians via eigendecomposition.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from ..common.errors import InvalidInputError, NumericError

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class SvdResult:
    """Truncated singular value decomposition m ~ u @ diag(s) @ v_dag."""

    u: np.ndarray
    s: np.ndarray
    v_dag: np.ndarray
    truncation_weight: float

    @property
    def rank(self) -> int:
        return int(self.s.shape[0])

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.s) @ self.v_dag


def as_complex_matrix(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate a 2-d finite array and return it as complex128."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def is_hermitian(m: np.ndarray, atol: float = HERMITIAN_TOL) -> bool:
    arr = np.asarray(m)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        return False
    return bool(np.max(np.abs(arr - arr.conj().T), initial=0.0) <= atol)


def is_unitary(m: np.ndarray, atol: float = UNITARY_TOL) -> bool:
    arr = np.asarray(m)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        return False
    eye = np.eye(arr.shape[0])
    return bool(np.max(np.abs(arr.conj().T @ arr - eye)) <= atol)


def _svd(m: np.ndarray):
    # gesdd can fail to converge; retry with gesvd
    try:
        return la.svd(m, full_matrices=False, lapack_driver="gesdd", check_finite=False)
    except la.LinAlgError:
        pass
    try:
        return la.svd(m, full_matrices=False, lapack_driver="gesvd", check_finite=False)
    except la.LinAlgError as e:
        raise NumericError(f"SVD did not converge for a {m.shape[0]}x{m.shape[1]} matrix") from e


def svd_truncate(m: np.ndarray, max_rank: int, cutoff: float = 0.0) -> SvdResult:
    """
    Singular value decomposition truncated by rank and relative weight.

    Singular values whose squared weight relative to the total falls below
    ``cutoff`` are dropped, then at most ``max_rank`` are kept (never fewer
    than one).

    Args:
        m: Matrix to decompose (any finite 2-d array)
        max_rank: Largest number of singular values to keep
        cutoff: Relative squared-weight threshold, 0 keeps everything

    Returns:
        SvdResult whose truncation_weight is the discarded squared weight
        divided by the total squared weight
    """
    if max_rank < 1:
        raise InvalidInputError(f"max_rank must be >= 1, got {max_rank}")
    if not (cutoff >= 0.0):
        raise InvalidInputError(f"cutoff must be >= 0, got {cutoff}")
    arr = as_complex_matrix(m)

    u, s, v_dag = _svd(arr)
    weights = s ** 2
    total = float(np.sum(weights))
    if total == 0.0:
        raise InvalidInputError("cannot truncate the SVD of a zero matrix")

    relative = weights / total
    keep = int(np.count_nonzero(relative >= cutoff)) if cutoff > 0.0 else s.shape[0]
    keep = max(1, min(keep, max_rank))

    discarded = float(np.sum(weights[keep:])) / total
    return SvdResult(
        u=u[:, :keep],
        s=s[:keep],
        v_dag=v_dag[:keep, :],
        truncation_weight=min(max(discarded, 0.0), 1.0),
    )


def gate_from_bond_term(h_bond: np.ndarray, delta: float, half_step: bool = False) -> np.ndarray:
    """
    Exponentiate a Hermitian bond term: exp(-i * delta' * h_bond).

    delta' is delta / 2 for the half steps of the second-order expansion.
    A negative delta gives the backward propagator.

    Args:
        h_bond: Hermitian matrix (4x4 for a spin-1/2 bond)
        delta: Time step
        half_step: Use delta / 2

    Returns:
        Unitary matrix of the same shape
    """
    h = as_complex_matrix(h_bond, "bond term")
    if h.shape[0] != h.shape[1]:
        raise InvalidInputError(f"bond term must be square, got shape {h.shape}")
    if not is_hermitian(h):
        raise InvalidInputError("bond term is not Hermitian")
    if not np.isfinite(delta):
        raise InvalidInputError(f"time step must be finite, got {delta}")

    step = 0.5 * delta if half_step else delta
    w, v = la.eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(-1j * step * w)) @ v.conj().T
