"""Numerical kernels: tensors, MPS, Hamiltonians, TEBD, exact reference and regressor."""

from .tensor_core import SvdResult, gate_from_bond_term, svd_truncate
from .mps import (
    LocalOperator,
    MpsState,
    apply_two_site_gate,
    averaged_expectation,
    norm,
    pauli,
    product_state,
    site_expectation,
)
from .hamiltonians import BondTermList, build_bond_terms
from .tebd import TimeSeries, TrotterSchedule, build_trotter_schedule, evolve_record, step_second_order
from .exact_oracle import DenseState, dense_hamiltonian, exact_evolve_record, exact_evolve_states, product_dense_state
from .regressor import (
    Mlp,
    TrainReport,
    WindowSet,
    build_windows,
    collapse_to_affine,
    forward,
    init_mlp,
    load_checkpoint,
    predict_autoregressive,
    save_checkpoint,
    train_sgd,
)

__all__ = [
    "SvdResult",
    "svd_truncate",
    "gate_from_bond_term",
    "LocalOperator",
    "MpsState",
    "product_state",
    "norm",
    "site_expectation",
    "averaged_expectation",
    "apply_two_site_gate",
    "pauli",
    "BondTermList",
    "build_bond_terms",
    "TimeSeries",
    "TrotterSchedule",
    "build_trotter_schedule",
    "step_second_order",
    "evolve_record",
    "DenseState",
    "dense_hamiltonian",
    "exact_evolve_record",
    "exact_evolve_states",
    "product_dense_state",
    "WindowSet",
    "Mlp",
    "TrainReport",
    "build_windows",
    "init_mlp",
    "forward",
    "train_sgd",
    "predict_autoregressive",
    "collapse_to_affine",
    "save_checkpoint",
    "load_checkpoint",
]
