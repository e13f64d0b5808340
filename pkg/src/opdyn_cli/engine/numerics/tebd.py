"""
Second-order Suzuki-Trotter time evolution (TEBD) of an MpsState.

One step applies exp(-i delta/2 H_odd) exp(-i delta H_even) exp(-i delta/2 H_odd),
where the "odd" layer holds bonds (0,1), (2,3), ... and the "even" layer
bonds (1,2), (3,4), ... Gates within a layer commute and are swept left to
right.
"""

import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..common.config import get_settings
from ..common.errors import InvalidInputError
from ..common.logging import get_logger
from .hamiltonians import BondTermList
from .mps import LocalOperator, MpsState, apply_two_site_gate, averaged_expectation, max_bond_dim
from .tensor_core import gate_from_bond_term

logger = get_logger(__name__)

SPACING_TOL = 1e-12


@dataclass
class TimeSeries:
    """Uniformly spaced samples (t, <O>(t)) of an observable."""

    times: np.ndarray
    values: np.ndarray
    metadata: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.times.ndim != 1 or self.times.shape != self.values.shape:
            raise InvalidInputError(
                f"times and values must be 1-d of equal length, got {self.times.shape} and {self.values.shape}"
            )
        if not (np.all(np.isfinite(self.times)) and np.all(np.isfinite(self.values))):
            raise InvalidInputError("time series has non-finite samples")
        if self.times.size > 1:
            steps = np.diff(self.times)
            if np.any(steps <= 0):
                raise InvalidInputError("times must be strictly increasing")
            if np.max(np.abs(steps - steps[0])) > SPACING_TOL * max(1.0, float(np.max(np.abs(self.times)))):
                raise InvalidInputError("times must be uniformly spaced")

    @classmethod
    def uniform(cls, values, delta: float, start_index: int = 0, **metadata) -> "TimeSeries":
        """Series on the grid t_k = k * delta, k = start_index, start_index + 1, ..."""
        values = np.asarray(values, dtype=np.float64)
        times = (start_index + np.arange(values.size)) * delta
        return cls(times, values, dict(metadata))

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def delta(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self) > 1 else 0.0

    def slice(self, start: int, stop: Optional[int] = None) -> "TimeSeries":
        return TimeSeries(self.times[start:stop].copy(), self.values[start:stop].copy(), dict(self.metadata))


@dataclass(frozen=True)
class TrotterSchedule:
    """Gates of one second-order step, keyed by the left site of their bond."""

    half_odd_gates: List[Tuple[int, np.ndarray]]
    full_even_gates: List[Tuple[int, np.ndarray]]
    delta: float
    n_sites: int

    def layers(self):
        """The three gate layers of one step in application order."""
        return (self.half_odd_gates, self.full_even_gates, self.half_odd_gates)


def build_trotter_schedule(terms: BondTermList, delta: float) -> TrotterSchedule:
    """
    Exponentiate every bond term for one second-order step.

    Args:
        terms: Bond Hamiltonians
        delta: Time step (a negative step evolves backwards)

    Returns:
        TrotterSchedule with half-step gates on bonds 0, 2, 4, ... and
        full-step gates on bonds 1, 3, 5, ...
    """
    if not np.isfinite(delta) or delta == 0.0:
        raise InvalidInputError(f"time step must be finite and nonzero, got {delta}")

    half, full = [], []
    for bond, term in enumerate(terms):
        if bond % 2 == 0:
            half.append((bond, gate_from_bond_term(term, delta, half_step=True)))
        else:
            full.append((bond, gate_from_bond_term(term, delta, half_step=False)))
    return TrotterSchedule(half, full, float(delta), len(terms) + 1)


def step_second_order(
    state: MpsState,
    sched: TrotterSchedule,
    max_bond: int,
    cutoff: float = 0.0,
    bond_cap: Optional[int] = None,
) -> float:
    """
    Advance the state by one time step in place.

    Args:
        state: MPS to evolve
        sched: Gates of one step
        max_bond: Bond dimension limit used for truncation
        cutoff: Relative discarded-weight cutoff
        bond_cap: Hard resource limit (defaults to the configured bond_hard_cap)

    Returns:
        Sum of the truncation weights of all gate applications
    """
    if state.n_sites != sched.n_sites:
        raise InvalidInputError(f"state has {state.n_sites} sites, schedule expects {sched.n_sites}")
    cap = get_settings().bond_hard_cap if bond_cap is None else bond_cap

    weight = 0.0
    for layer in sched.layers():
        for bond, gate in layer:
            weight += apply_two_site_gate(state, gate, bond, max_bond, cutoff, bond_cap=cap)
    return weight


def evolve_record(
    state: MpsState,
    sched: TrotterSchedule,
    n_steps: int,
    observable: LocalOperator,
    max_bond: int,
    cutoff: float = 0.0,
    bond_cap: Optional[int] = None,
) -> TimeSeries:
    """
    Evolve n_steps and record the site-averaged observable after each step.

    The state is evolved in place. The series metadata holds the cumulative
    truncation weight, the largest bond dimension reached and the wall time.

    Returns:
        TimeSeries with n_steps + 1 samples starting at t = 0
    """
    if n_steps < 1:
        raise InvalidInputError(f"n_steps must be >= 1, got {n_steps}")
    progress_every = max(1, get_settings().progress_every)

    started = time.perf_counter()
    values = np.empty(n_steps + 1)
    values[0] = averaged_expectation(state, observable)
    cumulative = 0.0
    largest = max_bond_dim(state)

    for k in range(1, n_steps + 1):
        cumulative += step_second_order(state, sched, max_bond, cutoff, bond_cap)
        values[k] = averaged_expectation(state, observable)
        largest = max(largest, max_bond_dim(state))
        if k % progress_every == 0:
            logger.info(
                f"TEBD step {k}/{n_steps}: <{observable.name}>={values[k]:.6f} "
                f"D={largest} truncation={cumulative:.3e}"
            )

    elapsed = time.perf_counter() - started
    logger.debug(f"TEBD evolution of {n_steps} steps took {elapsed:.2f}s")
    return TimeSeries.uniform(
        values,
        sched.delta,
        truncation_weight=cumulative,
        max_bond_reached=float(largest),
        wall_seconds=elapsed,
    )
