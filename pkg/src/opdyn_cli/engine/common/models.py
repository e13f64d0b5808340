"""Shared data models for the operator-dynamics engine."""

import math
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class ModelKind(str, Enum):
    """Spin-chain Hamiltonians the engine can build."""
    ISING = "ising"
    XXZ = "xxz"


class ReferenceKind(str, Enum):
    """Where the comparison series of a hybrid run comes from."""
    TEBD = "tebd"
    EXACT = "exact"
    NONE = "none"


class ObservableName(str, Enum):
    """Single-site observables (Pauli convention, eigenvalues +-1)."""
    SZ = "sz"
    SX = "sx"
    SY = "sy"


class StageState(str, Enum):
    """Enumeration of possible pipeline stage states."""
    IDLE = "idle"
    RUNNING = "running"
    COMPLETED = "completed"
    ERROR = "error"


class ModelSpec(BaseModel):
    """Parameters of a nearest-neighbour chain with open boundaries."""

    model_config = ConfigDict(frozen=True)

    model: ModelKind = Field(..., description="Hamiltonian family")
    n_sites: int = Field(..., ge=2, description="Number of spins")
    j: float = Field(1.0, description="Exchange coupling (energy unit)")
    h: float = Field(0.0, description="Transverse field strength")
    delta_aniso: float = Field(0.0, description="XXZ uniaxial anisotropy (ignored for ising)")

    @field_validator("j", "h", "delta_aniso")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("parameters must be finite")
        return value


class HybridConfig(BaseModel):
    """Full configuration of a hybrid TEBD + regressor run."""

    model_config = ConfigDict(frozen=True)

    model_spec: ModelSpec
    delta: float = Field(..., gt=0, description="Time step in units of 1/J")
    total_steps: int = Field(..., ge=1, description="Number of time steps up to tau")
    train_pairs: int = Field(..., ge=1, description="Training examples taken from the short-time data")
    window: int = Field(4, ge=1, description="Training window size p")
    hidden: int = Field(32, ge=1, description="Hidden linear neurons m")
    max_bond: int = Field(200, ge=1, description="Maximum MPS bond dimension D")
    cutoff: float = Field(0.0, ge=0.0, lt=1.0, description="Relative discarded-weight cutoff")
    observable: ObservableName = ObservableName.SZ
    seed_init: int = Field(7, ge=0)
    seed_shuffle: int = Field(11, ge=0)
    reference: ReferenceKind = ReferenceKind.TEBD
    learning_rate: float = Field(1e-3, gt=0)
    max_epochs: int = Field(50000, ge=1)
    target_mae: float = Field(1e-3, ge=0)

    @field_validator("delta", "learning_rate", "cutoff", "target_mae")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    @model_validator(mode="after")
    def _enough_points(self) -> "HybridConfig":
        if self.n_generated > self.total_steps + 1:
            raise ValueError(
                f"train_pairs + window = {self.n_generated} exceeds the "
                f"{self.total_steps + 1} points of the full interval"
            )
        return self

    @property
    def n_generated(self) -> int:
        """Number of short-time points produced by TEBD."""
        return self.train_pairs + self.window

    @property
    def tau(self) -> float:
        """Total evolution time."""
        return self.total_steps * self.delta


class StageStatus(BaseModel):
    """Status model for tracking one pipeline stage."""

    name: str = Field(..., description="Stage name")
    state: StageState = Field(default=StageState.IDLE, description="Current stage state")
    start_time: Optional[datetime] = Field(None, description="Stage start time")
    end_time: Optional[datetime] = Field(None, description="Stage end time")
    seconds: float = Field(0.0, ge=0, description="Monotonic wall time spent in the stage")
    messages: List[str] = Field(default_factory=list, description="Log messages from the stage")
    error_message: Optional[str] = Field(None, description="Error message if state is ERROR")

    def add_message(self, message: str) -> None:
        """Add a log message with timestamp."""
        timestamp = datetime.now().strftime("%H:%M:%S")
        self.messages.append(f"[{timestamp}] {message}")

    def duration_seconds(self) -> Optional[float]:
        """Calendar duration in seconds."""
        if self.start_time and self.end_time:
            return (self.end_time - self.start_time).total_seconds()
        return None


class TrainSummary(BaseModel):
    """Condensed training outcome for reports."""

    epochs_run: int
    final_train_mae: float
    seed: int


class TruncationSummary(BaseModel):
    """Truncation bookkeeping of one TEBD evolution."""

    cumulative_weight: float = Field(0.0, ge=0)
    max_bond_reached: int = Field(1, ge=1)


class RunReport(BaseModel):
    """Complete report of a simulate, exact or hybrid run."""

    run_id: str = Field(..., description="Unique run ID")
    verb: str = Field(..., description="Workflow that produced the report")
    start_time: datetime
    end_time: Optional[datetime] = None
    overall_status: str = Field(default="pending", description="success or failed")
    config: Dict[str, Any] = Field(default_factory=dict, description="Resolved configuration echo")
    generation_seconds: float = Field(0.0, ge=0)
    training_seconds: float = Field(0.0, ge=0)
    prediction_seconds: float = Field(0.0, ge=0)
    reference_seconds: float = Field(0.0, ge=0)
    mean_epsilon: Optional[float] = Field(None, description="Mean |ref - pred| over the full compared range")
    max_epsilon: Optional[float] = None
    mean_epsilon_prediction: Optional[float] = Field(None, description="Mean |ref - pred| after the training region")
    max_epsilon_prediction: Optional[float] = None
    train: Optional[TrainSummary] = None
    truncation: Optional[TruncationSummary] = None
    stages: List[StageStatus] = Field(default_factory=list)
    errors: List[str] = Field(default_factory=list)


class BenchRow(BaseModel):
    """One row of the cost-scaling table."""

    n_sites: int
    train_pairs: int
    generation_s: float = 0.0
    train_predict_s: float = 0.0
    full_tebd_s: float = 0.0
    epochs_run: int = 0
    status: str = "pending"
    error: Optional[str] = None
