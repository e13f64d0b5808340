"""Common utilities and shared models for the operator-dynamics engine."""

from .config import Settings, get_settings, resolve_defaults
from .errors import (
    BondDimensionError,
    InvalidInputError,
    NumericError,
    OpdynError,
    ResourceError,
    RolloutDivergedError,
    TrainingDivergedError,
    UsageError,
)
from .files import atomic_write_text
from .logging import get_logger
from .models import (
    BenchRow,
    HybridConfig,
    ModelKind,
    ModelSpec,
    ObservableName,
    ReferenceKind,
    RunReport,
    StageState,
    StageStatus,
)

__all__ = [
    "Settings",
    "get_settings",
    "resolve_defaults",
    "get_logger",
    "atomic_write_text",
    "OpdynError",
    "InvalidInputError",
    "NumericError",
    "ResourceError",
    "BondDimensionError",
    "TrainingDivergedError",
    "RolloutDivergedError",
    "UsageError",
    "BenchRow",
    "HybridConfig",
    "ModelKind",
    "ModelSpec",
    "ObservableName",
    "ReferenceKind",
    "RunReport",
    "StageState",
    "StageStatus",
]
