"""Configuration management for the operator-dynamics engine."""

from functools import lru_cache
from typing import Any, Dict

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings with environment variable support."""

    # Application
    app_name: str = "OPDYN Operator Dynamics Engine"
    app_version: str = "1.0.0"
    log_level: str = "INFO"

    # Resource limits
    bond_hard_cap: int = 4096
    exact_max_sites: int = 14

    # Reproducibility
    default_seed_init: int = 7
    default_seed_shuffle: int = 11

    # Progress reporting (steps for evolutions, epochs for training)
    progress_every: int = 100

    # Output
    output_dir: str = "runs"

    model_config = SettingsConfigDict(
        env_prefix="OPDYN_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


# Per-model defaults for the two standard quench setups.
MODEL_PRESETS: Dict[str, Dict[str, Any]] = {
    "ising": {
        "n": 12,
        "j": 1.0,
        "h": 1.0,
        "delta_aniso": 0.0,
        "delta": 0.05,
        "steps": 500,
        "hidden": 32,
        "train_pairs": 110,
    },
    "xxz": {
        "n": 12,
        "j": 1.0,
        "h": 0.5,
        "delta_aniso": 0.5,
        "delta": 0.01,
        "steps": 2000,
        "hidden": 64,
        "train_pairs": 100,
    },
}

SHARED_DEFAULTS: Dict[str, Any] = {
    "window": 4,
    "max_bond": 200,
    "cutoff": 0.0,
    "lr": 1e-3,
    "max_epochs": 50000,
    "target_mae": 1e-3,
    "reference": "tebd",
    "observable": "sz",
}


def resolve_defaults(model: str) -> Dict[str, Any]:
    """
    Materialize every default for a model, seeds included.

    Args:
        model: Model tag (ising or xxz)

    Returns:
        Flat mapping of option name to default value
    """
    settings = get_settings()
    resolved: Dict[str, Any] = {"model": model}
    resolved.update(MODEL_PRESETS[model])
    resolved.update(SHARED_DEFAULTS)
    resolved["seed_init"] = settings.default_seed_init
    resolved["seed_shuffle"] = settings.default_seed_shuffle
    return resolved
