"""OPDYN - Operator Dynamics Engine

TEBD simulations of spin-chain quenches with long-time extrapolation by a
sliding-window MLP regressor.
"""
from .cli import main as cli_main

__version__ = "1.0.0"
__all__ = ["cli_main"]
