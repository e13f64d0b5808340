"""Pipeline module for the operator-dynamics engine."""

from .pipeline import HybridResult, Pipeline, SeriesComparison, SimulationResult, compare_series

__all__ = ["Pipeline", "HybridResult", "SimulationResult", "SeriesComparison", "compare_series"]
