"""Operator-dynamics engine: numerics, shared models and the experiment pipeline."""
