"""Quasi-eigenstates, Husimi functions and kicked-map dynamics of the
quantum delta-kicked accelerator."""

__version__ = "0.1.0"

from .params import ResonanceInput, SystemParams, ValidationError, derive_params, make_params, validate

__all__ = [
    "ResonanceInput",
    "SystemParams",
    "ValidationError",
    "derive_params",
    "make_params",
    "validate",
]
