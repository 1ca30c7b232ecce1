"""Gate-level simulation of quantum-system algorithms on a state-vector quantum computer."""

from .state import (
    MeasurementSample,
    Register,
    RegisterLayout,
    StateVector,
    fidelity,
    measure_register,
    new_basis_state,
    norm,
)

__all__ = [
    "MeasurementSample",
    "Register",
    "RegisterLayout",
    "StateVector",
    "fidelity",
    "measure_register",
    "new_basis_state",
    "norm",
]
__version__ = "0.1.0"
