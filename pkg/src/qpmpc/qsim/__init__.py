"""Structured quantum state engine and dense reference backend."""
from .layout import Register, RegisterLayout
from .sparse import (
    COMPUTATIONAL,
    FOURIER,
    FOURIER_INVERSE,
    ExactSparseState,
    MeasurementDistribution,
    PhaseSum,
    apply_cnot_copy,
    apply_fourier,
    apply_hadamard_uniform,
    apply_mod_mult,
    apply_oracle,
    apply_phase_power,
    distribution_of,
    fourier_measure,
    measure_register,
    new_state,
    sample_outcome,
)
from .dense import DenseState, backend_deviation, dense_mirror, dense_new

__all__ = [
    "COMPUTATIONAL",
    "FOURIER",
    "FOURIER_INVERSE",
    "DenseState",
    "ExactSparseState",
    "MeasurementDistribution",
    "PhaseSum",
    "Register",
    "RegisterLayout",
    "apply_cnot_copy",
    "apply_fourier",
    "apply_hadamard_uniform",
    "apply_mod_mult",
    "apply_oracle",
    "apply_phase_power",
    "backend_deviation",
    "dense_mirror",
    "dense_new",
    "distribution_of",
    "fourier_measure",
    "measure_register",
    "new_state",
    "sample_outcome",
]
