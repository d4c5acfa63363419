"""Quantum coherence of assistance: measures, saturation certificates and the assisted protocol."""

from ._core import (
    CohAssistError,
    eigh,
    entropy,
    maximize_assistance,
    measures,
    ndim_decomposition,
    purify,
    qubit_decomposition,
    qutrit_decomposition,
    run_protocol,
    saturate,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "CohAssistError",
    "eigh",
    "entropy",
    "maximize_assistance",
    "measures",
    "ndim_decomposition",
    "purify",
    "qubit_decomposition",
    "qutrit_decomposition",
    "run_protocol",
    "saturate",
    "validate",
]
