"""Self-testing mutually unbiased bases with the 2^d -> 1 quantum random access code."""

from .certify import certification_report, ideal_asp
from .measurements import MeasurementPair, Povm, fourier_mub_pair, validate_povm
from .qrac import optimal_asp, seesaw_optimize

__all__ = [
    "MeasurementPair",
    "Povm",
    "certification_report",
    "fourier_mub_pair",
    "ideal_asp",
    "optimal_asp",
    "seesaw_optimize",
    "validate_povm",
]
