"""Lateral Casimir force between corrugated surfaces in the proximity-force approximation.

Zero-temperature Lifshitz theory with plasma-model (or ideal-metal) plates,
phase-averaged PFA for sinusoidally corrugated sphere-plate and plate-plate
geometries, deviation-curve analysis and measurement compatibility statistics.
"""

from .constants import CODATA, HBAR, C, plasma_frequency
from .dielectric import IdealMetal, PlasmaModel, MaterialKind
from .errors import CasimirError, DomainError, ConvergenceError, InvariantViolation
from .lifshitz import QuadratureSettings, PlatePairResult

__all__ = [
    "CODATA",
    "HBAR",
    "C",
    "plasma_frequency",
    "IdealMetal",
    "PlasmaModel",
    "MaterialKind",
    "CasimirError",
    "DomainError",
    "ConvergenceError",
    "InvariantViolation",
    "QuadratureSettings",
    "PlatePairResult",
]

__version__ = "0.1.0"
