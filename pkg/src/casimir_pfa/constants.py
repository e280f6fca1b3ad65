"""Physical constants (CODATA 2018, SI units) and unit conversions."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float  # J s
    c: float  # m / s
    version: str


CODATA = PhysicalConstants(hbar=1.054571817e-34, c=299792458.0, version="CODATA 2018")

HBAR = CODATA.hbar
C = CODATA.c
HBAR_C = HBAR * C

NM = 1e-9
UM = 1e-6
PN = 1e-12


def plasma_frequency(lambda_p: float) -> float:
    """Plasma frequency omega_p = 2 pi c / lambda_p in rad/s for a plasma wavelength in m."""
    if not lambda_p > 0:
        raise DomainError(f"plasma wavelength must be positive, got {lambda_p!r}")
    return 2.0 * math.pi * C / lambda_p
