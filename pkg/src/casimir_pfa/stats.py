"""Gaussian compatibility of a theoretical value with a measured confidence interval."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import special

from .errors import DomainError


@dataclass(frozen=True)
class Measurement:
    value: float  # N
    ci_halfwidth: float  # N
    confidence: float = 0.95

    def __post_init__(self):
        if not self.ci_halfwidth > 0:
            raise DomainError(f"confidence-interval half-width must be positive, got {self.ci_halfwidth!r}")
        if not 0.0 < self.confidence < 1.0:
            raise DomainError(f"confidence must lie in (0, 1), got {self.confidence!r}")


def two_sided_quantile(confidence: float) -> float:
    """z with P(|Z| <= z) = confidence for a standard normal Z."""
    if not 0.0 < confidence < 1.0:
        raise DomainError(f"confidence must lie in (0, 1), got {confidence!r}")
    return math.sqrt(2.0) * float(special.erfinv(confidence))


def sigma_from_ci(m: Measurement) -> float:
    return m.ci_halfwidth / two_sided_quantile(m.confidence)


def z_score(m: Measurement, theory: float) -> float:
    return abs(theory - m.value) / sigma_from_ci(m)


def compatibility_probability(m: Measurement, theory: float) -> float:
    """Two-sided Gaussian tail probability of a deviation at least |theory - value|."""
    return float(special.erfc(z_score(m, theory) / math.sqrt(2.0)))


def one_sided_probability(m: Measurement, theory: float) -> float:
    return 0.5 * compatibility_probability(m, theory)
