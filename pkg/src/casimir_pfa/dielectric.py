"""Plasma-model permittivity and Fresnel coefficients on the imaginary frequency axis.

Two forms are provided.  The public functions take physical arguments
(xi in rad/s, k_perp in 1/m).  ``reflectivities`` works in the scaled
variables used by the Lifshitz quadrature, s = 2 L xi / c and t = 2 L q with
q = sqrt(k_perp**2 + xi**2 / c**2), and is written so that the xi -> 0 edge
and large-t tails stay free of cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .constants import C, plasma_frequency
from .errors import DomainError


@dataclass(frozen=True)
class PlasmaModel:
    """Lossless plasma metal with eps(i xi) = 1 + omega_p**2 / xi**2."""

    lambda_p: float
    omega_p: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "omega_p", plasma_frequency(self.lambda_p))

    @property
    def label(self) -> str:
        return f"plasma(lambda_p={self.lambda_p:.6g} m)"


@dataclass(frozen=True)
class IdealMetal:
    """Perfect reflector: r_TM = 1, r_TE = -1 everywhere."""

    @property
    def label(self) -> str:
        return "ideal"


MaterialKind = Union[IdealMetal, PlasmaModel]


def _check_xi_k(xi, k_perp):
    if not xi > 0:
        raise DomainError(f"imaginary frequency must be positive, got {xi!r}")
    if not k_perp >= 0:
        raise DomainError(f"transverse wavenumber must be non-negative, got {k_perp!r}")


def permittivity_imag(model: PlasmaModel, xi: float) -> float:
    if not xi > 0:
        raise DomainError(f"imaginary frequency must be positive, got {xi!r}")
    return 1.0 + (model.omega_p / xi) ** 2


def fresnel_tm(kind: MaterialKind, xi: float, k_perp: float) -> float:
    _check_xi_k(xi, k_perp)
    if isinstance(kind, IdealMetal):
        return 1.0
    q = math.hypot(k_perp, xi / C)
    kp = kind.omega_p / C
    qm = math.hypot(q, kp)
    # eps*q - qm rewritten without the q - qm cancellation
    num = kp**2 * (q - (xi / C) ** 2 / (q + qm))
    den = (xi / C) ** 2 * (q + qm) + kp**2 * q
    return num / den


def fresnel_te(kind: MaterialKind, xi: float, k_perp: float) -> float:
    _check_xi_k(xi, k_perp)
    if isinstance(kind, IdealMetal):
        return -1.0
    q = math.hypot(k_perp, xi / C)
    kp = kind.omega_p / C
    qm = math.hypot(q, kp)
    return -(kp**2) / (q + qm) ** 2


def scaled_plasma_frequency(kind: MaterialKind, L: float) -> float:
    """2 L omega_p / c, the only material parameter left after scaling by L (inf for ideal)."""
    if isinstance(kind, IdealMetal):
        return math.inf
    return 2.0 * L * kind.omega_p / C


def reflectivities(omega: float, s: np.ndarray, t: np.ndarray):
    """Squared reflection coefficients in scaled variables.

    Returns ``(rtm2, one_minus_rtm2, rte2, one_minus_rte2)``.  ``omega`` is
    the scaled plasma frequency; ``math.inf`` selects the ideal metal.
    Requires 0 <= s <= t and t > 0; s = 0 gives the analytic limit.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if math.isinf(omega):
        one = np.ones(np.broadcast(s, t).shape)
        return one, np.zeros_like(one), one, np.zeros_like(one)
    w2 = omega * omega
    s2 = s * s
    qm = np.sqrt(t * t + w2)
    tq = t + qm
    num = w2 * (t - s2 / tq)
    den = (s2 + w2) * t + s2 * qm
    rtm = num / den
    rtm2 = rtm * rtm
    one_minus_rtm2 = 4.0 * s2 * qm * (s2 + w2) * t / (den * den)
    rte = w2 / (tq * tq)
    rte2 = rte * rte
    one_minus_rte2 = 4.0 * t * qm / (tq * tq)
    return rtm2, one_minus_rtm2, rte2, one_minus_rte2
