"""Zero-temperature Lifshitz energy, pressure and energy derivatives for two plates.

After scaling s = 2 L xi / c and t = 2 L q every quantity takes the form

    prefactor(L) * int_0^inf dt int_0^t ds  w(t) * sum_pol g(r_pol**2 e^{-t})

so the plate separation enters only through the scaled plasma frequency
2 L omega_p / c.  The triangle 0 <= s <= t is mapped onto the unit square by
t = x / (1 - x), s = t y.  The TE coefficient of the plasma model does not
depend on s (q_m**2 = q**2 + omega_p**2 / c**2 at every frequency), so only
the TM term needs refinement in y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import HBAR_C
from .dielectric import IdealMetal, MaterialKind, PlasmaModel, reflectivities, scaled_plasma_frequency
from .errors import ConvergenceError, DomainError
from .quadrature import cubature_unit_square

ENERGY, PRESSURE, CURVATURE = "energy", "pressure", "curvature"
_POWERS = {ENERGY: 3, PRESSURE: 4, CURVATURE: 5}


@dataclass(frozen=True)
class QuadratureSettings:
    rel_tolerance: float = 1e-8
    abs_floor: float = 0.0
    max_subdivisions: int = 1000

    def __post_init__(self):
        if not 0.0 < self.rel_tolerance <= 1e-3:
            raise DomainError(f"rel_tolerance must lie in (0, 1e-3], got {self.rel_tolerance!r}")
        if not self.abs_floor >= 0.0:
            raise DomainError(f"abs_floor must be non-negative, got {self.abs_floor!r}")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 50:
            raise DomainError(f"max_subdivisions must be an integer >= 50, got {self.max_subdivisions!r}")

    def halved(self) -> "QuadratureSettings":
        return QuadratureSettings(self.rel_tolerance / 2, self.abs_floor / 2, self.max_subdivisions)


DEFAULT_SETTINGS = QuadratureSettings()


@dataclass(frozen=True)
class PlatePairResult:
    value: float
    est_error: float
    evaluations: int


def _one_minus(r2, one_minus_r2, decay):
    # 1 - r2 e^{-t} without cancellation near r2 -> 1, t -> 0
    return one_minus_r2 - r2 * np.expm1(-decay)


def _log_one_minus(x, one_minus_x):
    return np.where(x < 0.5, np.log1p(-np.minimum(x, 0.5)), np.log(np.maximum(one_minus_x, 1e-300)))


def _integrand(quantity: str, omega: float):
    def f(x, y):
        one_minus = 1.0 - x
        t = x / one_minus
        jac = t / (one_minus * one_minus)  # dt ds = t/(1-x)^2 dx dy
        s = t * y
        rtm2, omtm, rte2, omte = reflectivities(omega, s, t)
        e = np.exp(-t)
        total = 0.0
        for r2, om in ((rtm2, omtm), (rte2, omte)):
            xx = r2 * e
            one_minus_x = _one_minus(r2, om, t)
            if quantity == ENERGY:
                g = t * _log_one_minus(xx, one_minus_x)
            elif quantity == PRESSURE:
                g = t * t * xx / one_minus_x
            else:
                g = t**3 * xx / (one_minus_x * one_minus_x)
            total = total + np.where(xx > 0.0, g, 0.0)
        return jac * total

    return f


def prefactor(quantity: str, L: float) -> float:
    return HBAR_C / (32.0 * math.pi**2 * L ** _POWERS[quantity])


def scaled_integral(quantity: str, omega: float, settings: QuadratureSettings, abs_tol: float = 0.0):
    """Dimensionless double integral for ``quantity`` at scaled plasma frequency ``omega``."""
    return cubature_unit_square(
        _integrand(quantity, omega),
        rel_tol=settings.rel_tolerance,
        abs_tol=abs_tol,
        max_subdivisions=settings.max_subdivisions,
    )


def _plate_pair(quantity: str, kind: MaterialKind, L: float, settings: QuadratureSettings, sign: float):
    if not L > 0:
        raise DomainError(f"separation must be positive, got {L!r}")
    pre = prefactor(quantity, L)
    omega = scaled_plasma_frequency(kind, L)
    try:
        res = scaled_integral(quantity, omega, settings, abs_tol=settings.abs_floor / pre)
    except ConvergenceError as exc:
        raise ConvergenceError(
            f"{quantity} quadrature for {kind.label} at L={L:.6g} m did not converge",
            sign * pre * exc.best,
            pre * exc.est_error,
        ) from exc
    return PlatePairResult(sign * pre * res.value, pre * res.error, res.evaluations)


def energy_per_area(kind: MaterialKind, L: float, settings: QuadratureSettings = DEFAULT_SETTINGS) -> PlatePairResult:
    """Casimir energy per unit area in J/m^2 (negative: binding)."""
    return _plate_pair(ENERGY, kind, L, settings, 1.0)


def pressure(kind: MaterialKind, L: float, settings: QuadratureSettings = DEFAULT_SETTINGS) -> PlatePairResult:
    """Attractive pressure magnitude in Pa, i.e. dE/dL > 0."""
    return _plate_pair(PRESSURE, kind, L, settings, 1.0)


def energy_derivative(kind: MaterialKind, L: float, order: int, settings: QuadratureSettings = DEFAULT_SETTINGS) -> PlatePairResult:
    """dE/dL (order 1, J/m^3 = Pa) or d2E/dL2 (order 2, Pa/m), differentiated under the integral."""
    if order == 1:
        return pressure(kind, L, settings)
    if order == 2:
        return _plate_pair(CURVATURE, kind, L, settings, -1.0)
    raise DomainError(f"derivative order must be 1 or 2, got {order!r}")


def reduction_factor(model: PlasmaModel, L: float, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """E_plasma(L) / E_ideal(L)."""
    return energy_per_area(model, L, settings).value / ideal_energy(L)


def ideal_energy(L: float) -> float:
    return -(math.pi**2) * HBAR_C / (720.0 * L**3)


def ideal_pressure(L: float) -> float:
    return math.pi**2 * HBAR_C / (240.0 * L**4)


def ideal_curvature(L: float) -> float:
    return -4.0 * math.pi**2 * HBAR_C / (240.0 * L**5)


__all__ = [
    "QuadratureSettings",
    "DEFAULT_SETTINGS",
    "PlatePairResult",
    "IdealMetal",
    "energy_per_area",
    "pressure",
    "energy_derivative",
    "reduction_factor",
    "ideal_energy",
    "ideal_pressure",
    "ideal_curvature",
]
