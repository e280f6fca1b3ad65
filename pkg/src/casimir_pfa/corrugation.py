"""Lateral Casimir force between sinusoidally corrugated surfaces in the PFA.

Local gap between the surfaces at lateral position x and relative shift b:

    d(x, b) = L + a1 cos(k x + k b) - a2 cos(k x)

The complete PFA keeps every power of a1 and a2 by averaging the plate-pair
energy over one corrugation period; the linear PFA keeps only the a1 a2 term.
Sphere-plate forces use the Derjaguin reduction with radius R.

Forces are positive-valued magnitudes of attraction for the pressure, and the
lateral force is -dV/db.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional

import numpy as np
from numpy.polynomial import Chebyshev
from scipy import integrate

from .dielectric import MaterialKind
from .errors import ConvergenceError, DomainError
from .lifshitz import DEFAULT_SETTINGS, QuadratureSettings, energy_derivative, energy_per_area, pressure
from .optimize import golden_section_max

SCAN_POINTS = 64
PHASE_RTOL = 1e-9
CACHE_RTOL = 1e-9
_MAX_TRAPEZOID = 1 << 14
_MAX_CHEB_DEGREE = 256


@dataclass(frozen=True)
class CorrugatedGeometry:
    L: float
    lambda_c: float
    a1: float
    a2: float
    R: Optional[float] = None

    def __post_init__(self):
        if not self.lambda_c > 0:
            raise DomainError(f"corrugation wavelength must be positive, got {self.lambda_c!r}")
        if not (self.a1 >= 0 and self.a2 >= 0):
            raise DomainError(f"corrugation amplitudes must be non-negative, got a1={self.a1!r}, a2={self.a2!r}")
        if not self.L > self.a1 + self.a2:
            raise DomainError(f"surfaces touch: need L > a1 + a2, got L={self.L!r}, a1 + a2={self.a1 + self.a2!r}")
        if self.R is not None and not self.R > 0:
            raise DomainError(f"sphere radius must be positive, got {self.R!r}")

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.lambda_c

    @property
    def d_min(self) -> float:
        return self.L - self.a1 - self.a2

    @property
    def d_max(self) -> float:
        return self.L + self.a1 + self.a2

    def with_radius(self, R: Optional[float]) -> "CorrugatedGeometry":
        return replace(self, R=R)

    def scaled(self, s: float) -> "CorrugatedGeometry":
        """Same geometry with both amplitudes multiplied by ``s``."""
        return replace(self, a1=self.a1 * s, a2=self.a2 * s)


@dataclass(frozen=True)
class Amplitude:
    value: float  # N (sphere) or N/m^2 (plates)
    b_max: float  # m
    est_error: float


def _require_radius(geom):
    if geom.R is None:
        raise DomainError("sphere-plate quantity requested but the geometry has no radius R")
    return geom.R


def local_gap(geom: CorrugatedGeometry, x, b):
    """Local separation d(x, b) in m; broadcasts over x and b."""
    k = geom.k
    return geom.L + geom.a1 * np.cos(k * x + k * b) - geom.a2 * np.cos(k * x)


# -- plate-pair cache --------------------------------------------------------


@dataclass(frozen=True)
class PlateTable:
    """Chebyshev interpolants of E(d) and dE/dd on [d_lo, d_hi]."""

    energy: Chebyshev
    pressure: Chebyshev
    energy_error: float  # absolute, J/m^2
    pressure_error: float  # absolute, Pa


def _fit(func, lo, hi, tol):
    deg = 8
    prev = Chebyshev.interpolate(func, deg, domain=[lo, hi])
    probe = np.linspace(lo, hi, 257)
    while True:
        deg *= 2
        cur = Chebyshev.interpolate(func, deg, domain=[lo, hi])
        diff = float(np.max(np.abs(cur(probe) - prev(probe))))
        scale = float(np.max(np.abs(cur(probe))))
        if diff <= tol * scale:
            return cur, diff
        if deg >= _MAX_CHEB_DEGREE:
            raise ConvergenceError("Chebyshev cache did not converge", float(cur(0.5 * (lo + hi))), diff)
        prev = cur


@lru_cache(maxsize=64)
def plate_table(kind: MaterialKind, lo: float, hi: float, settings: QuadratureSettings = DEFAULT_SETTINGS) -> PlateTable:
    """Interpolated plate-pair energy and pressure over separations [lo, hi]."""
    if lo == hi:
        hi = lo * (1.0 + 1e-6)
        lo = lo * (1.0 - 1e-6)
    tol = max(CACHE_RTOL, settings.rel_tolerance)
    quad_err = {"e": 0.0, "p": 0.0}

    def energy(ds):
        out = []
        for d in np.atleast_1d(ds):
            r = energy_per_area(kind, float(d), settings)
            quad_err["e"] = max(quad_err["e"], r.est_error)
            out.append(r.value)
        return np.array(out)

    def press(ds):
        out = []
        for d in np.atleast_1d(ds):
            r = pressure(kind, float(d), settings)
            quad_err["p"] = max(quad_err["p"], r.est_error)
            out.append(r.value)
        return np.array(out)

    e_fit, e_diff = _fit(energy, lo, hi, tol)
    p_fit, p_diff = _fit(press, lo, hi, tol)
    return PlateTable(e_fit, p_fit, e_diff + quad_err["e"], p_diff + quad_err["p"])


def _table(geom, kind, settings):
    return plate_table(kind, geom.d_min, geom.d_max, settings)


# -- periodic phase averages -------------------------------------------------


def _phase_average(func, geom, b, abs_scale):
    """<func(d(x, b)) sin(k x + k b)> over one period, periodic trapezoid with doubling.

    Returns (values, change) with ``change`` the last doubling difference.
    """
    b = np.atleast_1d(np.asarray(b, dtype=float))
    k = geom.k

    def avg(n):
        theta = 2.0 * math.pi * np.arange(n) / n
        phase = theta[None, :] + k * b[:, None]
        d = geom.L + geom.a1 * np.cos(phase) - geom.a2 * np.cos(theta)[None, :]
        return np.mean(func(d) * np.sin(phase), axis=1)

    n = 16
    prev = avg(n)
    while True:
        n *= 2
        cur = avg(n)
        change = float(np.max(np.abs(cur - prev)))
        if change <= PHASE_RTOL * abs_scale:
            return cur, change
        if n >= _MAX_TRAPEZOID:
            raise ConvergenceError("phase average did not converge", float(cur[0]), change)
        prev = cur


def _shape(b, values):
    return float(values[0]) if np.ndim(b) == 0 else values


def _sphere_force(geom, b, kind, settings):
    R = _require_radius(geom)
    table = _table(geom, kind, settings)
    scale = abs(float(table.energy(geom.L)))
    avg, change = _phase_average(table.energy, geom, b, scale)
    pre = -2.0 * math.pi * R * geom.a1 * geom.k
    err = abs(pre) * (change + table.energy_error)
    return pre * avg, err


def lateral_force_sphere(geom: CorrugatedGeometry, b, kind: MaterialKind, settings: QuadratureSettings = DEFAULT_SETTINGS):
    """Complete-PFA lateral force on the sphere in N at shift ``b`` (scalar or array)."""
    values, _ = _sphere_force(geom, b, kind, settings)
    return _shape(b, values)


def sphere_potential(geom: CorrugatedGeometry, b, kind: MaterialKind, settings: QuadratureSettings = DEFAULT_SETTINGS):
    """Derjaguin sphere-plate energy V(L, b) = 2 pi R <int_d^inf E(z) dz> in J."""
    R = _require_radius(geom)
    table = _table(geom, kind, settings)
    hi = geom.d_max
    anti = table.energy.integ(lbnd=hi)  # int_hi^d E
    # tail beyond the cached interval, z = hi / u
    tail, _ = integrate.quad(
        lambda u: energy_per_area(kind, hi / u, settings).value * hi / u**2,
        0.0, 1.0, epsrel=max(settings.rel_tolerance, 1e-10), limit=200,
    )
    bb = np.atleast_1d(np.asarray(b, dtype=float))
    n = 1024
    theta = 2.0 * math.pi * np.arange(n) / n
    d = geom.L + geom.a1 * np.cos(theta[None, :] + geom.k * bb[:, None]) - geom.a2 * np.cos(theta)[None, :]
    values = 2.0 * math.pi * R * (tail - np.mean(anti(d), axis=1))
    return _shape(b, values)


def averaged_energy(geom: CorrugatedGeometry, b, kind: MaterialKind, settings: QuadratureSettings = DEFAULT_SETTINGS):
    """Phase-averaged plate-pair energy per area in J/m^2."""
    if geom.a1 == 0 and geom.a2 == 0:
        return energy_per_area(kind, geom.L, settings).value
    table = _table(geom, kind, settings)
    bb = np.atleast_1d(np.asarray(b, dtype=float))
    n = 16
    prev = None
    while True:
        theta = 2.0 * math.pi * np.arange(n) / n
        d = geom.L + geom.a1 * np.cos(theta[None, :] + geom.k * bb[:, None]) - geom.a2 * np.cos(theta)[None, :]
        cur = np.mean(table.energy(d), axis=1)
        if prev is not None and np.max(np.abs(cur - prev)) <= PHASE_RTOL * np.max(np.abs(cur)):
            return _shape(b, cur)
        if n >= _MAX_TRAPEZOID:
            raise ConvergenceError("phase average did not converge", float(cur[0]), float(np.max(np.abs(cur - prev))))
        prev = cur
        n *= 2


def _plate_force(geom, b, kind, settings):
    table = _table(geom, kind, settings)
    scale = abs(float(table.pressure(geom.L)))
    avg, change = _phase_average(table.pressure, geom, b, scale)
    pre = geom.a1 * geom.k
    return pre * avg, pre * (change + table.pressure_error)


def lateral_force_plate(geom: CorrugatedGeometry, b, kind: MaterialKind, settings: QuadratureSettings = DEFAULT_SETTINGS):
    """Complete-PFA lateral force per unit area between corrugated plates in N/m^2."""
    values, _ = _plate_force(geom, b, kind, settings)
    return _shape(b, values)


# -- amplitudes ----------------------------------------------------------------


def linear_amplitude_sphere(geom: CorrugatedGeometry, kind: MaterialKind, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """Second-order amplitude pi R k a1 a2 P(L) in N."""
    R = _require_radius(geom)
    return math.pi * R * geom.k * geom.a1 * geom.a2 * pressure(kind, geom.L, settings).value


def linear_amplitude_sphere_error(geom, kind, settings=DEFAULT_SETTINGS) -> float:
    R = _require_radius(geom)
    return math.pi * R * geom.k * geom.a1 * geom.a2 * pressure(kind, geom.L, settings).est_error


def linear_amplitude_plate(geom: CorrugatedGeometry, kind: MaterialKind, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """Second-order amplitude per area (k a1 a2 / 2) |d2E/dL2| in N/m^2."""
    curv = energy_derivative(kind, geom.L, 2, settings).value
    return 0.5 * geom.k * geom.a1 * geom.a2 * abs(curv)


def linear_force_plate(geom, b, kind, settings=DEFAULT_SETTINGS):
    """Second-order lateral force per area, amplitude times sin(k b)."""
    return linear_amplitude_plate(geom, kind, settings) * np.sin(geom.k * np.asarray(b, dtype=float))


def _maximize(force, geom):
    lam = geom.lambda_c
    grid = lam * np.arange(SCAN_POINTS) / SCAN_POINTS
    values, err = force(grid)
    mags = np.abs(values)
    i = int(np.argmax(mags))
    if mags[i] == 0.0:
        return Amplitude(0.0, 0.0, float(np.max(err)))
    step = lam / SCAN_POINTS

    def objective(bb):
        return abs(float(force(np.array([bb]))[0][0]))

    b_best, amp = golden_section_max(objective, grid[i] - step, grid[i] + step, lam * 1e-6)
    b_best = b_best % lam
    _, err_best = force(np.array([b_best]))
    return Amplitude(amp, b_best, float(err_best[0]) if np.ndim(err_best) else float(err_best))


def complete_amplitude_sphere(geom: CorrugatedGeometry, kind: MaterialKind, settings: QuadratureSettings = DEFAULT_SETTINGS) -> Amplitude:
    """max over b of |lateral_force_sphere|: 64-point scan refined by golden section."""
    _require_radius(geom)
    if geom.a1 == 0 or geom.a2 == 0:
        return Amplitude(0.0, 0.0, 0.0)
    return _maximize(lambda bb: _sphere_force(geom, bb, kind, settings), geom)


def complete_amplitude_plate(geom: CorrugatedGeometry, kind: MaterialKind, settings: QuadratureSettings = DEFAULT_SETTINGS) -> Amplitude:
    if geom.a1 == 0 or geom.a2 == 0:
        return Amplitude(0.0, 0.0, 0.0)
    return _maximize(lambda bb: _plate_force(geom, bb, kind, settings), geom)


def first_harmonic_sphere(geom: CorrugatedGeometry, kind: MaterialKind, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """Coefficient of sin(k b) in the complete sphere force, in N."""
    b = geom.lambda_c * np.arange(SCAN_POINTS) / SCAN_POINTS
    values = np.atleast_1d(lateral_force_sphere(geom, b, kind, settings))
    return float(2.0 * np.mean(values * np.sin(geom.k * b)))


def higher_order_ratio(geom: CorrugatedGeometry, kind: MaterialKind, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """Complete over linear sphere amplitude."""
    linear = linear_amplitude_sphere(geom, kind, settings)
    if linear == 0.0:
        raise DomainError("higher-order ratio undefined: linear amplitude vanishes (a1 * a2 = 0)")
    return complete_amplitude_sphere(geom, kind, settings).value / linear


def calibrate_radius(geom: CorrugatedGeometry, kind: MaterialKind, target_linear_amplitude: float,
                     settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """Sphere radius R in m for which the linear amplitude equals the target (N)."""
    if not target_linear_amplitude > 0:
        raise DomainError(f"target amplitude must be positive, got {target_linear_amplitude!r}")
    if geom.a1 * geom.a2 == 0:
        raise DomainError("cannot calibrate radius: a1 * a2 = 0 gives no linear lateral force")
    return target_linear_amplitude / (math.pi * geom.k * geom.a1 * geom.a2 * pressure(kind, geom.L, settings).value)
