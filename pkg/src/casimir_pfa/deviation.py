"""Beyond-PFA deviation curves rho(k, L): ingestion, kL collapse, rescaling, validity checks."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .corrugation import CorrugatedGeometry
from .dielectric import IdealMetal, MaterialKind
from .errors import DomainError

CSV_HEADER = ("k_rad_per_m", "L_m", "rho")
DEFAULT_WARN_THRESHOLD = 0.1
# "L several times less than lambda_C"
DEFAULT_PFA_RATIO_LIMIT = 1.0 / 3.0
_U_RTOL = 1e-12


class CsvFormatError(DomainError):
    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


@dataclass(frozen=True)
class DeviationCurve:
    points: tuple  # of (k [1/m], L [m], rho)
    label: str = ""

    def __post_init__(self):
        pts = tuple((float(k), float(L), float(r)) for k, L, r in self.points)
        seen = set()
        for k, L, r in pts:
            if not (k > 0 and L > 0):
                raise DomainError(f"curve {self.label!r}: k and L must be positive, got ({k}, {L})")
            if not r > 0:
                raise DomainError(f"curve {self.label!r}: rho must be positive, got {r}")
            if (k, L) in seen:
                raise DomainError(f"curve {self.label!r}: duplicate (k, L) = ({k}, {L})")
            seen.add((k, L))
        object.__setattr__(self, "points", pts)

    def by_separation(self) -> list["DeviationCurve"]:
        """Split into single-L curves, ordered by L."""
        groups = defaultdict(list)
        for p in self.points:
            groups[p[1]].append(p)
        if len(groups) == 1:
            return [self]
        return [DeviationCurve(tuple(groups[L]), f"{self.label}@L={L:.6g}") for L in sorted(groups)]


def load_csv(path) -> DeviationCurve:
    """Read a deviation curve; header ``k_rad_per_m,L_m,rho`` required, '#' lines ignored."""
    path = Path(path)
    points = []
    header_seen = False
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CsvFormatError(path, 0, f"cannot read file: {exc}") from exc
    for lineno, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in row]
        if not header_seen:
            if tuple(cells) != CSV_HEADER:
                raise CsvFormatError(path, lineno, f"expected header {','.join(CSV_HEADER)!r}, got {','.join(cells)!r}")
            header_seen = True
            continue
        if len(cells) != 3:
            raise CsvFormatError(path, lineno, f"expected 3 fields, got {len(cells)}")
        try:
            k, L, rho = (float(c) for c in cells)
        except ValueError as exc:
            raise CsvFormatError(path, lineno, f"not a decimal number: {exc}") from exc
        if not all(math.isfinite(v) for v in (k, L, rho)):
            raise CsvFormatError(path, lineno, "non-finite value")
        if not (k > 0 and L > 0 and rho > 0):
            raise CsvFormatError(path, lineno, "k, L and rho must be positive")
        points.append((k, L, rho))
    if not header_seen:
        raise CsvFormatError(path, 1, f"missing header {','.join(CSV_HEADER)!r}")
    if not points:
        raise CsvFormatError(path, 1, "no data rows")
    try:
        return DeviationCurve(tuple(points), path.stem)
    except DomainError as exc:
        raise CsvFormatError(path, 0, str(exc)) from exc


def _curve_function(curve):
    pts = sorted((k * L, rho) for k, L, rho in curve.points)
    u = np.array([p[0] for p in pts])
    rho = np.array([p[1] for p in pts])
    if u.size == 1:
        return u[0], u[0], lambda uu: np.full(np.shape(uu), rho[0])
    if np.any(np.diff(u) <= 0):
        raise DomainError(f"curve {curve.label!r}: repeated kL value")
    interp = PchipInterpolator(np.log(u), rho)
    lo, hi = u[0], u[-1]
    return lo, hi, lambda uu: interp(np.log(np.clip(uu, lo, hi)))


def collapse_check(curves) -> float:
    """Largest relative spread (max rho - min rho) / mean rho on the shared kL grid.

    Curves holding several separations are split by L first.  Zero means the
    curves coincide as functions of kL.
    """
    parts = [c for curve in curves for c in curve.by_separation()]
    if len(parts) < 2:
        raise DomainError("collapse check needs curves at two or more separations")
    fns = [_curve_function(c) for c in parts]
    lo = max(f[0] for f in fns)
    hi = min(f[1] for f in fns)
    if lo > hi * (1.0 + _U_RTOL):
        raise DomainError(f"curves share no kL range (overlap would be [{lo:.6g}, {hi:.6g}])")
    hi = max(hi, lo)
    grid = sorted({lo, hi, *(k * L for c in parts for k, L, _ in c.points if lo <= k * L <= hi)})
    grid = np.array(grid)
    values = np.array([f[2](grid) for f in fns])
    spread = (values.max(axis=0) - values.min(axis=0)) / values.mean(axis=0)
    return float(spread.max())


def rescale_point(point, factor: float):
    """(k, L, rho) -> (k / s, s L, rho): kL is unchanged, so is rho."""
    if not factor > 0:
        raise DomainError(f"rescale factor must be positive, got {factor!r}")
    k, L, rho = point
    return (k / factor, factor * L, rho)


def rescale_curve(curve: DeviationCurve, factor: float) -> DeviationCurve:
    return DeviationCurve(tuple(rescale_point(p, factor) for p in curve.points), f"{curve.label}x{factor:g}")


def apply_deviation(rho: float, pfa_amplitude: float) -> float:
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho!r}")
    return rho * pfa_amplitude


@dataclass(frozen=True)
class ValidityReport:
    ratio_a1_L: float
    ratio_a2_L: float
    ratio_a1_lp: Optional[float]
    ratio_a2_lp: Optional[float]
    ratio_a1_lc: float
    ratio_a2_lc: float
    ratio_L_lc: float
    warn_threshold: float
    pfa_ratio_limit: float
    flags: dict = field(default_factory=dict)
    pfa_note: str = ""

    @property
    def violations(self) -> list[str]:
        return [name for name, flag in self.flags.items() if flag == "warn"]


def validity_diagnostics(geom: CorrugatedGeometry, model: MaterialKind,
                         warn_threshold: float = DEFAULT_WARN_THRESHOLD,
                         pfa_ratio_limit: float = DEFAULT_PFA_RATIO_LIMIT) -> ValidityReport:
    """Small-parameter ratios of the perturbative beyond-PFA expansion, flagged against ``warn_threshold``.

    For an ideal metal there is no plasma wavelength and those ratios are None.
    """
    ideal = isinstance(model, IdealMetal)
    ratios = {
        "a1/L": geom.a1 / geom.L,
        "a2/L": geom.a2 / geom.L,
        "a1/lambda_P": None if ideal else geom.a1 / model.lambda_p,
        "a2/lambda_P": None if ideal else geom.a2 / model.lambda_p,
        "a1/lambda_C": geom.a1 / geom.lambda_c,
        "a2/lambda_C": geom.a2 / geom.lambda_c,
    }
    flags = {name: ("warn" if value > warn_threshold else "pass") for name, value in ratios.items() if value is not None}
    L_lc = geom.L / geom.lambda_c
    flags["L/lambda_C"] = "pass" if L_lc <= pfa_ratio_limit else "warn"
    if flags["L/lambda_C"] == "pass":
        note = f"L/lambda_C = {L_lc:.3f} <= {pfa_ratio_limit:.3g}: separation several times below the corrugation period, PFA expected accurate"
    else:
        note = f"L/lambda_C = {L_lc:.3f} > {pfa_ratio_limit:.3g}: PFA may underestimate the lateral force amplitude"
    return ValidityReport(
        ratio_a1_L=ratios["a1/L"],
        ratio_a2_L=ratios["a2/L"],
        ratio_a1_lp=ratios["a1/lambda_P"],
        ratio_a2_lp=ratios["a2/lambda_P"],
        ratio_a1_lc=ratios["a1/lambda_C"],
        ratio_a2_lc=ratios["a2/lambda_C"],
        ratio_L_lc=L_lc,
        warn_threshold=warn_threshold,
        pfa_ratio_limit=pfa_ratio_limit,
        flags=flags,
        pfa_note=note,
    )


def rho_at(curve: DeviationCurve, k: float, L: float) -> float:
    """Interpolate rho at kL from the single-L part of ``curve`` nearest to ``L`` covering kL."""
    u = k * L
    candidates = []
    for part in curve.by_separation():
        lo, hi, fn = _curve_function(part)
        if lo * (1 - _U_RTOL) <= u <= hi * (1 + _U_RTOL):
            candidates.append((abs(math.log(part.points[0][1] / L)), fn))
    if not candidates:
        raise DomainError(f"curve {curve.label!r} does not cover kL = {u:.6g}")
    return float(min(candidates, key=lambda c: c[0])[1](np.array([u]))[0])
