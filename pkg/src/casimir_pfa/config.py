"""Run configuration: JSON file -> validated dataclasses (SI units throughout)."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .corrugation import CorrugatedGeometry
from .dielectric import IdealMetal, MaterialKind, PlasmaModel
from .errors import DomainError
from .lifshitz import QuadratureSettings
from .stats import Measurement


class ConfigError(DomainError):
    pass


@dataclass(frozen=True)
class GeometryConfig:
    L_m: float
    lambda_c_m: Optional[float] = None
    a1_m: Optional[float] = None
    a2_m: Optional[float] = None
    R_m: Optional[float] = None


@dataclass(frozen=True)
class QuotedProbability:
    theory_N: float
    p: float
    label: str = ""


@dataclass(frozen=True)
class RunConfig:
    material: MaterialKind
    geometry: GeometryConfig
    quadrature: QuadratureSettings = QuadratureSettings()
    measurement: Optional[Measurement] = None
    calibration_target_N: Optional[float] = None
    deviation_csv: Optional[Path] = None
    external_amplitude_N: Optional[float] = None
    external_label: str = "external"
    sweep_L_m: tuple = ()
    quoted_probabilities: tuple = ()
    raw: dict = field(default_factory=dict, compare=False)

    def corrugated(self, R: Optional[float] = None) -> CorrugatedGeometry:
        g = self.geometry
        missing = [n for n in ("lambda_c_m", "a1_m", "a2_m") if getattr(g, n) is None]
        if missing:
            raise ConfigError(f"geometry: missing field(s) {', '.join(missing)} required for corrugated geometry")
        try:
            return CorrugatedGeometry(g.L_m, g.lambda_c_m, g.a1_m, g.a2_m, R if R is not None else g.R_m)
        except DomainError as exc:
            raise ConfigError(f"geometry: {exc}") from exc

    @property
    def sha256(self) -> str:
        return config_hash(self.raw)


def config_hash(raw: dict) -> str:
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


_ALLOWED = {
    "": {"material", "geometry", "quadrature", "measurement", "calibration", "deviation_csv", "external", "sweep_L_m", "quoted_probabilities"},
    "material": {"kind", "lambda_p_m"},
    "geometry": {"L_m", "lambda_c_m", "a1_m", "a2_m", "R_m"},
    "quadrature": {"rel_tolerance", "max_subdivisions", "abs_floor"},
    "measurement": {"value_N", "ci_halfwidth_N", "confidence"},
    "calibration": {"target_linear_amplitude_N"},
    "external": {"amplitude_N", "label"},
}


def _section(data, name, required=False):
    value = data.get(name)
    if value is None:
        if required:
            raise ConfigError(f"{name}: required section missing")
        return None
    if not isinstance(value, dict):
        raise ConfigError(f"{name}: expected an object, got {type(value).__name__}")
    unknown = set(value) - _ALLOWED[name]
    if unknown:
        raise ConfigError(f"{name}: unknown field(s) {', '.join(sorted(unknown))}")
    return value


def _number(section, name, key, required=True, positive=False, nonneg=False):
    where = f"{name}.{key}"
    if key not in section or section[key] is None:
        if required:
            raise ConfigError(f"{where}: required field missing")
        return None
    v = section[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(f"{where}: must be finite")
    if positive and not v > 0:
        raise ConfigError(f"{where}: must be > 0, got {v!r}")
    if nonneg and not v >= 0:
        raise ConfigError(f"{where}: must be >= 0, got {v!r}")
    return v


def parse_config(data: dict, base_dir: Path = Path(".")) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level: expected a JSON object")
    unknown = set(data) - _ALLOWED[""]
    if unknown:
        raise ConfigError(f"top level: unknown field(s) {', '.join(sorted(unknown))}")

    mat = _section(data, "material", required=True)
    kind = mat.get("kind")
    if kind == "ideal":
        material = IdealMetal()
    elif kind == "plasma":
        material = PlasmaModel(_number(mat, "material", "lambda_p_m", positive=True))
    else:
        raise ConfigError(f"material.kind: expected 'ideal' or 'plasma', got {kind!r}")

    geo = _section(data, "geometry", required=True)
    geometry = GeometryConfig(
        L_m=_number(geo, "geometry", "L_m", positive=True),
        lambda_c_m=_number(geo, "geometry", "lambda_c_m", required=False, positive=True),
        a1_m=_number(geo, "geometry", "a1_m", required=False, nonneg=True),
        a2_m=_number(geo, "geometry", "a2_m", required=False, nonneg=True),
        R_m=_number(geo, "geometry", "R_m", required=False, positive=True),
    )
    if None not in (geometry.a1_m, geometry.a2_m) and not geometry.L_m > geometry.a1_m + geometry.a2_m:
        raise ConfigError("geometry.L_m: surfaces touch, need L_m > a1_m + a2_m")

    quad = _section(data, "quadrature") or {}
    defaults = QuadratureSettings()
    try:
        max_sub = quad.get("max_subdivisions", defaults.max_subdivisions)
        if isinstance(max_sub, bool) or not isinstance(max_sub, int):
            raise ConfigError(f"quadrature.max_subdivisions: expected an integer, got {max_sub!r}")
        rel = _number(quad, "quadrature", "rel_tolerance", required=False, positive=True)
        floor = _number(quad, "quadrature", "abs_floor", required=False, nonneg=True)
        settings = QuadratureSettings(
            rel_tolerance=defaults.rel_tolerance if rel is None else rel,
            abs_floor=defaults.abs_floor if floor is None else floor,
            max_subdivisions=max_sub,
        )
    except ConfigError:
        raise
    except DomainError as exc:
        raise ConfigError(f"quadrature: {exc}") from exc

    meas = _section(data, "measurement")
    measurement = None
    if meas is not None:
        try:
            measurement = Measurement(
                _number(meas, "measurement", "value_N"),
                _number(meas, "measurement", "ci_halfwidth_N", positive=True),
                _number(meas, "measurement", "confidence", required=False) or 0.95,
            )
        except ConfigError:
            raise
        except DomainError as exc:
            raise ConfigError(f"measurement: {exc}") from exc

    cal = _section(data, "calibration")
    target = _number(cal, "calibration", "target_linear_amplitude_N", positive=True) if cal else None

    ext = _section(data, "external")
    ext_amp = _number(ext, "external", "amplitude_N", nonneg=True) if ext else None
    ext_label = str(ext.get("label", "external")) if ext else "external"

    csv_path = data.get("deviation_csv")
    if csv_path is not None:
        if not isinstance(csv_path, str):
            raise ConfigError("deviation_csv: expected a path string")
        csv_path = Path(csv_path)
        if not csv_path.is_absolute():
            csv_path = base_dir / csv_path

    sweep = data.get("sweep_L_m", [])
    if not isinstance(sweep, list):
        raise ConfigError("sweep_L_m: expected a list of separations")
    sweep = tuple(_number({"v": v}, f"sweep_L_m[{i}]", "v", positive=True) for i, v in enumerate(sweep))

    quoted = []
    for i, q in enumerate(data.get("quoted_probabilities", [])):
        where = f"quoted_probabilities[{i}]"
        if not isinstance(q, dict) or set(q) - {"theory_N", "p", "label"}:
            raise ConfigError(f"{where}: expected an object with theory_N, p and optional label")
        p = _number(q, where, "p")
        if not 0 <= p <= 1:
            raise ConfigError(f"{where}.p: must lie in [0, 1]")
        quoted.append(QuotedProbability(_number(q, where, "theory_N"), p, str(q.get("label", ""))))

    return RunConfig(
        material=material,
        geometry=geometry,
        quadrature=settings,
        measurement=measurement,
        calibration_target_N=target,
        deviation_csv=csv_path,
        external_amplitude_N=ext_amp,
        external_label=ext_label,
        sweep_L_m=sweep,
        quoted_probabilities=tuple(quoted),
        raw=data,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    try:
        return parse_config(data, path.parent)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
