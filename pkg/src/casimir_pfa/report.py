"""Report assembly for the CLI commands, plus re-computation for ``verify``."""

from __future__ import annotations

import json
import math
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import ConfigError, RunConfig, parse_config
from .constants import CODATA
from .corrugation import (
    complete_amplitude_sphere,
    calibrate_radius,
    first_harmonic_sphere,
    linear_amplitude_sphere,
)
from .deviation import (
    apply_deviation,
    collapse_check,
    load_csv,
    rescale_curve,
    rho_at,
    validity_diagnostics,
)
from .dielectric import PlasmaModel
from .errors import DomainError, InvariantViolation
from .lifshitz import energy_derivative, energy_per_area, ideal_energy, pressure
from .stats import compatibility_probability, one_sided_probability, sigma_from_ci, two_sided_quantile, z_score

SCHEMA = "casimir-pfa/report/1"
# quoted and computed p-values within this factor count as consistent
QUOTED_P_FACTOR = 1.25


def _num(value, err):
    return {"value": float(value), "est_error": float(err)}


def _provenance(cfg: RunConfig, timestamp: bool):
    prov = {
        "package_version": __version__,
        "constants": {"version": CODATA.version, "hbar_J_s": CODATA.hbar, "c_m_per_s": CODATA.c},
        "quadrature": {
            "rel_tolerance": cfg.quadrature.rel_tolerance,
            "abs_floor": cfg.quadrature.abs_floor,
            "max_subdivisions": cfg.quadrature.max_subdivisions,
        },
        "config_sha256": cfg.sha256,
    }
    if timestamp:
        prov["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return prov


def _envelope(command, cfg, results, timestamp, config_dir):
    return {
        "schema": SCHEMA,
        "command": command,
        "config": cfg.raw,
        "config_dir": str(config_dir),
        "results": results,
        "provenance": _provenance(cfg, timestamp),
    }


def pressure_results(cfg: RunConfig) -> dict:
    kind = cfg.material
    s = cfg.quadrature
    rows = []
    for L in cfg.sweep_L_m or (cfg.geometry.L_m,):
        e = energy_per_area(kind, L, s)
        p = pressure(kind, L, s)
        c = energy_derivative(kind, L, 2, s)
        row = {
            "L_m": L,
            "energy_J_per_m2": _num(e.value, e.est_error),
            "pressure_Pa": _num(p.value, p.est_error),
            "dE_dL_Pa": _num(p.value, p.est_error),
            "d2E_dL2_Pa_per_m": _num(c.value, c.est_error),
        }
        if isinstance(kind, PlasmaModel):
            ref = ideal_energy(L)
            row["reduction_factor"] = _num(e.value / ref, e.est_error / abs(ref))
        rows.append(row)
    return {"material": kind.label, "rows": rows}


def _radius(cfg: RunConfig):
    geom = cfg.corrugated()
    s = cfg.quadrature
    if geom.R is not None:
        return geom, {"value": geom.R, "est_error": 0.0, "source": "config"}
    if cfg.calibration_target_N is None:
        raise ConfigError("geometry.R_m: sphere radius required (or give calibration.target_linear_amplitude_N)")
    R = calibrate_radius(geom, cfg.material, cfg.calibration_target_N, s)
    p = pressure(cfg.material, geom.L, s)
    return geom.with_radius(R), {"value": R, "est_error": R * p.est_error / p.value, "source": "calibrated",
                                 "target_linear_amplitude_N": cfg.calibration_target_N}


def _statistics(cfg, theories):
    m = cfg.measurement
    sigma = sigma_from_ci(m)
    out = {
        "measurement": {"value_N": m.value, "ci_halfwidth_N": m.ci_halfwidth, "confidence": m.confidence},
        "z_quantile": two_sided_quantile(m.confidence),
        "sigma_N": sigma,
        "theories": [],
        "quoted": [],
    }
    for label, value, err in theories:
        p = compatibility_probability(m, value)
        p_err = max(abs(compatibility_probability(m, value + sign * err) - p) for sign in (1, -1))
        out["theories"].append({
            "label": label,
            "theory_N": value,
            "z": z_score(m, value),
            "p_two_sided": _num(p, p_err),
            "p_one_sided": _num(0.5 * p, 0.5 * p_err),
        })
    for q in cfg.quoted_probabilities:
        two = compatibility_probability(m, q.theory_N)
        one = one_sided_probability(m, q.theory_N)
        ok = any(abs(math.log(max(q.p, 1e-300) / max(c, 1e-300))) <= math.log(QUOTED_P_FACTOR) for c in (two, one))
        out["quoted"].append({
            "label": q.label,
            "theory_N": q.theory_N,
            "quoted_p": q.p,
            "computed_p_two_sided": two,
            "computed_p_one_sided": one,
            "status": "consistent" if ok else "discrepancy",
        })
    return out


def lateral_results(cfg: RunConfig) -> dict:
    kind = cfg.material
    s = cfg.quadrature
    geom, radius = _radius(cfg)
    p = pressure(kind, geom.L, s)
    linear = linear_amplitude_sphere(geom, kind, s)
    linear_err = linear * p.est_error / p.value if p.value else 0.0
    complete = complete_amplitude_sphere(geom, kind, s)
    results = {
        "material": kind.label,
        "geometry": {"L_m": geom.L, "lambda_c_m": geom.lambda_c, "a1_m": geom.a1, "a2_m": geom.a2, "k_rad_per_m": geom.k},
        "radius_m": radius,
        "linear_amplitude_N": _num(linear, linear_err),
        "complete_amplitude_N": _num(complete.value, complete.est_error),
        "b_max_m": _num(complete.b_max, geom.lambda_c * 1e-6),
    }
    if linear > 0:
        ratio = complete.value / linear
        results["higher_order_ratio"] = _num(ratio, ratio * (complete.est_error / complete.value + linear_err / linear))
        results["first_harmonic_N"] = _num(first_harmonic_sphere(geom, kind, s), complete.est_error)
    else:
        results["higher_order_ratio"] = {"value": None, "status": "undefined",
                                         "reason": "linear amplitude vanishes (a1 * a2 = 0)"}

    external = None
    if cfg.deviation_csv is not None:
        curve = load_csv(cfg.deviation_csv)
        rho = rho_at(curve, geom.k, geom.L)
        external = {"label": cfg.external_label, "source": "deviation_csv", "rho": rho,
                    "amplitude_N": _num(apply_deviation(rho, linear), rho * linear_err)}
    elif cfg.external_amplitude_N is not None:
        external = {"label": cfg.external_label, "source": "config",
                    "amplitude_N": _num(cfg.external_amplitude_N, 0.0)}
    results["external"] = external

    v = validity_diagnostics(geom, kind)
    results["validity"] = {
        "ratios": {name: value for name, value in {
            "a1/L": v.ratio_a1_L, "a2/L": v.ratio_a2_L,
            "a1/lambda_P": v.ratio_a1_lp, "a2/lambda_P": v.ratio_a2_lp,
            "a1/lambda_C": v.ratio_a1_lc, "a2/lambda_C": v.ratio_a2_lc,
            "L/lambda_C": v.ratio_L_lc}.items() if value is not None},
        "flags": v.flags,
        "warn_threshold": v.warn_threshold,
        "pfa_ratio_limit": v.pfa_ratio_limit,
        "pfa_note": v.pfa_note,
    }

    if cfg.measurement is not None:
        theories = [("linear_pfa", linear, linear_err), ("complete_pfa", complete.value, complete.est_error)]
        if external is not None:
            theories.append((external["label"], external["amplitude_N"]["value"], external["amplitude_N"]["est_error"]))
        results["statistics"] = _statistics(cfg, theories)
    return results


def calibrate_results(cfg: RunConfig) -> dict:
    if cfg.calibration_target_N is None:
        raise ConfigError("calibration.target_linear_amplitude_N: required for calibrate-radius")
    geom, radius = _radius(replace(cfg, geometry=replace(cfg.geometry, R_m=None)))
    return {"material": cfg.material.label, "L_m": geom.L, "radius_m": radius}


def collapse_results(paths, rescale=None) -> dict:
    curves = [load_csv(p) for p in paths]
    parts = [c for curve in curves for c in curve.by_separation()]
    results = {
        "curves": [{"label": c.label, "points": len(c.points),
                    "L_m": sorted({p[1] for p in c.points})} for c in curves],
        "spread": collapse_check(curves) if len(parts) >= 2 else None,
    }
    if rescale is not None:
        scaled = [rescale_curve(c, rescale) for c in curves]
        results["rescale_factor"] = rescale
        results["rescaled_points"] = [
            {"k_rad_per_m": k, "L_m": L, "kL": k * L, "rho": rho}
            for c in scaled for k, L, rho in c.points
        ]
        results["spread_with_rescaled"] = collapse_check(curves + scaled)
    return results


COMMANDS = {"pressure": pressure_results, "lateral": lateral_results, "calibrate-radius": calibrate_results}


def build_report(command, cfg, config_dir, timestamp=True) -> dict:
    return _envelope(command, cfg, COMMANDS[command](cfg), timestamp, Path(config_dir).resolve())


def build_collapse_report(paths, rescale=None, timestamp=True) -> dict:
    report = {
        "schema": SCHEMA,
        "command": "collapse",
        "inputs": [str(Path(p)) for p in paths],
        "rescale": rescale,
        "results": collapse_results(paths, rescale),
        "provenance": {"package_version": __version__},
    }
    if timestamp:
        report["provenance"]["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return report


def dumps(report) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


# -- verify --------------------------------------------------------------------


def _flatten(obj, prefix=""):
    """Yield (path, value, est_error) for every number in a results tree."""
    if isinstance(obj, dict):
        if "value" in obj and "est_error" in obj and isinstance(obj["value"], (int, float)):
            yield prefix, float(obj["value"]), float(obj["est_error"])
        for key in sorted(obj):
            if key in ("value", "est_error") and "est_error" in obj:
                continue
            yield from _flatten(obj[key], f"{prefix}.{key}" if prefix else key)
    elif isinstance(obj, list):
        for i, item in enumerate(obj):
            yield from _flatten(item, f"{prefix}[{i}]")
    elif isinstance(obj, (int, float)) and not isinstance(obj, bool):
        yield prefix, float(obj), 0.0


def verify_report(report: dict) -> list[str]:
    """Recompute a report and return mismatch descriptions (empty when it reproduces)."""
    if report.get("schema") != SCHEMA:
        raise ConfigError(f"verify: unsupported report schema {report.get('schema')!r}")
    command = report.get("command")
    if command == "collapse":
        fresh = collapse_results(report["inputs"], report.get("rescale"))
    elif command in COMMANDS:
        cfg = parse_config(report["config"], Path(report.get("config_dir", ".")))
        fresh = COMMANDS[command](cfg)
    else:
        raise ConfigError(f"verify: unknown command {command!r}")
    old = {path: (v, e) for path, v, e in _flatten(report["results"])}
    new = {path: (v, e) for path, v, e in _flatten(fresh)}
    problems = []
    for path in sorted(set(old) | set(new)):
        if path not in old or path not in new:
            problems.append(f"{path}: present in only one of stored/recomputed")
            continue
        (a, ea), (b, eb) = old[path], new[path]
        if abs(a - b) > ea + eb + 1e-12 * max(abs(a), abs(b)):
            problems.append(f"{path}: stored {a!r} vs recomputed {b!r} (allowed {ea + eb:.3g})")
    return problems


def check_invariants(results: dict) -> None:
    """Sanity relations that must hold in every lateral report."""
    ratio = results.get("higher_order_ratio", {}).get("value")
    if ratio is not None and not (math.isfinite(ratio) and ratio > 0):
        raise InvariantViolation(f"higher-order ratio not positive and finite: {ratio!r}")
    for key in ("linear_amplitude_N", "complete_amplitude_N"):
        if key in results and results[key]["value"] < 0:
            raise InvariantViolation(f"{key} negative")


__all__ = ["build_report", "build_collapse_report", "dumps", "verify_report", "DomainError"]
