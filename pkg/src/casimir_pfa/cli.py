"""Command-line driver: ``casimir-pfa {pressure,lateral,collapse,calibrate-radius,verify}``.

Exit codes: 0 success, 2 configuration or input format error, 3 numerical
convergence failure, 4 internal invariant violation (including a report that
fails ``verify``).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, load_config
from .errors import ConvergenceError, DomainError, InvariantViolation
from .report import build_collapse_report, build_report, check_invariants, dumps, verify_report

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_INVARIANT = 0, 2, 3, 4

_HUMAN = [
    ("_per_m", 1e-6, "rad/um"),
    ("_m", 1e9, "nm"),
    ("_N", 1e12, "pN"),
]


def _unit(key, human):
    if not human:
        return 1.0, ""
    for suffix, factor, name in _HUMAN:
        if key.endswith(suffix):
            return factor, name
    return 1.0, ""


def _leaves(obj, prefix=""):
    if isinstance(obj, dict):
        if "value" in obj and "est_error" in obj:
            yield prefix, obj["value"], obj["est_error"]
            for key in sorted(set(obj) - {"value", "est_error"}):
                yield from _leaves(obj[key], f"{prefix}.{key}")
            return
        for key in sorted(obj):
            yield from _leaves(obj[key], f"{prefix}.{key}" if prefix else key)
    elif isinstance(obj, list):
        for i, item in enumerate(obj):
            yield from _leaves(item, f"{prefix}[{i}]")
    else:
        yield prefix, obj, None


def _last_key(path):
    return path.rsplit(".", 1)[-1].split("[")[0]


def render_text(report, human=False) -> str:
    lines = [f"# {report['command']}"]
    for path, value, err in _leaves(report["results"]):
        factor, unit = _unit(_last_key(path), human)
        if isinstance(value, float):
            text = f"{value * factor:.10g}"
            if err:
                text += f" +/- {err * factor:.2g}"
            if unit:
                text += f" {unit}"
        else:
            text = "null" if value is None else str(value)
        lines.append(f"{path}: {text}")
    return "\n".join(lines) + "\n"


def render_csv(report, human=False) -> str:
    results = report["results"]
    if report["command"] == "pressure":
        cols = ["energy_J_per_m2", "pressure_Pa", "dE_dL_Pa", "d2E_dL2_Pa_per_m"]
        lf, lu = _unit("L_m", human)
        header = [f"L{'_' + lu if lu else '_m'}"] + [f"{c},{c}_err" for c in cols]
        lines = [f"# material={results['material']}", "# " + ",".join(header)]
        for row in results["rows"]:
            cells = [f"{row['L_m'] * lf:.10g}"]
            for c in cols:
                cells += [f"{row[c]['value']:.10g}", f"{row[c]['est_error']:.3g}"]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"
    lines = ["# quantity,value,est_error,unit"]
    for path, value, err in _leaves(results):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            continue
        factor, unit = _unit(_last_key(path), human)
        lines.append(f"{path},{value * factor:.10g},{(err or 0.0) * factor:.3g},{unit}")
    return "\n".join(lines) + "\n"


def emit(report, fmt, human):
    if fmt == "json":
        return dumps(report)
    if fmt == "csv":
        return render_csv(report, human)
    return render_text(report, human)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv", "text"], default="text")
    common.add_argument("--units", choices=["si", "human"], default="si",
                        help="display units for text/csv output (JSON stays SI)")
    common.add_argument("--no-timestamp", action="store_true", help="omit generated_at for byte-identical reports")
    common.add_argument("-o", "--output", type=Path, help="write to file instead of stdout")

    parser = argparse.ArgumentParser(prog="casimir-pfa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pressure", parents=[common], help="plate-pair energy, pressure and derivatives")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--sweep", type=str, help="comma-separated separations in m (overrides sweep_L_m)")

    p = sub.add_parser("lateral", parents=[common], help="linear and complete PFA lateral force comparison")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--calibrate-target", type=float, help="linear amplitude in N used to calibrate R")

    p = sub.add_parser("calibrate-radius", parents=[common], help="sphere radius reproducing a linear amplitude")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--target", type=float, help="linear amplitude in N")

    p = sub.add_parser("collapse", parents=[common], help="kL collapse of deviation curves")
    p.add_argument("csv", nargs="+", type=Path)
    p.add_argument("--rescale", type=float, metavar="FACTOR")

    p = sub.add_parser("verify", help="recompute a JSON report and compare")
    p.add_argument("report", type=Path)
    return parser


def _with_overrides(cfg, args):
    if getattr(args, "sweep", None):
        try:
            sweep = tuple(float(v) for v in args.sweep.split(","))
        except ValueError as exc:
            raise ConfigError(f"--sweep: {exc}") from exc
        if not all(v > 0 for v in sweep):
            raise ConfigError("--sweep: separations must be positive")
        cfg = replace(cfg, sweep_L_m=sweep)
    target = getattr(args, "calibrate_target", None) or getattr(args, "target", None)
    if target is not None:
        if not target > 0:
            raise ConfigError("calibration target must be positive")
        raw = dict(cfg.raw)
        raw["calibration"] = {"target_linear_amplitude_N": target}
        cfg = replace(cfg, calibration_target_N=target, raw=raw)
    return cfg


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            report = json.loads(args.report.read_text(encoding="utf-8"))
            problems = verify_report(report)
            if problems:
                for line in problems:
                    print(line, file=sys.stderr)
                return EXIT_INVARIANT
            print(f"verified {args.report}: all values reproduced within stated errors")
            return EXIT_OK
        if args.command == "collapse":
            report = build_collapse_report([str(p) for p in args.csv], args.rescale, not args.no_timestamp)
        else:
            cfg = _with_overrides(load_config(args.config), args)
            report = build_report(args.command, cfg, args.config.parent, not args.no_timestamp)
            if args.command == "lateral":
                check_invariants(report["results"])
        text = emit(report, args.format, args.units == "human")
        if args.output:
            args.output.write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except InvariantViolation as exc:
        print(f"error: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
