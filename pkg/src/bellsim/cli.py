"""Command-line front end: reproducible, machine-readable CHSH computations."""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from .chsh import (
    InternalConsistencyError,
    MeasurementSettings,
    aligned_settings,
    chsh_quantum,
    correlator_table,
    chsh_value,
    optimize_settings,
    optimize_settings_traced,
    settings_from_polar,
    singlet_optimal_settings,
    werner_threshold,
)
from .lhv import (
    LhvModel,
    classical_bound_exhaustive,
    deterministic_chsh_values,
    lhv_correlators_exact,
    pattern_label,
    RESPONSE_PATTERNS,
    sample_lhv_experiment,
    sample_quantum_experiment,
    write_trial_log,
)
from .observables import PolarAngles, UnitVector3, to_polar
from .states import DensityMatrix, make_singlet, make_werner

#: Shape of every machine-readable JSON report.
REPORT_SCHEMA = {
    "type": "object",
    "required": ["command", "inputs", "results", "diagnostics"],
    "properties": {
        "command": {"enum": ["chsh", "optimize", "werner-sweep", "lhv", "sample"]},
        "inputs": {"type": "object"},
        "results": {"type": "object"},
        "diagnostics": {"type": "object"},
    },
    "additionalProperties": False,
}

SETTINGS_PRESETS = {
    "optimal": singlet_optimal_settings,
    "aligned": aligned_settings,
}

_DEFAULTS = {
    "format": "json",
    "seed": 0,
    "state": "singlet",
    "theta_divisions": 24,
    "phi_divisions": 48,
    "restarts": 3,
    "p_min": 0.0,
    "p_max": 1.0,
    "points": 41,
    "bisection_tol": 1e-6,
}

_CONFIG_KEYS = frozenset(
    [
        "format",
        "out",
        "seed",
        "state",
        "preset",
        "trials",
        "trial_log",
        "theta_divisions",
        "phi_divisions",
        "restarts",
        "p_min",
        "p_max",
        "points",
    ]
)


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved invocation; every field is validated before computation."""

    command: str
    fmt: str
    out: Path | None
    seed: int
    state: str | None = None
    preset: str | None = None
    angles: tuple[tuple[float, float], ...] | None = None
    trials: int | None = None
    trial_log: Path | None = None
    theta_divisions: int = 24
    phi_divisions: int = 48
    restarts: int = 3
    p_min: float = 0.0
    p_max: float = 1.0
    points: int = 41
    exhaustive: bool = False
    weights: tuple[float, ...] | None = None


# --- parsing and resolution --------------------------------------------------


def _parse_config_file(path: Path) -> dict:
    """Flat key=value file; '#' starts a comment, dashes and underscores mix."""
    values: dict = {}
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValueError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = _parse_config_value(value.strip())
    return values


def _parse_config_value(text: str):
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "'\"":
        return text[1:-1]
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def _resolve(args: argparse.Namespace, config: dict, key: str):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return _DEFAULTS.get(key)


def parse_state_spec(spec: str) -> DensityMatrix:
    """Build the state named by 'singlet' or 'werner:P'."""
    if spec == "singlet":
        return make_singlet()
    if spec.startswith("werner:"):
        try:
            p = float(spec.split(":", 1)[1])
        except ValueError as exc:
            raise ValueError(f"bad visibility in state spec {spec!r}") from exc
        return make_werner(p)
    raise ValueError(f"unknown state spec {spec!r}; use 'singlet' or 'werner:P'")


def _resolve_settings(cfg: RunConfig) -> MeasurementSettings:
    if cfg.preset is not None and cfg.angles is not None:
        raise ValueError("give either --preset or explicit angles, not both")
    if cfg.preset is not None:
        try:
            return SETTINGS_PRESETS[cfg.preset]()
        except KeyError as exc:
            raise ValueError(f"unknown settings preset {cfg.preset!r}") from exc
    if cfg.angles is not None:
        return settings_from_polar([PolarAngles(t, p) for t, p in cfg.angles])
    raise ValueError("specify --preset or all of --a1 --a2 --b1 --b2 (theta phi in radians)")


def _collect_angles(args: argparse.Namespace) -> tuple[tuple[float, float], ...] | None:
    pairs = [getattr(args, name) for name in ("a1", "a2", "b1", "b2")]
    given = [p for p in pairs if p is not None]
    if not given:
        return None
    if len(given) != 4:
        raise ValueError("explicit settings need all four of --a1 --a2 --b1 --b2")
    return tuple((float(t), float(p)) for t, p in pairs)


def _config_for(args: argparse.Namespace) -> RunConfig:
    config = _parse_config_file(args.config) if getattr(args, "config", None) else {}
    fmt = _resolve(args, config, "format")
    if fmt not in ("json", "csv"):
        raise ValueError(f"unknown output format {fmt!r}")
    out = _resolve(args, config, "out")
    trial_log = _resolve(args, config, "trial_log")
    return RunConfig(
        command=args.command,
        fmt=fmt,
        out=Path(out) if out is not None else None,
        seed=int(_resolve(args, config, "seed")),
        state=_resolve(args, config, "state"),
        preset=_resolve(args, config, "preset"),
        angles=_collect_angles(args) if hasattr(args, "a1") else None,
        trials=_maybe_int(_resolve(args, config, "trials")),
        trial_log=Path(trial_log) if trial_log is not None else None,
        theta_divisions=int(_resolve(args, config, "theta_divisions")),
        phi_divisions=int(_resolve(args, config, "phi_divisions")),
        restarts=int(_resolve(args, config, "restarts")),
        p_min=float(_resolve(args, config, "p_min")),
        p_max=float(_resolve(args, config, "p_max")),
        points=int(_resolve(args, config, "points")),
        exhaustive=bool(getattr(args, "exhaustive", False)),
        weights=tuple(args.weights) if getattr(args, "weights", None) is not None else None,
    )


def _maybe_int(value) -> int | None:
    return None if value is None else int(value)


# --- report plumbing ----------------------------------------------------------


def _fmt9(x: float) -> str:
    return f"{x:.9g}"


def _sanitize(obj):
    """Make a report strictly JSON-serializable; non-finite floats become null."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _csv_scalar(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _flatten(obj, prefix: str = ""):
    if isinstance(obj, dict):
        rows = []
        for k, v in obj.items():
            rows.extend(_flatten(v, f"{prefix}.{k}" if prefix else str(k)))
        return rows
    if isinstance(obj, (list, tuple)):
        rows = []
        for i, v in enumerate(obj):
            rows.extend(_flatten(v, f"{prefix}[{i}]"))
        return rows
    return [(prefix, _csv_scalar(obj))]


def _csv_keyvalue(report: dict) -> str:
    lines = ["key,value"]
    lines.extend(f"{k},{v}" for k, v in _flatten(_sanitize(report)))
    return "\n".join(lines) + "\n"


def _machine_text(cfg: RunConfig, report: dict, csv_text: str | None) -> str:
    if cfg.fmt == "json":
        return json.dumps(_sanitize(report), indent=2, allow_nan=False) + "\n"
    return csv_text if csv_text is not None else _csv_keyvalue(report)


def _direction_dict(v: UnitVector3) -> dict:
    ang = to_polar(v)
    return {"theta": ang.theta, "phi": ang.phi, "x": v.x, "y": v.y, "z": v.z}


def _settings_dict(s: MeasurementSettings) -> dict:
    return {
        "a1": _direction_dict(s.a1),
        "a2": _direction_dict(s.a2),
        "b1": _direction_dict(s.b1),
        "b2": _direction_dict(s.b2),
    }


def _estimate_dict(estimate) -> dict:
    return {
        "table": estimate.table.as_dict(),
        "counts": list(estimate.counts),
        "std_errors": list(estimate.std_errors),
        "s_estimate": estimate.s_estimate,
        "s_std_error": estimate.s_std_error,
    }


def _bound_lines(s: float) -> list[str]:
    return [
        f"S   = {_fmt9(s)}",
        f"|S| = {_fmt9(abs(s))}",
        f"violates classical bound (|S| > 2): {'yes' if abs(s) > 2.0 + 1e-12 else 'no'}",
        f"within Tsirelson bound (2*sqrt(2)): {'yes' if abs(s) <= 2.0 * math.sqrt(2.0) + 1e-8 else 'no'}",
    ]


# --- commands -----------------------------------------------------------------


def _run_chsh(cfg: RunConfig):
    rho = parse_state_spec(cfg.state)
    settings = _resolve_settings(cfg)
    table = correlator_table(rho, settings)
    result = chsh_quantum(rho, settings)
    report = {
        "command": "chsh",
        "inputs": {
            "state": cfg.state,
            "preset": cfg.preset,
            "settings": _settings_dict(settings),
            "seed": cfg.seed,
        },
        "results": {
            "correlators": table.as_dict(),
            "s_value": result.s_value,
            "abs_s": abs(result.s_value),
            "violates_classical": result.violates_classical,
            "within_tsirelson": result.within_tsirelson,
        },
        "diagnostics": {},
    }
    human = [f"chsh  state={cfg.state}"]
    human.extend(f"{k} = {_fmt9(v)}" for k, v in table.as_dict().items())
    human.extend(_bound_lines(result.s_value))
    return report, human, None


def _run_optimize(cfg: RunConfig):
    rho = parse_state_spec(cfg.state)
    result, trace_info = optimize_settings_traced(
        rho,
        theta_divisions=cfg.theta_divisions,
        phi_divisions=cfg.phi_divisions,
        random_starts=cfg.restarts,
        seed=cfg.seed,
    )
    report = {
        "command": "optimize",
        "inputs": {
            "state": cfg.state,
            "seed": cfg.seed,
            "theta_divisions": cfg.theta_divisions,
            "phi_divisions": cfg.phi_divisions,
            "restarts": cfg.restarts,
        },
        "results": {
            "s_value": result.s_value,
            "abs_s": abs(result.s_value),
            "violates_classical": result.violates_classical,
            "within_tsirelson": result.within_tsirelson,
            "settings": _settings_dict(result.settings),
        },
        "diagnostics": {
            "starts": trace_info.starts,
            "grid_sweeps": trace_info.grid_sweeps,
            "grid_evaluations": trace_info.grid_evaluations,
            "refine_evaluations": trace_info.refine_evaluations,
            "surrogate_s": trace_info.surrogate_s,
        },
    }
    human = [f"optimize  state={cfg.state}"]
    human.extend(_bound_lines(result.s_value))
    for name, v in (("a1", result.settings.a1), ("a2", result.settings.a2),
                    ("b1", result.settings.b1), ("b2", result.settings.b2)):
        ang = to_polar(v)
        human.append(f"{name}: theta = {_fmt9(ang.theta)}, phi = {_fmt9(ang.phi)}")
    human.append(
        f"search: {trace_info.starts} starts, {trace_info.grid_sweeps} grid sweeps, "
        f"{trace_info.refine_evaluations} refinement evaluations"
    )
    return report, human, None


def _run_werner_sweep(cfg: RunConfig):
    if cfg.points < 2:
        raise ValueError(f"sweep needs at least 2 points, got {cfg.points}")
    if not (-1.0 / 3.0 <= cfg.p_min < cfg.p_max <= 1.0):
        raise ValueError(f"sweep range [{cfg.p_min}, {cfg.p_max}] must sit inside [-1/3, 1]")
    optimizer_kwargs = dict(
        theta_divisions=cfg.theta_divisions,
        phi_divisions=cfg.phi_divisions,
        random_starts=cfg.restarts,
        seed=cfg.seed,
    )

    def max_s(p: float) -> float:
        return optimize_settings(make_werner(p), **optimizer_kwargs).s_value

    rows = []
    step = (cfg.p_max - cfg.p_min) / (cfg.points - 1)
    for i in range(cfg.points):
        p = cfg.p_min + i * step
        s = max_s(p)
        rows.append({"p": p, "max_s": s, "violates": abs(s) > 2.0 + 1e-12})
    threshold = werner_threshold(tol=_DEFAULTS["bisection_tol"], **optimizer_kwargs)
    s_at_threshold = max_s(threshold)
    threshold_row = {
        "p": threshold,
        "max_s": s_at_threshold,
        "violates": abs(s_at_threshold) > 2.0 + 1e-12,
    }
    report = {
        "command": "werner-sweep",
        "inputs": {
            "p_min": cfg.p_min,
            "p_max": cfg.p_max,
            "points": cfg.points,
            "seed": cfg.seed,
            "theta_divisions": cfg.theta_divisions,
            "phi_divisions": cfg.phi_divisions,
            "restarts": cfg.restarts,
        },
        "results": {"rows": rows, "threshold": threshold, "threshold_row": threshold_row},
        "diagnostics": {"bisection_tol": _DEFAULTS["bisection_tol"]},
    }
    csv_lines = ["p,max_s,violates"]
    for row in rows + [threshold_row]:
        csv_lines.append(
            f"{row['p']!r},{row['max_s']!r},{_csv_scalar(row['violates'])}"
        )
    human = [
        f"werner-sweep  {cfg.points} points on [{_fmt9(cfg.p_min)}, {_fmt9(cfg.p_max)}]",
        f"threshold p* = {_fmt9(threshold)}  (max S there = {_fmt9(s_at_threshold)})",
        f"max S at p = {_fmt9(rows[-1]['p'])}: {_fmt9(rows[-1]['max_s'])}",
    ]
    return report, human, "\n".join(csv_lines) + "\n"


def _resolve_lhv_model(cfg: RunConfig) -> tuple[LhvModel, str]:
    if cfg.preset is not None:
        if cfg.preset != "uniform16":
            raise ValueError(f"unknown model preset {cfg.preset!r}")
        return LhvModel.uniform16(), "uniform16"
    return LhvModel.from_pattern_weights(cfg.weights), "weights"


def _run_lhv(cfg: RunConfig):
    chosen = sum([cfg.exhaustive, cfg.preset is not None, cfg.weights is not None])
    if chosen != 1:
        raise ValueError("give exactly one of --exhaustive, --preset, or --weights")
    if cfg.exhaustive:
        if cfg.trials is not None:
            raise ValueError("--exhaustive does not take --trials")
        values = deterministic_chsh_values()
        bound = classical_bound_exhaustive()
        report = {
            "command": "lhv",
            "inputs": {"model": "exhaustive", "seed": cfg.seed},
            "results": {
                "classical_bound": bound,
                "pattern_labels": [pattern_label(p) for p in RESPONSE_PATTERNS],
                "pattern_values": list(values),
            },
            "diagnostics": {"patterns": len(values)},
        }
        human = [
            "lhv exhaustive enumeration of deterministic strategies",
            f"classical bound max|S| = {_fmt9(bound)}",
            "per-pattern S values: " + " ".join(_fmt9(v) for v in values),
        ]
        return report, human, None

    model, model_name = _resolve_lhv_model(cfg)
    table = lhv_correlators_exact(model)
    s = chsh_value(table)
    results = {
        "exact_table": table.as_dict(),
        "s_value": s,
        "abs_s": abs(s),
        "estimate": None,
    }
    human = [f"lhv  model={model_name}"]
    human.extend(f"{k} = {_fmt9(v)}" for k, v in table.as_dict().items())
    human.append(f"S   = {_fmt9(s)}")
    diagnostics: dict = {"labels": list(model.labels)}
    if cfg.trials is not None:
        estimate, records = sample_lhv_experiment(model, cfg.trials, cfg.seed)
        results["estimate"] = _estimate_dict(estimate)
        diagnostics["trial_log"] = _write_log_if_requested(cfg, records)
        human.append(
            f"sampled S = {_fmt9(estimate.s_estimate)} +- {_fmt9(estimate.s_std_error)} "
            f"({cfg.trials} trials, seed {cfg.seed})"
        )
    report = {
        "command": "lhv",
        "inputs": {
            "model": model_name,
            "weights": list(model.weights),
            "trials": cfg.trials,
            "seed": cfg.seed,
        },
        "results": results,
        "diagnostics": diagnostics,
    }
    return report, human, None


def _run_sample(cfg: RunConfig):
    if cfg.trials is None:
        raise ValueError("sample requires --trials")
    if cfg.trials < 1:
        raise ValueError(f"--trials must be >= 1, got {cfg.trials}")
    rho = parse_state_spec(cfg.state)
    settings = _resolve_settings(cfg)
    exact = correlator_table(rho, settings)
    estimate, records = sample_quantum_experiment(exact, cfg.trials, cfg.seed)
    log_path = _write_log_if_requested(cfg, records)
    report = {
        "command": "sample",
        "inputs": {
            "state": cfg.state,
            "preset": cfg.preset,
            "settings": _settings_dict(settings),
            "trials": cfg.trials,
            "seed": cfg.seed,
        },
        "results": {
            "exact_table": exact.as_dict(),
            "exact_s": chsh_value(exact),
            "estimate": _estimate_dict(estimate),
        },
        "diagnostics": {"trial_log": log_path},
    }
    human = [
        f"sample  state={cfg.state}  trials={cfg.trials}  seed={cfg.seed}",
        f"exact S     = {_fmt9(chsh_value(exact))}",
        f"estimated S = {_fmt9(estimate.s_estimate)} +- {_fmt9(estimate.s_std_error)}",
        "per-pair trials: " + " ".join(str(n) for n in estimate.counts),
    ]
    if log_path:
        human.append(f"trial log written to {log_path}")
    return report, human, None


def _write_log_if_requested(cfg: RunConfig, records) -> str | None:
    if cfg.trial_log is None:
        return None
    buffer = io.StringIO()
    write_trial_log(records, buffer)
    cfg.trial_log.write_text(buffer.getvalue())
    return str(cfg.trial_log)


_RUNNERS = {
    "chsh": _run_chsh,
    "optimize": _run_optimize,
    "werner-sweep": _run_werner_sweep,
    "lhv": _run_lhv,
    "sample": _run_sample,
}


# --- argument parsing -----------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["json", "csv"], default=None,
                   help="machine report format (default json)")
    p.add_argument("--out", default=None, help="write the machine report to this file")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
    p.add_argument("--config", type=Path, default=None,
                   help="key=value config file; explicit flags win")


def _add_state(p: argparse.ArgumentParser) -> None:
    p.add_argument("--state", default=None, help="'singlet' or 'werner:P' (default singlet)")


def _add_settings(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", default=None, choices=sorted(SETTINGS_PRESETS),
                   help="named measurement quadruple")
    for name in ("a1", "a2", "b1", "b2"):
        p.add_argument(f"--{name}", nargs=2, type=float, default=None,
                       metavar=("THETA", "PHI"), help=f"polar angles of {name} in radians")


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--theta-divisions", type=int, default=None, help="grid points in theta (default 24)")
    p.add_argument("--phi-divisions", type=int, default=None, help="grid points in phi (default 48)")
    p.add_argument("--restarts", type=int, default=None, help="random search restarts (default 3)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellsim",
        description="Two-qubit CHSH calculations: quantum correlators, bound "
                    "searches, and local hidden-variable simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chsh", help="evaluate the CHSH value at fixed settings")
    _add_state(p)
    _add_settings(p)
    _add_common(p)

    p = sub.add_parser("optimize", help="maximize |S| over measurement directions")
    _add_state(p)
    _add_grid(p)
    _add_common(p)

    p = sub.add_parser("werner-sweep", help="max |S| across Werner visibilities plus the violation threshold")
    p.add_argument("--p-min", dest="p_min", type=float, default=None, help="sweep start (default 0)")
    p.add_argument("--p-max", dest="p_max", type=float, default=None, help="sweep end (default 1)")
    p.add_argument("--points", type=int, default=None, help="sweep points (default 41)")
    _add_grid(p)
    _add_common(p)

    p = sub.add_parser("lhv", help="exact and sampled hidden-variable statistics")
    p.add_argument("--exhaustive", action="store_true",
                   help="enumerate all 16 deterministic strategies and report max |S|")
    p.add_argument("--preset", default=None, choices=["uniform16"], help="named model")
    p.add_argument("--weights", nargs=16, type=float, default=None,
                   metavar="W", help="16 normalized pattern weights")
    p.add_argument("--trials", type=int, default=None, help="also sample this many trials")
    p.add_argument("--trial-log", dest="trial_log", default=None, help="write sampled trials as CSV")
    _add_common(p)

    p = sub.add_parser("sample", help="finite-statistics experiment on a quantum correlator table")
    _add_state(p)
    _add_settings(p)
    p.add_argument("--trials", type=int, default=None, help="number of trials (required)")
    p.add_argument("--trial-log", dest="trial_log", default=None, help="write sampled trials as CSV")
    _add_common(p)

    return parser


def _emit(machine_text: str, human_lines: list[str], out: Path | None) -> None:
    if out is not None:
        out.write_text(machine_text)
        for line in human_lines:
            print(line)
    else:
        sys.stdout.write(machine_text)
        for line in human_lines:
            print(line, file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config_for(args)
        report, human, csv_text = _RUNNERS[cfg.command](cfg)
        _emit(_machine_text(cfg, report, csv_text), human, cfg.out)
        return 0
    except InternalConsistencyError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
