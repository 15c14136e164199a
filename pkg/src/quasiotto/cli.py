"""Command-line front end.

Every subcommand reads an optional flat YAML/JSON config file (``--config`` or
the ``QUASIOTTO_CONFIG`` environment variable); command-line flags override
file values. Outputs carry ``#``-prefixed metadata so each file can be re-run.
"""
from __future__ import annotations

import argparse
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import yaml

from . import __version__
from .dynmap import choi_margin_arrays, coefficient_arrays, evolve_state
from .engine import CycleSpec, multi_cycle
from .equilibrium import averaged_coefficients, ratio_from_coefficients, trace_distance_from_coefficients
from .errors import QuasiOttoError
from .lindblad import integrate_master_equation, rate_arrays
from .model import PARAM_KEYS, ModelParams, TruncationPolicy, truncation_level, validate_params
from .oracle import VARIANTS, reference_coefficient_arrays

CONFIG_ENV = "QUASIOTTO_CONFIG"
COMMANDS = ("coeffs", "evolve", "rates", "equilibrium", "engine", "oracle-check", "sweep")
STATES = {
    "ground": [[1, 0], [0, 0]],
    "excited": [[0, 0], [0, 1]],
    "plus": [[0.5, 0.5], [0.5, 0.5]],
    "minus": [[0.5, -0.5], [-0.5, 0.5]],
}

# key -> (type, default); a default of REQUIRED means the key must come from the file or a flag
REQUIRED = object()
MODEL_OPTIONS: Dict[str, tuple] = {
    "n_modes": (int, 1),
    "qubit_freq": (float, REQUIRED),
    "mode_freq": (float, REQUIRED),
    "coupling": (float, REQUIRED),
    "inv_temp": (float, REQUIRED),
}
POLICY_OPTIONS = {"tail_tolerance": (float, 1e-12), "max_level_cap": (int, 10_000)}
TIME_OPTIONS = {"t_max": (float, 20.0), "t_points": (int, 201)}
DELTA_OPTIONS = {"delta_min": (float, None), "delta_max": (float, None), "delta_points": (int, None)}
ENGINE_OPTIONS = {
    "omega_c": (float, 1.0),
    "omega_h": (float, 2.0),
    "gamma_c": (float, 1.0),
    "gamma_h": (float, 0.25),
    "x1": (float, 0.9),
    "runs": (int, 1),
    "n_modes": (int, 1),
    "coupling": (float, REQUIRED),
    "coupling_h": (float, None),
    "contact_time": (float, None),
}

COMMAND_OPTIONS: Dict[str, Dict[str, tuple]] = {
    "coeffs": {**MODEL_OPTIONS, **POLICY_OPTIONS, **TIME_OPTIONS},
    "evolve": {**MODEL_OPTIONS, **POLICY_OPTIONS, **TIME_OPTIONS, "state": (str, "plus"), "method": (str, "map")},
    "rates": {**MODEL_OPTIONS, **POLICY_OPTIONS, **TIME_OPTIONS},
    "equilibrium": {**MODEL_OPTIONS, **POLICY_OPTIONS, **DELTA_OPTIONS},
    "engine": {**ENGINE_OPTIONS, **POLICY_OPTIONS, **DELTA_OPTIONS},
    "oracle-check": {**MODEL_OPTIONS, **POLICY_OPTIONS, **TIME_OPTIONS,
                     "n_max": (int, None), "variant": (str, "full"), "tol": (float, 1e-8)},
    "sweep": {**ENGINE_OPTIONS, **POLICY_OPTIONS, **DELTA_OPTIONS,
              "target": (str, "engine"), "x1_values": (str, None), "n_modes_values": (str, None),
              "qubit_freq": (float, 1.0), "mode_freq": (float, 1.0), "inv_temp": (float, 1.0),
              "workers": (int, None)},
}
COMMAND_FORMATS = {cmd: ("csv",) for cmd in COMMANDS}
COMMAND_FORMATS["engine"] = ("json", "csv")


class ConfigError(QuasiOttoError, ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    options: Dict[str, Any]
    params: Optional[ModelParams] = None
    policy: TruncationPolicy = field(default_factory=TruncationPolicy)
    output: Optional[str] = None
    fmt: str = "csv"

    def grid(self, name: str) -> np.ndarray:
        if name == "t":
            n = self.options["t_points"]
            if n < 1 or self.options["t_max"] < 0:
                raise ConfigError("empty grid: t_points must be >= 1 and t_max >= 0")
            return np.linspace(0.0, self.options["t_max"], n)
        if name == "delta":
            lo, hi, n = (self.options[k] for k in ("delta_min", "delta_max", "delta_points"))
            if n is None and lo is None and hi is None:
                return np.array([self.options["coupling"]], dtype=float)
            if n is None or lo is None or hi is None:
                raise ConfigError("Delta sweep needs delta_min, delta_max and delta_points")
            if n < 1 or hi < lo:
                raise ConfigError("empty grid: Delta range has no points")
            return np.linspace(lo, hi, n)
        raise KeyError(name)


def _load_file(path: str) -> Dict[str, Any]:
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping of keys to values")
    return data


def _coerce(key: str, kind: type, value: Any) -> Any:
    if value is None:
        return None
    if kind is str:
        if isinstance(value, (list, tuple)):
            return ",".join(str(v) for v in value)
        return str(value)
    if isinstance(value, bool):
        raise ConfigError(f"type mismatch for {key}: expected {kind.__name__}, got bool")
    try:
        out = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"type mismatch for {key}: expected {kind.__name__}, got {value!r}") from None
    if kind is int and float(value) != out:
        raise ConfigError(f"type mismatch for {key}: expected an integer, got {value!r}")
    return out


def parse_config(command: str, flags: Dict[str, Any], config_path: Optional[str] = None,
                 environ: Optional[Dict[str, str]] = None) -> RunConfig:
    """Merge file values and flag overrides for ``command`` into a validated :class:`RunConfig`."""
    if command not in COMMAND_OPTIONS:
        raise ConfigError(f"unknown command {command!r}")
    spec = COMMAND_OPTIONS[command]
    environ = os.environ if environ is None else environ
    path = config_path or environ.get(CONFIG_ENV) or None
    raw: Dict[str, Any] = _load_file(path) if path else {}
    unknown = sorted(set(raw) - set(spec))
    if unknown:
        raise ConfigError(f"unknown key(s) in config: {', '.join(unknown)}")
    merged = dict(raw)
    merged.update({k: v for k, v in flags.items() if v is not None and k in spec})
    if "delta_min" in spec and merged.get("coupling") is None and merged.get("delta_min") is not None:
        merged["coupling"] = merged["delta_min"]
    options: Dict[str, Any] = {}
    for key, (kind, default) in spec.items():
        if key in merged:
            options[key] = _coerce(key, kind, merged[key])
        elif default is REQUIRED:
            raise ConfigError(f"missing required key: {key}")
        else:
            options[key] = default

    policy = TruncationPolicy(options["tail_tolerance"], options["max_level_cap"])
    params = None
    if all(k in options for k in PARAM_KEYS) and command not in ("engine", "sweep"):
        params = validate_params({k: options[k] for k in PARAM_KEYS})
    fmt = flags.get("format") or COMMAND_FORMATS[command][0]
    if fmt not in COMMAND_FORMATS[command]:
        raise ConfigError(f"format {fmt!r} not available for {command}")
    cfg = RunConfig(command, options, params, policy, flags.get("output"), fmt)
    if command in ("coeffs", "evolve", "rates", "oracle-check"):
        cfg.grid("t")
    if command in ("equilibrium", "engine", "sweep"):
        cfg.grid("delta")
    return cfg


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _meta_value(v: Any) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def _meta_lines(cfg: RunConfig, extra: Optional[Dict[str, Any]] = None) -> List[str]:
    """Header lines: model parameters first, then the remaining options, then provenance."""
    opts = dict(cfg.options)
    if extra:
        opts.update(extra)
    first = [k for k in PARAM_KEYS if k in opts]
    rest = sorted(k for k in opts if k not in first)
    lines = []
    if first:
        lines.append("# " + " ".join(f"{k}={_meta_value(opts[k])}" for k in first))
    lines.append("# " + " ".join(f"{k}={_meta_value(opts[k])}" for k in rest))
    lines.append(f"# command={cfg.command} version={__version__}")
    return lines


def _csv(header: Sequence[str], columns: Sequence[np.ndarray], meta: List[str]) -> str:
    buf = io.StringIO()
    for line in meta:
        buf.write(line + "\n")
    buf.write(",".join(header) + "\n")
    for row in zip(*columns):
        buf.write(",".join(v if isinstance(v, str) else fmt_float(v) for v in row) + "\n")
    return buf.getvalue()


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _n_max_meta(cfg: RunConfig) -> Dict[str, Any]:
    return {"n_max": truncation_level(cfg.params, cfg.policy)}


def run_coeffs(cfg: RunConfig) -> int:
    t = cfg.grid("t")
    a, b, c = coefficient_arrays(cfg.params, cfg.policy, t)
    margin = choi_margin_arrays(a, b, c)
    _emit(cfg, _csv(("t", "A", "B", "Re_C", "Im_C", "choi_margin"), (t, a, b, c.real, c.imag, margin),
                    _meta_lines(cfg, _n_max_meta(cfg))))
    return 0


def run_evolve(cfg: RunConfig) -> int:
    t = cfg.grid("t")
    state = cfg.options["state"]
    if state not in STATES:
        raise ConfigError(f"unknown state {state!r}; choose from {', '.join(STATES)}")
    rho0 = np.array(STATES[state], dtype=complex)
    method = cfg.options["method"]
    if method == "map":
        rho = evolve_state(cfg.params, cfg.policy, rho0, t)
    elif method == "master":
        rho = integrate_master_equation(cfg.params, rho0, t, cfg.policy)
    else:
        raise ConfigError(f"unknown method {method!r}; choose map or master")
    cols = (t, rho[:, 0, 0].real, rho[:, 1, 1].real, rho[:, 0, 1].real, rho[:, 0, 1].imag)
    _emit(cfg, _csv(("t", "rho_00", "rho_11", "Re_rho_01", "Im_rho_01"), cols, _meta_lines(cfg, _n_max_meta(cfg))))
    return 0


def run_rates(cfg: RunConfig) -> int:
    t = cfg.grid("t")
    u, g_dep, g_d, g_a = rate_arrays(cfg.params, cfg.policy, t)
    a, b, _ = coefficient_arrays(cfg.params, cfg.policy, t)
    _emit(cfg, _csv(("t", "U", "Gamma_dep", "Gamma_d", "Gamma_a", "invertibility_margin"),
                    (t, u, g_dep, g_d, g_a, 1 - a - b), _meta_lines(cfg, _n_max_meta(cfg))))
    return 0


def _equilibrium_row(args):
    params, policy = args
    coeffs = averaged_coefficients(params, policy)
    return (params.coupling, float(params.n_modes), coeffs.a_bar, coeffs.chi,
            ratio_from_coefficients(coeffs, params.inv_temp, params.qubit_freq),
            trace_distance_from_coefficients(coeffs, params.inv_temp, params.qubit_freq))


def run_equilibrium(cfg: RunConfig) -> int:
    rows = [_equilibrium_row((cfg.params.replace(coupling=float(d)), cfg.policy)) for d in cfg.grid("delta")]
    _emit(cfg, _csv(("Delta", "N", "A_bar", "chi", "R", "D"), list(zip(*rows)), _meta_lines(cfg)))
    return 0


def _cycle_spec(options: Dict[str, Any], coupling: float, x1: Optional[float] = None) -> CycleSpec:
    return CycleSpec(options["omega_c"], options["omega_h"], options["gamma_c"], options["gamma_h"],
                     options["x1"] if x1 is None else x1, options["n_modes"], coupling, options["coupling_h"])


ENGINE_HEADER = ("Delta", "x1", "y1", "x2", "eff_single", "eff_last", "eff_otto", "eff_carnot",
                 "fixed_point", "physical_engine", "beats_otto", "carnot_converged_case")


def _engine_row(args):
    options, policy, coupling, x1 = args
    res = multi_cycle(_cycle_spec(options, coupling, x1), policy, options["runs"], options["contact_time"])
    flags = res.flags
    return (coupling, float(res.x_seq[0]), float(res.y_seq[0]), float(res.x_seq[1]), res.eff_single,
            float(res.eff_cumulative[-1]), res.eff_otto, res.eff_carnot, res.fixed_point,
            str(flags.physical_engine).lower(), str(flags.beats_otto).lower(),
            str(flags.carnot_converged_case).lower())


def run_engine(cfg: RunConfig) -> int:
    deltas = cfg.grid("delta")
    opts = cfg.options
    if cfg.fmt == "json":
        if deltas.size != 1:
            raise ConfigError("JSON output takes a single coupling; use --format csv for sweeps")
        res = multi_cycle(_cycle_spec(opts, float(deltas[0])), cfg.policy, opts["runs"], opts["contact_time"])
        doc = {"meta": {"command": cfg.command, "version": __version__, "options": dict(sorted(opts.items()))}}
        doc.update(res.to_dict())
        _emit(cfg, json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return 0
    rows = [_engine_row((opts, cfg.policy, float(d), None)) for d in deltas]
    _emit(cfg, _csv(ENGINE_HEADER, list(zip(*rows)), _meta_lines(cfg)))
    return 0


def run_oracle_check(cfg: RunConfig) -> int:
    t = cfg.grid("t")
    variant = cfg.options["variant"]
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}")
    a, b, c = coefficient_arrays(cfg.params, cfg.policy, t)
    ra, rb, rc = reference_coefficient_arrays(cfg.params, cfg.options["n_max"], variant, t, cfg.policy)
    dev = {"A": float(np.max(np.abs(a - ra))), "B": float(np.max(np.abs(b - rb))), "C": float(np.max(np.abs(c - rc)))}
    worst = max(dev.values())
    tol = cfg.options["tol"]
    lines = _meta_lines(cfg, _n_max_meta(cfg))
    lines += [f"max_abs_dev_{k}={fmt_float(v)}" for k, v in dev.items()]
    lines.append(f"max_abs_dev={fmt_float(worst)} tol={fmt_float(tol)} {'PASS' if worst <= tol else 'FAIL'}")
    _emit(cfg, "\n".join(lines) + "\n")
    return 0 if worst <= tol else 1


def _parse_list(text: Optional[str], kind: type, fallback) -> list:
    if text is None:
        return [fallback]
    items = [s for s in (p.strip() for p in text.split(",")) if s]
    if not items:
        raise ConfigError("empty grid: value list has no entries")
    try:
        return [kind(s) for s in items]
    except ValueError:
        raise ConfigError(f"type mismatch in value list {text!r}") from None


def run_sweep(cfg: RunConfig) -> int:
    opts = cfg.options
    deltas = cfg.grid("delta")
    target = opts["target"]
    if target == "engine":
        tasks = [(opts, cfg.policy, float(d), x1) for d in deltas for x1 in _parse_list(opts["x1_values"], float, opts["x1"])]
        worker, header = _engine_row, ENGINE_HEADER
    elif target == "equilibrium":
        tasks = []
        for n in _parse_list(opts["n_modes_values"], int, opts["n_modes"]):
            for d in deltas:
                params = ModelParams(n, opts["qubit_freq"], opts["mode_freq"], float(d), opts["inv_temp"])
                tasks.append((params, cfg.policy))
        worker, header = _equilibrium_row, ("Delta", "N", "A_bar", "chi", "R", "D")
    else:
        raise ConfigError(f"unknown sweep target {target!r}; choose engine or equilibrium")
    workers = opts["workers"] or os.cpu_count() or 1
    if workers <= 1 or len(tasks) <= 1:
        rows = [worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(worker, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    meta_opts = {k: v for k, v in opts.items() if k != "workers"}
    meta = _meta_lines(RunConfig(cfg.command, meta_opts, cfg.params, cfg.policy))
    _emit(cfg, _csv(header, list(zip(*rows)), meta))
    return 0


RUNNERS = {
    "coeffs": run_coeffs,
    "evolve": run_evolve,
    "rates": run_rates,
    "equilibrium": run_equilibrium,
    "engine": run_engine,
    "oracle-check": run_oracle_check,
    "sweep": run_sweep,
}


def run(cfg: RunConfig) -> int:
    return RUNNERS[cfg.command](cfg)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quasiotto", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        p = sub.add_parser(command)
        p.add_argument("--config", help=f"YAML/JSON config file (default: ${CONFIG_ENV})")
        p.add_argument("--output", "-o", help="write to this file instead of stdout")
        p.add_argument("--format", choices=COMMAND_FORMATS[command])
        for key, (kind, _) in COMMAND_OPTIONS[command].items():
            p.add_argument("--" + key.replace("_", "-"), dest=key, type=kind, default=None)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        cfg = parse_config(args.command, flags, args.config)
        return run(cfg)
    except (QuasiOttoError, ValueError, OSError, yaml.YAMLError) as exc:
        msg = " ".join(str(exc).split())
        print(f"quasiotto {args.command}: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
