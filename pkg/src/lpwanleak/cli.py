"""Command-line front end: config files, subcommands, CSV/JSON emission.

Subcommands: solve, sweep, simulate, analyze, posterior, costs. Common
flags: --config, --seed, --out, --format. Exit codes: 0 ok, 2 config
error, 3 data error, 4 internal error.

The config file is a small TOML-like format: `[section]` headers, one
`key = value` per line, full-line # comments. Values are ints, floats,
true/false, bare or quoted strings, comma lists, or inclusive numeric
ranges written start:end:step. Dotted keys (`model.slots = 10`) work
anywhere and name the section explicitly. Unknown keys are rejected, not
ignored, so typos fail fast. CLI flags override file values.

Every output starts with provenance: a comment line (CSV) or "meta"
object (JSON) recording tool version, config hash, and the resolved seed.
Omitting --seed draws a random one and logs it to stderr, so any run can
be reproduced after the fact.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .attacker import bin_timestamps, chi_square_threshold, run_dispersion
from .experiment import (MetricsReport, SweepSpec, cost_curves,
                         cost_curves_to_csv, run_sweep, sweep_to_csv)
from .obfuscator import (KnowledgeModel, apply_strategy, costs,
                         solve_strategy, strategy_json)
from .traces import InconsistentObservationError, enumerate_observables, load_fixture, posterior_table
from .traffic import IntervalModel, gen_run, run_to_csv

__all__ = [
    "ConfigError",
    "DataError",
    "Config",
    "parse_config",
    "load_config",
    "ExternalTrace",
    "read_trace_csv",
    "write_trace_csv",
    "main",
    "entry",
]


class ConfigError(Exception):
    """Bad or missing configuration; exit code 2."""


class DataError(Exception):
    """Bad input data (trace files, fixtures); exit code 3."""


# every accepted config key, by section; anything else is a hard error
KNOWN_KEYS = {
    "model": {"slots", "base_rate", "intensity", "anomaly_rate"},
    "knowledge": {"tpr", "tnr"},
    "solver": {"budget", "cost_denominator"},
    "sweep": {"anomaly_rates", "intensities", "n_intervals", "detector", "alpha"},
    "run": {"seed", "out", "format"},
    "simulate": {"dump_run"},
    "analyze": {"input", "device", "slot_width", "slots", "alpha"},
    "posterior": {"fixture", "observed"},
    "costs": {"shifts", "base_rates", "intensities", "slots", "denominator"},
}

_MISSING = object()


def _parse_scalar(tok: str):
    tok = tok.strip()
    if tok in ("true", "false"):
        return tok == "true"
    try:
        return int(tok)
    except ValueError:
        pass
    try:
        return float(tok)
    except ValueError:
        pass
    if len(tok) >= 2 and tok[0] == tok[-1] and tok[0] in "'\"":
        return tok[1:-1]
    return tok


def _parse_value(raw: str, lineno: int):
    raw = raw.strip()
    if not raw:
        raise ConfigError(f"config line {lineno}: empty value")
    if "," in raw:
        return tuple(_parse_scalar(part) for part in raw.split(","))
    if raw.count(":") == 2:
        parts = raw.split(":")
        try:
            start, end, step = (float(p) for p in parts)
        except ValueError:
            return _parse_scalar(raw)
        if step <= 0:
            raise ConfigError(f"config line {lineno}: range step must be positive")
        n = int(round((end - start) / step))
        if abs(start + n * step - end) > 1e-9 * max(1.0, abs(end)):
            raise ConfigError(f"config line {lineno}: range end is off the step grid")
        return tuple(round(start + i * step, 12) for i in range(n + 1))
    return _parse_scalar(raw)


def parse_config(text: str) -> dict[str, dict]:
    """Parse config text into {section: {key: value}}, validating key names."""
    sections: dict[str, dict] = {}
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in KNOWN_KEYS:
                raise ConfigError(f"config line {lineno}: unknown section [{current}]")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value")
        key, raw = line.split("=", 1)
        key = key.strip()
        if "." in key:
            sect, key = key.split(".", 1)
        elif current is not None:
            sect = current
        else:
            raise ConfigError(f"config line {lineno}: key {key!r} outside any section")
        if sect not in KNOWN_KEYS or key not in KNOWN_KEYS[sect]:
            raise ConfigError(f"config line {lineno}: unknown config key '{sect}.{key}'")
        sec = sections.setdefault(sect, {})
        if key in sec:
            raise ConfigError(f"config line {lineno}: duplicate config key '{sect}.{key}'")
        sec[key] = _parse_value(raw, lineno)
    return sections


class Config:
    """Typed access to parsed config sections, naming fields in errors."""

    def __init__(self, sections: dict[str, dict]):
        self.sections = sections

    def get(self, section: str, key: str, default=_MISSING):
        val = self.sections.get(section, {}).get(key, _MISSING)
        if val is _MISSING:
            if default is _MISSING:
                raise ConfigError(f"missing required config key '{section}.{key}'")
            return default
        return val

    def get_float(self, section, key, default=_MISSING) -> float:
        v = self.get(section, key, default)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"config key '{section}.{key}' must be a number, got {v!r}")
        return float(v)

    def get_int(self, section, key, default=_MISSING) -> int:
        v = self.get(section, key, default)
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"config key '{section}.{key}' must be an integer, got {v!r}")
        return v

    def get_str(self, section, key, default=_MISSING) -> str:
        v = self.get(section, key, default)
        if not isinstance(v, str):
            raise ConfigError(f"config key '{section}.{key}' must be a string, got {v!r}")
        return v

    def get_floats(self, section, key, default=_MISSING) -> tuple[float, ...]:
        v = self.get(section, key, default)
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return (float(v),)
        if isinstance(v, tuple):
            out = []
            for item in v:
                if isinstance(item, bool) or not isinstance(item, (int, float)):
                    raise ConfigError(
                        f"config key '{section}.{key}' must be numeric, got {item!r}")
                out.append(float(item))
            return tuple(out)
        raise ConfigError(f"config key '{section}.{key}' must be a number list, got {v!r}")

    def hash(self) -> str:
        canon = json.dumps(self.sections, sort_keys=True, default=list,
                           separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]


def load_config(path: str | None) -> Config:
    if path is None:
        return Config({})
    try:
        with open(path) as fh:
            return Config(parse_config(fh.read()))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc


@dataclass(frozen=True)
class ExternalTrace:
    """Captured uplink timestamps of one device, plus the binning spec."""

    device: str
    timestamps: np.ndarray
    slot_width: float
    slots: int

    def __post_init__(self):
        if self.slot_width <= 0:
            raise ValueError("slot_width must be positive")
        ts = np.asarray(self.timestamps, dtype=float)
        if ts.ndim != 1:
            raise ValueError("timestamps must be one-dimensional")
        if ts.size > 1 and np.any(np.diff(ts) < 0):
            raise ValueError("timestamps must be non-decreasing")
        object.__setattr__(self, "timestamps", ts)


def read_trace_csv(path, device: str | None = None) -> ExternalTrace:
    """Read a `timestamp_s,device_id` CSV and select one device's trace.

    Out-of-order timestamps are reported with their line number. The
    binning spec on the returned trace is a placeholder (1.0, 2); analyze
    attaches the configured one.
    """
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read trace {path}: {exc.strerror}") from exc
    rows = []
    header_seen = False
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != "timestamp_s,device_id":
                raise DataError(f"{path} line {lineno}: expected header timestamp_s,device_id")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise DataError(f"{path} line {lineno}: expected 2 fields, got {len(parts)}")
        try:
            ts = float(parts[0])
        except ValueError:
            raise DataError(f"{path} line {lineno}: bad timestamp {parts[0]!r}") from None
        rows.append((lineno, ts, parts[1].strip()))
    if not header_seen:
        raise DataError(f"{path}: empty trace file")
    devices = sorted({dev for _, _, dev in rows})
    if device is None:
        if len(devices) > 1:
            raise DataError(f"{path}: multiple devices {devices}; set analyze.device")
        device = devices[0] if devices else ""
    picked = [(lineno, ts) for lineno, ts, dev in rows if dev == device]
    if not picked:
        raise DataError(f"{path}: no messages for device {device!r}")
    prev = None
    for lineno, ts in picked:
        if prev is not None and ts < prev:
            raise DataError(f"{path} line {lineno}: out-of-order timestamp {ts}")
        prev = ts
    return ExternalTrace(device, np.array([ts for _, ts in picked]), 1.0, 2)


def write_trace_csv(path, timestamps, device: str = "dev0", comment=None) -> None:
    """Write timestamps in the `timestamp_s,device_id` format analyze reads."""
    with open(path, "w") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write("timestamp_s,device_id\n")
        for t in np.asarray(timestamps, dtype=float):
            fh.write(f"{float(t)!r},{device}\n")


def _resolve_seed(args, cfg: Config) -> int:
    if args.seed is not None:
        return args.seed
    seed = cfg.get("run", "seed", None)
    if seed is not None:
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError(f"config key 'run.seed' must be an integer, got {seed!r}")
        return seed
    seed = int.from_bytes(os.urandom(8), "big")
    print(f"lpwanleak: no seed given; using {seed}", file=sys.stderr)
    return seed


def _resolve_out(args, cfg: Config) -> str | None:
    return args.out if args.out is not None else cfg.get("run", "out", None)


def _resolve_format(args, cfg: Config, default: str) -> str:
    fmt = args.format if args.format is not None else cfg.get("run", "format", default)
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    return fmt


def _provenance(cfg: Config, seed: int) -> str:
    return f"lpwanleak {__version__} config_hash={cfg.hash()} seed={seed}"


def _meta(cfg: Config, seed: int) -> dict:
    return {"tool": "lpwanleak", "version": __version__,
            "config_hash": cfg.hash(), "seed": seed}


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _wrap_value_error(build, field_hint: str):
    try:
        return build()
    except ValueError as exc:
        raise ConfigError(f"{field_hint}: {exc}") from exc


def _knowledge_from(cfg: Config) -> KnowledgeModel:
    return _wrap_value_error(
        lambda: KnowledgeModel(cfg.get_float("knowledge", "tpr", 1.0),
                               cfg.get_float("knowledge", "tnr", 1.0)),
        "knowledge")


def _grid_from(cfg: Config, model_key: str, sweep_key: str) -> tuple[float, ...]:
    # grids live in [sweep]; a scalar in [model] doubles as a 1-point grid
    if cfg.get("sweep", sweep_key, None) is not None:
        return cfg.get_floats("sweep", sweep_key)
    if cfg.get("model", model_key, None) is not None:
        return (cfg.get_float("model", model_key),)
    raise ConfigError(f"missing required config key 'model.{model_key}' (or 'sweep.{sweep_key}')")


def _scalar_from(cfg: Config, model_key: str, sweep_key: str) -> float:
    grid = _grid_from(cfg, model_key, sweep_key)
    if len(grid) != 1:
        raise ConfigError(f"'sweep.{sweep_key}' must be a single value here, got {len(grid)}")
    return grid[0]


def _model_from(cfg: Config) -> IntervalModel:
    intensity = _scalar_from(cfg, "intensity", "intensities")
    anomaly_rate = _scalar_from(cfg, "anomaly_rate", "anomaly_rates")
    return _wrap_value_error(
        lambda: IntervalModel(cfg.get_int("model", "slots", 10),
                              cfg.get_float("model", "base_rate", 1.0),
                              intensity, anomaly_rate),
        "model")


def _sweep_spec_from(cfg: Config, seed: int) -> SweepSpec:
    rates = _grid_from(cfg, "anomaly_rate", "anomaly_rates")
    intensities = _grid_from(cfg, "intensity", "intensities")
    detector = cfg.get_str("sweep", "detector", "idealized")
    if detector not in ("idealized", "chi-square"):
        raise ConfigError(f"config key 'sweep.detector' must be idealized or chi-square, got {detector!r}")
    denom = cfg.get_str("solver", "cost_denominator", "base-plus-anomaly")
    spec = _wrap_value_error(
        lambda: SweepSpec(
            anomaly_rates=rates,
            intensities=intensities,
            slots=cfg.get_int("model", "slots", 10),
            base_rate=cfg.get_float("model", "base_rate", 1.0),
            knowledge=_knowledge_from(cfg),
            budget=cfg.get_float("solver", "budget", 1.0),
            detector_mode=detector,
            alpha=cfg.get_float("sweep", "alpha", 0.05),
            n_intervals=cfg.get_int("sweep", "n_intervals", 100_000),
            seed=seed,
            cost_denominator=denom),
        "sweep")
    # fail on impossible cells before spending any simulation time
    for i in spec.intensities:
        for rp in spec.anomaly_rates:
            _wrap_value_error(lambda: IntervalModel(spec.slots, spec.base_rate, i, rp),
                              f"sweep cell (R_p={rp}, I={i})")
    return spec


def _report_dict(r: MetricsReport) -> dict:
    return {
        "R_p": r.r_p, "I": r.intensity, "S": r.slots, "lambda": r.base_rate,
        "P_tp": r.tpr, "P_tn": r.tnr, "budget": r.budget,
        "P_wf": r.p_waterfill, "P_f": r.p_fake, "epsilon": r.epsilon,
        "cost": r.cost, "feasible_optimal": r.feasible_optimal,
        "guess_err": r.guess_err, "guess_err_se": r.guess_err_se,
        "ce_bits": r.ce_bits, "ce_bits_se": r.ce_bits_se,
        "ideal_guess_err": r.ideal_guess_err, "ideal_ce_bits": r.ideal_ce_bits,
        "degenerate": r.degenerate, "realized_cost": r.realized_cost,
        "realized_cost_se": r.realized_cost_se, "error": r.error,
    }


def cmd_solve(args, cfg: Config) -> int:
    seed = _resolve_seed(args, cfg)
    # json-only command: a config run.format is a generic preference and is
    # ignored here, but an explicit contradictory flag is an error
    if args.format not in (None, "json"):
        raise ConfigError("solve emits json only")
    model = _model_from(cfg)
    knowledge = _knowledge_from(cfg)
    denom = cfg.get_str("solver", "cost_denominator", "base-plus-anomaly")
    cm = _wrap_value_error(lambda: costs(model, denom), "solver.cost_denominator")
    strat = solve_strategy(model, knowledge, cfg.get_float("solver", "budget", 1.0), cm)
    doc = strategy_json(strat, model, knowledge)
    doc["meta"] = _meta(cfg, seed)
    _emit(json.dumps(doc, indent=2) + "\n", _resolve_out(args, cfg))
    return 0


def _run_sweep_command(args, cfg: Config, single_cell: bool) -> int:
    seed = _resolve_seed(args, cfg)
    fmt = _resolve_format(args, cfg, "csv")
    spec = _sweep_spec_from(cfg, seed)
    if single_cell and (len(spec.anomaly_rates) != 1 or len(spec.intensities) != 1):
        raise ConfigError("simulate needs a single-cell grid (one anomaly rate, one intensity)")
    records = run_sweep(spec)
    out = _resolve_out(args, cfg)
    if fmt == "csv":
        buf = io.StringIO()
        sweep_to_csv(records, buf, comment=_provenance(cfg, seed))
        _emit(buf.getvalue(), out)
    else:
        doc = {"meta": _meta(cfg, seed), "rows": [_report_dict(r) for r in records]}
        _emit(json.dumps(doc, indent=2) + "\n", out)
    if single_cell:
        dump = cfg.get("simulate", "dump_run", None)
        if dump is not None:
            _dump_single_run(cfg, spec, str(dump), _provenance(cfg, seed))
    return 0


def _dump_single_run(cfg: Config, spec: SweepSpec, path: str, provenance: str) -> None:
    # reproduce the cell's exact run (same derived seeds as run_cell in run_sweep)
    model = IntervalModel(spec.slots, spec.base_rate, spec.intensities[0],
                          spec.anomaly_rates[0])
    cm = costs(model, spec.cost_denominator)
    strat = solve_strategy(model, spec.knowledge, spec.budget, cm)
    base = (spec.seed, 0, 0)
    run = gen_run(model, spec.n_intervals, base + (0,))
    obf = apply_strategy(run, strat, spec.knowledge, cm, base + (1,))
    run_to_csv(obf, path, comment=provenance)


def cmd_sweep(args, cfg: Config) -> int:
    return _run_sweep_command(args, cfg, single_cell=False)


def cmd_simulate(args, cfg: Config) -> int:
    return _run_sweep_command(args, cfg, single_cell=True)


def cmd_analyze(args, cfg: Config) -> int:
    seed = _resolve_seed(args, cfg)
    fmt = _resolve_format(args, cfg, "csv")
    path = args.input if args.input else cfg.get_str("analyze", "input")
    device = cfg.get("analyze", "device", None)
    slot_width = cfg.get_float("analyze", "slot_width", 1.0)
    slots = cfg.get_int("analyze", "slots", 10)
    alpha = cfg.get_float("analyze", "alpha", 0.05)
    trace = read_trace_csv(path, None if device is None else str(device))
    trace = _wrap_value_error(
        lambda: ExternalTrace(trace.device, trace.timestamps, slot_width, slots),
        "analyze")
    try:
        counts = bin_timestamps(trace.timestamps, slot_width, slots)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc
    _, _, d = run_dispersion(counts)
    thr = chi_square_threshold(slots, alpha)
    stat = (slots - 1) * d
    flagged = np.where(np.isnan(stat), False, stat > thr)
    out = _resolve_out(args, cfg)
    if fmt == "csv":
        lines = [f"# {_provenance(cfg, seed)}", "interval,D,flagged,threshold"]
        for i in range(len(d)):
            lines.append(f"{i},{float(d[i])!r},{int(flagged[i])},{thr!r}")
        _emit("\n".join(lines) + "\n", out)
    else:
        rows = [{"interval": i, "D": float(d[i]), "flagged": bool(flagged[i]),
                 "threshold": thr} for i in range(len(d))]
        _emit(json.dumps({"meta": _meta(cfg, seed), "rows": rows}, indent=2) + "\n", out)
    return 0


def cmd_posterior(args, cfg: Config) -> int:
    seed = _resolve_seed(args, cfg)
    fmt = _resolve_format(args, cfg, "json")
    path = args.input if args.input else cfg.get_str("posterior", "fixture")
    try:
        fixture = load_fixture(path)
    except OSError as exc:
        raise DataError(f"cannot read fixture {path}: {exc.strerror}") from exc
    except (ValueError, KeyError) as exc:
        raise DataError(f"bad fixture {path}: {exc}") from exc
    observed_cfg = cfg.get("posterior", "observed", None)
    if observed_cfg is not None:
        if not isinstance(observed_cfg, tuple):
            observed_cfg = (observed_cfg,)
        targets = [tuple(float(t) for t in observed_cfg)]
    else:
        targets = sorted(enumerate_observables(fixture.prior, fixture.mechanism))
    tables = []
    for obs in targets:
        try:
            table = posterior_table(fixture.prior, fixture.mechanism, obs)
        except InconsistentObservationError as exc:
            raise DataError(f"{path}: {exc}") from exc
        tables.append((obs, table))
    out = _resolve_out(args, cfg)
    if fmt == "json":
        doc = {"meta": _meta(cfg, seed),
               "tables": [{"observed": list(obs),
                           "posterior": [{"trace": list(r), "p": p}
                                         for r, p in sorted(table.items())]}
                          for obs, table in tables]}
        _emit(json.dumps(doc, indent=2) + "\n", out)
    else:
        lines = [f"# {_provenance(cfg, seed)}", "observed,candidate,posterior"]
        for obs, table in tables:
            obs_s = ";".join(repr(t) for t in obs)
            for r, p in sorted(table.items()):
                cand_s = ";".join(repr(t) for t in r)
                lines.append(f"{obs_s},{cand_s},{p!r}")
        _emit("\n".join(lines) + "\n", out)
    return 0


def cmd_costs(args, cfg: Config) -> int:
    seed = _resolve_seed(args, cfg)
    fmt = _resolve_format(args, cfg, "csv")
    shifts = cfg.get_floats("costs", "shifts")
    base_rates = cfg.get_floats("costs", "base_rates", (1.0,))
    intensities = cfg.get_floats("costs", "intensities", (10.0,))
    slots = cfg.get_int("costs", "slots", 10)
    denom = cfg.get_str("costs", "denominator", "base-plus-anomaly")
    models = []
    for lam in base_rates:
        for inten in intensities:
            models.append(_wrap_value_error(
                lambda: IntervalModel(slots, lam, inten, 0.0),
                f"costs model (lambda={lam}, I={inten})"))
    points = _wrap_value_error(lambda: cost_curves(models, shifts, denom), "costs")
    out = _resolve_out(args, cfg)
    if fmt == "csv":
        buf = io.StringIO()
        cost_curves_to_csv(points, buf, comment=_provenance(cfg, seed))
        _emit(buf.getvalue(), out)
    else:
        rows = [{"k": p.shift, "C_f": p.fake_cost, "C_wf": p.waterfill_cost,
                 "lambda": p.base_rate, "I": p.intensity,
                 "wf_feasible": p.wf_feasible} for p in points]
        _emit(json.dumps({"meta": _meta(cfg, seed), "rows": rows}, indent=2) + "\n", out)
    return 0


_COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "posterior": cmd_posterior,
    "costs": cmd_costs,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpwanleak",
        description="Traffic-analysis leakage metrics and dummy-traffic obfuscation simulator.")
    parser.add_argument("--version", action="version", version=f"lpwanleak {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "solve": "solve an obfuscation strategy and print it as JSON",
        "sweep": "run a (anomaly rate x intensity) metric sweep to CSV/JSON",
        "simulate": "run a single cell (plus optional run dump)",
        "analyze": "per-interval dispersion verdicts for an external trace CSV",
        "posterior": "posterior tables for a prior/mechanism fixture",
        "costs": "analytic obfuscation cost curves over a shift grid",
    }
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=helps[name])
        if name in ("analyze", "posterior"):
            p.add_argument("input", nargs="?", default=None,
                           help="input file (trace CSV / fixture JSON); may also come from config")
        p.add_argument("--config", default=None, help="config file path")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (unsigned 64-bit)")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", default=None, choices=("csv", "json"))
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.fn(args, cfg)
    except ConfigError as exc:
        print(f"lpwanleak: config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"lpwanleak: data error: {exc}", file=sys.stderr)
        return 3
    except BrokenPipeError:
        return 0
    except Exception as exc:  # anything else is a bug, not user error
        print(f"lpwanleak: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


def entry() -> None:
    raise SystemExit(main(sys.argv[1:]))
