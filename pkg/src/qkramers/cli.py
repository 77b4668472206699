"""Command-line front end: ``qkramers {coeffs,rate,sweep,simulate,validate}``.

All subcommands read one JSON config (the built-in default when ``--config``
is omitted) with ``--set dotted.key=value`` overrides.
"""

import argparse
import concurrent.futures
import copy
import csv
import json
import math
import os
import sys
import warnings

import numpy as np

from . import bath as bathmod
from .bath import BathSpec
from .errors import ConfigError, DomainError, NumericError, QKramersError
from .fpcoeffs import CSV_HEADER, RegionModel
from .potential import CubicPotential
from .resolvent import RegionKind

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 2, 3, 4

DEFAULT_CONFIG = {
    "mode": "quantum",
    "bath": {"gamma": 1.3, "tau_c": 0.3, "temperature": 5.0, "hbar": 1.0, "kb": 1.0},
    "potential": {"a_bar": 0.5, "e_act": 10.0},
    "dispersion": {"enabled": True, "minimum_uncertainty": True},
    "rate": {"formula": "simplified", "method": "analytic", "t_star": None, "energy": "renormalized",
             "zero_dispersion": False},
    "sim": {"dt": 0.01, "t_max": 800.0, "n_traj": 10000, "seed": 12345, "noise_mode": "classical"},
    "sweep": {"variable": "temperature", "range": {"min": 0.2, "max": 20.0, "count": 40, "spacing": "log"},
              "workers": None},
    "coeffs": {"region": "both", "t_min": 0.05, "t_max": 10.0, "count": 200},
}

SWEEP_COLUMNS = ("T", "inv_T", "gamma", "k", "ln_k", "Lambda", "D_b", "psi_b", "D_0", "psi_0", "g_b", "N_b",
                 "formula", "error")


def fmt(x):
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    return "%.12e" % float(x)


def write_csv(stream, header, rows):
    w = csv.writer(stream, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(cfg, assignment):
    if "=" not in assignment:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    key, value = assignment.split("=", 1)
    parts = key.strip().split(".")
    node = cfg
    for p in parts[:-1]:
        if not isinstance(node.get(p), dict):
            node[p] = {}
        node = node[p]
    node[parts[-1]] = _parse_value(value)


def _merge(base, extra):
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict):
            _merge(base[k], v)
        else:
            base[k] = v
    return base


def load_config(path=None, overrides=()):
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        _merge(cfg, user)
    for o in overrides:
        apply_override(cfg, o)
    if cfg.get("mode") not in (bathmod.QUANTUM, bathmod.CLASSICAL):
        raise ConfigError(f"mode must be 'quantum' or 'classical', got {cfg.get('mode')!r}")
    return cfg


def build_bath(cfg):
    return BathSpec.from_dict({k: v for k, v in cfg["bath"].items() if v is not None})


def build_potential(cfg):
    return CubicPotential.from_dict(cfg["potential"])


def _dispersion(cfg):
    return dict(cfg.get("dispersion") or {})


def rate_kwargs(cfg):
    r = dict(cfg.get("rate") or {})
    unknown = set(r) - {"formula", "method", "t_star", "energy", "zero_dispersion", "prefactor_scale"}
    if unknown:
        raise ConfigError(f"unknown rate keys: {sorted(unknown)}")
    return r


def evaluate_rate(cfg, bath=None):
    from .rate import rate

    bath = bath or build_bath(cfg)
    return rate(bath, build_potential(cfg), cfg["mode"], dispersion=_dispersion(cfg), **rate_kwargs(cfg))


def sweep_values(spec):
    if "values" in spec:
        vals = np.asarray(spec["values"], dtype=float)
    elif "range" in spec:
        r = spec["range"]
        try:
            lo, hi, n = float(r["min"]), float(r["max"]), int(r["count"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"sweep.range needs min, max, count: {exc}") from exc
        spacing = r.get("spacing", "linear")
        if spacing == "log":
            if lo <= 0:
                raise ConfigError("log spacing needs min > 0")
            vals = np.geomspace(lo, hi, n)
        elif spacing == "linear":
            vals = np.linspace(lo, hi, n)
        else:
            raise ConfigError(f"sweep.range.spacing must be linear or log, got {spacing!r}")
    else:
        raise ConfigError("sweep needs 'values' or 'range'")
    if vals.size == 0:
        raise ConfigError("sweep values are empty")
    d = np.diff(vals)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise ConfigError("sweep values must be strictly monotone")
    return vals


def _sweep_point(cfg, variable, value):
    key = "temperature" if variable == "temperature" else "gamma"
    bath = build_bath(cfg).replace(**{key: float(value)})
    t, g = bath.temperature, bath.gamma
    inv_t = 1.0 / t if t > 0 else math.inf
    formula = rate_kwargs(cfg).get("formula", "full")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = evaluate_rate(cfg, bath)
    except QKramersError as exc:
        nan = math.nan
        return (t, inv_t, g, nan, nan, nan, nan, nan, nan, nan, nan, nan, formula, f"{type(exc).__name__}: {exc}")
    k = res.k
    return (t, inv_t, g, k, math.log(k) if k > 0 else -math.inf, res.transmission.big_lambda, res.db, res.psib,
            res.d0, res.psi0, res.gb, res.nb, res.formula, "")


def run_sweep(cfg):
    """Rows in input order; per-row failures land in the ``error`` column."""
    spec = cfg.get("sweep") or {}
    variable = spec.get("variable", "temperature")
    if variable not in ("temperature", "friction"):
        raise ConfigError(f"sweep.variable must be temperature or friction, got {variable!r}")
    values = sweep_values(spec)
    build_bath(cfg)
    build_potential(cfg)
    workers = spec.get("workers") or min(8, os.cpu_count() or 1)
    with concurrent.futures.ThreadPoolExecutor(workers) as pool:
        rows = list(pool.map(lambda v: _sweep_point(cfg, variable, v), values))
    return variable, rows


def gnuplot_script(csv_name, variable):
    if variable == "temperature":
        xcol, xlabel, ycol, ylabel = 2, "1/T", 5, "ln k"
    else:
        xcol, xlabel, ycol, ylabel = 3, "Gamma", 4, "k"
    return (f"set datafile separator ','\nset key autotitle columnhead\n"
            f"set xlabel '{xlabel}'\nset ylabel '{ylabel}'\n"
            f"plot '{csv_name}' using {xcol}:{ycol} with linespoints\n")


def coefficient_rows(cfg, region):
    c = cfg.get("coeffs") or {}
    t_grid = np.linspace(float(c.get("t_min", 0.05)), float(c.get("t_max", 10.0)), int(c.get("count", 200)))
    model = RegionModel(build_bath(cfg), build_potential(cfg), region, _dispersion(cfg), cfg["mode"])
    rows, bad = [], []
    for t in t_grid:
        try:
            rows.append((region.value,) + model.at(t).row())
        except NumericError:
            bad.append(float(t))
            rows.append((region.value, t) + (math.nan,) * (len(CSV_HEADER) - 1))
    return rows, bad


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def cmd_coeffs(cfg, args):
    which = (cfg.get("coeffs") or {}).get("region", "both")
    regions = [RegionKind.WELL, RegionKind.BARRIER] if which == "both" else [RegionKind.parse(which)]
    out, close = _open_out(args.output)
    try:
        rows = []
        for region in regions:
            r, bad = coefficient_rows(cfg, region)
            rows += r
            if bad:
                print(f"warning: {region.value}: Y(t) <= 0 at {len(bad)} points from t={bad[0]:.4g}; "
                      "rows written as NaN", file=sys.stderr)
        write_csv(out, ("region",) + CSV_HEADER, rows)
    finally:
        if close:
            out.close()
    return EXIT_OK


def cmd_rate(cfg, args):
    res = evaluate_rate(cfg)
    out = res.to_dict()
    out["ln_k"] = math.log(res.k) if res.k > 0 else None
    print(json.dumps(_json_safe(out), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_sweep(cfg, args):
    variable, rows = run_sweep(cfg)
    out, close = _open_out(args.output)
    try:
        write_csv(out, SWEEP_COLUMNS, rows)
    finally:
        if close:
            out.close()
    if close:
        base = os.path.splitext(args.output)[0]
        with open(base + ".gp", "w") as fh:
            fh.write(gnuplot_script(os.path.basename(args.output), variable))
    failed = sum(1 for r in rows if r[-1])
    if failed:
        print(f"warning: {failed}/{len(rows)} sweep points failed", file=sys.stderr)
    return EXIT_NUMERIC if failed == len(rows) else EXIT_OK


def cmd_simulate(cfg, args):
    from .sim import SimConfig, estimate_rate

    sim_cfg = SimConfig.from_dict(dict(cfg.get("sim") or {}))
    est = estimate_rate(build_potential(cfg), build_bath(cfg), sim_cfg)
    out, close = _open_out(args.output)
    try:
        w = csv.writer(out, lineterminator="\r\n")
        w.writerow(("trajectory_index", "fpt_or_censored"))
        for i, t in enumerate(est.fpt):
            w.writerow((i, "censored" if not math.isfinite(t) else fmt(t)))
    finally:
        if close:
            out.close()
    summary = json.dumps(_json_safe(est.summary()), indent=2)
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(summary + "\n")
    else:
        print(summary, file=sys.stdout if close else sys.stderr)
    return EXIT_OK


def cmd_validate(cfg, args):
    from .validation import run_all

    results = run_all(prefactor_scale=args.mutate_prefactor, skip_monte_carlo=args.quick)
    report = {"passed": all(r.passed for r in results), "criteria": [r.to_dict() for r in results]}
    text = json.dumps(_json_safe(report), indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    for r in results:
        print(r.line(), file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, RegionKind):
        return obj.value
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


COMMANDS = {"coeffs": cmd_coeffs, "rate": cmd_rate, "sweep": cmd_sweep, "simulate": cmd_simulate,
            "validate": cmd_validate}


def build_parser():
    p = argparse.ArgumentParser(prog="qkramers", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (default: built-in parameter set)")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry by dotted path, value parsed as JSON")
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("coeffs", parents=[common], help="time-dependent coefficient table (CSV)")
    c.add_argument("-o", "--output")
    sub.add_parser("rate", parents=[common], help="single rate evaluation (JSON)")
    s = sub.add_parser("sweep", parents=[common], help="temperature or friction sweep (CSV + gnuplot script)")
    s.add_argument("-o", "--output")
    m = sub.add_parser("simulate", parents=[common], help="first-passage Monte Carlo")
    m.add_argument("-o", "--output")
    m.add_argument("--summary", help="write the JSON summary here")
    v = sub.add_parser("validate", parents=[common], help="run the acceptance checks")
    v.add_argument("-o", "--output")
    v.add_argument("--quick", action="store_true", help="skip the Monte Carlo check")
    v.add_argument("--mutate-prefactor", type=float, default=1.0, metavar="SCALE",
                   help="scale the full-formula prefactor (mutation test)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
