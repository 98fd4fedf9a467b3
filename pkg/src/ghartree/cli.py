"""Command-line front end.

Usage::

    ghartree <command> [key=value ...] [--config FILE] [--out DIR] [--threads K]

Commands: params, groundstate, thresholds, classify, evolve, sweep.
Exit codes: 0 success, 2 invalid configuration, 3 numerical failure. Errors
are printed to stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .checkpoint import read_checkpoint, write_checkpoint
from .criteria import (
    ENERGY_MODELS,
    GroundStateData,
    applicable_kinds,
    classify_datum,
    gaussian_observables,
    omega_sq,
    report_json,
    threshold_solve,
)
from .eqparams import EquationParams, canonical_pair, classify
from .errors import (
    CheckpointError,
    Divergence,
    GHartreeError,
    InsufficientSamples,
    NoConvergence,
    NoRootInBracket,
    PoisonedField,
    UnconvergedInput,
)
from .evolve import EvolveConfig, Status, config_hash, evolve, virial_consistency
from .grid import ComplexField, Grid, set_fft_workers
from .groundstate import petviashvili_solve, sharp_gn_constant
from .observables import ObservableSet

log = logging.getLogger("ghartree")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
NUMERICAL_ERRORS = (NoConvergence, Divergence, NoRootInBracket, PoisonedField, UnconvergedInput, InsufficientSamples)


class ConfigError(GHartreeError, ValueError):
    pass


# -- configuration -----------------------------------------------------------

_EQ = {"N": int, "p": float, "b": float}
_GS = {"gs_n": int, "gs_L": float, "gs_tol": float, "gs_max_iter": int}
_GAUSS = {"beta": float, "gamma": float}
_EVOLVE = {
    "n": int,
    "L": float,
    "dt0": float,
    "t_end": float,
    "dt_floor": float,
    "phase_cap": float,
    "blowup_gradient_factor": float,
    "record_stride": int,
    "conservation_abort": float,
    "boundary_abort": float,
    "rule": str,
    "checkpoint_every": int,
    "chirp": float,
    "velocity": str,
}

SCHEMAS = {
    "params": dict(_EQ),
    "groundstate": {**_EQ, "n": int, "L": float, "tol": float, "max_iter": int},
    "thresholds": {**_EQ, **_GS, "energy_model": str},
    "classify": {**_EQ, **_GS, **_GAUSS, "energy_model": str},
    "evolve": {**_EQ, **_GAUSS, **_EVOLVE},
    "sweep": {
        **_EQ,
        **_GS,
        **_EVOLVE,
        "gamma": float,
        "energy_model": str,
        "beta_min": float,
        "beta_max": float,
        "beta_count": int,
        "mode": str,
    },
}

DEFAULTS = {
    "gs_n": 128,
    "gs_L": 12.0,
    "gs_tol": 1e-10,
    "gs_max_iter": 500,
    "tol": 1e-10,
    "max_iter": 500,
    "energy_model": "exact",
    "gamma": 1.0,
    "chirp": 0.0,
    "velocity": "",
    "beta_min": 0.1,
    "beta_max": 2.0,
    "beta_count": 39,
    "mode": "analytic",
}

_REQUIRED = {"params": ("N", "p", "b"), "classify": ("beta",), "evolve": ("beta",)}


def _grid_defaults(N: int) -> dict:
    return {"n": 48, "L": 8.0} if N == 4 else {"n": 128, "L": 12.0}


def parse_pairs(items, schema: dict) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"expected key=value, got {item!r}")
        key, val = item.split("=", 1)
        key, val = key.strip(), val.strip()
        if key not in schema:
            raise ConfigError(f"unknown key {key!r}; allowed: {sorted(schema)}")
        try:
            out[key] = schema[key](val)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {val!r}") from exc
    return out


def read_config_file(path, schema: dict) -> dict:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    items = [ln.split("#", 1)[0].strip() for ln in lines]
    return parse_pairs([i for i in items if i], schema)


def build_config(command: str, pairs, config_path=None) -> dict:
    schema = SCHEMAS[command]
    cfg = {}
    if config_path:
        cfg.update(read_config_file(config_path, schema))
    cfg.update(parse_pairs(pairs, schema))
    for key in _REQUIRED.get(command, ("N", "p", "b")):
        if key not in cfg:
            raise ConfigError(f"missing required key {key!r}")
    for key in ("N", "p", "b"):
        if key not in cfg:
            raise ConfigError(f"missing required key {key!r}")
    full = {k: v for k, v in DEFAULTS.items() if k in schema}
    if "n" in schema:
        full.update(_grid_defaults(cfg["N"]))
    full.update(cfg)
    if "energy_model" in full and full["energy_model"] not in ENERGY_MODELS:
        raise ConfigError(f"energy_model must be one of {ENERGY_MODELS}")
    if "mode" in full and full["mode"] not in ("analytic", "dynamic"):
        raise ConfigError("mode must be analytic or dynamic")
    return full


# -- output helpers ------------------------------------------------------------

def _dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def _stamp(command: str, cfg: dict) -> dict:
    return {"ghartree_version": __version__, "command": command, "config_hash": config_hash(command, cfg)}


class Outputs:
    def __init__(self, out_dir):
        self.dir = Path(out_dir) if out_dir else None
        if self.dir:
            try:
                self.dir.mkdir(parents=True, exist_ok=True)
            except OSError as exc:
                raise ConfigError(f"cannot create output directory {self.dir}: {exc}") from exc
            if not os.access(self.dir, os.W_OK):
                raise ConfigError(f"output directory {self.dir} is not writable")

    def path(self, name):
        return self.dir / name if self.dir else None

    def write_json(self, name, obj):
        if self.dir:
            (self.dir / name).write_text(_dumps(obj) + "\n")

    def write_csv(self, name, header_lines, columns, rows):
        if not self.dir:
            return
        with open(self.dir / name, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def _params(cfg) -> EquationParams:
    return EquationParams(cfg["N"], cfg["p"], cfg["b"])


def _ground(cfg, params):
    rep = classify(params)
    if not (0 < rep.s_c < 1):
        return None
    log.info("solving for the ground state on n=%d, L=%g", cfg["gs_n"], cfg["gs_L"])
    return petviashvili_solve(params, Grid(params.N, cfg["gs_n"], cfg["gs_L"]), cfg["gs_tol"], cfg["gs_max_iter"])


# -- commands ----------------------------------------------------------------------

def cmd_params(cfg, args, out: Outputs) -> dict:
    params = _params(cfg)
    rep = classify(params)
    result = {**_stamp("params", cfg), "params": params.as_dict(), **rep.as_dict(), "omega_sq": omega_sq(params)}
    if params.N * params.p > 2:
        pair = canonical_pair(params)
        result["strichartz_pair"] = {"q": pair.q, "r": pair.r}
    out.write_json("params.json", result)
    return result


def cmd_groundstate(cfg, args, out: Outputs) -> dict:
    params = _params(cfg)
    grid = Grid(params.N, cfg["n"], cfg["L"])
    res = petviashvili_solve(params, grid, cfg["tol"], cfg["max_iter"])
    result = {**_stamp("groundstate", cfg), **res.diagnostics(), "c_gn": sharp_gn_constant(res)}
    if out.dir:
        write_checkpoint(out.path("groundstate.ghfd"), res.profile, _clean(result))
    return result


def _threshold_rows(params, ground, model):
    return {k: threshold_solve(k, params, ground, model) for k in applicable_kinds(params, ground is not None)}


def cmd_thresholds(cfg, args, out: Outputs) -> dict:
    params = _params(cfg)
    ground = _ground(cfg, params)
    table = _threshold_rows(params, ground, cfg["energy_model"])
    result = {**_stamp("thresholds", cfg), "params": params.as_dict(), "thresholds": table}
    if ground is not None:
        result["mass_Q"] = ground.mass_Q
    out.write_csv(
        "thresholds.csv",
        [f"ghartree {__version__}", f"config_hash {result['config_hash']}"],
        ["kind", "value"],
        sorted(table.items()),
    )
    out.write_json("thresholds.json", result)
    return result


def cmd_classify(cfg, args, out: Outputs) -> dict:
    params = _params(cfg)
    ground = _ground(cfg, params)
    inp, G = gaussian_observables(cfg["beta"], cfg["gamma"], params, cfg["energy_model"])
    rep = classify_datum(inp, G, ground)
    table = _threshold_rows(params, ground, cfg["energy_model"])
    result = {**_stamp("classify", cfg), **report_json(inp, rep, table)}
    out.write_json("classify.json", result)
    return result


def _initial_field(cfg, params):
    grid = Grid(params.N, cfg["n"], cfg["L"])
    vel = [float(v) for v in cfg["velocity"].split(",")] if cfg.get("velocity") else None
    if vel is not None and len(vel) != params.N:
        raise ConfigError(f"velocity needs {params.N} comma-separated components")
    return ComplexField.gaussian(grid, cfg["beta"], cfg["gamma"], velocity=vel, chirp=cfg["chirp"])


def _evolve_config(cfg) -> EvolveConfig:
    keys = EvolveConfig.__dataclass_fields__
    return EvolveConfig(**{k: cfg[k] for k in keys if k in cfg})


def _run_evolution(cfg, out: Outputs, resume=None) -> dict:
    params = _params(cfg)
    ecfg = _evolve_config(cfg)
    t0, reference = 0.0, None
    if resume:
        u0, meta = read_checkpoint(resume)
        t0 = float(meta.get("time", 0.0))
        if meta.get("reference"):
            r = meta["reference"]
            reference = ObservableSet(
                mass=r["mass"], energy=r["energy"], z_value=r["z"], momentum=tuple(r["momentum"]),
                grad_norm_sq=r["grad_norm_sq"], variance=r["variance"], variance_rate=r["variance_rate"],
                time=r["time"],
            )
        if u0.grid.N != params.N:
            raise CheckpointError("checkpoint dimension does not match N")
    else:
        u0 = _initial_field(cfg, params)
    rec = evolve(
        u0,
        ecfg,
        params,
        t0=t0,
        csv_path=out.path("trajectory.csv"),
        checkpoint_path=out.path("state.ghfd"),
        header={"command": "evolve", **cfg},
        reference=reference,
    )
    summary = rec.summary()
    try:
        summary["virial"] = virial_consistency(rec).as_dict()
    except InsufficientSamples:
        summary["virial"] = None
    return summary


def cmd_evolve(cfg, args, out: Outputs) -> dict:
    summary = _run_evolution(cfg, out, args.resume)
    result = {**_stamp("evolve", cfg), "params": _params(cfg).as_dict(), **summary}
    out.write_json("evolve.json", result)
    return result


def _sweep_dynamic_one(item):
    cfg, beta, threads = item
    set_fft_workers(threads)
    c = dict(cfg, beta=beta)
    s = _run_evolution(c, Outputs(None))
    return beta, s["status"], s["grad_norm_ratio"], s["t_final"]


def cmd_sweep(cfg, args, out: Outputs) -> dict:
    params = _params(cfg)
    ground = _ground(cfg, params)
    betas = np.linspace(cfg["beta_min"], cfg["beta_max"], cfg["beta_count"])
    rows = []
    for beta in betas:
        inp, G = gaussian_observables(float(beta), cfg["gamma"], params, cfg["energy_model"])
        rep = classify_datum(inp, G, ground)
        rows.append([float(beta), cfg["gamma"], inp.energy, rep.me_value, rep.g_value, rep.verdict.value])
    cols = ["beta", "gamma", "energy", "me", "g", "verdict"]
    if cfg["mode"] == "dynamic":
        items = [(cfg, float(b), 1) for b in betas]
        workers = max(1, args.threads)
        if workers == 1:
            dyn = [_sweep_dynamic_one(i) for i in items]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                dyn = list(pool.map(_sweep_dynamic_one, items))
        for r, d in zip(rows, dyn):
            r += [d[1], d[2], d[3]]
        cols += ["status", "grad_norm_ratio", "t_final"]
    stamp = _stamp("sweep", cfg)
    out.write_csv("sweep.csv", [f"ghartree {__version__}", f"config_hash {stamp['config_hash']}"], cols, rows)
    table = _threshold_rows(params, ground, cfg["energy_model"])
    result = {**stamp, "params": params.as_dict(), "thresholds": table, "columns": cols, "rows": rows}
    out.write_json("sweep.json", result)
    return result


COMMANDS = {
    "params": cmd_params,
    "groundstate": cmd_groundstate,
    "thresholds": cmd_thresholds,
    "classify": cmd_classify,
    "evolve": cmd_evolve,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ghartree", description="Generalized Hartree equation toolkit")
    ap.add_argument("--version", action="version", version=f"ghartree {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=f"{name} (keys: {', '.join(sorted(SCHEMAS[name]))})")
        sp.add_argument("pairs", nargs="*", metavar="key=value")
        sp.add_argument("--config", help="file of key=value lines")
        sp.add_argument("--out", help="directory for output files")
        sp.add_argument("--threads", type=int, default=1, help="FFT workers / sweep processes")
        sp.add_argument("--seed", type=int, default=None, help="accepted for compatibility; runs are deterministic")
        sp.add_argument("--resume", help="GHFD checkpoint to continue from (evolve)")
    return ap


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgError(message)


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("GHARTREE_LOG", "WARNING").upper(), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    parser.__class__ = _Parser
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            sp.__class__ = _Parser
    try:
        args = parser.parse_args(argv)
    except _ArgError as exc:
        return _fail(EXIT_CONFIG, "usage", str(exc))
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        set_fft_workers(args.threads)
        cfg = build_config(args.command, args.pairs, args.config)
        out = Outputs(args.out)
        result = COMMANDS[args.command](cfg, args, out)
    except NUMERICAL_ERRORS as exc:
        return _fail(EXIT_NUMERIC, type(exc).__name__, str(exc))
    except (GHartreeError, ValueError) as exc:
        return _fail(EXIT_CONFIG, type(exc).__name__, str(exc))
    sys.stdout.write(_dumps(result) + "\n")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
