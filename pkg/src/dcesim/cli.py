"""Command-line front end.

Subcommands:
  run           execute one JSON run config, write CSV/JSON/PNG artifacts
  preset        materialize a named figure's configs, optionally execute them
  sweep         run a parameter sweep, one summary row per cell
  perturbative  tabulate the oracle amplitude against the closed forms

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .config import load_run_config, load_sweep_config, parse_run_config, parse_system
from .errors import ConfigError, NumericsError, StateError
from .perturbative import closed_form, match_closed_form, triple_integral
from .presets import PRESET_NAMES, get_preset
from .runner import (FLOAT_FMT, execute_run, execute_sweep,
                     execute_trajectory_table)
from .trajectory import from_record


def _cmd_run(args) -> int:
    cfg = load_run_config(args.config)
    result = execute_run(cfg, args.out)
    print(f"{cfg.label}: C_max={result.c_max:.6f} at t_max={result.t_max:.3f} ns "
          f"(n_fock={result.n_fock_used})")
    for path in (result.csv_path, result.summary_path, result.figure_path):
        if path:
            print(f"  wrote {path}")
    return 0


def _cmd_preset(args) -> int:
    docs = get_preset(args.name)
    os.makedirs(args.out, exist_ok=True)
    for doc in docs:
        path = os.path.join(args.out, doc["label"] + ".config.json")
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {path}")
    if not args.execute:
        return 0
    for doc in docs:
        if doc.get("trajectory_only"):
            paths = execute_trajectory_table(doc, args.out)
            print(f"{doc['label']}: wrote {paths['csv']}")
        else:
            result = execute_run(parse_run_config(doc), args.out)
            print(f"{doc['label']}: C_max={result.c_max:.6f} at "
                  f"t_max={result.t_max:.3f} ns (n_fock={result.n_fock_used})")
    return 0


def _cmd_sweep(args) -> int:
    sweep = load_sweep_config(args.config)
    path = execute_sweep(sweep, args.out, jobs=args.jobs)
    print(f"wrote {path}")
    return 0


def _parse_t_spec(spec: str) -> np.ndarray:
    """Times from "a,b,c" or "start:stop:num"; empty spec is allowed."""
    spec = spec.strip()
    if not spec:
        return np.empty(0)
    try:
        if ":" in spec:
            parts = spec.split(":")
            if len(parts) != 3:
                raise ValueError("range spec needs start:stop:num")
            start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
            if num < 1:
                raise ValueError("range spec needs num >= 1")
            return np.linspace(start, stop, num)
        return np.array([float(tok) for tok in spec.split(",") if tok.strip()])
    except ValueError as exc:
        raise ConfigError(f"--t: {exc}")


def _cmd_perturbative(args) -> int:
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise ConfigError("config: expected a JSON object")
    system = parse_system(doc.get("system", {}))
    recs = doc.get("trajectories")
    if not isinstance(recs, list) or len(recs) != 2:
        raise ConfigError("trajectories: expected exactly two records")
    tr1 = from_record(recs[0], where="trajectories[0]")
    tr2 = from_record(recs[1], where="trajectories[1]")
    if tr1.apply_bounce_sign or tr2.apply_bounce_sign:
        raise ConfigError("the perturbative oracle supports sign-free trajectories")
    n_grid = int(doc.get("n_grid", 1024))
    times = _parse_t_spec(args.t)
    if np.any(times < 0):
        raise ConfigError("--t: times must be non-negative")

    kind, params = match_closed_form(tr1, tr2, system)
    couplings = (system.g0, system.g1, system.g2)
    f1, f2 = tr1.phase_function(), tr2.phase_function()
    lines = ["t_ns,C_oracle,C_closed_form,rel_diff"]
    for t in times:
        oracle = triple_integral(f1, f2, system.omega_d, float(t),
                                 n_grid=n_grid, couplings=couplings)
        row = [FLOAT_FMT % t, FLOAT_FMT % oracle.concurrence]
        if kind is None:
            row += ["", ""]
        else:
            reference = float(closed_form(kind, params, float(t)))
            row.append(FLOAT_FMT % reference)
            if reference > 0:
                rel = abs(oracle.concurrence - reference) / reference
                row.append(FLOAT_FMT % rel)
            else:
                row.append("")
        lines.append(",".join(row))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcesim",
        description="Two-qubit entanglement from a driven cavity pair: "
                    "simulation runs, figure presets, sweeps, oracle tables.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one run config")
    p_run.add_argument("--config", required=True, help="path to a JSON run config")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_preset = sub.add_parser("preset", help="materialize a figure preset")
    p_preset.add_argument("--name", required=True, choices=PRESET_NAMES)
    p_preset.add_argument("--out", required=True, help="output directory")
    p_preset.add_argument("--exec", dest="execute", action="store_true",
                          help="also execute the materialized configs")
    p_preset.set_defaults(func=_cmd_preset)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    p_sweep.add_argument("--config", required=True, help="path to a JSON sweep config")
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.add_argument("--jobs", type=int, default=1, help="worker processes")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_pert = sub.add_parser("perturbative",
                            help="oracle vs closed-form table at given times")
    p_pert.add_argument("--config", required=True,
                        help="JSON with system and trajectories blocks")
    p_pert.add_argument("--t", required=True,
                        help="times in ns: 'a,b,c' or 'start:stop:num'")
    p_pert.add_argument("--out", help="CSV path (default: stdout)")
    p_pert.set_defaults(func=_cmd_perturbative)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, StateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
