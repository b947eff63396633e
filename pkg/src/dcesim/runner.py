"""Execute validated run configurations and write their artifacts.

A run produces up to three files in the output directory, all sharing the
config label as basename: a CSV time series with a fixed column set, a JSON
summary (maximum concurrence, Fock cutoff actually used, integrator stats,
config echo), and a rendered figure. Floats are written with 12 significant
digits so identical configs produce byte-identical files. After writing, the
artifacts are re-read and checked against the physical column invariants.
"""

from __future__ import annotations

import copy
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

import numpy as np

from . import __version__
from .analysis import COLUMN_ORDER, SnapshotAnalyzer, TimeSeries, find_max
from .config import RunConfig, SweepConfig, parse_run_config, set_config_path
from .dynamics import (NoiseParams, converge_fock, evolve_lindblad,
                       evolve_schrodinger)
from .errors import ConfigError, NumericsError, StateError
from .hamiltonian import build
from .statespace import HilbertConfig, QuantumState
from .trajectory import from_record

FLOAT_FMT = "%.12g"


@dataclass
class RunResult:
    label: str
    series: TimeSeries
    c_max: float
    t_max: float
    n_fock_used: int
    step_stats: dict
    csv_path: Optional[str] = None
    summary_path: Optional[str] = None
    figure_path: Optional[str] = None

    def summary_dict(self, cfg: RunConfig) -> dict:
        return {
            "label": self.label,
            "c_max": self.c_max,
            "t_max_ns": self.t_max,
            "n_fock_used": self.n_fock_used,
            "integrator_stats": self.step_stats,
            "columns": list(COLUMN_ORDER),
            "version": __version__,
            "config": cfg.to_dict(),
        }


def time_grid(cfg: RunConfig) -> np.ndarray:
    return np.linspace(0.0, cfg.t_end_ns, cfg.n_samples)


def _evolve_once(cfg: RunConfig, n_fock: int):
    """One evolution at a fixed cutoff; returns (series, stats)."""
    hcfg = HilbertConfig(n_fock=n_fock)
    terms = build(cfg.system, cfg.trajectories[0], cfg.trajectories[1], hcfg)
    analyzer = SnapshotAnalyzer(hcfg)
    state = QuantumState.vacuum_ground(hcfg)
    grid = time_grid(cfg)
    if cfg.noise is not None and not cfg.noise.empty:
        result = evolve_lindblad(terms, state, cfg.noise, grid,
                                 rtol=cfg.rtol, atol=cfg.atol, frame=cfg.frame,
                                 store_states=False, observer=analyzer)
    else:
        result = evolve_schrodinger(terms, state, grid,
                                    rtol=cfg.rtol, atol=cfg.atol,
                                    frame=cfg.frame, method=cfg.method,
                                    store_states=False, observer=analyzer)
    stats = result.step_stats.as_dict()
    stats["min_qubit_eig"] = analyzer.min_qubit_eig
    return analyzer.series(), stats


def compute_run(cfg: RunConfig) -> RunResult:
    """Evolve per the config (resolving an "auto" Fock ladder) and analyze."""
    if cfg.n_fock == "auto":
        opts = cfg.auto_opts

        def runner(n):
            series, stats = _evolve_once(cfg, n)
            return (series, stats), series.concurrence

        n_used, (series, stats) = converge_fock(
            runner, start_n=opts["start_n"], step=opts["step"],
            tol=opts["tol"], max_n=opts["max_n"])
    else:
        n_used = int(cfg.n_fock)
        series, stats = _evolve_once(cfg, n_used)
    c_max, t_max = find_max(series)
    return RunResult(label=cfg.label, series=series, c_max=c_max, t_max=t_max,
                     n_fock_used=n_used, step_stats=stats)


def write_series_csv(path: str, series: TimeSeries) -> None:
    data = np.column_stack([series.columns()[name] for name in COLUMN_ORDER])
    np.savetxt(path, data, delimiter=",", comments="",
               header=",".join(COLUMN_ORDER), fmt=FLOAT_FMT)


def read_series_csv(path: str) -> dict:
    """Re-read a CSV written by write_series_csv as {column: array}."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(header):
        raise StateError(f"{path}: {data.shape[1]} columns vs header {len(header)}")
    return {name: data[:, i] for i, name in enumerate(header)}


def validate_series_file(path: str, grid: np.ndarray) -> None:
    """Post-write check: re-read and assert the physical column invariants."""
    cols = read_series_csv(path)
    if tuple(cols) != COLUMN_ORDER:
        raise StateError(f"{path}: column order {tuple(cols)} != {COLUMN_ORDER}")
    if not np.allclose(cols["t_ns"], grid, atol=1e-9):
        raise StateError(f"{path}: time column does not match the run grid")
    conc = cols["concurrence"]
    if conc.min() < -1e-12 or conc.max() > 1.0 + 1e-9:
        raise StateError(f"{path}: concurrence outside [0, 1]")
    bell = (cols["phi_plus"] + cols["phi_minus"]
            + cols["psi_plus"] + cols["psi_minus"])
    if np.max(np.abs(bell - 1.0)) > 1e-6:
        raise StateError(f"{path}: Bell populations do not sum to 1")
    for name in ("n1", "n2", "pe1", "pe2"):
        if cols[name].min() < -1e-9:
            raise StateError(f"{path}: negative population in column {name}")


def execute_run(cfg: RunConfig, outdir: str) -> RunResult:
    """compute_run plus artifact files under outdir, per cfg.outputs."""
    result = compute_run(cfg)
    os.makedirs(outdir, exist_ok=True)
    base = os.path.join(outdir, cfg.label)
    if cfg.outputs.csv:
        result.csv_path = base + ".csv"
        write_series_csv(result.csv_path, result.series)
        validate_series_file(result.csv_path, time_grid(cfg))
    if cfg.outputs.summary:
        result.summary_path = base + ".json"
        with open(result.summary_path, "w") as fh:
            json.dump(result.summary_dict(cfg), fh, indent=2, sort_keys=True)
            fh.write("\n")
        _validate_summary_roundtrip(result.summary_path, cfg)
    if cfg.outputs.figures:
        from . import plots
        result.figure_path = base + ".png"
        plots.render_run_figure(result.series, cfg.label, result.figure_path)
    return result


def _validate_summary_roundtrip(path: str, cfg: RunConfig) -> None:
    with open(path) as fh:
        summary = json.load(fh)
    echo = parse_run_config(summary["config"])
    same = (echo.system == cfg.system and echo.trajectories == cfg.trajectories
            and echo.n_fock == cfg.n_fock and echo.noise == cfg.noise
            and echo.t_end_ns == cfg.t_end_ns
            and echo.n_samples == cfg.n_samples and echo.label == cfg.label)
    if not same:
        raise StateError(f"{path}: config echo does not re-parse to the same run")


# -- trajectory-only tables (no dynamics) -----------------------------------

TRAJECTORY_COLUMNS = ("t_ns", "u1", "u2", "mod1", "mod2")


def execute_trajectory_table(doc: dict, outdir: str) -> dict:
    """Tabulate the motion profiles of a trajectory-only document.

    Writes label.csv with positions and coupling modulations and, when
    requested, a rendered figure. Returns the artifact paths.
    """
    label = doc.get("label", "trajectories")
    grid_doc = doc.get("grid", {})
    t_end = float(grid_doc.get("t_end_ns", 100.0))
    n_samples = int(grid_doc.get("n_samples", 1000))
    if t_end <= 0 or n_samples < 2:
        raise ConfigError(f"{label}: bad trajectory grid ({t_end} ns, {n_samples})")
    recs = doc.get("trajectories")
    if not isinstance(recs, (list, tuple)) or len(recs) != 2:
        raise ConfigError(f"{label}: expected exactly two trajectory records")
    tr1 = from_record(recs[0], where=f"{label}.trajectories[0]")
    tr2 = from_record(recs[1], where=f"{label}.trajectories[1]")
    t = np.linspace(0.0, t_end, n_samples)
    data = np.column_stack([t, tr1.position(t), tr2.position(t),
                            tr1.modulation(t), tr2.modulation(t)])
    os.makedirs(outdir, exist_ok=True)
    paths = {"csv": os.path.join(outdir, label + ".csv")}
    np.savetxt(paths["csv"], data, delimiter=",", comments="",
               header=",".join(TRAJECTORY_COLUMNS), fmt=FLOAT_FMT)
    outputs = doc.get("outputs", {})
    if outputs.get("figures", True):
        from . import plots
        paths["figure"] = os.path.join(outdir, label + ".png")
        plots.render_trajectory_figure(t, tr1, tr2, label, paths["figure"])
    return paths


# -- parameter sweeps --------------------------------------------------------

SWEEP_FIXED_COLUMNS = ("c_max", "t_max_ns", "n_fock_used", "phi_plus",
                       "phi_minus", "psi_plus", "psi_minus", "error")


def _sweep_cell(payload):
    """Worker: run one sweep cell, never raise; errors become row text."""
    index, doc = payload
    try:
        cfg = parse_run_config(doc)
        result = compute_run(cfg)
        series = result.series
        bell = {name: float(getattr(series, name)[-1])
                for name in ("phi_plus", "phi_minus", "psi_plus", "psi_minus")}
        return index, {"c_max": result.c_max, "t_max_ns": result.t_max,
                       "n_fock_used": result.n_fock_used, **bell, "error": ""}
    except (ConfigError, StateError, NumericsError) as exc:
        return index, {"error": f"{type(exc).__name__}: {exc}"}


def sweep_cells(sweep: SweepConfig) -> list:
    """Cell documents in deterministic order: lexicographic over axis values."""
    cells = []
    value_lists = [axis.values for axis in sweep.axes]
    for index, combo in enumerate(product(*value_lists)):
        doc = copy.deepcopy(sweep.base)
        for axis, value in zip(sweep.axes, combo):
            set_config_path(doc, axis.path, value)
        doc["label"] = f"{doc.get('label', 'run')}-cell{index:04d}"
        cells.append((index, combo, doc))
    return cells


def execute_sweep(sweep: SweepConfig, outdir: str, jobs: int = 1) -> str:
    """Run every cell, write one summary row each; returns the CSV path.

    Row order is the cell order regardless of execution order or worker
    count. A failing cell fills its error column; only all cells failing is
    an error for the sweep as a whole.
    """
    cells = sweep_cells(sweep)
    payloads = [(index, doc) for index, _, doc in cells]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = dict(pool.map(_sweep_cell, payloads))
    else:
        outcomes = dict(map(_sweep_cell, payloads))

    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, "sweep.csv")
    axis_names = [axis.path for axis in sweep.axes]
    with open(path, "w") as fh:
        fh.write(",".join(axis_names + list(SWEEP_FIXED_COLUMNS)) + "\n")
        for index, combo, _ in cells:
            row = [FLOAT_FMT % v for v in combo]
            outcome = outcomes[index]
            for name in SWEEP_FIXED_COLUMNS[:-1]:
                value = outcome.get(name)
                if name == "n_fock_used":
                    row.append("" if value is None else str(int(value)))
                else:
                    row.append("" if value is None else FLOAT_FMT % value)
            # keep the row a single CSV line whatever the message contains
            message = outcome["error"].replace(",", ";").replace("\n", " ")
            row.append(message)
            fh.write(",".join(row) + "\n")

    n_failed = sum(1 for o in outcomes.values() if o["error"])
    if n_failed == len(cells):
        raise NumericsError(f"all {n_failed} sweep cells failed; see {path}")
    base_outputs = sweep.base.get("outputs", {})
    if base_outputs.get("figures", True) and len(sweep.axes) in (1, 2):
        from . import plots
        plots.render_sweep_figure(path, axis_names,
                                  os.path.join(outdir, "sweep.png"))
    return path
