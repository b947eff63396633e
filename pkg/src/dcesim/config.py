"""Run and sweep configuration: JSON documents validated with field paths.

Frequencies and couplings are entered in GHz (the figure-caption unit) and
converted to angular rad/ns internally; every time is in ns. A run uses the
Schrodinger propagator when `noise` is null and the Lindblad propagator
otherwise.
"""

from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass, field
from typing import Optional

from . import trajectory as traj_mod
from .dynamics import NoiseParams
from .errors import ConfigError
from .hamiltonian import SystemParams
from .trajectory import Trajectory

_COUPLING_MODELS = ("full_drive", "squeezing")
_FRAMES = ("interaction", "lab")
_METHODS = ("dopri5", "rk4")

DEFAULT_RTOL = 1e-8
DEFAULT_ATOL = 1e-10
DEFAULT_N_SAMPLES = 2000
DEFAULT_AUTO = {"start_n": 4, "step": 2, "tol": 1e-3, "max_n": 12}


def _req(d: dict, key: str, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    if key not in d:
        raise ConfigError(f"{where}.{key}: missing required field")
    return d[key]


def _num(val, where: str) -> float:
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {val!r}")
    return float(val)


def _int(val, where: str) -> int:
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"{where}: expected an integer, got {val!r}")
    return val


def _bool(val, where: str) -> bool:
    if not isinstance(val, bool):
        raise ConfigError(f"{where}: expected true/false, got {val!r}")
    return val


def _choice(val, options, where: str) -> str:
    if val not in options:
        raise ConfigError(f"{where}: expected one of {options}, got {val!r}")
    return val


@dataclass
class OutputOptions:
    csv: bool = True
    summary: bool = True
    figures: bool = True


@dataclass
class RunConfig:
    system: SystemParams
    trajectories: tuple  # (Trajectory, Trajectory)
    n_fock: object  # int or "auto"
    auto_opts: dict
    noise: Optional[NoiseParams]
    t_end_ns: float
    n_samples: int
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    frame: str = "interaction"
    method: str = "dopri5"
    outputs: OutputOptions = field(default_factory=OutputOptions)
    seed: int = 0  # reserved; the pipeline is deterministic
    label: str = "run"
    raw: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        """Echo as a JSON-ready document that re-parses to this config."""
        return copy.deepcopy(self.raw)


def parse_system(d: dict, where: str = "system") -> SystemParams:
    kwargs = {}
    for name in ("omega_c1", "omega_c2", "omega_q1", "omega_q2"):
        v = _num(_req(d, f"{name}_ghz", where), f"{where}.{name}_ghz")
        if v <= 0:
            raise ConfigError(f"{where}.{name}_ghz: must be positive, got {v}")
        kwargs[name] = v
    for name in ("g1", "g2", "g0"):
        v = _num(_req(d, f"{name}_ghz", where), f"{where}.{name}_ghz")
        if v < 0:
            raise ConfigError(f"{where}.{name}_ghz: must be non-negative, got {v}")
        kwargs[name] = v
    if d.get("omega_d_ghz") is not None:
        kwargs["omega_d"] = _num(d["omega_d_ghz"], f"{where}.omega_d_ghz")
    kwargs["coupling_model"] = _choice(d.get("coupling_model", "full_drive"),
                                       _COUPLING_MODELS, f"{where}.coupling_model")
    sign = d.get("squeezing_phase_sign", -1)
    if sign not in (-1, 1):
        raise ConfigError(f"{where}.squeezing_phase_sign: expected -1 or 1, got {sign!r}")
    kwargs["squeezing_phase_sign"] = sign
    if "allow_off_resonant_drive" in d:
        kwargs["allow_off_resonant_drive"] = _bool(
            d["allow_off_resonant_drive"], f"{where}.allow_off_resonant_drive")
    try:
        return SystemParams.from_ghz(**kwargs)
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def parse_noise(d, where: str = "noise") -> Optional[NoiseParams]:
    if d is None:
        return None
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object or null")
    kwargs = {}
    for json_key, attr in (("t1_ns", "t1_q"), ("tphi_ns", "tphi_q"),
                           ("tcav_ns", "t_cav")):
        if d.get(json_key) is not None:
            v = _num(d[json_key], f"{where}.{json_key}")
            if v <= 0:
                raise ConfigError(f"{where}.{json_key}: must be positive, got {v}")
            kwargs[attr] = v
    return NoiseParams(**kwargs)


def parse_run_config(doc: dict, where: str = "config") -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected a JSON object")
    system = parse_system(_req(doc, "system", where), f"{where}.system")

    trajs = _req(doc, "trajectories", where)
    if not isinstance(trajs, list) or len(trajs) != 2:
        raise ConfigError(f"{where}.trajectories: expected a list of exactly 2 records")
    t1 = traj_mod.from_record(trajs[0], f"{where}.trajectories[0]")
    t2 = traj_mod.from_record(trajs[1], f"{where}.trajectories[1]")

    hil = _req(doc, "hilbert", where)
    n_fock = _req(hil, "n_fock", f"{where}.hilbert")
    auto_opts = dict(DEFAULT_AUTO)
    if n_fock == "auto":
        for key in auto_opts:
            if key in hil:
                auto_opts[key] = (_num(hil[key], f"{where}.hilbert.{key}")
                                  if key == "tol" else
                                  _int(hil[key], f"{where}.hilbert.{key}"))
    else:
        n_fock = _int(n_fock, f"{where}.hilbert.n_fock")
        if n_fock < 2:
            raise ConfigError(f"{where}.hilbert.n_fock: must be >= 2, got {n_fock}")

    noise = parse_noise(doc.get("noise"), f"{where}.noise")

    grid = _req(doc, "grid", where)
    t_end = _num(_req(grid, "t_end_ns", f"{where}.grid"), f"{where}.grid.t_end_ns")
    if t_end <= 0:
        raise ConfigError(f"{where}.grid.t_end_ns: must be positive, got {t_end}")
    n_samples = _int(grid.get("n_samples", DEFAULT_N_SAMPLES), f"{where}.grid.n_samples")
    if n_samples < 2:
        raise ConfigError(f"{where}.grid.n_samples: must be >= 2, got {n_samples}")

    integ = doc.get("integrator", {})
    if not isinstance(integ, dict):
        raise ConfigError(f"{where}.integrator: expected an object")
    rtol = _num(integ.get("rtol", DEFAULT_RTOL), f"{where}.integrator.rtol")
    atol = _num(integ.get("atol", DEFAULT_ATOL), f"{where}.integrator.atol")
    if rtol <= 0 or atol <= 0:
        raise ConfigError(f"{where}.integrator: rtol and atol must be positive")
    frame = _choice(integ.get("frame", "interaction"), _FRAMES,
                    f"{where}.integrator.frame")
    method = _choice(integ.get("method", "dopri5"), _METHODS,
                     f"{where}.integrator.method")

    out = doc.get("outputs", {})
    if not isinstance(out, dict):
        raise ConfigError(f"{where}.outputs: expected an object")
    outputs = OutputOptions(
        csv=_bool(out.get("csv", True), f"{where}.outputs.csv"),
        summary=_bool(out.get("summary", True), f"{where}.outputs.summary"),
        figures=_bool(out.get("figures", True), f"{where}.outputs.figures"),
    )

    seed = _int(doc.get("seed", 0), f"{where}.seed")
    label = doc.get("label", "run")
    if not isinstance(label, str) or not re.fullmatch(r"[A-Za-z0-9._-]+", label):
        raise ConfigError(f"{where}.label: expected a filename-safe string, got {label!r}")

    return RunConfig(system=system, trajectories=(t1, t2), n_fock=n_fock,
                     auto_opts=auto_opts, noise=noise, t_end_ns=t_end,
                     n_samples=n_samples, rtol=rtol, atol=atol, frame=frame,
                     method=method, outputs=outputs, seed=seed, label=label,
                     raw=copy.deepcopy(doc))


def load_run_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_run_config(doc, where="config")


@dataclass
class SweepAxis:
    path: str  # e.g. "system.g0_ghz" or "trajectories[1].shift_ns"
    values: list


@dataclass
class SweepConfig:
    base: dict  # raw run-config document
    axes: list  # 1 or 2 SweepAxis
    cell_cap: int = 10_000


_PATH_TOKEN = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)|\[(\d+)\]")


def set_config_path(doc: dict, path: str, value, where: str = "axis") -> None:
    """Assign `value` at a dotted/indexed path inside a config document."""
    tokens = []
    pos = 0
    for m in _PATH_TOKEN.finditer(path):
        if m.start() != pos:
            break
        tokens.append(m.group(1) if m.group(1) is not None else int(m.group(2)))
        pos = m.end()
        if pos < len(path) and path[pos] == ".":
            pos += 1
    if pos != len(path) or not tokens:
        raise ConfigError(f"{where}.path: cannot parse {path!r}")
    node = doc
    for tok in tokens[:-1]:
        try:
            node = node[tok]
        except (KeyError, IndexError, TypeError):
            raise ConfigError(f"{where}.path: {path!r} does not resolve "
                              f"(failed at {tok!r})") from None
    last = tokens[-1]
    if isinstance(node, list):
        if not isinstance(last, int) or last >= len(node):
            raise ConfigError(f"{where}.path: bad index {last!r} in {path!r}")
    elif not isinstance(node, dict):
        raise ConfigError(f"{where}.path: {path!r} does not land in an object")
    node[last] = value


def parse_sweep_config(doc: dict, where: str = "sweep") -> SweepConfig:
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected a JSON object")
    base = _req(doc, "base", where)
    parse_run_config(base, f"{where}.base")  # validate eagerly
    axes_doc = _req(doc, "axes", where)
    if not isinstance(axes_doc, list) or not 1 <= len(axes_doc) <= 2:
        raise ConfigError(f"{where}.axes: expected a list of 1 or 2 axes")
    axes = []
    for i, ax in enumerate(axes_doc):
        w = f"{where}.axes[{i}]"
        path = _req(ax, "path", w)
        values = _req(ax, "values", w)
        if not isinstance(values, list) or not values:
            raise ConfigError(f"{w}.values: expected a non-empty list")
        probe = copy.deepcopy(base)
        set_config_path(probe, path, values[0], w)
        parse_run_config(probe, f"{w} (applied to base)")
        axes.append(SweepAxis(path=path, values=values))
    cap = _int(doc.get("cell_cap", 10_000), f"{where}.cell_cap")
    n_cells = 1
    for ax in axes:
        n_cells *= len(ax.values)
    if n_cells > cap:
        raise ConfigError(f"{where}: {n_cells} cells exceed the cap {cap}")
    return SweepConfig(base=base, axes=axes, cell_cap=cap)


def load_sweep_config(path: str) -> SweepConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"sweep config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_sweep_config(doc, where="sweep")
