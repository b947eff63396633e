"""Config document parsing: field naming in errors, defaults, sweeps."""

import copy
import json

import numpy as np
import pytest

from dcesim.config import (RunConfig, load_run_config, load_sweep_config,
                           parse_noise, parse_run_config, parse_sweep_config,
                           set_config_path)
from dcesim.errors import ConfigError

from conftest import quick_doc

TWO_PI = 2.0 * np.pi


def test_round_trip_and_defaults():
    cfg = parse_run_config(quick_doc())
    assert isinstance(cfg, RunConfig)
    assert np.isclose(cfg.system.omega_c1, TWO_PI * 4.0)
    assert np.isclose(cfg.system.g0, TWO_PI * 0.004)
    assert cfg.n_fock == 4 and cfg.noise is None
    assert cfg.t_end_ns == 5.0 and cfg.n_samples == 51
    assert cfg.rtol == 1e-8 and cfg.atol == 1e-10
    assert cfg.frame == "interaction" and cfg.method == "dopri5"
    assert cfg.outputs.csv and not cfg.outputs.figures
    assert cfg.label == "quick"
    assert cfg.to_dict() == quick_doc()
    # minimal document picks up all defaults
    doc = quick_doc()
    for key in ("noise", "integrator", "outputs", "seed", "label"):
        doc.pop(key, None)
    cfg = parse_run_config(doc)
    assert cfg.label == "run" and cfg.outputs.figures
    assert cfg.rtol == 1e-8


def test_errors_name_the_failing_field():
    cases = [
        (lambda d: d.pop("system"), "system"),
        (lambda d: d["system"].pop("omega_c1_ghz"), "system.omega_c1_ghz"),
        (lambda d: d["system"].update(omega_c2_ghz=-5.0), "system.omega_c2_ghz"),
        (lambda d: d["system"].update(g1_ghz=-0.1), "system.g1_ghz"),
        (lambda d: d["system"].update(coupling_model="dipole"), "coupling_model"),
        (lambda d: d["system"].update(squeezing_phase_sign=0), "squeezing_phase_sign"),
        (lambda d: d["grid"].pop("t_end_ns"), "grid.t_end_ns"),
        (lambda d: d["grid"].update(t_end_ns=0.0), "grid.t_end_ns"),
        (lambda d: d["grid"].update(n_samples=1), "grid.n_samples"),
        (lambda d: d["hilbert"].update(n_fock=1), "hilbert.n_fock"),
        (lambda d: d["hilbert"].update(n_fock=4.5), "hilbert.n_fock"),
        (lambda d: d.update(integrator={"rtol": 0.0}), "integrator"),
        (lambda d: d.update(integrator={"frame": "rotating"}), "integrator.frame"),
        (lambda d: d.update(integrator={"method": "euler"}), "integrator.method"),
        (lambda d: d.update(outputs={"csv": "yes"}), "outputs.csv"),
        (lambda d: d.update(trajectories=[{"type": "static"}]), "trajectories"),
        (lambda d: d.update(noise={"t1_ns": -3.0}), "noise.t1_ns"),
        (lambda d: d.update(noise=[1, 2]), "noise"),
        (lambda d: d.update(label="bad label!"), "label"),
        (lambda d: d.update(seed="7"), "seed"),
    ]
    for mutate, needle in cases:
        doc = quick_doc()
        mutate(doc)
        with pytest.raises(ConfigError, match=needle.replace("[", r"\[")):
            parse_run_config(doc)


def test_auto_fock_collects_ladder_options():
    doc = quick_doc()
    doc["hilbert"] = {"n_fock": "auto", "start_n": 6, "tol": 5e-4}
    cfg = parse_run_config(doc)
    assert cfg.n_fock == "auto"
    assert cfg.auto_opts["start_n"] == 6
    assert cfg.auto_opts["tol"] == 5e-4
    assert cfg.auto_opts["step"] == 2 and cfg.auto_opts["max_n"] == 12


def test_noise_parsing_variants():
    assert parse_noise(None) is None
    n = parse_noise({"t1_ns": 1e4, "tphi_ns": 2e4, "tcav_ns": 1e5})
    assert (n.t1_q, n.tphi_q, n.t_cav) == (1e4, 2e4, 1e5)
    partial = parse_noise({"tphi_ns": 3e3})
    assert partial.t1_q is None and partial.tphi_q == 3e3
    # explicit nulls disable channels rather than erroring
    assert parse_noise({"t1_ns": None}).t1_q is None


def test_drive_frequency_override():
    doc = quick_doc()
    doc["system"]["omega_d_ghz"] = 9.0  # the pair resonance, allowed
    assert np.isclose(parse_run_config(doc).system.omega_d, TWO_PI * 9.0)
    doc["system"]["omega_d_ghz"] = 8.0
    with pytest.raises(ConfigError, match="pair resonance"):
        parse_run_config(doc)
    doc["system"]["allow_off_resonant_drive"] = True
    assert np.isclose(parse_run_config(doc).system.omega_d, TWO_PI * 8.0)


def test_load_run_config_from_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(quick_doc()))
    cfg = load_run_config(str(path))
    assert cfg.label == "quick"
    with pytest.raises(ConfigError, match="not found"):
        load_run_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_run_config(str(bad))


def test_set_config_path():
    doc = quick_doc()
    set_config_path(doc, "system.g0_ghz", 0.01)
    assert doc["system"]["g0_ghz"] == 0.01
    set_config_path(doc, "trajectories[1].u0", 0.5)
    assert doc["trajectories"][1]["u0"] == 0.5
    with pytest.raises(ConfigError, match="cannot parse"):
        set_config_path(doc, "system..g0", 1)
    with pytest.raises(ConfigError, match="does not resolve"):
        set_config_path(doc, "missing.key", 1)
    with pytest.raises(ConfigError, match="bad index"):
        set_config_path(doc, "trajectories[5]", {})


def sweep_doc(**kwargs):
    doc = {
        "base": quick_doc(),
        "axes": [{"path": "system.g0_ghz", "values": [0.002, 0.004]}],
    }
    doc.update(kwargs)
    return doc


def test_parse_sweep_config():
    sw = parse_sweep_config(sweep_doc())
    assert len(sw.axes) == 1
    assert sw.axes[0].values == [0.002, 0.004]
    two = sweep_doc(axes=[
        {"path": "system.g0_ghz", "values": [0.002, 0.004]},
        {"path": "trajectories[0].u0", "values": [0.0, 0.25, 0.5]},
    ])
    assert len(parse_sweep_config(two).axes) == 2


def test_sweep_validation_errors():
    with pytest.raises(ConfigError, match="axes"):
        parse_sweep_config(sweep_doc(axes=[]))
    with pytest.raises(ConfigError, match="values"):
        parse_sweep_config(sweep_doc(axes=[{"path": "system.g0_ghz",
                                            "values": []}]))
    with pytest.raises(ConfigError, match="does not resolve"):
        parse_sweep_config(sweep_doc(axes=[{"path": "nonsense.path",
                                            "values": [1]}]))
    # first value must leave the base document valid
    with pytest.raises(ConfigError, match="applied to base"):
        parse_sweep_config(sweep_doc(axes=[{"path": "system.g0_ghz",
                                            "values": [-1.0]}]))
    with pytest.raises(ConfigError, match="cap"):
        parse_sweep_config(sweep_doc(cell_cap=1))
    bad_base = sweep_doc()
    bad_base["base"]["grid"]["t_end_ns"] = -1.0
    with pytest.raises(ConfigError, match="t_end_ns"):
        parse_sweep_config(bad_base)


def test_load_sweep_config_from_file(tmp_path):
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(sweep_doc()))
    assert len(load_sweep_config(str(path)).axes) == 1
    with pytest.raises(ConfigError, match="not found"):
        load_sweep_config(str(tmp_path / "nope.json"))
