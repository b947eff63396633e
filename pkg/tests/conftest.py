"""Shared fixtures. The session-scoped ones hold the expensive reference
runs (full 200 ns evolutions at the production cutoff) so the acceptance
tests can share them instead of recomputing per test."""

import copy

import pytest

from dcesim.config import parse_run_config
from dcesim.presets import get_preset
from dcesim.runner import compute_run

NOISE_DOC = {"t1_ns": 1.0e4, "tphi_ns": 1.0e4, "tcav_ns": 1.0e5}


def quick_doc(label="quick", n_fock=4, t_end=5.0, n_samples=51):
    """Small but fully real run config document (sub-second to evolve)."""
    return {
        "label": label,
        "system": {
            "omega_c1_ghz": 4.0, "omega_c2_ghz": 5.0,
            "omega_q1_ghz": 4.0, "omega_q2_ghz": 5.0,
            "g1_ghz": 0.2, "g2_ghz": 0.2, "g0_ghz": 0.004,
            "coupling_model": "full_drive",
        },
        "hilbert": {"n_fock": n_fock},
        "trajectories": [{"type": "static", "u0": 0.0},
                         {"type": "static", "u0": 0.0}],
        "noise": None,
        "grid": {"t_end_ns": t_end, "n_samples": n_samples},
        "integrator": {"rtol": 1e-8, "atol": 1e-10},
        "outputs": {"csv": True, "summary": True, "figures": False},
        "seed": 0,
    }


@pytest.fixture()
def make_quick_doc():
    return quick_doc


@pytest.fixture(scope="session")
def fig4_results():
    docs = get_preset("fig4")
    return {d["label"]: compute_run(parse_run_config(d)) for d in docs}


@pytest.fixture(scope="session")
def fig6_results():
    docs = [d for d in get_preset("fig6") if d["label"] != "fig6-static"]
    return {d["label"]: compute_run(parse_run_config(d)) for d in docs}


@pytest.fixture(scope="session")
def noisy_fig4_results():
    out = {}
    for doc in get_preset("fig4"):
        noisy = copy.deepcopy(doc)
        noisy["label"] = doc["label"] + "-noisy"
        noisy["noise"] = dict(NOISE_DOC)
        # density-matrix runs cost ~80x a pure-state step; 1e-6 keeps the
        # integration error two orders under the 0.05 acceptance margin
        noisy["integrator"] = {"rtol": 1e-6, "atol": 1e-9}
        out[doc["label"]] = compute_run(parse_run_config(noisy))
    return out
