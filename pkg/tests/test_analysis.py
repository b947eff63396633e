"""Concurrence, Bell populations, peak finding, and window statistics."""

import numpy as np
import pytest

from dcesim import trajectory as traj
from dcesim.analysis import (BELL_ORDER, COLUMN_ORDER, SnapshotAnalyzer,
                             TimeSeries, analyze, anticorrelation_check,
                             appendix_a_structure, bell_populations,
                             concurrence, find_max)
from dcesim.dynamics import evolve_schrodinger
from dcesim.errors import StateError
from dcesim.hamiltonian import SystemParams, build
from dcesim.statespace import HilbertConfig, ground_state

SQ2 = 1.0 / np.sqrt(2.0)
# basis order everywhere: (ee, eg, ge, gg)
PHI_PLUS = np.array([SQ2, 0.0, 0.0, SQ2])
PHI_MINUS = np.array([SQ2, 0.0, 0.0, -SQ2])
PSI_PLUS = np.array([0.0, SQ2, SQ2, 0.0])
PSI_MINUS = np.array([0.0, SQ2, -SQ2, 0.0])


def dm(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def random_density(rng, rank=4):
    a = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def test_concurrence_product_states_zero():
    for i in range(4):
        e = np.zeros(4)
        e[i] = 1.0
        assert concurrence(dm(e)) == 0.0


def test_concurrence_bell_states_one():
    for psi in (PHI_PLUS, PHI_MINUS, PSI_PLUS, PSI_MINUS):
        assert np.isclose(concurrence(dm(psi)), 1.0)


def test_concurrence_partially_entangled_pure():
    for theta in np.linspace(0.0, np.pi / 2, 7):
        psi = np.array([np.cos(theta), 0.0, 0.0,
                        np.sin(theta) * np.exp(0.7j)])
        assert np.isclose(concurrence(dm(psi)), abs(np.sin(2 * theta)),
                          atol=1e-12)


def test_concurrence_random_pure_oracle():
    # for a pure state a|ee> + b|eg> + c|ge> + d|gg>, C = 2|ad - bc|
    rng = np.random.default_rng(42)
    for _ in range(25):
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        expected = 2.0 * abs(psi[0] * psi[3] - psi[1] * psi[2])
        assert np.isclose(concurrence(dm(psi)), expected, atol=1e-10)


def test_concurrence_werner_states():
    for p in (0.0, 0.2, 1.0 / 3.0, 0.5, 0.9, 1.0):
        rho = p * dm(PHI_PLUS) + (1.0 - p) * np.eye(4) / 4.0
        expected = max(0.0, (3.0 * p - 1.0) / 2.0)
        assert np.isclose(concurrence(rho), expected, atol=1e-10)


def test_concurrence_x_state_formula():
    rng = np.random.default_rng(7)
    for _ in range(20):
        p = rng.random(4) + 0.05
        p /= p.sum()
        c14 = rng.random() * 0.95 * np.sqrt(p[0] * p[3]) * np.exp(2j * np.pi * rng.random())
        c23 = rng.random() * 0.95 * np.sqrt(p[1] * p[2]) * np.exp(2j * np.pi * rng.random())
        rho = np.diag(p).astype(complex)
        rho[0, 3], rho[3, 0] = c14, np.conj(c14)
        rho[1, 2], rho[2, 1] = c23, np.conj(c23)
        expected = 2.0 * max(0.0,
                             abs(c14) - np.sqrt(p[1] * p[2]),
                             abs(c23) - np.sqrt(p[0] * p[3]))
        assert np.isclose(concurrence(rho), expected, atol=1e-10)


def test_concurrence_local_unitary_invariant():
    rng = np.random.default_rng(3)
    for _ in range(10):
        rho = random_density(rng, rank=2)
        u1, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        u2, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        u = np.kron(u1, u2)
        assert np.isclose(concurrence(u @ rho @ u.conj().T), concurrence(rho),
                          atol=1e-10)


def test_concurrence_tolerates_integrator_dust():
    rho = (1.0 + 4e-7) * dm(PHI_PLUS) - 4e-7 * dm(PSI_MINUS)
    assert np.isclose(concurrence(rho), 1.0, atol=1e-5)


def test_concurrence_rejects_unphysical():
    with pytest.raises(StateError, match="4x4"):
        concurrence(np.eye(3) / 3.0)
    rho = dm(PHI_PLUS).astype(complex)
    rho[0, 3] += 1e-3  # hermiticity broken
    with pytest.raises(StateError, match="Hermitian"):
        concurrence(rho)
    with pytest.raises(StateError, match="trace"):
        concurrence(0.9 * dm(PHI_PLUS))
    bad = (1.0 + 5e-6) * dm(PHI_PLUS) - 5e-6 * dm(PSI_MINUS)
    with pytest.raises(StateError, match="negative eigenvalue"):
        concurrence(bad)


def test_bell_populations_pure_bell():
    pops = bell_populations(dm(PHI_MINUS))
    assert np.isclose(pops["phi_minus"], 1.0)
    assert np.isclose(pops["phi_plus"] + pops["psi_plus"] + pops["psi_minus"],
                      0.0, atol=1e-12)


def test_bell_populations_product_splits_psi():
    eg = np.array([0.0, 1.0, 0.0, 0.0])
    pops = bell_populations(dm(eg))
    assert np.isclose(pops["psi_plus"], 0.5)
    assert np.isclose(pops["psi_minus"], 0.5)
    assert np.isclose(pops["phi_plus"], 0.0, atol=1e-12)


def test_bell_populations_sum_to_one():
    rng = np.random.default_rng(11)
    for _ in range(10):
        pops = bell_populations(random_density(rng))
        assert np.isclose(sum(pops.values()), 1.0, atol=1e-12)
    assert BELL_ORDER == ("phi_plus", "phi_minus", "psi_plus", "psi_minus")


def make_series(t, c, psi_plus=None):
    n = len(t)
    z = np.zeros(n)
    return TimeSeries(times=np.asarray(t, float), concurrence=np.asarray(c, float),
                      phi_plus=z, phi_minus=z,
                      psi_plus=z if psi_plus is None else np.asarray(psi_plus, float),
                      psi_minus=z, n1=z, n2=z, pe1=z, pe2=z)


def test_find_max_refines_parabola_vertex():
    t = np.linspace(0.0, 7.0, 15)  # vertex at 3.3 sits between samples
    c = 1.0 - (t - 3.3) ** 2 / 10.0
    c_max, t_max = find_max(make_series(t, c))
    assert abs(t_max - 3.3) < 1e-9
    assert abs(c_max - 1.0) < 1e-9


def test_find_max_edge_and_flat():
    t = np.linspace(0.0, 5.0, 6)
    c_max, t_max = find_max(make_series(t, t / 5.0))
    assert (c_max, t_max) == (1.0, 5.0)
    c_max, t_max = find_max(make_series(t, np.ones(6)))
    assert (c_max, t_max) == (1.0, 0.0)


def test_anticorrelation_flags_cooccurring_falls():
    t = np.linspace(0.0, 40.0, 401)
    psi = np.where((t >= 10.0) & (t < 20.0), (t - 10.0) * 0.03, 0.0)
    psi = np.where(t >= 20.0, 0.3, psi)
    c = np.where((t >= 10.0) & (t < 20.0), 0.5 - (t - 10.0) * 0.02, 0.5)
    c = np.where(t >= 20.0, 0.3 + (t - 20.0) * 0.001, c)
    c = np.where(t < 10.0, 0.2 + t * 0.03, c)
    out = anticorrelation_check(make_series(t, c, psi), n_windows=4)
    assert out["n_windows"] == 4
    assert out["n_rises"] == 1
    assert out["n_cooccur"] == 1
    assert out["ok"] is True


def test_anticorrelation_fails_when_concurrence_rises_too():
    t = np.linspace(0.0, 40.0, 401)
    psi = np.clip((t - 10.0) * 0.02, 0.0, 0.4)
    c = t / 80.0  # rises everywhere
    out = anticorrelation_check(make_series(t, c, psi), n_windows=4)
    assert out["n_rises"] >= 1
    assert out["ok"] is False
    quiet = anticorrelation_check(make_series(t, c, np.zeros_like(t)), n_windows=4)
    assert quiet["n_rises"] == 0 and quiet["ok"] is False


def test_anticorrelation_window_ns_controls_count():
    t = np.linspace(0.0, 40.0, 81)
    out = anticorrelation_check(make_series(t, t, np.zeros_like(t)), window_ns=10.0)
    assert out["n_windows"] == 4


def test_appendix_structure_flags_foreign_elements():
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0], rho[3, 3] = 0.01, 0.99
    rho[0, 3] = rho[3, 0] = 0.02
    rep = appendix_a_structure(rho)
    assert rep["ok"] is True and np.isclose(rep["rho14_abs"], 0.02)
    rho2 = rho.copy()
    rho2[1, 1], rho2[3, 3] = 0.05, 0.94
    rep2 = appendix_a_structure(rho2)
    assert rep2["ok"] is False and rep2["worst_element"] == "rho22"


def test_timeseries_columns_match_canonical_order():
    t = np.linspace(0.0, 1.0, 3)
    s = make_series(t, t)
    cols = s.columns()
    assert tuple(cols) == COLUMN_ORDER
    assert len(s) == 3
    assert s.bell.shape == (3, 4) and s.photons.shape == (3, 2)


def test_analyze_agrees_with_streaming_observer():
    params = SystemParams.from_ghz(omega_c1=4.0, omega_c2=5.0, omega_q1=4.0,
                                   omega_q2=5.0, g1=0.2, g2=0.2, g0=0.004)
    cfg = HilbertConfig(n_fock=3)
    terms = build(params, traj.static(0.0), traj.static(0.0), cfg)
    grid = np.linspace(0.0, 2.0, 5)
    stored = evolve_schrodinger(terms, ground_state(cfg), grid)
    series = analyze(stored, cfg)
    acc = SnapshotAnalyzer(cfg)
    evolve_schrodinger(terms, ground_state(cfg), grid, store_states=False,
                       observer=acc)
    streamed = acc.series()
    for name, col in series.columns().items():
        assert np.allclose(col, streamed.columns()[name], atol=1e-12)
    assert acc.min_qubit_eig > -1e-12
    with pytest.raises(StateError, match="stored"):
        analyze(evolve_schrodinger(terms, ground_state(cfg), grid,
                                   store_states=False), cfg)
