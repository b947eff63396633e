"""Entanglement and Bell-basis observables extracted from evolution snapshots.

Two-qubit reduced matrices follow the (ee, eg, ge, gg) basis order used
throughout the package, so rho14 is the <ee|rho|gg> pair coherence that the
two-mode squeezing drive builds up.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import EvolutionResult
from .errors import StateError
from .statespace import HilbertConfig, partial_trace_to_qubits

# adaptive-step density matrices carry O(rtol) negative dust; clip up to the
# same 1e-6 budget the positivity invariant allows, refuse anything worse
_EIG_CLIP = 1e-6

# |phi+-> = (|gg> +- |ee>)/sqrt2, |psi+-> = (|ge> +- |eg>)/sqrt2
_SQ2 = 1.0 / np.sqrt(2.0)
_BELL_VECTORS = {
    "phi_plus": np.array([_SQ2, 0.0, 0.0, _SQ2]),
    "phi_minus": np.array([-_SQ2, 0.0, 0.0, _SQ2]),
    "psi_plus": np.array([0.0, _SQ2, _SQ2, 0.0]),
    "psi_minus": np.array([0.0, -_SQ2, _SQ2, 0.0]),
}
BELL_ORDER = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")

COLUMN_ORDER = ("t_ns", "concurrence", "phi_plus", "phi_minus", "psi_plus",
                "psi_minus", "n1", "n2", "pe1", "pe2")


def _validate_rho2q(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise StateError(f"two-qubit density matrix must be 4x4, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-8:
        raise StateError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > 1e-6:
        raise StateError(f"density matrix trace {tr} != 1")
    return rho


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(rho)
    if vals[0] < -_EIG_CLIP:
        raise StateError(f"density matrix has negative eigenvalue {vals[0]:.3e}")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def concurrence(rho2q: np.ndarray) -> float:
    """Wootters concurrence of a two-qubit density matrix.

    The eigenvalues of rho * rho_tilde are obtained from the similar
    Hermitian positive matrix sqrt(rho) * rho_tilde * sqrt(rho), which keeps
    them real and non-negative up to numerical dust.
    """
    rho = _validate_rho2q(rho2q)
    yy = np.zeros((4, 4))
    yy[0, 3] = yy[3, 0] = -1.0
    yy[1, 2] = yy[2, 1] = 1.0
    rho_tilde = yy @ rho.conj() @ yy
    s = _psd_sqrt(rho)
    m = s @ rho_tilde @ s
    m = 0.5 * (m + m.conj().T)
    lam2 = np.linalg.eigvalsh(m)
    lam2 = np.clip(lam2, 0.0, None)
    lam = np.sqrt(lam2)[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def bell_populations(rho2q: np.ndarray) -> dict:
    """Populations of the four Bell projectors; they sum to 1."""
    rho = _validate_rho2q(rho2q)
    out = {}
    for name in BELL_ORDER:
        v = _BELL_VECTORS[name]
        out[name] = float(np.real(v @ rho @ v))
    return out


@dataclass
class TimeSeries:
    """Per-snapshot observables on the output time grid (all 1d arrays)."""

    times: np.ndarray
    concurrence: np.ndarray
    phi_plus: np.ndarray
    phi_minus: np.ndarray
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    pe1: np.ndarray
    pe2: np.ndarray

    @property
    def bell(self) -> np.ndarray:
        return np.column_stack([self.phi_plus, self.phi_minus,
                                self.psi_plus, self.psi_minus])

    @property
    def photons(self) -> np.ndarray:
        return np.column_stack([self.n1, self.n2])

    @property
    def qubit_pops(self) -> np.ndarray:
        return np.column_stack([self.pe1, self.pe2])

    def columns(self) -> dict:
        """Column name -> array, in canonical output order."""
        data = (self.times, self.concurrence, self.phi_plus, self.phi_minus,
                self.psi_plus, self.psi_minus, self.n1, self.n2, self.pe1,
                self.pe2)
        return dict(zip(COLUMN_ORDER, data))

    def __len__(self) -> int:
        return len(self.times)


class SnapshotAnalyzer:
    """Incremental observable accumulator, usable as an evolve observer.

    Feeding snapshots through `observe` avoids keeping full states in memory
    for long runs; `series()` returns the assembled TimeSeries.
    """

    def __init__(self, cfg: HilbertConfig):
        self.cfg = cfg
        self._rows = {name: [] for name in COLUMN_ORDER}
        self.min_qubit_eig = np.inf

    def observe(self, t: float, state: np.ndarray) -> None:
        cfg = self.cfg
        state = np.asarray(state, dtype=complex)
        # strip integrator norm/trace drift; the raw drift stays visible in
        # the evolution's StepStats
        if state.ndim == 1:
            state = state / np.linalg.norm(state)
        else:
            state = state / np.real(np.trace(state))
        rho2q = partial_trace_to_qubits(state, cfg)
        self.min_qubit_eig = min(self.min_qubit_eig,
                                 float(np.linalg.eigvalsh(rho2q)[0]))
        c = concurrence(rho2q)
        bell = bell_populations(rho2q)
        bell_sum = sum(bell.values())
        if abs(bell_sum - 1.0) > 1e-6:
            raise StateError(f"Bell populations sum to {bell_sum}, not 1")

        if state.ndim == 1:
            diag = np.abs(state) ** 2
        else:
            diag = np.real(np.diagonal(state))
        p = diag.reshape(cfg.dims)
        fock = np.arange(cfg.n_fock)
        rows = self._rows
        rows["t_ns"].append(float(t))
        rows["concurrence"].append(c)
        for name in BELL_ORDER:
            rows[name].append(bell[name])
        rows["n1"].append(float(np.tensordot(fock, p.sum(axis=(1, 2, 3)), axes=1)))
        rows["n2"].append(float(np.tensordot(fock, p.sum(axis=(0, 2, 3)), axes=1)))
        rows["pe1"].append(float(p[:, :, 1, :].sum()))
        rows["pe2"].append(float(p[:, :, :, 1].sum()))

    def __call__(self, t: float, state: np.ndarray) -> None:
        self.observe(t, state)

    def series(self) -> TimeSeries:
        return TimeSeries(**{
            field: np.array(vals) for field, vals in
            zip(("times", "concurrence", "phi_plus", "phi_minus", "psi_plus",
                 "psi_minus", "n1", "n2", "pe1", "pe2"),
                (self._rows[name] for name in COLUMN_ORDER))
        })


def analyze(result: EvolutionResult, cfg: HilbertConfig) -> TimeSeries:
    """Reduce stored snapshots to the standard observable set."""
    if result.states is None:
        raise StateError("evolution was run without stored states; "
                         "attach a SnapshotAnalyzer observer instead")
    acc = SnapshotAnalyzer(cfg)
    for t, state in zip(result.times, result.states):
        acc.observe(t, state)
    return acc.series()


def find_max(series: TimeSeries) -> tuple:
    """(C_max, t_max): grid peak refined by a local quadratic fit.

    Ties break to the earliest time; edge peaks are returned as-is.
    """
    c = np.asarray(series.concurrence, dtype=float)
    t = np.asarray(series.times, dtype=float)
    if len(c) == 0:
        raise StateError("empty series")
    i = int(np.argmax(c))
    if i == 0 or i == len(c) - 1:
        return float(c[i]), float(t[i])
    t0, t1, t2 = t[i - 1], t[i], t[i + 1]
    c0, c1, c2 = c[i - 1], c[i], c[i + 1]
    denom = (t1 - t0) * (c1 - c2) - (t1 - t2) * (c1 - c0)
    scale = max(abs(c0), abs(c1), abs(c2), 1e-300) * (t2 - t0)
    if abs(denom) < 1e-12 * scale:
        return float(c1), float(t1)
    t_star = t1 - 0.5 * ((t1 - t0) ** 2 * (c1 - c2) - (t1 - t2) ** 2 * (c1 - c0)) / denom
    if not (t0 <= t_star <= t2):
        return float(c1), float(t1)
    # Lagrange evaluation of the fitted parabola at its vertex
    l0 = (t_star - t1) * (t_star - t2) / ((t0 - t1) * (t0 - t2))
    l1 = (t_star - t0) * (t_star - t2) / ((t1 - t0) * (t1 - t2))
    l2 = (t_star - t0) * (t_star - t1) / ((t2 - t0) * (t2 - t1))
    c_star = c0 * l0 + c1 * l1 + c2 * l2
    if c_star < c1:
        return float(c1), float(t1)
    return float(c_star), float(t_star)


def appendix_a_structure(rho2q: np.ndarray, coupling_scale: Optional[float] = None) -> dict:
    """Report how closely rho matches the weak-coupling X form.

    At third order in the couplings only the diagonal corners and the
    (ee, gg) coherence survive; the |eg>, |ge> populations and every other
    off-diagonal are higher-order small. Violations are reported, not
    raised, because they are expected for long or de-phased runs.
    """
    rho = _validate_rho2q(rho2q)
    rho14 = abs(rho[0, 3])
    residuals = {"rho22": abs(rho[1, 1]), "rho33": abs(rho[2, 2])}
    for i in range(4):
        for j in range(4):
            if i == j or (i, j) in ((0, 3), (3, 0)):
                continue
            residuals[f"rho{i + 1}{j + 1}"] = abs(rho[i, j])
    worst = max(residuals, key=residuals.get)
    threshold = 0.1 * rho14
    return {
        "rho14_abs": rho14,
        "rho22": residuals["rho22"],
        "rho33": residuals["rho33"],
        "max_residual": residuals[worst],
        "worst_element": worst,
        "threshold": threshold,
        "ok": bool(residuals[worst] < threshold),
        "coupling_scale": coupling_scale,
    }


def anticorrelation_check(series: TimeSeries, rise_threshold: float = 0.05,
                          n_windows: int = 40,
                          window_ns: Optional[float] = None) -> dict:
    """Sign test: windows where psi+ rises above threshold should see C fall.

    The time axis is split into equal windows (either `n_windows` of them or
    windows of `window_ns` each); per-window net changes of <psi+> and of the
    concurrence are compared. `ok` means every flagged rise co-occurs with a
    concurrence fall and at least one window was flagged.
    """
    t = np.asarray(series.times, dtype=float)
    span = t[-1] - t[0]
    if window_ns is not None:
        n_windows = max(1, int(round(span / window_ns)))
    edges = np.linspace(t[0], t[-1], n_windows + 1)
    idx = np.searchsorted(t, edges)
    idx[-1] = len(t) - 1
    rises, cooccur, windows = 0, 0, []
    for k in range(n_windows):
        i0, i1 = int(idx[k]), int(idx[k + 1])
        if i1 <= i0:
            continue
        d_psi = series.psi_plus[i1] - series.psi_plus[i0]
        d_c = series.concurrence[i1] - series.concurrence[i0]
        flagged = d_psi > rise_threshold
        if flagged:
            rises += 1
            if d_c < 0:
                cooccur += 1
        windows.append({"t0": float(t[i0]), "t1": float(t[i1]),
                        "d_psi_plus": float(d_psi), "d_concurrence": float(d_c),
                        "flagged": bool(flagged)})
    return {
        "n_windows": len(windows),
        "n_rises": rises,
        "n_cooccur": cooccur,
        "ok": bool(rises > 0 and cooccur == rises),
        "windows": windows,
    }
