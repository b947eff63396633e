"""Time evolution: Schrodinger and Lindblad propagation on a fixed output grid.

The workhorse is an embedded Dormand-Prince 5(4) stepper with PI-free step
control, FSAL reuse, and a list of mandatory stop times (output grid points
plus trajectory bounce instants) that every step lands on exactly. Output
snapshots therefore need no dense-output interpolation.

Both propagators integrate in the interaction picture of the static part by
default. The static Hamiltonian is diagonal in the product basis, so the
frame change is an elementwise phase and is exact; it removes the fast
eigenphase rotation (hundreds of rad/ns) from the integrated variables and
leaves only coupling-scale dynamics, which buys an order of magnitude in
step size at identical accuracy. Snapshots are always transformed back to
the lab frame. A plain lab-frame path and a fixed-step classic RK4 path are
kept for cross-validation.

All collapse operators used here (sigma-, sigma_z, a) connect eigenstates
with a fixed energy offset, so they pick up only a global phase in the
interaction picture and the dissipator is identical in both frames.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, ConvergenceError, DivergenceError, StateError, StiffnessError
from .hamiltonian import HamiltonianTerms
from .statespace import (QUBIT_1, QUBIT_2, CAVITY_1, CAVITY_2, HilbertConfig,
                         QuantumState, annihilation, embed, pauli, sigma_minus)

# Dormand-Prince 5(4) tableau
_C = (0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0)
_A21 = 0.2
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                                49.0 / 176.0, -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                                -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)

_MAX_TRACE_DRIFT = 1e-4


@dataclass
class StepStats:
    n_accepted: int = 0
    n_rejected: int = 0
    n_rhs_evals: int = 0
    max_error_ratio: float = 0.0  # local error / tolerance, max over accepted steps
    min_step: float = np.inf
    max_step: float = 0.0
    drift: float = 0.0  # |norm - 1| (pure) or |trace - 1| (mixed) at the end

    def as_dict(self) -> dict:
        return {
            "n_accepted": self.n_accepted,
            "n_rejected": self.n_rejected,
            "n_rhs_evals": self.n_rhs_evals,
            "max_error_ratio": self.max_error_ratio,
            "min_step_ns": self.min_step,
            "max_step_ns": self.max_step,
            "drift": self.drift,
        }


@dataclass
class EvolutionResult:
    times: np.ndarray
    kind: str  # "pure" | "mixed"
    states: Optional[list]  # lab-frame snapshots at grid times, or None when streamed
    final_state: np.ndarray
    step_stats: StepStats
    n_fock: int


@dataclass(frozen=True)
class NoiseParams:
    """Relaxation and dephasing times in ns; None disables a channel.

    t1_q: qubit relaxation (sigma- at rate 1/t1_q, both qubits),
    tphi_q: qubit pure dephasing (sigma_z at rate 1/(2 tphi_q), both qubits),
    t_cav: cavity photon loss (a at rate 1/t_cav, both cavities).
    """

    t1_q: Optional[float] = None
    tphi_q: Optional[float] = None
    t_cav: Optional[float] = None

    def __post_init__(self):
        for name in ("t1_q", "tphi_q", "t_cav"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ConfigError(f"{name} must be positive, got {v}")

    @property
    def empty(self) -> bool:
        return self.t1_q is None and self.tphi_q is None and self.t_cav is None

    def channels(self, cfg: HilbertConfig) -> list:
        """(rate, local operator, subsystem) triples for the Lindblad dissipator."""
        out = []
        if self.t1_q is not None:
            sm = sigma_minus()
            out.append((1.0 / self.t1_q, sm, QUBIT_1))
            out.append((1.0 / self.t1_q, sm, QUBIT_2))
        if self.tphi_q is not None:
            sz = pauli("z")
            out.append((0.5 / self.tphi_q, sz, QUBIT_1))
            out.append((0.5 / self.tphi_q, sz, QUBIT_2))
        if self.t_cav is not None:
            a = annihilation(cfg.n_fock)
            out.append((1.0 / self.t_cav, a, CAVITY_1))
            out.append((1.0 / self.t_cav, a, CAVITY_2))
        return out


def _merge_stops(t_grid: np.ndarray, breakpoints: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Union of output times and mandatory boundaries, with an is-output mask."""
    pts = np.concatenate([t_grid, breakpoints])
    flags = np.concatenate([np.ones(len(t_grid), bool), np.zeros(len(breakpoints), bool)])
    order = np.argsort(pts, kind="stable")
    pts, flags = pts[order], flags[order]
    keep_pts = [pts[0]]
    keep_flags = [flags[0]]
    for p, f in zip(pts[1:], flags[1:]):
        if p - keep_pts[-1] <= 1e-12:
            keep_flags[-1] = keep_flags[-1] or f
        else:
            keep_pts.append(p)
            keep_flags.append(f)
    return np.array(keep_pts), np.array(keep_flags)


def _adaptive_dopri(rhs, y0, stops, is_output, rtol, atol, on_output,
                    post_accept=None) -> StepStats:
    """March through `stops`, landing exactly on each; snapshot where flagged."""
    stats = StepStats()
    y = y0.astype(complex).copy()
    t = stops[0]
    if is_output[0]:
        on_output(t, y)

    k1 = rhs(t, y)
    stats.n_rhs_evals += 1
    # crude but robust initial step guess
    sc = atol + rtol * np.abs(y)
    d0 = np.sqrt(np.mean(np.abs(y / sc) ** 2))
    d1 = np.sqrt(np.mean(np.abs(k1 / sc) ** 2))
    h = min(stops[-1] - stops[0], 0.01 * d0 / d1 if d1 > 0 else stops[-1] - stops[0])

    just_rejected = False
    for i_stop in range(1, len(stops)):
        t_target = stops[i_stop]
        fresh_segment = True
        while t < t_target - 1e-12:
            if h < 1e-13 * max(1.0, abs(t)):
                raise StiffnessError(
                    f"step size collapsed to {h:.3e} ns at t = {t:.6f} ns")
            clipped = min(h, t_target - t)

            if fresh_segment:
                # the RHS may be non-smooth across a segment boundary; do not
                # reuse the FSAL stage from the previous segment
                k1 = rhs(t, y)
                stats.n_rhs_evals += 1
                fresh_segment = False

            hh = clipped
            k2 = rhs(t + _C[0] * hh, y + hh * (_A21 * k1))
            k3 = rhs(t + _C[1] * hh, y + hh * (_A31 * k1 + _A32 * k2))
            k4 = rhs(t + _C[2] * hh, y + hh * (_A41 * k1 + _A42 * k2 + _A43 * k3))
            k5 = rhs(t + _C[3] * hh, y + hh * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
            k6 = rhs(t + hh, y + hh * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5))
            y5 = y + hh * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
            k7 = rhs(t + hh, y5)
            stats.n_rhs_evals += 6

            err = hh * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
            finite = np.all(np.isfinite(y5))
            if finite:
                sc = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
                err_ratio = float(np.sqrt(np.mean(np.abs(err / sc) ** 2)))
            else:
                err_ratio = np.inf

            if err_ratio <= 1.0:
                t = t + hh
                y = y5
                if post_accept is not None:
                    # rounding-level projection (e.g. re-Hermitization), so the
                    # FSAL stage k7 is still a valid derivative at y
                    y = post_accept(y)
                k1 = k7
                stats.n_accepted += 1
                stats.max_error_ratio = max(stats.max_error_ratio, err_ratio)
                stats.min_step = min(stats.min_step, hh)
                stats.max_step = max(stats.max_step, hh)
                factor = 5.0 if err_ratio == 0.0 else min(5.0, max(0.2, 0.9 * err_ratio ** -0.2))
                if just_rejected:
                    factor = min(1.0, factor)
                    just_rejected = False
                h = hh * factor
            else:
                stats.n_rejected += 1
                just_rejected = True
                if not finite:
                    h = 0.5 * hh
                    if h < 1e-13 * max(1.0, abs(t)):
                        raise DivergenceError(
                            f"state became non-finite at t = {t:.6f} ns")
                else:
                    h = hh * min(1.0, max(0.2, 0.9 * err_ratio ** -0.2))
        t = t_target
        if is_output[i_stop]:
            on_output(t, y)
    return stats


def _rk4_fixed(rhs, y0, stops, is_output, substeps, on_output) -> StepStats:
    """Classic fixed-step RK4 between stops; validation fallback."""
    stats = StepStats()
    y = y0.astype(complex).copy()
    if is_output[0]:
        on_output(stops[0], y)
    for i in range(1, len(stops)):
        t0, t1 = stops[i - 1], stops[i]
        n = max(1, int(np.ceil((t1 - t0) / (stops[-1] - stops[0]) * substeps)))
        h = (t1 - t0) / n
        t = t0
        for _ in range(n):
            k1 = rhs(t, y)
            k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
            k4 = rhs(t + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
            stats.n_accepted += 1
            stats.n_rhs_evals += 4
        t = t1
        if is_output[i]:
            on_output(t, y)
    return stats


def _as_vector(state) -> np.ndarray:
    if isinstance(state, QuantumState):
        if state.kind != "pure":
            raise StateError("evolve_schrodinger needs a pure state")
        return state.data
    vec = np.asarray(state, dtype=complex).ravel()
    nrm = np.linalg.norm(vec)
    if abs(nrm - 1.0) > 1e-8:
        raise StateError(f"initial norm {nrm} is not 1")
    return vec


def _as_density(state) -> np.ndarray:
    if isinstance(state, QuantumState):
        return state.as_density_matrix()
    arr = np.asarray(state, dtype=complex)
    if arr.ndim == 1:
        return np.outer(arr, arr.conj())
    if abs(np.trace(arr) - 1.0) > 1e-8:
        raise StateError(f"initial trace {np.trace(arr)} is not 1")
    return arr


def _check_grid(t_grid) -> np.ndarray:
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 2:
        raise ConfigError("time grid needs at least two points")
    if np.any(np.diff(t_grid) <= 0):
        raise ConfigError("time grid must be strictly increasing")
    return t_grid


def evolve_schrodinger(terms: HamiltonianTerms, state, t_grid, rtol: float = 1e-8,
                       atol: float = 1e-12, frame: str = "interaction",
                       method: str = "dopri5", rk4_substeps: int = 20000,
                       store_states: bool = True,
                       observer: Optional[Callable] = None) -> EvolutionResult:
    """Integrate i dpsi/dt = H(t) psi, snapshotting lab-frame states on t_grid."""
    t_grid = _check_grid(t_grid)
    psi0 = _as_vector(state)
    if psi0.shape[0] != terms.dim:
        raise StateError(f"state dim {psi0.shape[0]} != Hamiltonian dim {terms.dim}")
    e = terms.static_diagonal
    compiled = terms.compile_sparse()

    if frame == "interaction":
        def rhs(t, y):
            u = np.exp(1j * e * t)
            w = u.conj() * y
            out = compiled.assemble(t) @ w
            return -1j * (u * out)

        def to_lab(t, y):
            return np.exp(-1j * e * t) * y
    elif frame == "lab":
        def rhs(t, y):
            return -1j * (e * y + compiled.assemble(t) @ y)

        def to_lab(t, y):
            return y
    else:
        raise ConfigError(f"unknown frame {frame!r}")

    times_out, states_out = [], []
    last_lab = {"psi": psi0}

    def on_output(t, y):
        psi = to_lab(t, y)
        times_out.append(t)
        last_lab["psi"] = psi
        if store_states:
            states_out.append(psi.copy())
        if observer is not None:
            observer(t, psi)

    stops, is_output = _merge_stops(t_grid, terms.breakpoints(t_grid[-1]))
    if method == "dopri5":
        stats = _adaptive_dopri(rhs, psi0, stops, is_output, rtol, atol, on_output)
    elif method == "rk4":
        stats = _rk4_fixed(rhs, psi0, stops, is_output, rk4_substeps, on_output)
    else:
        raise ConfigError(f"unknown method {method!r}")

    final = last_lab["psi"]
    stats.drift = abs(float(np.linalg.norm(final)) - 1.0)
    if stats.drift > _MAX_TRACE_DRIFT:
        raise DivergenceError(f"norm drift {stats.drift:.3e} exceeds {_MAX_TRACE_DRIFT}")
    return EvolutionResult(times=np.array(times_out), kind="pure",
                           states=states_out if store_states else None,
                           final_state=final, step_stats=stats,
                           n_fock=terms.cfg.n_fock)


def evolve_lindblad(terms: HamiltonianTerms, state, noise: NoiseParams, t_grid,
                    rtol: float = 1e-8, atol: float = 1e-12,
                    frame: str = "interaction", store_states: bool = True,
                    observer: Optional[Callable] = None) -> EvolutionResult:
    """Integrate the Lindblad master equation, snapshots in the lab frame."""
    t_grid = _check_grid(t_grid)
    rho0 = _as_density(state)
    dim = terms.dim
    if rho0.shape != (dim, dim):
        raise StateError(f"state shape {rho0.shape} != {(dim, dim)}")
    cfg = terms.cfg
    e = terms.static_diagonal
    compiled = terms.compile_sparse()

    channels = noise.channels(cfg) if noise is not None else []
    diss_diag, diss_off = _compile_dissipator(channels, cfg)

    interaction = frame == "interaction"
    if not interaction and frame != "lab":
        raise ConfigError(f"unknown frame {frame!r}")

    def rhs(t, y):
        rho = y.reshape(dim, dim)
        if interaction:
            u = np.exp(1j * e * t)
            m = compiled.assemble(t, u) @ rho
        else:
            m = compiled.assemble(t) @ rho
            m += e[:, None] * rho
        out = m.conj().T - m
        out *= 1j  # -i (m - m^dag), valid for Hermitian rho stages
        out = out.reshape(-1)
        if diss_diag is not None:
            out += diss_diag * y
            if diss_off is not None:
                out += diss_off @ y
        return out

    def hermitize(y):
        rho = y.reshape(dim, dim)
        rho = 0.5 * (rho + rho.conj().T)
        return rho.reshape(-1)

    def to_lab(t, y):
        rho = y.reshape(dim, dim)
        if interaction:
            v = np.exp(-1j * e * t)
            rho = (v[:, None] * rho) * v.conj()[None, :]
        return rho

    times_out, states_out = [], []
    last_lab = {"rho": rho0}

    def on_output(t, y):
        rho = to_lab(t, y)
        times_out.append(t)
        last_lab["rho"] = rho
        if store_states:
            states_out.append(rho.copy())
        if observer is not None:
            observer(t, rho)

    stops, is_output = _merge_stops(t_grid, terms.breakpoints(t_grid[-1]))
    stats = _adaptive_dopri(rhs, rho0.reshape(-1), stops, is_output, rtol, atol,
                            on_output, post_accept=hermitize)
    final = last_lab["rho"]
    stats.drift = abs(float(np.trace(final).real) - 1.0) + abs(float(np.trace(final).imag))
    if stats.drift > _MAX_TRACE_DRIFT:
        raise DivergenceError(f"trace drift {stats.drift:.3e} exceeds {_MAX_TRACE_DRIFT}")
    return EvolutionResult(times=np.array(times_out), kind="mixed",
                           states=states_out if store_states else None,
                           final_state=final, step_stats=stats, n_fock=cfg.n_fock)


def _compile_dissipator(channels, cfg: HilbertConfig):
    """Constant dissipator as (diagonal vector, off-diagonal sparse superoperator).

    Row-major vec(rho) convention: vec(A rho B) = (A kron B^T) vec(rho), so
    the jump part of each channel is rate * (L kron conj(L)). The
    anticommutator part is diagonal for every supported channel (L^dag L
    diagonal), as is the jump part of dephasing, so those accumulate into a
    plain vector applied elementwise.
    """
    if not channels:
        return None, None
    dim = cfg.dim
    diag = np.zeros(dim * dim, dtype=complex)
    off = None
    for rate, op, subsystem in channels:
        lfull = embed(np.asarray(op, complex), subsystem, cfg)
        ldl_diag = _embed_diagonal(np.real(np.diag(op.conj().T @ op)), subsystem, cfg)
        diag -= 0.5 * rate * np.add.outer(ldl_diag, ldl_diag).reshape(-1)
        off_count = np.count_nonzero(lfull - np.diag(np.diag(lfull)))
        if off_count == 0:
            ld = np.diag(lfull)
            diag += rate * np.multiply.outer(ld, ld.conj()).reshape(-1)
        else:
            lsp = sp.csr_matrix(lfull)
            jump = rate * sp.kron(lsp, lsp.conj(), format="csr")
            off = jump if off is None else off + jump
    if off is not None:
        off = off.tocsr()
        off.sum_duplicates()
        off.sort_indices()
    return diag, off


def _embed_diagonal(local_diag: np.ndarray, subsystem: int, cfg: HilbertConfig) -> np.ndarray:
    out = np.ones(1)
    for slot, d in enumerate(cfg.dims):
        out = np.kron(out, local_diag if slot == subsystem else np.ones(d))
    return out


def converge_fock(runner: Callable[[int], tuple], start_n: int = 4, step: int = 2,
                  tol: float = 1e-3, max_n: int = 12):
    """Raise the Fock cutoff until the concurrence curve stops moving.

    `runner(n_fock)` must return (result, concurrence_array) on a fixed time
    grid. Truncations start_n, start_n + step, ... are compared pairwise; the
    first truncation whose curve agrees with the next one to within `tol`
    (max absolute difference) is returned together with its result. A
    non-finite `tol` skips the comparison and returns start_n directly.
    """
    if start_n < 2 or step < 1:
        raise ConfigError(f"bad ladder parameters start_n={start_n}, step={step}")
    result, conc = runner(start_n)
    if not np.isfinite(tol):
        return start_n, result
    n = start_n
    while n + step <= max_n:
        result_next, conc_next = runner(n + step)
        delta = float(np.max(np.abs(np.asarray(conc_next) - np.asarray(conc))))
        if delta < tol:
            return n, result
        n += step
        result, conc = result_next, conc_next
    raise ConvergenceError(
        f"concurrence not converged at n_fock = {n} (last change {delta:.3e} >= {tol})"
        if n > start_n else
        f"Fock ladder exhausted before any comparison (max_n = {max_n})")
