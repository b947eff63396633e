"""Time-dependent Hamiltonian for two modulated qubits in a driven cavity pair.

All energies are angular frequencies in rad/ns (hbar = 1), times in ns.
The lab-frame Hamiltonian assembled here is

    H(t) = sum_i [omega_ci (a_i^dag a_i + 1/2) + (omega_qi / 2) sigma_z_i]
         + sum_i g_i m_i(t) sigma_x_i (a_i^dag + a_i)
         + H_drive(t)

where m_i(t) = cos(pi u_i(t)) is the trajectory modulation (the qubit
coupling keeps its counter-rotating pieces, no rotating-wave approximation),
and the photon-pair drive comes in two variants:

* ``squeezing``: (g0/2) (a_1^dag a_2^dag e^{i s omega_d t} + h.c.) with a
  selectable phase sign s. Note that with the full static cavity energies
  retained, s = +1 makes the pair term rotate at 2 omega_d (far off
  resonance, essentially inert), while s = -1 makes it resonant and is the
  convention equivalent to the rotating-wave limit of ``full_drive``;
* ``full_drive``: g0 cos(omega_d t) (a_1^dag + a_1)(a_2^dag + a_2), the full
  parametric coupling including counter-rotating pieces.

The drive frequency is pinned to omega_d = omega_c1 + omega_c2 (pair
resonance) unless explicitly overridden.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError
from .statespace import (CAVITY_1, CAVITY_2, QUBIT_1, QUBIT_2, HilbertConfig,
                         annihilation, embed, pauli)
from .trajectory import Trajectory

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SystemParams:
    """Frequencies and couplings in rad/ns."""

    omega_c1: float
    omega_c2: float
    omega_q1: float
    omega_q2: float
    g1: float
    g2: float
    g0: float
    omega_d: Optional[float] = None
    coupling_model: str = "full_drive"
    squeezing_phase_sign: int = -1
    drop_zero_point: bool = True
    allow_off_resonant_drive: bool = False

    def __post_init__(self):
        for name in ("omega_c1", "omega_c2", "omega_q1", "omega_q2"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.coupling_model not in ("squeezing", "full_drive"):
            raise ConfigError(
                f"coupling_model must be 'squeezing' or 'full_drive', got {self.coupling_model!r}")
        if self.squeezing_phase_sign not in (+1, -1):
            raise ConfigError(f"squeezing_phase_sign must be +1 or -1, got {self.squeezing_phase_sign}")
        if self.omega_d is None:
            object.__setattr__(self, "omega_d", self.omega_c1 + self.omega_c2)
        pair = self.omega_c1 + self.omega_c2
        if not self.allow_off_resonant_drive and abs(self.omega_d - pair) > 1e-9 * pair:
            raise ConfigError(
                f"omega_d = {self.omega_d} is not the pair resonance {pair}; "
                "set allow_off_resonant_drive to study detuned drives")

    @classmethod
    def from_ghz(cls, omega_c1, omega_c2, omega_q1, omega_q2, g1, g2, g0,
                 omega_d=None, **kwargs) -> "SystemParams":
        """Build from linear frequencies in GHz (multiplied by 2 pi)."""
        return cls(TWO_PI * omega_c1, TWO_PI * omega_c2, TWO_PI * omega_q1,
                   TWO_PI * omega_q2, TWO_PI * g1, TWO_PI * g2, TWO_PI * g0,
                   None if omega_d is None else TWO_PI * omega_d, **kwargs)

    def with_couplings(self, g1=None, g2=None, g0=None) -> "SystemParams":
        return replace(self,
                       g1=self.g1 if g1 is None else g1,
                       g2=self.g2 if g2 is None else g2,
                       g0=self.g0 if g0 is None else g0)


@dataclass
class DrivenTerm:
    """One time-dependent term: coefficient(t) * operator (+ h.c. when pair)."""

    label: str
    operator: np.ndarray
    coefficient: Callable[[float], complex]
    pair: bool  # True: add the Hermitian conjugate; False: real coeff, Hermitian op
    operator_hc: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.pair and self.operator_hc is None:
            self.operator_hc = self.operator.conj().T.copy()


@dataclass
class HamiltonianTerms:
    """Static part plus driven terms, with helpers the integrator consumes."""

    cfg: HilbertConfig
    params: SystemParams
    static_part: np.ndarray
    terms: list
    trajectories: tuple

    @property
    def dim(self) -> int:
        return self.cfg.dim

    @property
    def static_diagonal(self) -> np.ndarray:
        """The static part is diagonal in the product basis; return it as a vector."""
        return np.real(np.diag(self.static_part))

    def evaluate(self, t: float) -> np.ndarray:
        """Dense lab-frame H(t)."""
        h = self.static_part.copy()
        self.add_driven(t, h)
        return h

    def add_driven(self, t: float, out: np.ndarray) -> None:
        """Accumulate the driven terms at time t into a dense matrix."""
        for term in self.terms:
            c = term.coefficient(t)
            if term.pair:
                out += c * term.operator
                out += np.conj(c) * term.operator_hc
            else:
                out += float(np.real(c)) * term.operator

    def apply(self, t: float, psi: np.ndarray) -> np.ndarray:
        """H(t) @ psi without assembling the dense matrix."""
        out = self.static_part @ psi
        self.apply_driven(t, psi, out)
        return out

    def apply_driven(self, t: float, psi: np.ndarray, out: np.ndarray) -> None:
        for term in self.terms:
            c = term.coefficient(t)
            if term.pair:
                out += c * (term.operator @ psi)
                out += np.conj(c) * (term.operator_hc @ psi)
            else:
                out += float(np.real(c)) * (term.operator @ psi)

    def breakpoints(self, t_end: float) -> np.ndarray:
        pts = [traj.breakpoints(t_end) for traj in self.trajectories]
        if not pts:
            return np.empty(0)
        return np.unique(np.concatenate(pts))

    def compile_sparse(self) -> "CompiledDriven":
        """One shared-pattern CSR for the driven part; see CompiledDriven."""
        entries = []
        for term in self.terms:
            c = term.coefficient
            if term.pair:
                entries.append((term.operator, c))
                entries.append((term.operator_hc,
                                lambda t, _c=c: np.conj(_c(t))))
            else:
                entries.append((term.operator,
                                lambda t, _c=c: complex(np.real(_c(t)))))
        return CompiledDriven(entries, self.dim)


class CompiledDriven:
    """The driven terms flattened onto one fixed CSR sparsity pattern.

    Every operator in the model touches a few entries per row (ladder and
    Pauli products), so summing scaled data vectors over the union pattern
    and doing a single sparse product per right-hand-side call is an order
    of magnitude cheaper than dense assembly. ``assemble`` returns an
    internal scratch matrix: use it immediately, do not store it.
    """

    def __init__(self, entries, dim: int):
        pattern = sp.csr_matrix((dim, dim), dtype=complex)
        for op, _ in entries:
            mask = sp.csr_matrix(np.asarray(op, complex))
            mask.data[:] = 1.0
            pattern = pattern + mask
        pattern.sum_duplicates()
        pattern.sort_indices()
        self._csr = pattern.astype(complex)
        self._rows = np.repeat(np.arange(dim), np.diff(pattern.indptr))
        self._cols = pattern.indices.copy()
        self._datas = [np.asarray(op, complex)[self._rows, self._cols]
                       for op, _ in entries]
        self._coeffs = [fn for _, fn in entries]
        self._scratch = np.empty_like(self._csr.data)

    def assemble(self, t: float, phases: Optional[np.ndarray] = None) -> sp.csr_matrix:
        """Scratch CSR of the driven part at time t.

        With ``phases`` = exp(i e t) the entries are conjugated into the
        interaction picture of the diagonal static part e.
        """
        d = self._csr.data
        d[:] = 0.0
        for fn, dk in zip(self._coeffs, self._datas):
            c = fn(t)
            if c != 0.0:
                np.multiply(dk, c, out=self._scratch)
                d += self._scratch
        if phases is not None:
            d *= phases[self._rows]
            d *= phases.conj()[self._cols]
        return self._csr


def build(params: SystemParams, traj1: Trajectory, traj2: Trajectory,
          cfg: HilbertConfig) -> HamiltonianTerms:
    """Assemble static and driven operators for the given motion profiles."""
    a1 = embed(annihilation(cfg.n_fock), CAVITY_1, cfg)
    a2 = embed(annihilation(cfg.n_fock), CAVITY_2, cfg)
    sx1 = embed(pauli("x"), QUBIT_1, cfg)
    sx2 = embed(pauli("x"), QUBIT_2, cfg)
    sz1 = embed(pauli("z"), QUBIT_1, cfg)
    sz2 = embed(pauli("z"), QUBIT_2, cfg)

    zp = 0.0 if params.drop_zero_point else 0.5
    number1 = a1.conj().T @ a1
    number2 = a2.conj().T @ a2
    static = (params.omega_c1 * (number1 + zp * np.eye(cfg.dim))
              + params.omega_c2 * (number2 + zp * np.eye(cfg.dim))
              + 0.5 * params.omega_q1 * sz1
              + 0.5 * params.omega_q2 * sz2)

    x1 = a1 + a1.conj().T
    x2 = a2 + a2.conj().T
    terms = [
        DrivenTerm("qubit1_coupling", sx1 @ x1,
                   _real_coefficient(params.g1, traj1), pair=False),
        DrivenTerm("qubit2_coupling", sx2 @ x2,
                   _real_coefficient(params.g2, traj2), pair=False),
    ]

    omega_d = params.omega_d
    if params.coupling_model == "squeezing":
        sign = params.squeezing_phase_sign
        pair_op = a1.conj().T @ a2.conj().T
        half_g0 = 0.5 * params.g0

        def squeeze_coeff(t, _s=sign, _w=omega_d, _a=half_g0):
            return _a * np.exp(1j * _s * _w * t)

        terms.append(DrivenTerm("pair_drive", pair_op, squeeze_coeff, pair=True))
    else:
        quad_op = x1 @ x2
        g0 = params.g0

        def drive_coeff(t, _w=omega_d, _g=g0):
            return _g * np.cos(_w * t)

        terms.append(DrivenTerm("pair_drive", quad_op, drive_coeff, pair=False))

    return HamiltonianTerms(cfg=cfg, params=params, static_part=static.astype(complex),
                            terms=terms, trajectories=(traj1, traj2))


def _real_coefficient(g: float, traj: Trajectory):
    def coeff(t, _g=g, _traj=traj):
        return _g * _traj.modulation(t)
    return coeff


def hermiticity_defect(terms: HamiltonianTerms, t: float) -> float:
    h = terms.evaluate(t)
    return float(np.max(np.abs(h - h.conj().T)))
