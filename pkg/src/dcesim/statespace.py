"""Operators and states on the cavity1 x cavity2 x qubit1 x qubit2 Hilbert space.

Conventions used everywhere in the package:

* subsystem order: (cavity 1, cavity 2, qubit 1, qubit 2), dense kron in
  that order, so basis index = ((i_c1 * n + i_c2) * 2 + i_q1) * 2 + i_q2;
* qubit basis (|g>, |e>) with sigma_z = diag(-1, +1), so |g> is the
  sigma_z = -1 eigenstate and the bare qubit term is (omega_q / 2) sigma_z;
* reduced two-qubit matrices are reported in the Bell-friendly basis order
  (|ee>, |eg>, |ge>, |gg>), which puts the pair coherence <ee|rho|gg> in the
  upper-right corner.

Everything is dense complex128; with n_fock <= 8 the full dimension stays
at or below 256 which is comfortably small for direct linear algebra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, StateError

# subsystem slots in kron order
CAVITY_1, CAVITY_2, QUBIT_1, QUBIT_2 = 0, 1, 2, 3

# reduced two-qubit basis order used by all analysis code
TWO_QUBIT_BASIS = ("ee", "eg", "ge", "gg")


@dataclass(frozen=True)
class HilbertConfig:
    """Truncation choice for the two cavity modes (same cutoff for both)."""

    n_fock: int

    def __post_init__(self):
        if not isinstance(self.n_fock, int) or self.n_fock < 2:
            raise ConfigError(f"n_fock must be an integer >= 2, got {self.n_fock!r}")

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return (self.n_fock, self.n_fock, 2, 2)

    @property
    def dim(self) -> int:
        return 4 * self.n_fock * self.n_fock


def annihilation(n_fock: int) -> np.ndarray:
    """Truncated annihilation operator, a[m, m+1] = sqrt(m+1)."""
    if n_fock < 2:
        raise ConfigError(f"n_fock must be >= 2, got {n_fock}")
    return np.diag(np.sqrt(np.arange(1.0, n_fock)), k=1).astype(complex)


def pauli(which: str) -> np.ndarray:
    """Single-qubit Pauli matrix in the (|g>, |e>) basis, sigma_z = diag(-1, +1)."""
    if which == "x":
        return np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    if which == "z":
        return np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)
    raise ConfigError(f"unknown Pauli label {which!r}, expected 'x' or 'z'")


def sigma_minus() -> np.ndarray:
    """Lowering operator |g><e| in the (|g>, |e>) basis."""
    return np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


def identity(cfg: HilbertConfig) -> np.ndarray:
    return np.eye(cfg.dim, dtype=complex)


def embed(op: np.ndarray, subsystem: int, cfg: HilbertConfig) -> np.ndarray:
    """Lift a single-subsystem operator to the full space by kron with identities."""
    if subsystem not in (0, 1, 2, 3):
        raise ConfigError(f"subsystem must be 0..3, got {subsystem}")
    op = np.asarray(op, dtype=complex)
    expected = cfg.dims[subsystem]
    if op.shape != (expected, expected):
        raise StateError(
            f"operator shape {op.shape} does not match subsystem {subsystem} "
            f"dimension {expected}"
        )
    out = np.array([[1.0 + 0.0j]])
    for slot, d in enumerate(cfg.dims):
        out = np.kron(out, op if slot == subsystem else np.eye(d, dtype=complex))
    return out


def ground_state(cfg: HilbertConfig) -> np.ndarray:
    """|0, 0, g, g> as a normalized state vector."""
    psi = np.zeros(cfg.dim, dtype=complex)
    psi[0] = 1.0
    return psi


def basis_index(cfg: HilbertConfig, n1: int, n2: int, q1: str, q2: str) -> int:
    """Flat index of the product basis state |n1, n2, q1, q2> (q in {'g','e'})."""
    qmap = {"g": 0, "e": 1}
    n = cfg.n_fock
    if not (0 <= n1 < n and 0 <= n2 < n):
        raise StateError(f"Fock labels ({n1}, {n2}) outside truncation {n}")
    return ((n1 * n + n2) * 2 + qmap[q1]) * 2 + qmap[q2]


def _check_density_matrix(rho: np.ndarray, dim: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim, dim):
        raise StateError(f"density matrix shape {rho.shape}, expected {(dim, dim)}")
    if abs(np.trace(rho).real - 1.0) > 1e-8 or abs(np.trace(rho).imag) > 1e-8:
        raise StateError(f"density matrix trace {np.trace(rho)} is not 1")
    return rho


def partial_trace_to_qubits(state: np.ndarray, cfg: HilbertConfig) -> np.ndarray:
    """Trace out both cavities, returning the 4x4 qubit pair state.

    Accepts a state vector (dim,) or a density matrix (dim, dim). The result
    is ordered (|ee>, |eg>, |ge>, |gg>) so that entry [0, 3] is <ee|rho|gg>.
    """
    state = np.asarray(state, dtype=complex)
    n = cfg.n_fock
    if state.ndim == 1:
        if state.shape != (cfg.dim,):
            raise StateError(f"state vector length {state.shape}, expected {cfg.dim}")
        psi = state.reshape(n, n, 2, 2)
        rho_q = np.einsum("abij,abkl->ijkl", psi, psi.conj())
    elif state.ndim == 2:
        rho = _check_density_matrix(state, cfg.dim)
        rho8 = rho.reshape(n, n, 2, 2, n, n, 2, 2)
        rho_q = np.einsum("abijabkl->ijkl", rho8)
    else:
        raise StateError(f"state must be a vector or matrix, got ndim={state.ndim}")
    # natural (q1, q2) index order is gg, ge, eg, ee; flip to ee, eg, ge, gg
    rho4 = rho_q.reshape(4, 4)[::-1, ::-1]
    return np.ascontiguousarray(rho4)


@dataclass
class QuantumState:
    """A pure state vector or a density matrix on the full Hilbert space."""

    kind: str  # "pure" | "mixed"
    data: np.ndarray

    @classmethod
    def pure(cls, vector: np.ndarray) -> "QuantumState":
        vector = np.asarray(vector, dtype=complex).ravel()
        nrm = np.linalg.norm(vector)
        if not np.isfinite(nrm) or abs(nrm - 1.0) > 1e-8:
            raise StateError(f"pure state norm {nrm} is not 1")
        return cls("pure", vector)

    @classmethod
    def mixed(cls, matrix: np.ndarray) -> "QuantumState":
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise StateError(f"density matrix must be square, got {matrix.shape}")
        _check_density_matrix(matrix, matrix.shape[0])
        return cls("mixed", matrix)

    @classmethod
    def vacuum_ground(cls, cfg: HilbertConfig) -> "QuantumState":
        return cls.pure(ground_state(cfg))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def as_density_matrix(self) -> np.ndarray:
        if self.kind == "pure":
            return np.outer(self.data, self.data.conj())
        return self.data
