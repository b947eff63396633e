"""Simulator and analysis toolkit for motion-induced two-qubit entanglement.

Two superconducting qubits sit in separate cavities whose shared boundary is
driven at the sum of the cavity frequencies, pumping correlated photon pairs;
simulated qubit trajectories modulate the qubit-cavity couplings. The package
integrates the driven model exactly, extracts concurrence and Bell-basis
populations, and cross-checks against a third-order perturbative oracle.
"""

__version__ = "0.1.0"

from .analysis import (SnapshotAnalyzer, TimeSeries, analyze,
                       anticorrelation_check, appendix_a_structure,
                       bell_populations, concurrence, find_max)
from .config import (RunConfig, SweepConfig, load_run_config,
                     load_sweep_config, parse_run_config, parse_sweep_config)
from .dynamics import (EvolutionResult, NoiseParams, StepStats, converge_fock,
                       evolve_lindblad, evolve_schrodinger)
from .errors import (ConfigError, ConvergenceError, DivergenceError,
                     NumericsError, QuadratureError, StateError,
                     StiffnessError)
from .hamiltonian import HamiltonianTerms, SystemParams, build
from .perturbative import (PerturbativeResult, bounce_linearity_check,
                           closed_form, match_closed_form, resonance_check,
                           triple_integral)
from .presets import PRESET_NAMES, get_preset
from .runner import (RunResult, compute_run, execute_run, execute_sweep,
                     execute_trajectory_table)
from .statespace import HilbertConfig, QuantumState, partial_trace_to_qubits
from .trajectory import Trajectory

__all__ = [
    "ConfigError", "ConvergenceError", "DivergenceError", "NumericsError",
    "QuadratureError", "StateError", "StiffnessError",
    "HilbertConfig", "QuantumState", "partial_trace_to_qubits",
    "Trajectory",
    "SystemParams", "HamiltonianTerms", "build",
    "NoiseParams", "StepStats", "EvolutionResult",
    "evolve_schrodinger", "evolve_lindblad", "converge_fock",
    "TimeSeries", "SnapshotAnalyzer", "analyze", "concurrence",
    "bell_populations", "find_max", "appendix_a_structure",
    "anticorrelation_check",
    "PerturbativeResult", "triple_integral", "closed_form",
    "match_closed_form", "resonance_check", "bounce_linearity_check",
    "RunConfig", "SweepConfig", "load_run_config", "load_sweep_config",
    "parse_run_config", "parse_sweep_config",
    "PRESET_NAMES", "get_preset",
    "RunResult", "compute_run", "execute_run", "execute_sweep",
    "execute_trajectory_table",
    "__version__",
]
