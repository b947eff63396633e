"""Exception taxonomy shared across the package.

Two broad families matter for the CLI exit codes: configuration problems
(bad input, exit code 2) and numerical failures (diverged or unconverged
computations, exit code 3).
"""


class ConfigError(ValueError):
    """Invalid configuration value or inconsistent parameter combination."""


class StateError(ValueError):
    """Quantum state fails a structural check (shape, norm, trace, positivity)."""


class NumericsError(RuntimeError):
    """Base class for numerical failures during integration or quadrature."""


class StiffnessError(NumericsError):
    """Adaptive step size collapsed below the resolvable scale."""


class DivergenceError(NumericsError):
    """State norm or trace drifted beyond the accepted bound, or became non-finite."""


class ConvergenceError(NumericsError):
    """An iterative refinement (Fock ladder, grid doubling) hit its cap without converging."""


class QuadratureError(ConvergenceError):
    """Oscillatory quadrature failed to reach the requested relative accuracy."""
