"""Third-order perturbative oracle for the pair coherence.

Independent of the integrator: the leading concurrence is g0*g1*g2 times the
magnitude of a double time-ordered integral over the two qubit modulations
and the pair-drive phase. The innermost layer integrates to
(exp(i w_d t2) - 1)/(i w_d) analytically; the remaining two layers are done
by iterated cumulative trapezoid rule on a uniform grid that is doubled
until the amplitude stabilizes.

Closed-form envelopes for the standard trajectory families and the
resonance-condition bookkeeping live here too, so the full simulator can be
cross-checked against them without sharing any evolution code.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import ConfigError, QuadratureError

_REL_TOL = 1e-4
_MAX_GRID = 2 ** 20


@dataclass(frozen=True)
class PerturbativeResult:
    """Amplitude of the (ee, gg) coherence at third order.

    `amplitude` is the bracketed two-ordering sum before the coupling
    prefactor; the predicted concurrence is g0*g1*g2*|amplitude|.
    """

    amplitude: complex
    t: float
    couplings: tuple = (1.0, 1.0, 1.0)
    n_grid_used: int = 0

    @property
    def concurrence(self) -> float:
        g0, g1, g2 = self.couplings
        return float(abs(g0 * g1 * g2) * abs(self.amplitude))


def _amplitude_on_grid(f1: Callable, f2: Callable, omega_d: float, t: float,
                       n_grid: int) -> tuple:
    """Amplitude at t plus the peak |A| along the way (the error scale)."""
    s = np.linspace(0.0, t, n_grid + 1)
    inner = (np.exp(1j * omega_d * s) - 1.0) / (1j * omega_d)
    c1 = np.cos(np.asarray(f1(s), dtype=float))
    c2 = np.cos(np.asarray(f2(s), dtype=float))
    # ordering A: outer cos(f1(t1)), middle cos(f2(t2)); ordering B swapped
    g2 = cumulative_trapezoid(c2 * inner, s, initial=0.0)
    g1 = cumulative_trapezoid(c1 * inner, s, initial=0.0)
    curve = cumulative_trapezoid(c1 * g2 + c2 * g1, s, initial=0.0)
    return complex(curve[-1]), float(np.max(np.abs(curve)))


def triple_integral(f1: Callable, f2: Callable, omega_d: float, t: float,
                    n_grid: int = 1024,
                    couplings: tuple = (1.0, 1.0, 1.0)) -> PerturbativeResult:
    """Evaluate the two-ordering triple integral at time t.

    f1, f2 map an array of times (ns) to modulation phases (rad). The grid
    is doubled until the amplitude's change drops below 1e-4 of the peak
    |A| reached along the integration path; the peak is the error scale so
    convergence is still decidable at the amplitude's own zeros.
    """
    if n_grid < 64:
        raise ConfigError(f"n_grid must be at least 64, got {n_grid}")
    if n_grid > _MAX_GRID // 2:
        raise ConfigError(
            f"n_grid must leave room to refine (max {_MAX_GRID // 2}), got {n_grid}")
    if omega_d <= 0:
        raise ConfigError(f"omega_d must be positive, got {omega_d}")
    if t < 0:
        raise ConfigError(f"t must be non-negative, got {t}")
    if t == 0:
        return PerturbativeResult(0.0 + 0.0j, 0.0, couplings, n_grid)

    n = int(n_grid)
    prev, _ = _amplitude_on_grid(f1, f2, omega_d, t, n)
    while n <= _MAX_GRID // 2:
        n *= 2
        cur, scale = _amplitude_on_grid(f1, f2, omega_d, t, n)
        change = abs(cur - prev)
        if change <= _REL_TOL * max(scale, 1e-300):
            return PerturbativeResult(cur, t, couplings, n)
        prev = cur
    raise QuadratureError(
        f"triple integral not converged at n_grid = {n} "
        f"(last relative change {change / max(scale, 1e-300):.3e})")


def closed_form(kind: str, params: dict, t) -> np.ndarray:
    """Leading-order concurrence envelopes for the standard cases.

    kinds and required params (all rates in rad/ns, times in ns):
      static:         g0, g1, g2, omega_d          -> (g/w) t^2
      both_resonant:  g0, g1, g2, omega_d          -> (g/w^2)|sin(w t)| t
      first_resonant: g0, g1, g2, omega_d, kv      -> (g/(2 w kv))|sin(kv t)| t
      arccos:         g0, g1, g2, omega_d, n, tau  -> 4g/(w (n+1)^2) (t/tau)^{2n} t^2
    with g = g0*g1*g2 and w = omega_d.
    """
    t = np.asarray(t, dtype=float)

    def need(*names):
        missing = [k for k in names if k not in params]
        if missing:
            raise ConfigError(f"closed_form {kind!r} needs params {missing}")
        return [float(params[k]) for k in names]

    if kind == "static":
        g0, g1, g2, w = need("g0", "g1", "g2", "omega_d")
        return (g0 * g1 * g2 / w) * t ** 2
    if kind == "both_resonant":
        g0, g1, g2, w = need("g0", "g1", "g2", "omega_d")
        return (g0 * g1 * g2 / w ** 2) * np.abs(np.sin(w * t)) * t
    if kind == "first_resonant":
        g0, g1, g2, w, kv = need("g0", "g1", "g2", "omega_d", "kv")
        if kv <= 0:
            raise ConfigError(f"kv must be positive, got {kv}")
        return (g0 * g1 * g2 / (2.0 * w * kv)) * np.abs(np.sin(kv * t)) * t
    if kind == "arccos":
        g0, g1, g2, w, n, tau = need("g0", "g1", "g2", "omega_d", "n", "tau")
        if tau <= 0:
            raise ConfigError(f"tau must be positive, got {tau}")
        if n < 1 or n != int(n):
            raise ConfigError(f"n must be a positive integer, got {n}")
        n = int(n)
        return (4.0 * g0 * g1 * g2 / (w * (n + 1) ** 2)) * (t / tau) ** (2 * n) * t ** 2
    raise ConfigError(f"unknown closed_form kind {kind!r}")


def match_closed_form(traj1, traj2, system) -> tuple:
    """Closed form applicable to a trajectory pair, or (None, None).

    Static pairs map to the quadratic law with the couplings scaled by the
    (absolute) modulation at the fixed positions. Constant-velocity pairs
    from u = 0 map to the resonant-velocity laws when the drive-resonance
    conditions hold. Anything else has no standard envelope and the caller
    gets (None, None); in particular the arccos power law is not claimed
    for full arccos trajectory pairs, whose amplitude at small t is
    dominated by the quadratic term from the near-wall start, not by the
    power-law term the slowly-opening modulation adds on top of it.
    """
    base = {"g0": system.g0, "g1": system.g1, "g2": system.g2,
            "omega_d": system.omega_d}
    k1, k2 = traj1.kind, traj2.kind
    if k1 == "static" and k2 == "static":
        params = dict(base)
        params["g1"] = abs(base["g1"] * traj1.modulation(0.0))
        params["g2"] = abs(base["g2"] * traj2.modulation(0.0))
        return "static", params
    if (k1 == "constant_velocity" and k2 == "constant_velocity"
            and traj1.u0 == 0.0 and traj2.u0 == 0.0
            and not (traj1.apply_bounce_sign or traj2.apply_bounce_sign)):
        cond = resonance_check(traj1.nu, traj2.nu, system.omega_d,
                               rel_tol=1e-6)
        if cond["condition1_q1"] and cond["condition1_q2"]:
            return "both_resonant", dict(base)
        if cond["condition1_q1"] != cond["condition1_q2"]:
            other = traj2.nu if cond["condition1_q1"] else traj1.nu
            params = dict(base)
            params["kv"] = np.pi * abs(other)
            return "first_resonant", params
        return None, None
    return None, None


def resonance_check(nu1: float, nu2: float, omega_d: float,
                    rel_tol: float = 1e-9) -> dict:
    """Which drive-resonance conditions the two modulation rates satisfy.

    nu_i is the normalized trajectory rate (u covers [0,1] in 1/|nu_i| ns),
    so the modulation phase advances at pi*|nu_i| rad/ns. Condition 1 holds
    per qubit when that rate matches omega_d; condition 2 when the two rates
    match each other.
    """
    r1, r2 = np.pi * abs(nu1), np.pi * abs(nu2)

    def close(a, b):
        return bool(abs(a - b) <= rel_tol * max(abs(a), abs(b), 1e-300))

    return {
        "condition1_q1": close(r1, omega_d),
        "condition1_q2": close(r2, omega_d),
        "condition2": close(abs(nu1), abs(nu2)),
    }


def bounce_linearity_check(f1: Callable, f2: Callable, omega_d: float,
                           tau: float, n_bounces: int,
                           n_grid: int = 1024) -> dict:
    """How linearly the oracle amplitude accumulates over bounce multiples.

    Evaluates the amplitude at t = m*tau for m = 1..n_bounces and compares
    the ratios |A(m tau)|/|A(tau)| against m. Deviations are data, not
    errors. Beware: for constant-rate trajectories the modulation phase
    advances by pi per flight time, so the leading amplitude envelope has a
    node at every exact multiple of tau and the reported ratios probe only
    the subleading remainder there; sample between multiples to see the
    envelope instead.
    """
    if tau <= 0:
        raise ConfigError(f"tau must be positive, got {tau}")
    if n_bounces < 1:
        raise ConfigError(f"n_bounces must be >= 1, got {n_bounces}")
    times = [m * tau for m in range(1, n_bounces + 1)]
    values = []
    for t in times:
        res = triple_integral(f1, f2, omega_d, t, n_grid=n_grid)
        values.append(abs(res.amplitude))
    base = values[0]
    ratios = [v / base if base > 0 else np.nan for v in values]
    expected = [float(m) for m in range(1, n_bounces + 1)]
    deviations = [abs(r - e) / e for r, e in zip(ratios, expected)]
    return {
        "times_ns": times,
        "values": values,
        "ratios": ratios,
        "expected": expected,
        "max_rel_deviation": float(np.nanmax(deviations)),
    }
