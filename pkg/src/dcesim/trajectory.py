"""Qubit motion profiles expressed as normalized cavity positions u = x / L.

A trajectory only ever enters the physics through cos(pi * u(t)), the mode
function at the qubit location, so positions are kept normalized to [0, 1]
and no cavity length appears anywhere. Times are in ns, velocities nu in
units of cavity lengths per ns.

Supported families:

* ``static``: u(t) = u0;
* ``constant_velocity``: u0 + nu * t folded back into [0, 1] by a triangle
  wave, which models elastic reflection at both cavity ends. Because the
  cosine is even and 2-periodic, cos(pi * fold(p)) == cos(pi * p), so the
  folded motion reproduces the unfolded cos(k v t) modulation exactly;
* ``arccos_bounce``: u = arccos(2 s^n - 1) / pi with s = t/tau - floor(t/tau),
  mirrored on odd intervals so the position is continuous with period 2 tau.
  On even intervals the modulation is the polynomial 2 s^n - 1, which is the
  point of this family;
* ``time_shifted``: another trajectory evaluated at t + shift;
* ``sampled``: linear interpolation through user-supplied (t, u) knots.

``apply_bounce_sign`` optionally multiplies the modulation by -1 at every
wall touch (leaving the initial wall does not count). This implements the
reflection symmetry that pairs a position fold with a coupling sign flip;
when both qubits touch walls simultaneously the two flips cancel in the
pair amplitude, but a lone touch changes the later dynamics. Off by
default: the plain folded cosine is the sign-free continuation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError

KINDS = ("static", "constant_velocity", "arccos_bounce", "time_shifted", "sampled")


@dataclass(frozen=True)
class Trajectory:
    kind: str
    u0: float = 0.0
    nu: float = 0.0
    n: int = 1
    tau: Optional[float] = None
    shift: float = 0.0
    inner: Optional["Trajectory"] = None
    mirrored: bool = False
    apply_bounce_sign: bool = False
    grid: Optional[tuple[tuple[float, float], ...]] = field(default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown trajectory kind {self.kind!r}")
        if not 0.0 <= self.u0 <= 1.0:
            raise ConfigError(f"u0 must lie in [0, 1], got {self.u0}")
        if self.kind == "arccos_bounce":
            if self.tau is None or self.tau <= 0:
                raise ConfigError(f"arccos_bounce needs tau > 0, got {self.tau}")
            if not isinstance(self.n, int) or self.n < 1:
                raise ConfigError(f"arccos exponent n must be an integer >= 1, got {self.n}")
        if self.kind == "time_shifted" and self.inner is None:
            raise ConfigError("time_shifted trajectory needs an inner trajectory")
        if self.kind == "time_shifted" and self.apply_bounce_sign:
            raise ConfigError("set apply_bounce_sign on the inner trajectory, not the shift wrapper")
        if self.kind == "sampled":
            if not self.grid or len(self.grid) < 2:
                raise ConfigError("sampled trajectory needs at least two (t, u) knots")
            ts = [p[0] for p in self.grid]
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise ConfigError("sampled trajectory knots must have increasing times")
            if any(not 0.0 <= p[1] <= 1.0 for p in self.grid):
                raise ConfigError("sampled trajectory positions must lie in [0, 1]")
        if self.apply_bounce_sign and self.traversal_time is None:
            raise ConfigError(
                f"apply_bounce_sign needs a traversal time, {self.kind} has none"
            )

    @property
    def traversal_time(self) -> Optional[float]:
        """Time for one wall-to-wall traversal; defines the bounce-sign period."""
        if self.kind == "constant_velocity" and self.nu != 0.0:
            return 1.0 / abs(self.nu)
        if self.kind == "arccos_bounce":
            return self.tau
        if self.kind == "time_shifted":
            return self.inner.traversal_time
        return None

    # -- geometry -----------------------------------------------------------

    def position(self, t):
        """Normalized position u(t) in [0, 1]; accepts scalars or arrays."""
        t = np.asarray(t, dtype=float)
        u = self._base_position(t)
        if self.mirrored:
            u = 1.0 - u
        return u if u.ndim else float(u)

    def _base_position(self, t: np.ndarray) -> np.ndarray:
        if self.kind == "static":
            return np.broadcast_to(np.float64(self.u0), t.shape).copy()
        if self.kind == "constant_velocity":
            p = np.mod(self.u0 + self.nu * t, 2.0)
            return np.where(p <= 1.0, p, 2.0 - p)
        if self.kind == "arccos_bounce":
            s = t / self.tau
            j = np.floor(s)
            frac = s - j
            arg = np.clip(2.0 * frac**self.n - 1.0, -1.0, 1.0)
            f = np.arccos(arg) / np.pi
            return np.where(j % 2 == 0, f, 1.0 - f)
        if self.kind == "time_shifted":
            return np.asarray(self.inner.position(t + self.shift), dtype=float)
        # sampled
        ts = np.array([p[0] for p in self.grid])
        us = np.array([p[1] for p in self.grid])
        return np.interp(t, ts, us)

    def bounce_sign(self, t):
        """(-1)^(wall touches so far); leaving the initial wall is not a touch."""
        t = np.asarray(t, dtype=float)
        if self.kind == "time_shifted":
            s = np.asarray(self.inner.bounce_sign(t + self.shift), dtype=float)
        elif not self.apply_bounce_sign:
            s = np.ones_like(t)
        elif self.kind == "constant_velocity":
            p = self.u0 + self.nu * t
            if self.nu > 0:
                n = np.floor(p) - np.floor(self.u0)
            else:
                n = np.ceil(self.u0) - np.ceil(p)
            s = 1.0 - 2.0 * (n % 2)
        else:
            s = 1.0 - 2.0 * (np.floor(t / self.traversal_time) % 2)
        return s if s.ndim else float(s)

    def modulation(self, t):
        """Coupling modulation cos(pi * u(t)), times the bounce sign if enabled."""
        value = np.cos(np.pi * np.asarray(self.position(t)))
        value = value * np.asarray(self.bounce_sign(t))
        return value if value.ndim else float(value)

    def phase_function(self):
        """Vectorized f(t) = pi * u(t), so cos(f) is the unsigned modulation."""
        return lambda t: np.pi * np.asarray(self.position(t))

    def breakpoints(self, t_end: float) -> np.ndarray:
        """Times in (0, t_end) where the motion has kinks or sign jumps.

        Fed to the integrator as mandatory step boundaries so the adaptive
        stepper never straddles a non-smooth point.
        """
        if t_end <= 0:
            return np.empty(0)
        pts: np.ndarray
        if self.kind == "static":
            pts = np.empty(0)
        elif self.kind == "constant_velocity":
            if self.nu == 0.0:
                pts = np.empty(0)
            else:
                # wall hits: u0 + nu t crossing integers
                p0, p1 = sorted((self.u0, self.u0 + self.nu * t_end))
                ks = np.arange(np.floor(p0) + 1, np.ceil(p1))
                pts = (ks - self.u0) / self.nu
        elif self.kind == "arccos_bounce":
            pts = np.arange(1, int(np.floor(t_end / self.tau)) + 1) * self.tau
        elif self.kind == "time_shifted":
            pts = self.inner.breakpoints(t_end + max(self.shift, 0.0)) - self.shift
        else:  # sampled
            pts = np.array([p[0] for p in self.grid])
        pts = np.asarray(pts, dtype=float)
        return np.unique(pts[(pts > 1e-12) & (pts < t_end - 1e-12)])

    # -- serialization ------------------------------------------------------

    def to_record(self) -> dict:
        """Flat tagged record used by the JSON configuration format."""
        if self.kind == "time_shifted":
            rec = self.inner.to_record()
            rec["shift_ns"] = self.shift
            return rec
        rec = {"type": self.kind, "mirrored": self.mirrored,
               "apply_bounce_sign": self.apply_bounce_sign}
        if self.kind == "static":
            rec["u0"] = self.u0
        elif self.kind == "constant_velocity":
            rec["u0"] = self.u0
            rec["nu"] = self.nu
        elif self.kind == "arccos_bounce":
            rec["n"] = self.n
            rec["tau_ns"] = self.tau
        elif self.kind == "sampled":
            rec["grid"] = [list(p) for p in self.grid]
        return rec


def from_record(rec: dict, where: str = "trajectory") -> Trajectory:
    """Build a Trajectory from the flat JSON record, wrapping shifts if present."""
    if not isinstance(rec, dict):
        raise ConfigError(f"{where}: expected an object, got {type(rec).__name__}")
    kind = rec.get("type")
    if kind not in KINDS:
        raise ConfigError(f"{where}.type: expected one of {KINDS}, got {kind!r}")
    if kind == "time_shifted":
        raise ConfigError(f"{where}.type: use shift_ns on a base record instead")
    kwargs = dict(
        kind=kind,
        mirrored=bool(rec.get("mirrored", False)),
        apply_bounce_sign=bool(rec.get("apply_bounce_sign", False)),
    )
    try:
        if kind == "static":
            kwargs["u0"] = float(rec.get("u0", 0.0))
        elif kind == "constant_velocity":
            kwargs["u0"] = float(rec.get("u0", 0.0))
            kwargs["nu"] = float(rec["nu"])
        elif kind == "arccos_bounce":
            kwargs["n"] = int(rec["n"])
            kwargs["tau"] = float(rec["tau_ns"])
        elif kind == "sampled":
            kwargs["grid"] = tuple((float(t), float(u)) for t, u in rec["grid"])
    except KeyError as exc:
        raise ConfigError(f"{where}: missing required field {exc.args[0]!r} for {kind}")
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad field value ({exc})")
    traj = Trajectory(**kwargs)
    shift = float(rec.get("shift_ns", 0.0))
    if shift != 0.0:
        traj = Trajectory(kind="time_shifted", inner=traj, shift=shift)
    return traj


# convenience constructors -------------------------------------------------

def static(u0: float = 0.0) -> Trajectory:
    return Trajectory(kind="static", u0=u0)


def constant_velocity(u0: float, nu: float, *, mirrored: bool = False,
                      apply_bounce_sign: bool = False) -> Trajectory:
    return Trajectory(kind="constant_velocity", u0=u0, nu=nu, mirrored=mirrored,
                      apply_bounce_sign=apply_bounce_sign)


def arccos_bounce(n: int, tau: float, *, mirrored: bool = False,
                  apply_bounce_sign: bool = False) -> Trajectory:
    return Trajectory(kind="arccos_bounce", n=n, tau=tau, mirrored=mirrored,
                      apply_bounce_sign=apply_bounce_sign)


def time_shifted(inner: Trajectory, shift: float) -> Trajectory:
    return Trajectory(kind="time_shifted", inner=inner, shift=shift)


def sampled(times, positions) -> Trajectory:
    return Trajectory(kind="sampled",
                      grid=tuple((float(t), float(u)) for t, u in zip(times, positions)))
