"""Sine-Gordon kink propagation on a 1D lattice.

Dimensionless field equation phi_tt - phi_xx + sin(phi) = 0, integrated
with the Stormer-Verlet (leapfrog) scheme and pinned end values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import BlowupError, InsufficientTravel, MultiKink, NeverArrives, NoKink, StabilityError, UnresolvedKink

CFL_MAX = 0.9
BLOWUP = 1e3
DEFAULT_N = 2048
DEFAULT_DX = 0.1


@dataclass(frozen=True)
class UnitScale:
    """Physical size of one dimensionless length and time unit."""

    length_unit: float
    time_unit: float

    def __post_init__(self):
        if not (self.length_unit > 0 and self.time_unit > 0):
            raise ValueError("unit scales must be positive")

    @classmethod
    def from_speed(cls, length_unit: float, c_star: float) -> "UnitScale":
        return cls(length_unit, length_unit / c_star)

    @property
    def c_star(self) -> float:
        return self.length_unit / self.time_unit


# tubulin-dimer spacing, limiting speed 280 m/s (v = 0.5 -> 140 m/s)
DEFAULT_SCALE = UnitScale.from_speed(8e-9, 280.0)


@dataclass(frozen=True)
class KinkState:
    phi: np.ndarray
    phi_t: np.ndarray
    dx: float
    t: float
    v: float

    @property
    def n(self) -> int:
        return len(self.phi)

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    @property
    def charge(self) -> float:
        return (self.phi[-1] - self.phi[0]) / (2.0 * math.pi)


def kink_profile(x, x0: float, v: float, t: float = 0.0):
    """Analytic travelling kink: phi and phi_t at time t."""
    w = math.sqrt(1.0 - v * v)
    z = (np.asarray(x) - x0 - v * t) / w
    with np.errstate(over="ignore"):
        phi = 4.0 * np.arctan(np.exp(z))
        phi_t = -v * 2.0 / (w * np.cosh(z))
    return phi, phi_t


def init_kink(v: float = 0.0, grid: tuple[int, float] = (DEFAULT_N, DEFAULT_DX), x0: Optional[float] = None) -> KinkState:
    n, dx = grid
    if not abs(v) < 1.0:
        raise ValueError("kink velocity must satisfy |v| < 1")
    if n < 256:
        raise ValueError("lattice needs at least 256 sites")
    w = math.sqrt(1.0 - v * v)
    if w < 4.0 * dx:
        raise UnresolvedKink(f"kink width {w:.3g} below 4 lattice spacings ({4 * dx:.3g})")
    if x0 is None:
        x0 = 0.25 * (n - 1) * dx
    x = np.arange(n) * dx
    phi, phi_t = kink_profile(x, x0, v)
    if abs(phi[0]) > 1e-3 or abs(phi[-1] - 2.0 * math.pi) > 1e-3:
        raise ValueError("kink too close to the lattice ends for pinned boundaries")
    phi[0], phi[-1] = 0.0, 2.0 * math.pi
    phi_t[0] = phi_t[-1] = 0.0
    return KinkState(phi, phi_t, float(dx), 0.0, float(v))


def vacuum(n: int = DEFAULT_N, dx: float = DEFAULT_DX) -> KinkState:
    return KinkState(np.zeros(n), np.zeros(n), dx, 0.0, 0.0)


def _accel(phi: np.ndarray, inv_dx2: float) -> np.ndarray:
    acc = np.zeros_like(phi)
    acc[1:-1] = (phi[2:] - 2.0 * phi[1:-1] + phi[:-2]) * inv_dx2 - np.sin(phi[1:-1])
    return acc


def _check_dt(state: KinkState, dt: float):
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt / state.dx > CFL_MAX:
        raise StabilityError(f"dt/dx = {dt / state.dx:.3g} exceeds {CFL_MAX}")


def step(state: KinkState, dt: float, n: int = 1) -> KinkState:
    """Advance ``n`` leapfrog steps; end sites stay fixed."""
    _check_dt(state, dt)
    phi = state.phi.copy()
    p = state.phi_t.copy()
    inv = 1.0 / (state.dx * state.dx)
    half = 0.5 * dt
    acc = _accel(phi, inv)
    for _ in range(n):
        p += half * acc
        phi += dt * p
        acc = _accel(phi, inv)
        p += half * acc
    if np.max(np.abs(p)) > BLOWUP or not np.all(np.isfinite(phi)):
        raise BlowupError("field velocity exceeded 1e3")
    return replace(state, phi=phi, phi_t=p, t=state.t + n * dt)


def kink_center(state: KinkState) -> float:
    """Position of the unique phi = pi crossing, linearly interpolated."""
    d = state.phi - math.pi
    idx = np.flatnonzero((d[:-1] < 0.0) & (d[1:] >= 0.0) | (d[:-1] >= 0.0) & (d[1:] < 0.0))
    if idx.size == 0:
        raise NoKink("field never crosses pi")
    if idx.size > 1:
        raise MultiKink(f"{idx.size} crossings of pi")
    i = int(idx[0])
    frac = -d[i] / (d[i + 1] - d[i])
    return (i + frac) * state.dx


def field_energy(state: KinkState) -> float:
    """Trapezoid sum of 1/2 phi_t^2 + 1/2 phi_x^2 + (1 - cos phi).

    The gradient term lives on the links between sites, which makes this
    the quantity conserved by the leapfrog update.
    """
    dx = state.dx
    kin = 0.5 * state.phi_t**2 + (1.0 - np.cos(state.phi))
    site = dx * (np.sum(kin) - 0.5 * (kin[0] + kin[-1]))
    grad = 0.5 * np.sum(np.diff(state.phi) ** 2) / dx
    return float(site + grad)


@dataclass(frozen=True)
class VelocityFit:
    velocity: float
    residual_rms: float


def measure_velocity(trace: Sequence[tuple[float, float]], dx: float = DEFAULT_DX) -> VelocityFit:
    """Least-squares slope of center against time."""
    arr = np.asarray(trace, dtype=float)
    if arr.ndim != 2 or len(arr) < 10:
        raise InsufficientTravel("need at least 10 trace points")
    t, c = arr[:, 0], arr[:, 1]
    slope, icpt = np.polyfit(t, c, 1)
    resid = c - (slope * t + icpt)
    # travel below one cell is a static kink, a legitimate zero-velocity trace
    travel = abs(c[-1] - c[0])
    if dx <= travel < 20.0 * dx:
        raise InsufficientTravel(f"trace spans {travel / dx:.1f} lattice spacings, need 20")
    return VelocityFit(float(slope), float(np.sqrt(np.mean(resid**2))))


@dataclass(frozen=True)
class TracePoint:
    t: float
    center: float
    energy: float


def run_trace(state: KinkState, dt: float, steps: int, stride: int = 100) -> tuple[KinkState, list[TracePoint]]:
    """Evolve, sampling (t, center, energy) every ``stride`` steps."""
    trace = [TracePoint(state.t, kink_center(state), field_energy(state))]
    done = 0
    while done < steps:
        k = min(stride, steps - done)
        state = step(state, dt, k)
        done += k
        trace.append(TracePoint(state.t, kink_center(state), field_energy(state)))
    return state, trace


def to_physical(v: float, scale: UnitScale = DEFAULT_SCALE) -> float:
    return v * scale.length_unit / scale.time_unit


def arrival_time(
    state: KinkState,
    target_x: float,
    scale: UnitScale = DEFAULT_SCALE,
    dt: Optional[float] = None,
    max_steps: int = 10**6,
) -> float:
    """Physical time (s) of the first step at which the kink center reaches ``target_x``."""
    dt = 0.5 * state.dx if dt is None else dt
    _check_dt(state, dt)
    c = kink_center(state)
    if c >= target_x:
        return 0.0
    if state.v <= 0.0:
        raise NeverArrives("kink is not moving towards the target")
    margin = 10.0 * math.sqrt(1.0 - state.v**2)
    if target_x > (state.n - 1) * state.dx - margin:
        raise NeverArrives("target lies beyond the lattice")
    t0 = state.t
    for _ in range(max_steps):
        state = step(state, dt, 1)
        if kink_center(state) >= target_x:
            return (state.t - t0) * scale.time_unit
    raise NeverArrives(f"no arrival within {max_steps} steps")


def arrival_times(starts: Iterable[float], distance: float, v: float, scale: UnitScale = DEFAULT_SCALE, grid=(DEFAULT_N, DEFAULT_DX)) -> list[float]:
    """Simulated arrival times (s) for kinks launched at physical times ``starts``."""
    state = init_kink(v, grid)
    lag = arrival_time(state, kink_center(state) + distance, scale)
    return [float(s) + lag for s in starts]
