"""One- and two-dimensional potential energy surfaces.

All quantities are SI: lengths in m, energies in J, masses in kg,
angular frequencies in rad/s.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from .constants import HBAR, M_H
from .errors import AmbiguousBarrier, DomainError, NoBarrier

SCAN_POINTS = 4096
ROOT_RTOL = 1e-12


class Potential1D:
    """Base class: a potential V(q) on a closed interval ``domain``."""

    domain: tuple[float, float]

    def _values(self, q: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def values(self, q) -> np.ndarray:
        """Vectorised evaluation with domain checking."""
        q = np.asarray(q, dtype=float)
        lo, hi = self.domain
        if np.any(q < lo) or np.any(q > hi) or np.any(~np.isfinite(q)):
            raise DomainError(f"q outside domain [{lo:g}, {hi:g}]")
        return self._values(q)

    def __call__(self, q):
        v = self.values(q)
        return float(v) if v.ndim == 0 else v

    @property
    def barrier_max(self) -> float:
        """Largest value of V strictly inside the domain's scan (excludes walls)."""
        q = np.linspace(*self.domain, SCAN_POINTS)
        v = self._values(q)
        return float(v.max())


def _check_domain(domain):
    lo, hi = domain
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError(f"invalid domain {domain!r}")


@dataclass(frozen=True)
class DoubleWell(Potential1D):
    """Quartic double well ``B (q^2 - a^2)^2``: minima at ±a, barrier B a^4 at 0."""

    B: float
    a: float
    domain: tuple[float, float] = None

    def __post_init__(self):
        if not (self.B > 0 and self.a > 0):
            raise ValueError("DoubleWell needs B > 0 and a > 0")
        if self.domain is None:
            object.__setattr__(self, "domain", (-3.0 * self.a, 3.0 * self.a))
        _check_domain(self.domain)

    @classmethod
    def from_height(cls, height: float, a: float, domain=None) -> "DoubleWell":
        return cls(B=height / a**4, a=a, domain=domain)

    @property
    def height(self) -> float:
        return self.B * self.a**4

    def well_omega(self, M: float) -> float:
        return math.sqrt(8.0 * self.B * self.a**2 / M)

    def _values(self, q):
        return self.B * (q * q - self.a * self.a) ** 2


@dataclass(frozen=True)
class RectangularBarrier(Potential1D):
    """V0 on [0, L], zero elsewhere."""

    V0: float
    L: float
    domain: tuple[float, float] = None

    def __post_init__(self):
        if not (self.V0 > 0 and self.L > 0):
            raise ValueError("RectangularBarrier needs V0 > 0 and L > 0")
        if self.domain is None:
            object.__setattr__(self, "domain", (-self.L, 3.0 * self.L))
        _check_domain(self.domain)

    def _values(self, q):
        return np.where((q >= 0.0) & (q <= self.L), self.V0, 0.0)


@dataclass(frozen=True)
class Harmonic(Potential1D):
    M: float
    omega: float
    domain: tuple[float, float] = None

    def __post_init__(self):
        if not (self.M > 0 and self.omega > 0):
            raise ValueError("Harmonic needs M > 0 and omega > 0")
        if self.domain is None:
            ell = math.sqrt(HBAR / (self.M * self.omega))
            object.__setattr__(self, "domain", (-10.0 * ell, 10.0 * ell))
        _check_domain(self.domain)

    def _values(self, q):
        return 0.5 * self.M * self.omega**2 * q * q


@dataclass(frozen=True)
class InvertedParabola(Potential1D):
    """Parabolic barrier ``V0 - kappa q^2 / 2`` truncated to ``domain``."""

    V0: float
    kappa: float
    domain: tuple[float, float] = None

    def __post_init__(self):
        if not (self.V0 > 0 and self.kappa > 0):
            raise ValueError("InvertedParabola needs V0 > 0 and kappa > 0")
        if self.domain is None:
            w = 2.0 * math.sqrt(2.0 * self.V0 / self.kappa)
            object.__setattr__(self, "domain", (-w, w))
        _check_domain(self.domain)

    def _values(self, q):
        return self.V0 - 0.5 * self.kappa * q * q


@dataclass(frozen=True)
class Tabulated(Potential1D):
    """Piecewise-linear interpolation of ordered (q, V) samples."""

    q: tuple[float, ...]
    v: tuple[float, ...]
    domain: tuple[float, float] = field(init=False)

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if q.ndim != 1 or q.shape != v.shape or q.size < 2:
            raise ValueError("Tabulated needs matching 1D q and V with >= 2 samples")
        if np.any(np.diff(q) <= 0):
            raise ValueError("Tabulated samples must be strictly increasing in q")
        if not np.all(np.isfinite(v)):
            raise ValueError("Tabulated V must be finite")
        object.__setattr__(self, "q", tuple(q.tolist()))
        object.__setattr__(self, "v", tuple(v.tolist()))
        object.__setattr__(self, "domain", (float(q[0]), float(q[-1])))

    @classmethod
    def from_pairs(cls, pairs) -> "Tabulated":
        q, v = zip(*pairs)
        return cls(q=q, v=v)

    def _values(self, q):
        return np.interp(q, self.q, self.v)


def eval_1d(p: Potential1D, q: float) -> float:
    return float(p.values(q))


def find_turning_points(p: Potential1D, E0: float) -> tuple[float, float]:
    """Classical turning points (a, b) bracketing the single barrier above E0.

    Brackets come from sign changes of V - E0 on a 4096-point scan; each
    root is then refined by bisection to relative tolerance 1e-12.
    Intervals where V > E0 that touch the domain edges are walls, not
    barriers.
    """
    if isinstance(p, RectangularBarrier):
        if E0 >= p.V0:
            raise NoBarrier(f"E0={E0:g} at or above barrier top {p.V0:g}")
        if E0 <= 0.0:
            raise DomainError("E0 must lie above the potential minimum")
        return 0.0, p.L

    q = np.linspace(*p.domain, SCAN_POINTS)
    above = p._values(q) > E0
    edges = np.flatnonzero(np.diff(above.astype(np.int8)))
    # runs of `above` bounded on both sides by sign changes
    rises = [i for i in edges if not above[i] and above[i + 1]]
    falls = [i for i in edges if above[i] and not above[i + 1]]
    intervals = []
    for r in rises:
        later = [f for f in falls if f > r]
        if later:
            intervals.append((r, later[0]))
    if not intervals:
        raise NoBarrier(f"no barrier above E0={E0:g} inside the domain")
    if len(intervals) > 1:
        raise AmbiguousBarrier(f"{len(intervals)} disjoint barrier intervals above E0={E0:g}")

    r, f = intervals[0]

    def g(x):
        return float(p._values(np.asarray(x))) - E0

    xtol = 1e-14 * (p.domain[1] - p.domain[0])
    a = bisect(g, q[r], q[r + 1], xtol=xtol, rtol=ROOT_RTOL, maxiter=400)
    b = bisect(g, q[f], q[f + 1], xtol=xtol, rtol=ROOT_RTOL, maxiter=400)
    return float(a), float(b)


class CouplingKind(enum.Enum):
    SMC = "smc"
    ASMC = "asmc"
    SQUEEZED = "squeezed"


@dataclass(frozen=True)
class CoupledModel2D:
    """Double well along xi coupled to a transverse harmonic mode along eta.

    SMC       B(xi^2-a^2)^2 + 1/2 M_eta w^2 (eta - g xi^2)^2
    ASMC      B(xi^2-a^2)^2 + 1/2 M_eta w^2 (eta - g xi)^2
    SQUEEZED  B(xi^2-a^2)^2 + 1/2 M_eta w^2 (1 + s (xi^2-a^2)^2/a^4) eta^2

    The squeezed mode keeps its well frequency at xi = ±a and is stiffened
    by a factor sqrt(1 + s) at the barrier top.
    """

    kind: CouplingKind
    B: float
    a: float
    omega_t: float
    g: float = 0.0
    s: float = 0.0
    masses: tuple[float, float] = (M_H, M_H)
    box: tuple[tuple[float, float], tuple[float, float]] = None

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", CouplingKind(self.kind.lower()))
        if not (self.B > 0 and self.a > 0 and self.omega_t > 0):
            raise ValueError("B, a and omega_t must be positive")
        if not all(m > 0 for m in self.masses):
            raise ValueError("masses must be positive")
        if self.s < 0:
            raise ValueError("squeezing strength must be non-negative")
        if self.kind is not CouplingKind.SQUEEZED and self.s != 0:
            raise ValueError("s only applies to the squeezed model")
        if self.box is None:
            object.__setattr__(self, "box", self.default_box())
        for ax in self.box:
            _check_domain(ax)

    def default_box(self):
        x = 2.2 * self.a
        ell = math.sqrt(HBAR / (self.masses[1] * self.omega_t))
        if self.kind is CouplingKind.SMC:
            shift = abs(self.g) * x * x
        elif self.kind is CouplingKind.ASMC:
            shift = abs(self.g) * x
        else:
            shift = 0.0
        w = 6.0 * ell + shift
        return ((-x, x), (-w, w))

    @property
    def height(self) -> float:
        return self.B * self.a**4

    def xi_potential(self, xi):
        return self.B * (xi * xi - self.a * self.a) ** 2

    def transverse_potential(self, xi, eta):
        k = 0.5 * self.masses[1] * self.omega_t**2
        if self.kind is CouplingKind.SMC:
            return k * (eta - self.g * xi * xi) ** 2
        if self.kind is CouplingKind.ASMC:
            return k * (eta - self.g * xi) ** 2
        sq = (xi * xi - self.a * self.a) ** 2 / self.a**4
        return k * (1.0 + self.s * sq) * eta**2

    def values(self, xi, eta):
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        (x0, x1), (e0, e1) = self.box
        if (np.any(xi < x0) or np.any(xi > x1) or np.any(eta < e0) or np.any(eta > e1)):
            raise DomainError("point outside the configured box")
        return self.xi_potential(xi) + self.transverse_potential(xi, eta)

    def reflect_sign(self) -> tuple[int, int]:
        """Axis flips of the model's parity operation."""
        return (-1, -1) if self.kind is CouplingKind.ASMC else (-1, 1)

    def separable(self) -> "CoupledModel2D":
        """The uncoupled reference model (g = 0, s = 0) on the same box."""
        return CoupledModel2D(self.kind, self.B, self.a, self.omega_t, 0.0, 0.0, self.masses, self.box)


def eval_2d(m: CoupledModel2D, xi: float, eta: float) -> float:
    return float(m.values(xi, eta))


def natural_model(
    kind,
    g: float = 0.0,
    s: float = 0.0,
    *,
    barrier: float = 12.0,
    omega_t: float = 4.0,
    a: float = 0.3e-10,
    mass: float = M_H,
    box=None,
) -> CoupledModel2D:
    """Build a model from dimensionless parameters.

    Energies are in units of ``hbar^2 / (mass a^2)``, lengths in units of
    ``a``; ``barrier`` is B a^4, ``omega_t`` is hbar*omega_t in that energy
    unit and ``g`` is the coupling in units of a^-1 (SMC) or 1 (ASMC).
    """
    kind = CouplingKind(kind.lower()) if isinstance(kind, str) else kind
    eps = HBAR**2 / (mass * a * a)
    g_si = g / a if kind is CouplingKind.SMC else g
    return CoupledModel2D(
        kind=kind,
        B=barrier * eps / a**4,
        a=a,
        omega_t=omega_t * eps / HBAR,
        g=g_si,
        s=s,
        masses=(mass, mass),
        box=box,
    )
