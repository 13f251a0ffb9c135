"""Thermal and tunneling transfer rates, exact 1D spectra, doublet splittings."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.linalg import LinAlgError, eigh_tridiagonal
from scipy.sparse import diags
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .constants import HBAR, K_B, M_H
from .errors import ConvergenceError, DomainError, InsufficientBox, NoBarrier, NotADoubletWarning
from .potentials import DoubleWell, Potential1D, RectangularBarrier, find_turning_points

QUAD_TOL = 1e-10
DENSE_LIMIT = 4096
RESOLUTION = 1e-10


@dataclass(frozen=True)
class ArrheniusParams:
    V_C: float
    E_A: float
    T: float

    def __post_init__(self):
        if not self.V_C > 0:
            raise ValueError("V_C must be positive")
        if not self.E_A >= 0:
            raise ValueError("E_A must be non-negative")
        if not self.T > 0:
            raise ValueError("T must be positive")


@dataclass(frozen=True)
class WkbParams:
    potential: Potential1D
    E0: float
    M: float = M_H
    omega0: float = field(init=False)

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("M must be positive")
        if not self.E0 > 0:
            raise ValueError("E0 must be positive (attempt frequency E0/hbar)")
        lo = float(self.potential._values(np.linspace(*self.potential.domain, 4096)).min())
        if not self.E0 > lo:
            raise ValueError("E0 must lie above the potential minimum")
        object.__setattr__(self, "omega0", self.E0 / HBAR)


@dataclass(frozen=True)
class TunnelingRateResult:
    k: float
    action_integral: float
    turning_points: Optional[tuple[float, float]]
    omega0: float


@dataclass(frozen=True)
class Spectrum:
    energies: np.ndarray
    grid: tuple[tuple[float, float], int]
    vectors: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def splittings(self) -> np.ndarray:
        e = self.energies
        n = len(e) // 2
        return np.array([e[2 * i + 1] - e[2 * i] for i in range(n)])

    @property
    def positions(self) -> np.ndarray:
        (lo, hi), n = self.grid
        return np.linspace(lo, hi, n + 2)[1:-1]

    def degenerate_pairs(self, rtol: float = 1e-14) -> list[tuple[int, int]]:
        e = self.energies
        scale = np.abs(e).max() if len(e) else 1.0
        return [(i, i + 1) for i in range(len(e) - 1) if e[i + 1] - e[i] < rtol * scale]


def arrhenius_rate(p: ArrheniusParams) -> float:
    return p.V_C * math.exp(-p.E_A / (K_B * p.T))


def action_integral(p: Potential1D, E0: float, M: float, a: float, b: float) -> float:
    """``2/hbar * int_a^b sqrt(2M (V - E0)) dq`` on the sin^2 substitution.

    With q = a + (b - a) sin^2(theta) the square-root zeros at both turning
    points become smooth, so the adaptive Gauss-Kronrod rule converges fast.
    """
    width = b - a
    lo, hi = p.domain

    def integrand(theta):
        s, c = math.sin(theta), math.cos(theta)
        q = min(max(a + width * s * s, lo), hi)
        dv = float(p._values(np.asarray(q))) - E0
        return math.sqrt(2.0 * M * max(dv, 0.0)) * 2.0 * width * s * c

    if isinstance(p, RectangularBarrier):
        # constant integrand; avoid quad seeing the discontinuities at the edges
        val = math.sqrt(2.0 * M * (p.V0 - E0)) * width
    else:
        val, _ = quad(integrand, 0.0, 0.5 * math.pi, epsabs=0.0, epsrel=QUAD_TOL, limit=200)
    return 2.0 * val / HBAR


def wkb_rate(p: WkbParams) -> TunnelingRateResult:
    """Semiclassical rate ``omega0 * exp(-action)`` through the barrier above E0."""
    try:
        a, b = find_turning_points(p.potential, p.E0)
    except NoBarrier:
        return TunnelingRateResult(k=p.omega0, action_integral=0.0, turning_points=None, omega0=p.omega0)
    S = action_integral(p.potential, p.E0, p.M, a, b)
    return TunnelingRateResult(k=p.omega0 * math.exp(-S), action_integral=S, turning_points=(a, b), omega0=p.omega0)


@dataclass(frozen=True)
class ScanRow:
    T: float
    k_thermal: float
    k_tunnel: float


def temperature_scan(arr: ArrheniusParams, wkb: WkbParams, T_range: Sequence[float]) -> list[ScanRow]:
    T_range = list(T_range)
    if not T_range:
        raise ValueError("empty temperature range")
    # the tunneling rate carries no temperature: computed once, reused verbatim
    k_tun = wkb_rate(wkb).k
    rows = []
    for T in T_range:
        ap = ArrheniusParams(arr.V_C, arr.E_A, float(T))
        rows.append(ScanRow(float(T), arrhenius_rate(ap), k_tun))
    return rows


def solve_spectrum_1d(
    p: Potential1D,
    M: float,
    grid: tuple[tuple[float, float], int] | None = None,
    n_states: int = 6,
    *,
    check_edges: bool = True,
    vectors: bool = False,
) -> Spectrum:
    """Lowest eigenvalues of the central-difference Hamiltonian with hard walls.

    ``grid`` is ``((q_min, q_max), n_points)``; the walls sit at q_min and
    q_max and ``n_points`` interior nodes are used. Pass ``check_edges=False``
    when the walls are physical (particle in a box).
    """
    if grid is None:
        grid = (p.domain, 2048)
    (lo, hi), n = grid
    n = int(n)
    if n < 256:
        raise ValueError("need at least 256 grid points")
    if n_states < 1 or n_states > n:
        raise ValueError("n_states out of range")
    if lo < p.domain[0] or hi > p.domain[1]:
        raise DomainError("grid extent exceeds the potential's domain")
    q = np.linspace(lo, hi, n + 2)[1:-1]
    h = q[1] - q[0]
    v = p._values(q)

    # work in units of hbar^2/(M h^2) so the matrix entries are O(1)
    unit = HBAR**2 / (M * h * h)
    diag = 1.0 + v / unit
    off = np.full(n - 1, -0.5)
    try:
        if n <= DENSE_LIMIT:
            w, vec = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_states - 1))
        else:
            H = diags([off, diag, off], [-1, 0, 1], format="csc")
            # seeded start vector: identical reruns give bit-identical eigenvalues
            v0 = np.random.default_rng(0).standard_normal(n)
            w, vec = eigsh(H, k=n_states, sigma=float(diag.min()) - 1.0, which="LM", tol=0.0, v0=v0)
    except (LinAlgError, ArpackNoConvergence) as exc:
        raise ConvergenceError(str(exc)) from exc
    order = np.argsort(w, kind="stable")
    w = w[order] * unit
    vec = vec[:, order]

    if check_edges:
        spacing = (w[-1] - w[0]) / (len(w) - 1) if len(w) > 1 else abs(w[0])
        edge = min(float(p._values(np.asarray(lo))), float(p._values(np.asarray(hi))))
        if not edge > w[-1] + 5.0 * spacing:
            raise InsufficientBox(
                f"V at grid edges ({edge:.3e} J) does not exceed E_max + 5 spacings ({w[-1] + 5 * spacing:.3e} J)"
            )
    if vectors:
        vec = vec / math.sqrt(h)
        # fix the sign convention: first significant lobe positive
        for j in range(vec.shape[1]):
            k = np.argmax(np.abs(vec[:, j]) > 1e-3 * np.abs(vec[:, j]).max())
            if vec[k, j] < 0:
                vec[:, j] = -vec[:, j]
    return Spectrum(energies=w, grid=((float(lo), float(hi)), n), vectors=vec if vectors else None)


def doublet_splitting(s: Spectrum, n: int) -> float:
    """E(2n+1) - E(2n); warns with NotADoubletWarning if the pair is not a doublet."""
    e = s.energies
    if n < 0 or 2 * n + 1 >= len(e):
        raise IndexError(f"doublet {n} needs {2 * n + 2} levels, spectrum has {len(e)}")
    split = float(e[2 * n + 1] - e[2 * n])
    lo, hi = max(2 * n - 1, 0), min(2 * n + 2, len(e) - 1)
    gaps = np.diff(e[lo : hi + 1])
    if split > 0.5 * gaps.mean():
        warnings.warn(f"levels {2 * n}, {2 * n + 1} are not a tunneling doublet", NotADoubletWarning, stacklevel=2)
    return max(split, 0.0)


def node_count(psi: np.ndarray, rtol: float = 1e-6) -> int:
    """Sign changes of a sampled eigenfunction, ignoring the numerically-zero tails."""
    keep = np.abs(psi) > rtol * np.abs(psi).max()
    s = np.sign(psi[keep])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def well_frequency(p: Potential1D, M: float, n_scan: int = 4096) -> float:
    """Harmonic frequency at the global minimum from a 3-point quadratic fit."""
    q = np.linspace(*p.domain, n_scan)
    v = p._values(q)
    i = int(np.clip(np.argmin(v), 1, n_scan - 2))
    h = q[1] - q[0]
    curv = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h)
    if curv <= 0:
        raise ValueError("potential minimum is not locally convex")
    return math.sqrt(curv / M)


@dataclass(frozen=True)
class WkbComparison:
    exact_splitting: float
    e_ground_mean: float
    action: float
    omega_well: float
    wkb_splitting: float
    ratio: float
    valid: bool
    ratio_finite: bool
    note: str


def wkb_vs_exact_report(
    p: Potential1D,
    M: float = M_H,
    grid: tuple[tuple[float, float], int] | None = None,
) -> WkbComparison:
    """Compare the exact ground splitting with ``(hbar w/pi) exp(-action/2)``."""
    if not isinstance(p, DoubleWell):
        raise TypeError("wkb_vs_exact_report needs a DoubleWell")
    spec = solve_spectrum_1d(p, M, grid, n_states=4)
    exact = float(spec.energies[1] - spec.energies[0])
    e_mean = 0.5 * float(spec.energies[0] + spec.energies[1])
    omega = well_frequency(p, M)
    try:
        a, b = find_turning_points(p, e_mean)
        S = action_integral(p, e_mean, M, a, b)
    except NoBarrier:
        S = 0.0
    est = HBAR * omega / math.pi * math.exp(-0.5 * S)
    # eigenvalue round-off floor of the grid diagonalisation
    resolved = exact > RESOLUTION * e_mean and est > 0.0
    ratio = exact / est if resolved else math.nan
    if S < 1.0:
        note, valid = "semiclassical regime invalid", False
    elif not resolved:
        note, valid = "splitting below resolution", False
    else:
        note, valid = "ok", True
    return WkbComparison(exact, e_mean, S, omega, est, ratio, valid, resolved, note)
