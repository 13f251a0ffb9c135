"""Exact 2D spectra of the coupled double-well models and their analysis.

The Hamiltonian is the 5-point finite-difference operator on a hard-wall
box. States are labelled by overlap with the separable (g = 0) product
basis; splitting series, region maps and excitation verdicts are built on
those labels.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .constants import HBAR
from .errors import AmbiguousLabel, ConvergenceError, InsufficientBox
from .potentials import CoupledModel2D, CouplingKind

AMBIGUITY_GAP = 0.05
N_REF = 10


@dataclass(frozen=True)
class Label:
    n_t: int
    d: int
    parity: int  # +1 or -1

    def __str__(self):
        return f"({self.n_t},{self.d},{'+' if self.parity > 0 else '-'})"


@dataclass(frozen=True)
class Level:
    energy: float
    label: Optional[Label]
    overlap: float
    overlap_gap: float

    @property
    def ambiguous(self) -> bool:
        return self.label is None


@dataclass(frozen=True)
class Spectrum2D:
    levels: tuple[Level, ...]
    splitting_series: tuple[float, ...]
    grid: tuple[np.ndarray, np.ndarray] = field(repr=False, compare=False)
    vectors: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def energies(self) -> np.ndarray:
        return np.array([lv.energy for lv in self.levels])

    def find(self, n_t: int, d: int, parity: int) -> Level:
        for lv in self.levels:
            if lv.label == Label(n_t, d, parity):
                return lv
        raise KeyError(f"no level labelled ({n_t},{d},{parity:+d})")


def _grid(box, n):
    (lo, hi) = box
    return np.linspace(lo, hi, n + 2)[1:-1]


def _start_vector(n: int) -> np.ndarray:
    # fixed Lanczos start so reruns give bit-identical spectra; random
    # rather than constant so no symmetry sector is missed
    return np.random.default_rng(0).standard_normal(n)


def _second_difference(n: int) -> sp.csr_matrix:
    return sp.diags([np.full(n - 1, -1.0), np.full(n, 2.0), np.full(n - 1, -1.0)], [-1, 0, 1], format="csr")


def _axes(m: CoupledModel2D, points):
    nx, ny = (points, points) if np.isscalar(points) else points
    if min(nx, ny) < 64:
        raise ValueError("need at least 64 points per axis")
    return _grid(m.box[0], int(nx)), _grid(m.box[1], int(ny))


def _reference_basis(m: CoupledModel2D, xi: np.ndarray, eta: np.ndarray, eps: float, n_ref: int = N_REF):
    """Orthonormal 1D eigenvectors of the uncoupled xi and eta Hamiltonians."""
    a = m.a
    hx, hy = (xi[1] - xi[0]) / a, (eta[1] - eta[0]) / a
    mu = m.masses[0] / m.masses[1]
    vx = m.xi_potential(xi) / eps
    vy = 0.5 * m.masses[1] * m.omega_t**2 * eta * eta / eps
    _, px = eigh_tridiagonal(1.0 / hx**2 + vx, np.full(len(xi) - 1, -0.5 / hx**2), select="i", select_range=(0, n_ref - 1))
    _, py = eigh_tridiagonal(
        mu / hy**2 + vy, np.full(len(eta) - 1, -0.5 * mu / hy**2), select="i", select_range=(0, n_ref - 1)
    )
    return px, py


def _check_symmetric(m: CoupledModel2D):
    (x0, x1), (y0, y1) = m.box
    if not math.isclose(x0, -x1, rel_tol=1e-12):
        raise ValueError("xi box must be symmetric about 0 for parity labels")
    if m.kind is CouplingKind.ASMC and not math.isclose(y0, -y1, rel_tol=1e-12):
        raise ValueError("eta box must be symmetric about 0 for ASMC parity labels")


def assign_labels(
    energies: np.ndarray,
    vectors: np.ndarray,
    m: CoupledModel2D,
    grid: tuple[np.ndarray, np.ndarray],
    *,
    gap: float = AMBIGUITY_GAP,
    reference=None,
) -> tuple[Level, ...]:
    """Label each eigenvector by its largest overlap with the g = 0 product basis.

    A state whose best and second-best squared overlaps differ by less than
    ``gap`` stays unlabelled. When two states claim the same label the one
    with the larger overlap keeps it. Parity is the sign of the expectation
    value of the model's reflection.
    """
    _check_symmetric(m)
    xi, eta = grid
    nx, ny = len(xi), len(eta)
    if reference is None:
        eps = HBAR**2 / (m.masses[0] * m.a**2)
        reference = _reference_basis(m, xi, eta, eps)
    px, py = reference
    fx, fy = m.reflect_sign()
    pending = []
    for j in range(vectors.shape[1]):
        psi = vectors[:, j].reshape(nx, ny)
        psi = psi / np.linalg.norm(psi)
        ov = (px.T @ psi @ py) ** 2
        flat = np.sort(ov.ravel())[::-1]
        k, n = np.unravel_index(int(np.argmax(ov)), ov.shape)
        refl = psi[::fx, ::fy]
        parity = 1 if float(np.sum(psi * refl)) >= 0.0 else -1
        best, second = float(flat[0]), float(flat[1])
        lab = Label(int(n), int(k) // 2, parity) if best - second >= gap else None
        pending.append([float(energies[j]), lab, best, best - second])

    owner = {}
    for i, (_, lab, best, _) in enumerate(pending):
        if lab is None:
            continue
        if lab not in owner or pending[owner[lab]][2] < best:
            owner[lab] = i
    levels = []
    for i, (e, lab, best, g) in enumerate(pending):
        if lab is not None and owner[lab] != i:
            lab = None
        levels.append(Level(e, lab, best, g))
    return tuple(levels)


def splitting_series(levels: Sequence[Level], d: int = 0) -> tuple[float, ...]:
    """|E(+) - E(-)| of doublet ``d`` for n_t = 0, 1, ... up to the first gap."""
    by_label = {lv.label: lv.energy for lv in levels if lv.label is not None}
    out = []
    n_t = 0
    while Label(n_t, d, 1) in by_label and Label(n_t, d, -1) in by_label:
        out.append(abs(by_label[Label(n_t, d, -1)] - by_label[Label(n_t, d, 1)]))
        n_t += 1
    return tuple(out)


def solve_spectrum_2d(
    m: CoupledModel2D,
    points=128,
    n_states: int = 24,
    *,
    keep_vectors: bool = False,
) -> Spectrum2D:
    """Lowest ``n_states`` eigenpairs by shift-invert Lanczos, labelled."""
    xi, eta = _axes(m, points)
    nx, ny = len(xi), len(eta)
    a = m.a
    eps = HBAR**2 / (m.masses[0] * a * a)
    hx, hy = (xi[1] - xi[0]) / a, (eta[1] - eta[0]) / a
    mu = m.masses[0] / m.masses[1]

    X, Y = np.meshgrid(xi, eta, indexing="ij")
    V = m.xi_potential(X) / eps + m.transverse_potential(X, Y) / eps
    H = (
        sp.kron(_second_difference(nx) * (0.5 / hx**2), sp.identity(ny))
        + sp.kron(sp.identity(nx), _second_difference(ny) * (0.5 * mu / hy**2))
        + sp.diags(V.ravel())
    ).tocsc()
    try:
        w, vec = eigsh(H, k=n_states, sigma=float(V.min()) - 1.0, which="LM", tol=0.0, v0=_start_vector(H.shape[0]))
    except ArpackNoConvergence as exc:
        raise ConvergenceError(str(exc)) from exc
    order = np.argsort(w, kind="stable")
    w, vec = w[order], vec[:, order]

    rim = np.concatenate([V[0, :], V[-1, :], V[:, 0], V[:, -1]])
    if not rim.min() > w[-1]:
        raise InsufficientBox(f"box rim potential {rim.min() * eps:.3e} J below E_max {w[-1] * eps:.3e} J")

    levels = assign_labels(w * eps, vec, m, (xi, eta), reference=_reference_basis(m, xi, eta, eps))
    return Spectrum2D(
        levels=levels,
        splitting_series=splitting_series(levels),
        grid=(xi, eta),
        vectors=vec if keep_vectors else None,
    )


class RegionClass(enum.IntEnum):
    R = 0
    C = 1
    I = 2  # noqa: E741
    EXTERIOR = 3


@dataclass(frozen=True)
class RegionMap:
    xi: np.ndarray
    eta: np.ndarray
    cells: np.ndarray
    energy: float
    energy_xi: float
    energy_eta: float

    def counts(self) -> dict[RegionClass, int]:
        return {c: int(np.count_nonzero(self.cells == c)) for c in RegionClass}

    def rows(self):
        for i, x in enumerate(self.xi):
            for j, y in enumerate(self.eta):
                yield i, j, float(x), float(y), int(self.cells[i, j])


def classify_regions(m: CoupledModel2D, level, points=128) -> RegionMap:
    """Classify grid cells as R / C / I / exterior for one labelled level.

    The energy is split with the separable reference: the transverse mode
    holds (n_t + 1/2) hbar omega_t and the tunnelling coordinate the rest.
    A direction is classical in a cell when its own potential there lies
    below its share of the energy.
    """
    if isinstance(level, Level):
        if level.label is None:
            raise AmbiguousLabel(f"level at {level.energy:.6e} J carries no label")
        energy, n_t = level.energy, level.label.n_t
    else:
        energy, n_t = level
    e_eta = (n_t + 0.5) * HBAR * m.omega_t
    e_xi = energy - e_eta
    xi, eta = _axes(m, points)
    X, Y = np.meshgrid(xi, eta, indexing="ij")
    vx = m.xi_potential(X)
    vy = m.transverse_potential(X, Y)
    cl_x = vx < e_xi
    cl_y = vy < e_eta

    cells = np.full(X.shape, RegionClass.I, dtype=np.int8)
    cells[cl_x & cl_y] = RegionClass.R
    cells[cl_x ^ cl_y] = RegionClass.C
    xi_outer = math.sqrt(m.a**2 + math.sqrt(e_xi / m.B)) if e_xi > 0 else m.a
    beyond = (np.abs(X) > xi_outer) & ~cl_x & ~cl_y & (vx + vy > energy)
    cells[beyond] = RegionClass.EXTERIOR
    return RegionMap(xi, eta, cells, energy, e_xi, e_eta)


class Verdict(enum.Enum):
    PROMOTE = "Promote"
    SUPPRESS = "Suppress"
    NO_EFFECT = "NoEffect"
    IRREGULAR = "Irregular"


def verdict_from_series(series: Sequence[float], tol: float) -> Verdict:
    """Classify how a splitting series moves with transverse excitation.

    Non-monotone series (oscillating splittings) map to Irregular.
    """
    s = np.asarray(series, dtype=float)
    if s.size < 2:
        raise ValueError("need at least two splittings")
    if np.max(np.abs(s - s[0])) < tol * s[0]:
        return Verdict.NO_EFFECT
    rel = np.diff(s) / s[:-1]
    if np.all(rel > tol):
        return Verdict.PROMOTE
    if np.all(rel < -tol):
        return Verdict.SUPPRESS
    return Verdict.IRREGULAR


@dataclass(frozen=True)
class ExcitationEffect:
    verdict: Verdict
    series: tuple[float, ...]
    tolerance: float

    def rederive(self) -> Verdict:
        return verdict_from_series(self.series, self.tolerance)


def excitation_effect(
    m: CoupledModel2D,
    n_levels: int = 3,
    tol: float = 1e-2,
    *,
    points=128,
    n_states: int = 24,
    spectrum: Optional[Spectrum2D] = None,
) -> ExcitationEffect:
    if n_levels < 3:
        raise ValueError("need at least 3 transverse levels")
    spec = spectrum if spectrum is not None else solve_spectrum_2d(m, points, n_states)
    series = spec.splitting_series
    if len(series) < n_levels:
        raise AmbiguousLabel(f"only {len(series)} unambiguous ground doublets, need {n_levels}")
    series = tuple(series[:n_levels])
    return ExcitationEffect(verdict_from_series(series, tol), series, tol)


# g in units of a^-1 (SMC) or 1 (ASMC); s dimensionless
SCAN_COUPLINGS = (0.0, 0.05, 0.1, 0.2)
SCAN_SQUEEZING = (0.0, 0.1, 0.5, 2.0)


def scan_grid():
    """The shipped parameter scan as (kind, g, s) triples."""
    for g in SCAN_COUPLINGS:
        yield CouplingKind.SMC, g, 0.0
    for g in SCAN_COUPLINGS:
        yield CouplingKind.ASMC, g, 0.0
    for s in SCAN_SQUEEZING:
        yield CouplingKind.SQUEEZED, 0.0, s
