"""CODATA physical constants used throughout the package."""

from dataclasses import dataclass

from scipy import constants as _c

# relative atomic mass of 1H
_H_ATOMIC_MASS_U = 1.00782503223


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = _c.hbar
    k_b: float = _c.k
    m_H: float = _H_ATOMIC_MASS_U * _c.atomic_mass

    def __post_init__(self):
        for name in ("hbar", "k_b", "m_H"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


CONST = PhysicalConstants()
HBAR = CONST.hbar
K_B = CONST.k_b
M_H = CONST.m_H
EV = _c.electron_volt
ANGSTROM = _c.angstrom
