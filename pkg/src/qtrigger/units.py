"""Parsing of ``<number> <unit>`` strings into SI floats."""

from __future__ import annotations

import re

from scipy.constants import atomic_mass

from .constants import ANGSTROM, EV, M_H
from .errors import UnitError

UNITS = {
    "energy": {"J": 1.0, "eV": EV, "meV": 1e-3 * EV, "zJ": 1e-21, "kJ/mol": 1e3 / 6.02214076e23},
    "length": {"m": 1.0, "nm": 1e-9, "pm": 1e-12, "A": ANGSTROM, "Å": ANGSTROM, "angstrom": ANGSTROM},
    "temperature": {"K": 1.0},
    "rate": {"1/s": 1.0, "/s": 1.0, "s^-1": 1.0, "Hz": 1.0, "GHz": 1e9},
    "angular_frequency": {"rad/s": 1.0, "1/s": 1.0, "s^-1": 1.0},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "ps": 1e-12, "fs": 1e-15},
    "mass": {"kg": 1.0, "u": atomic_mass, "Da": atomic_mass, "m_H": M_H},
    "speed": {"m/s": 1.0},
}

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_QTY = re.compile(rf"^\s*({_NUM})\s*(\S+)?\s*$")


def parse_quantity(text: str, dimension: str) -> float:
    """``"0.5 eV"`` -> SI float; a bare number or a foreign unit is an error."""
    m = _QTY.match(text)
    if not m:
        raise ValueError(f"cannot read {text!r} as a quantity")
    value, unit = m.groups()
    if unit is None:
        raise UnitError(f"{text!r} needs a unit suffix ({dimension}: {', '.join(UNITS[dimension])})")
    table = UNITS[dimension]
    if unit not in table:
        raise UnitError(f"unit {unit!r} is not a {dimension} unit ({', '.join(table)})")
    return float(value) * table[unit]


def parse_number(text: str) -> float:
    m = _QTY.match(text)
    if not m:
        raise ValueError(f"cannot read {text!r} as a number")
    if m.group(2) is not None:
        raise UnitError(f"{text!r} is dimensionless and takes no unit")
    return float(m.group(1))
