"""Parsing of quantities with explicit unit suffixes, e.g. ``"4 mm^-1"`` or ``"20 T"``.

A bare number is rejected: silently assuming mm^-1 versus Mm^-1 would be off by
nine orders of magnitude.
"""

from __future__ import annotations

import math
import re

from .constants import ANGSTROM, CONSTANTS, PER_MEGAMETER, PER_MM

_AVOGADRO = 6.02214076e23

# kind -> {suffix: factor to SI}
UNITS: dict[str, dict[str, float]] = {
    "wavenumber": {"m^-1": 1.0, "1/m": 1.0, "mm^-1": PER_MM, "1/mm": PER_MM,
                   "Mm^-1": PER_MEGAMETER, "1/Mm": PER_MEGAMETER},
    "field": {"T": 1.0, "mT": 1e-3},
    "temperature": {"K": 1.0},
    "length": {"m": 1.0, "A": ANGSTROM, "Angstrom": ANGSTROM, "nm": 1e-9, "pm": 1e-12,
               "a_B": CONSTANTS.a_B},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "ps": 1e-12},
    "rate": {"1/s": 1.0, "s^-1": 1.0},
    "gamma": {"rad/s/T": 1.0, "rad/(s T)": 1.0, "MHz/T": 2e6 * math.pi},
    "energy": {"J": 1.0, "eV": CONSTANTS.e, "kJ/mol": 1e3 / _AVOGADRO, "kcal/mol": 4184.0 / _AVOGADRO},
    "ppm": {"ppm": 1.0},
    "angle": {"rad": 1.0, "deg": math.pi / 180.0},
    "count": {"": 1.0},
}

_NUM = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$")


def parse_quantity(text: str, kind: str) -> float:
    """Convert ``text`` to SI for the given kind; raises ValueError on a missing or wrong suffix."""
    if kind not in UNITS:
        raise ValueError(f"unknown quantity kind {kind!r}")
    m = _NUM.match(str(text))
    if not m:
        raise ValueError(f"cannot parse {text!r} as a {kind}")
    value, suffix = float(m.group(1)), m.group(2)
    table = UNITS[kind]
    if suffix not in table:
        if not suffix:
            raise ValueError(f"{text!r} has no unit; expected one of {sorted(k for k in table if k)}")
        raise ValueError(f"unit {suffix!r} is not a {kind}; expected one of {sorted(table)}")
    return value * table[suffix]


def parse_list(text: str, kind: str) -> list[float]:
    """Comma-separated values sharing one trailing unit, e.g. ``"4, 5, 6 mm^-1"``."""
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    if not parts:
        raise ValueError(f"empty list for {kind}")
    m = _NUM.match(parts[-1])
    suffix = m.group(2) if m else ""
    out = []
    for p in parts:
        pm = _NUM.match(p)
        if pm and not pm.group(2) and suffix:
            p = f"{p} {suffix}"
        out.append(parse_quantity(p, kind))
    return out


def format_quantity(value: float, kind: str) -> str:
    """SI value with its SI suffix, using repr so the round trip is exact."""
    si = {"wavenumber": "m^-1", "field": "T", "temperature": "K", "length": "m", "time": "s",
          "rate": "1/s", "gamma": "rad/s/T", "energy": "J", "ppm": "ppm", "angle": "rad",
          "count": ""}[kind]
    return f"{float(value)!r} {si}".rstrip()


__all__ = ["UNITS", "parse_quantity", "parse_list", "format_quantity"]
