"""Parsing of human-unit quantities such as ``1um``, ``-1cm`` or ``45ms``."""
import re

from .constants import AMU, SODIUM23_MASS

LENGTH = {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "nm": 1e-9}
TIME = {"s": 1.0, "ms": 1e-3, "us": 1e-6}
TEMPERATURE = {"K": 1.0, "mK": 1e-3, "uK": 1e-6, "nK": 1e-9}
MASS = {"kg": 1.0, "amu": AMU, "u": AMU, "x": SODIUM23_MASS}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]*)\s*$")


class UnitError(ValueError):
    code = "UnitError"


def parse_quantity(text, units, default=None, what="quantity"):
    """Convert ``"<number><suffix>"`` to SI using the ``units`` table.

    A bare number is accepted only when ``default`` names a unit.
    """
    if isinstance(text, (int, float)):
        if default is None:
            raise UnitError(f"{what} {text!r} needs a unit suffix")
        return float(text) * units[default]
    m = _NUMBER.match(str(text))
    if not m:
        raise UnitError(f"cannot parse {what} {text!r}")
    value, suffix = m.groups()
    if not suffix:
        if default is None:
            raise UnitError(f"{what} {text!r} needs a unit suffix ({', '.join(units)})")
        suffix = default
    if suffix not in units:
        raise UnitError(f"unknown unit {suffix!r} for {what}; expected one of {', '.join(units)}")
    return float(value) * units[suffix]


def length(text, default=None):
    return parse_quantity(text, LENGTH, default, "length")


def duration(text, default="s"):
    return parse_quantity(text, TIME, default, "time")


def temperature(text, default="K"):
    return parse_quantity(text, TEMPERATURE, default, "temperature")


def mass(text, default="amu"):
    """``22.98977``/``22.98977amu``, ``3.8e-26kg`` or ``2x`` (multiples of 23Na)."""
    return parse_quantity(text, MASS, default, "mass")


def value_list(text):
    items = [s for s in (p.strip() for p in str(text).split(",")) if s]
    if not items:
        raise UnitError("empty value list")
    return items
