"""
Utility functions for the d2d-topology simulator.

Unit conversions and small dictionary helpers used by the config layer.
"""

import re
from typing import Any, Dict, List, Union

Number = Union[int, float]

_QUANTITY_RE = re.compile(r"^\s*([-+]?\d*\.?\d+(?:[eE][-+]?\d+)?)\s*([A-Za-z]*)\s*$")

# unit kind -> suffix (lowercase) -> converter to the linear base unit
_UNIT_TABLE = {
    "power": {
        "": lambda v: v,
        "w": lambda v: v,
        "mw": lambda v: v * 1e-3,
        "dbm": lambda v: dbm_to_watts(v),
        "dbw": lambda v: db_to_linear(v),
    },
    "ratio": {
        "": lambda v: v,
        "db": lambda v: db_to_linear(v),
    },
    "frequency": {
        "": lambda v: v,
        "hz": lambda v: v,
        "khz": lambda v: v * 1e3,
        "mhz": lambda v: v * 1e6,
        "ghz": lambda v: v * 1e9,
    },
    "size": {
        "": lambda v: v,
        "bits": lambda v: v,
        "b": lambda v: v * 8,
        "kb": lambda v: v * 8e3,
        "mb": lambda v: v * 8e6,
    },
    "length": {
        "": lambda v: v,
        "m": lambda v: v,
        "km": lambda v: v * 1e3,
    },
}


def dbm_to_watts(value_dbm: Number) -> float:
    """Convert dBm to watts: 10 dBm -> 0.01 W."""
    return 10.0 ** (float(value_dbm) / 10.0) * 1e-3


def db_to_linear(value_db: Number) -> float:
    """Convert a dB ratio to a linear ratio."""
    return 10.0 ** (float(value_db) / 10.0)


def parse_quantity(value: Union[Number, str], kind: str) -> float:
    """
    Parse a number or a unit-suffixed string into the linear base unit.

    Args:
        value: Plain number (already in base unit) or string like "10dBm"
        kind: One of "power", "ratio", "frequency", "size", "length"

    Returns:
        Value in watts, linear ratio, hertz, bits or meters

    Raises:
        ValueError: If the string or its unit cannot be parsed
    """
    units = _UNIT_TABLE[kind]
    if isinstance(value, bool):
        raise ValueError(f"Expected a {kind} quantity, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ValueError(f"Expected a {kind} quantity, got {type(value).__name__}")

    # case-insensitive: "MB" and "Mb" both mean megabytes
    match = _QUANTITY_RE.match(value)
    if not match:
        raise ValueError(f"Cannot parse {kind} quantity {value!r}")
    number, unit = float(match.group(1)), match.group(2).lower()
    if unit not in units:
        raise ValueError(f"Unknown {kind} unit {match.group(2)!r} in {value!r}")
    return float(units[unit](number))


def deep_merge_dicts(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Deep merge two dictionaries."""
    result = base.copy()

    for key, value in override.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = deep_merge_dicts(result[key], value)
        else:
            result[key] = value

    return result


def parse_int_list(text: str) -> List[int]:
    """Parse a comma separated list of integers ("2,4,10")."""
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise ValueError("List cannot be empty")
    return [int(item) for item in items]


def parse_str_list(text: str) -> List[str]:
    """Parse a comma separated list of names."""
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise ValueError("List cannot be empty")
    return items


def format_float(value: Union[float, None]) -> str:
    """Render a float for CSV output; None becomes an empty field."""
    if value is None:
        return ""
    return repr(float(value))
