"""Canonical serialization and exact decimal rounding.

Every report, journal record and API response goes through this module so
that identical data always yields identical bytes: keys sorted, no
insignificant whitespace, UTF-8, NaN/Infinity rejected.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any


def canonical_json(obj: Any) -> str:
    return json.dumps(
        obj,
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
        allow_nan=False,
    )


def canonical_bytes(obj: Any) -> bytes:
    return canonical_json(obj).encode("utf-8")


def _half_up_units(value: float | int | Fraction, places: int) -> int:
    """Scaled integer after half-up rounding (ties away from zero)."""
    q = Fraction(value) * 10**places
    sign = -1 if q < 0 else 1
    q = abs(q)
    n = q.numerator // q.denominator
    if (q - n) * 2 >= 1:
        n += 1
    return sign * n


def round_half_up(value: float | int | Fraction, places: int) -> float:
    """Round to `places` decimal digits, ties away from zero.

    Floats are interpreted at their exact binary value (no double rounding);
    Fractions are rounded exactly.
    """
    return _half_up_units(value, places) / 10**places


def format_fixed(value: float | int | Fraction, places: int) -> str:
    """Exact half-up rounding rendered with a fixed number of decimals."""
    n = _half_up_units(value, places)
    sign = "-" if n < 0 else ""
    whole, frac = divmod(abs(n), 10**places)
    if places == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{places}d}"
