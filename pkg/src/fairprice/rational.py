"""Exact rational plumbing: input coercion and output rendering.

All probabilities and margins in the pricing machinery are kept as
`fractions.Fraction` end to end.  Decimal inputs (strings, JSON numbers,
Python floats) are converted by base-10 scaling of their decimal
representation, so e.g. 0.66 becomes exactly 33/50, never the binary
float value.
"""

from __future__ import annotations

import math
from decimal import Decimal
from fractions import Fraction

from .errors import ValidationError

Rational = Fraction | int | str | float | Decimal


def as_fraction(value: Rational, what: str = "value") -> Fraction:
    """Coerce a number-like input to an exact Fraction.

    Strings accept both "a/b" and decimal notation (including exponents).
    Floats are read through their shortest decimal repr, which keeps CLI
    and test literals like 0.66 exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError(f"{what}: expected a number, got a bool")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Decimal):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValidationError(f"{what}: non-finite number {value!r}")
        return Fraction(str(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"{what}: cannot parse rational {value!r}") from exc
    raise ValidationError(f"{what}: expected a number, got {type(value).__name__}")


def frac_str(x: Fraction) -> str:
    """Exact rendering, e.g. Fraction(3, 5) -> "3/5", Fraction(2) -> "2"."""
    return str(x)


def decimal_str(x: Fraction | float, sig: int = 12) -> str:
    """Decimal rendering to `sig` significant digits (CSV/JSON output)."""
    return format(float(x), f".{sig}g")
