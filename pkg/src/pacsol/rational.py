"""Exact rational helpers: parsing, formatting and log-bounded ceilings."""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational

import mpmath

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")

# precision used for ceil(expression involving ln) so integer boundaries are resolved exactly
_LOG_DPS = 60


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"`` into a Fraction.

    Decimal strings such as ``"0.25"`` are accepted too since they are exact.
    Raises ``ValueError`` for a zero denominator or anything else.
    """
    if not isinstance(text, str):
        raise ValueError(f"expected a rational string, got {text!r}")
    match = _RATIONAL_RE.match(text)
    if match:
        num, den = match.groups()
        if den is not None and int(den) == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(int(num), int(den) if den is not None else 1)
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a rational: {text!r}") from None


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions, rational strings and floats to Fraction.

    Floats convert exactly (binary expansion); use strings when a decimal
    value such as 0.1 is meant.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise ValueError(f"cannot interpret {value!r} as a rational")


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def mp(value: Fraction) -> mpmath.mpf:
    value = Fraction(value)
    return mpmath.mpf(value.numerator) / value.denominator


def ln_inverse(value: Fraction) -> mpmath.mpf:
    """High-precision ln(1/value) for 0 < value."""
    return -mpmath.log(mp(value))


def ceil_mp(expr_fn) -> int:
    """Evaluate ``expr_fn()`` at high precision and take the ceiling."""
    with mpmath.workdps(_LOG_DPS):
        return int(mpmath.ceil(expr_fn()))
