"""Exact number parsing and formatting.

Values crossing a file or CLI boundary are strings: integers (``"3"``),
decimals (``"0.25"``) or ratios (``"1/3"``). Binary floats are rejected
so that nothing is silently rounded.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

from .errors import InputError


def parse_rational(value) -> Fraction:
    if isinstance(value, bool):
        raise InputError(f"expected a rational literal, got {value!r}")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational literal: {value!r}") from exc
    raise InputError(
        f"expected an integer or a string like '1/3', got {type(value).__name__} {value!r}"
    )


def format_rational(value) -> str:
    return str(Fraction(value))


def common_denominator(values) -> int:
    """Least common multiple of the denominators of ``values`` (1 if empty)."""
    from math import lcm

    den = 1
    for v in values:
        den = lcm(den, Fraction(v).denominator)
    return den
