"""Rational helpers: fractions.Fraction is the numeric type everywhere."""
from __future__ import annotations

from fractions import Fraction
from math import factorial

Rational = Fraction


def fmt(q: Fraction | int) -> str:
    """Serialize as ``"p/q"`` in lowest terms (``"0/1"`` for zero)."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse(text: str | int) -> Fraction:
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        raise TypeError("floats are not accepted; use a 'p/q' string")
    return Fraction(text)


def inv_factorial(n: int) -> Fraction:
    return Fraction(1, factorial(n))
