"""Exact/float split for powers N^-beta.

An integral beta (``int`` or ``Fraction`` with denominator 1) keeps every
value an exact ``Fraction``; any other beta switches to 64-bit floats.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Any

Number = Fraction | float


def is_exact(beta: Any) -> bool:
    return isinstance(beta, Rational) and not isinstance(beta, bool) and Fraction(beta).denominator == 1


def npow(n: Fraction, beta: Any) -> Number:
    """N^-beta for an exact N >= 1."""
    if is_exact(beta):
        return Fraction(n) ** -int(beta)
    if n == 1:
        return 1.0
    return float(n) ** -float(beta)


def zero(beta: Any) -> Number:
    return Fraction(0) if is_exact(beta) else 0.0


def as_float(v: Any) -> float:
    return float(v)


def parse_beta(text: Any) -> int | float:
    """Integral values stay exact; everything else is a float."""
    if isinstance(text, bool):
        raise ValueError("beta must be a number")
    if isinstance(text, int):
        return text
    v = float(text)
    if isinstance(text, str):
        s = text.strip()
        if s.lstrip("+-").isdigit():
            return int(s)
    return v
