"""Exact rational helpers and the sentinel used for unavailable goods."""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Union

Rational = Union[int, Fraction]


class _Unavailable:
    """Price of a good that cannot be bought. Refuses all arithmetic."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNAVAILABLE"

    def __reduce__(self):
        return (_Unavailable, ())


UNAVAILABLE = _Unavailable()


def is_available(price) -> bool:
    return price is not UNAVAILABLE


def as_fraction(x) -> Fraction:
    """Parse an int, Fraction or "num/den" string into a Fraction.

    Floats are rejected: every value in this package is exact.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected int, Fraction or 'num/den' string, got {type(x).__name__}")


def format_rational(x: Fraction) -> int | str:
    """Serialize a rational as an int when integral, else as "num/den"."""
    x = Fraction(x)
    if x.denominator == 1:
        return x.numerator
    return f"{x.numerator}/{x.denominator}"


def ceil_log2(x: Rational) -> int:
    """Smallest integer e with 2**e >= x, for x > 0."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("ceil_log2 needs a positive argument")
    if x.denominator == 1:
        n = x.numerator
        return (n - 1).bit_length()
    e = x.numerator.bit_length() - x.denominator.bit_length() - 1
    while Fraction(2) ** e < x:
        e += 1
    while Fraction(2) ** (e - 1) >= x:
        e -= 1
    return e


def ceil_fraction(x: Rational) -> int:
    x = Fraction(x)
    return -((-x.numerator) // x.denominator)


def common_denominator(values: Iterable[Fraction]) -> int:
    d = 1
    for v in values:
        if v.denominator != 1:
            d = math.lcm(d, v.denominator)
    return d
