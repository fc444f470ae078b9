"""Exact rational parsing and formatting."""

from decimal import Decimal
from fractions import Fraction
import numbers


def to_rational(value):
    """Convert ``value`` to a :class:`~fractions.Fraction` without rounding.

    Accepts ints, Fractions, Decimals and strings of the form ``"p/q"`` or
    a decimal literal. Binary floats are rejected because they cannot carry
    decimal input exactly.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not lengths")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Decimal)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational literal: {value!r}") from exc
    if isinstance(value, numbers.Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, float):
        raise TypeError(
            f"float {value!r} is not exact; pass a string such as '1/3' or '0.5'"
        )
    raise TypeError(f"cannot interpret {type(value).__name__} as a rational")


def fmt(q):
    """Canonical string form: ``"3"`` for integers, ``"p/q"`` otherwise."""
    return str(Fraction(q))


def approx(q):
    """Decimal rendering with 12 significant digits, for human reading only."""
    return f"{float(q):.12g}"


def both(q):
    return {"exact": fmt(q), "decimal": approx(q)}
