"""Exact number helpers: decimal parsing, decimal rendering and high-precision log10.

Counts are either ``int`` or ``fractions.Fraction``; floats only ever appear as
log10 estimates.
"""
from __future__ import annotations

import decimal
import math
import re
from decimal import Decimal
from fractions import Fraction
from typing import Union

ExactNumber = Union[int, Fraction]

# guard digits for log10 output; 25+ significant digits are written for rationals
_LOG_PREC = 60

_DECIMAL_RE = re.compile(r"^([+-]?)(\d*)(?:\.(\d*))?(?:[eE]([+-]?\d+))?$")


class _ZeroLog10:
    """Distinguished log10 marker for a count of exactly zero."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "LOG10_ZERO"

    def __str__(self):
        return "-inf"

    def __reduce__(self):
        return (_ZeroLog10, ())


LOG10_ZERO = _ZeroLog10()


def normalize(x: ExactNumber) -> ExactNumber:
    """Collapse integral fractions to ``int``."""
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def parse_decimal(text: str) -> Fraction:
    """Parse ``0.0003``, ``1.23e+4``, ``-2`` into an exact rational.

    Raises ValueError on anything else.
    """
    m = _DECIMAL_RE.match(text.strip())
    if not m or (not m.group(2) and not m.group(3)):
        raise ValueError(f"not a decimal number: {text!r}")
    sign, ip, fp, exp = m.groups()
    fp = fp or ""
    digits = int((ip or "0") + fp)
    e = (int(exp) if exp else 0) - len(fp)
    value = Fraction(digits) * (Fraction(10) ** e)
    return -value if sign == "-" else value


def parse_exact(text: str) -> Fraction:
    """Parse a decimal or ``p/q`` fraction."""
    if "/" in text:
        p, _, q = text.partition("/")
        return Fraction(int(p), int(q))
    return parse_decimal(text)


def decimal_places(x: Fraction) -> int | None:
    """Number of decimal places needed to write x exactly, or None if infinite."""
    den = x.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return None
    return max(twos, fives)


def format_exact(x: ExactNumber, max_places: int = 9) -> str:
    """Render as a plain decimal when it terminates within max_places, else ``p/q``."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    places = decimal_places(x)
    if places is None or places > max_places:
        return f"{x.numerator}/{x.denominator}"
    return format_fixed(x, places)


def format_fixed(x: Fraction, places: int) -> str:
    """Exact fixed-point rendering of a terminating rational."""
    sign = "-" if x < 0 else ""
    scaled = abs(x) * 10**places
    if scaled.denominator != 1:
        raise ValueError(f"{x} does not terminate within {places} places")
    digits = str(scaled.numerator).rjust(places + 1, "0")
    if places == 0:
        return sign + digits
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def _ilog10_float(n: int) -> float:
    # float log10 of an arbitrarily large positive int without overflow
    bits = n.bit_length()
    if bits < 1000:
        return math.log10(n)
    shift = bits - 64
    return math.log10(n >> shift) + shift * math.log10(2)


def log10_float(x: ExactNumber):
    """Double-precision log10 of a non-negative exact number; LOG10_ZERO for 0."""
    if x == 0:
        return LOG10_ZERO
    if x < 0:
        raise ValueError("log10 of a negative count")
    if isinstance(x, int):
        return _ilog10_float(x)
    return _ilog10_float(x.numerator) - _ilog10_float(x.denominator)


def log10_decimal(x: ExactNumber, prec: int = _LOG_PREC) -> Decimal:
    """High-precision log10 of a positive exact number."""
    if x <= 0:
        raise ValueError("log10 needs a positive number")
    x = Fraction(x)
    with decimal.localcontext() as ctx:
        ctx.prec = prec + 10
        num = Decimal(x.numerator).log10()
        den = Decimal(x.denominator).log10()
        out = num - den
    with decimal.localcontext() as ctx:
        ctx.prec = prec
        return +out


def pow10_decimal(exponent: Decimal, prec: int = _LOG_PREC) -> Decimal:
    with decimal.localcontext() as ctx:
        ctx.prec = prec
        return Decimal(10) ** exponent


def format_log10_fixed(x: ExactNumber, places: int = 15) -> str:
    """log10(x) rounded to ``places`` decimals; '-inf' for zero."""
    if x == 0:
        return str(LOG10_ZERO)
    value = log10_decimal(x)
    q = value.quantize(Decimal(1).scaleb(-places), rounding=decimal.ROUND_HALF_EVEN)
    return f"{q:f}"


def format_log10_significant(x: ExactNumber, digits: int = 30) -> str:
    """log10(x) with ``digits`` significant digits."""
    if x == 0:
        return str(LOG10_ZERO)
    with decimal.localcontext() as ctx:
        ctx.prec = digits
        value = +log10_decimal(x)
    return f"{value:f}"
