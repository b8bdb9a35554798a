"""Rational interval enclosures of real constants and elementary functions.

Every transcendental value is returned as an :class:`Interval` whose
endpoints are exact :class:`~fractions.Fraction` objects and which provably
contains the true value.  Natural logarithms use the atanh series evaluated
in fixed point with one-sided truncation; exponentials use the Taylor series
with an explicit tail bound.
"""

from __future__ import annotations

import decimal
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

DEFAULT_BITS = 96


class IndeterminateComparison(ArithmeticError):
    """Two enclosures overlap, so their order cannot be certified."""


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        lo, hi = Fraction(self.lo), Fraction(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: Fraction | int) -> Interval:
        return cls(Fraction(x), Fraction(x))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: Fraction | int) -> bool:
        return self.lo <= x <= self.hi

    def __add__(self, other: Interval | Fraction | int) -> Interval:
        other = as_interval(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self) -> Interval:
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other: Interval | Fraction | int) -> Interval:
        return self + (-as_interval(other))

    def __rsub__(self, other: Interval | Fraction | int) -> Interval:
        return as_interval(other) - self

    def __mul__(self, other: Interval | Fraction | int) -> Interval:
        other = as_interval(other)
        products = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(products), max(products))

    __rmul__ = __mul__

    def __truediv__(self, other: Interval | Fraction | int) -> Interval:
        other = as_interval(other)
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError("interval division by an interval containing 0")
        return self * Interval(1 / other.hi, 1 / other.lo)

    def __pow__(self, k: int) -> Interval:
        if k < 0:
            return Interval.point(1) / (self**-k)
        if self.lo >= 0 or k % 2 == 1:
            return Interval(self.lo**k, self.hi**k)
        return Interval(Fraction(0) if self.hi >= 0 else self.hi**k, max(self.lo**k, self.hi**k))

    def certainly_lt(self, other: Interval | Fraction | int) -> bool:
        return self.hi < as_interval(other).lo

    def certainly_le(self, other: Interval | Fraction | int) -> bool:
        return self.hi <= as_interval(other).lo

    def __repr__(self) -> str:
        return f"Interval([{_approx(self.lo)}, {_approx(self.hi)}])"


def _approx(x: Fraction) -> str:
    try:
        return f"{float(x):.17g}"
    except OverflowError:
        return ("-" if x < 0 else "") + scientific_up(abs(x))


def as_interval(x: Interval | Fraction | int) -> Interval:
    if isinstance(x, Interval):
        return x
    return Interval.point(x)


def hull(a: Interval, b: Interval) -> Interval:
    return Interval(min(a.lo, b.lo), max(a.hi, b.hi))


def interval_max(a: Interval, b: Interval) -> Interval:
    return Interval(max(a.lo, b.lo), max(a.hi, b.hi))


# -- logarithms ----------------------------------------------------------------


def _atanh_fixed(num: int, den: int, bits: int, upward: bool) -> int:
    """2**bits * atanh(num/den), rounded down (or up), for 0 <= num/den <= 1/2.

    Powers y**(2j+1) are carried as one-sided fixed-point integers, so every
    truncation moves the partial sum in the requested direction.  The upward
    variant adds the geometric tail bound y**(2J+3) / (1 - y**2).
    """
    if num == 0:
        return 0
    n2, d2 = num * num, den * den
    power = (num << bits) // den if not upward else -((-num << bits) // den)
    total = 0
    k = 1
    while True:
        if upward:
            total += -(-power // k)
            if power <= 1:
                return total + -(-(power * n2) // (d2 - n2))
            power = -(-(power * n2) // d2)
        else:
            if power == 0:
                return total
            total += power // k
            power = power * n2 // d2
        k += 2


def _ln_dyadic(a: int, bits: int, upward: bool) -> int:
    """2**bits * ln(a / 2**bits) for 2**bits <= a <= 2**(bits+1), one-sided."""
    scale = 1 << bits
    return 2 * _atanh_fixed(a - scale, a + scale, bits, upward)


@lru_cache(maxsize=None)
def ln2(bits: int = DEFAULT_BITS) -> Interval:
    scale = 1 << (bits + 8)
    lo = 2 * _atanh_fixed(1, 3, bits + 8, upward=False)
    hi = 2 * _atanh_fixed(1, 3, bits + 8, upward=True)
    return Interval(Fraction(lo, scale), Fraction(hi, scale))


def ln(x: Fraction | int, bits: int = DEFAULT_BITS) -> Interval:
    """Enclosure of the natural logarithm of a positive rational."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("logarithm of a nonpositive number")
    if x == 1:
        return Interval.point(0)
    # x = m * 2**k with 1 <= m < 2
    k = x.numerator.bit_length() - x.denominator.bit_length()
    m = x / Fraction(2) ** k
    if m < 1:
        m *= 2
        k -= 1
    work = bits + 8 + max(k.bit_length(), 1)
    scale = 1 << work
    a_lo = (m.numerator * scale) // m.denominator
    a_hi = -((-m.numerator * scale) // m.denominator)
    lo = Fraction(_ln_dyadic(a_lo, work, upward=False), scale)
    hi = Fraction(_ln_dyadic(min(a_hi, 2 * scale), work, upward=True), scale)
    return Interval(lo, hi) + ln2(work) * k


def log10(x: Fraction | int, bits: int = DEFAULT_BITS) -> Interval:
    return ln(x, bits) / ln(10, bits)


def log_ratio(a: Fraction | int, b: Fraction | int, bits: int = DEFAULT_BITS) -> Interval:
    """Enclosure of log(a)/log(b) for b > 1."""
    return ln(a, bits) / ln(b, bits)


def log10_interval(x: Interval, bits: int = DEFAULT_BITS) -> Interval:
    """log10 is increasing, so the endpoints map to an enclosure."""
    return Interval(log10(x.lo, bits).lo, log10(x.hi, bits).hi)


# -- exponentials ------------------------------------------------------------------


def _exp_small(x: Fraction, bits: int) -> Interval:
    """e**x for 0 <= x <= 1 by Taylor series with a geometric tail bound."""
    eps = Fraction(1, 1 << bits)
    total = Fraction(0)
    term = Fraction(1)
    j = 0
    while True:
        total += term
        j += 1
        term = term * x / j
        if term < eps:
            # tail sum_{i>=j} x^i/i! <= term / (1 - x/(j+1))
            tail = term / (1 - x / (j + 1))
            return Interval(total, total + tail)


@lru_cache(maxsize=None)
def euler_e(bits: int = DEFAULT_BITS) -> Interval:
    return _exp_small(Fraction(1), bits)


def _round_dyadic(x: Fraction, bits: int, upward: bool) -> Fraction:
    scale = 1 << bits
    if upward:
        return Fraction(-((-x.numerator * scale) // x.denominator), scale)
    return Fraction((x.numerator * scale) // x.denominator, scale)


def exp(x: Fraction | int | Interval, bits: int = DEFAULT_BITS) -> Interval:
    """Enclosure of e**x; keep |x| moderate (integer part is exponentiated exactly)."""
    iv = as_interval(x)
    return Interval(_exp_point(iv.lo, bits, upward=False), _exp_point(iv.hi, bits, upward=True))


def _exp_point(x: Fraction, bits: int, upward: bool) -> Fraction:
    if x < 0:
        bound = _exp_point(-x, bits + 4, not upward)
        return 1 / bound
    n = math.floor(x)
    f = _round_dyadic(x - n, bits + 8, upward)
    f = min(max(f, Fraction(0)), Fraction(1))
    work = bits + 8 + 2 * max(n, 1).bit_length()
    small = _exp_small(f, work)
    e_iv = euler_e(work)
    if upward:
        return small.hi * e_iv.hi**n
    return small.lo * e_iv.lo**n


def pow10(x: Fraction | int | Interval, bits: int = DEFAULT_BITS) -> Interval:
    """Enclosure of 10**x."""
    iv = as_interval(x)
    l10 = ln(10, bits + 16)
    lo_arg = iv.lo * (l10.lo if iv.lo >= 0 else l10.hi)
    hi_arg = iv.hi * (l10.hi if iv.hi >= 0 else l10.lo)
    return Interval(exp(lo_arg, bits).lo, exp(hi_arg, bits).hi)


# -- rigorous floors and decimal rendering ---------------------------------------------


def floor_certified(value: callable, start_bits: int = 64, max_bits: int = 1 << 14) -> int:
    """Floor of a real number given as ``value(bits) -> Interval``.

    Precision is doubled until both endpoints share the same floor.  The caller
    must handle values that are exactly integers (the loop cannot terminate on
    them unless the enclosure collapses to a point).
    """
    bits = start_bits
    while bits <= max_bits:
        iv = value(bits)
        lo, hi = math.floor(iv.lo), math.floor(iv.hi)
        if lo == hi:
            return lo
        bits *= 2
    raise IndeterminateComparison("floor not determined at the maximal working precision")


def decimal_up(x: Fraction, digits: int = 15) -> str:
    """Decimal string >= x with ``digits`` places after the point."""
    x = Fraction(x)
    scale = 10**digits
    scaled = -((-x.numerator * scale) // x.denominator)
    return _render_scaled(scaled, digits)


def decimal_down(x: Fraction, digits: int = 15) -> str:
    x = Fraction(x)
    scale = 10**digits
    scaled = (x.numerator * scale) // x.denominator
    return _render_scaled(scaled, digits)


def scientific_up(x: Fraction, significant: int = 16) -> str:
    """Decimal string >= x; plain below 1e15, otherwise ``d.ddd...e+NN``."""
    x = Fraction(x)
    if abs(x) < 10**15:
        return decimal_up(x, 6)
    if x < 0:
        raise ValueError("scientific rendering is only used for large positive bounds")
    exponent = len(int_str(x.numerator // x.denominator)) - 1
    shift = exponent - (significant - 1)
    scaled = -((-x.numerator) // (x.denominator * 10**shift))
    digits = int_str(scaled)
    if len(digits) > significant:  # rounding carried into a new digit
        exponent += 1
        digits = digits[:significant]
    return f"{digits[0]}.{digits[1:]}e+{exponent}"


def int_str(n: int) -> str:
    """Decimal digits of ``n`` without the interpreter's int-to-str length limit."""
    if n.bit_length() < 4000:
        return str(n)
    return format(decimal.Decimal(n), "f")


def _render_scaled(scaled: int, digits: int) -> str:
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    if digits == 0:
        return f"{sign}{int_str(scaled)}"
    whole, frac = divmod(scaled, 10**digits)
    return f"{sign}{int_str(whole)}.{int_str(frac).rjust(digits, '0')}"
