"""Rigorous representation of astronomically large positive upper bounds.

A :class:`LogMagnitude` is one of

* level 0: an exact positive rational,
* level 1: an enclosure of ``log10(value)``,
* level 2: an enclosure of ``log10(log10(value))``.

Arithmetic is monotone and rounds outward, so the upper endpoint of every
result is an upper bound for the exact value of the formula that produced it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .rigorous import (
    IndeterminateComparison,
    Interval,
    decimal_up,
    int_str,
    interval_max,
    ln,
    log10,
    log10_interval,
    pow10,
    scientific_up,
)

EXACT_MAX_DIGITS = 10**4
LEVEL1_MAX_DIGITS = 10**6
# below this double-log a level-2 enclosure is cheap to bring back to level 1
_DOWNGRADE_LOGLOG = 1000
_NEGLIGIBLE = Fraction(1, 10**60)
_LOG2_BITS = Fraction(3010299957, 10**10)  # < log10(2), for digit estimates


def _digits_at_least(x: Fraction) -> int:
    """A lower estimate of log10(x), cheap, for level selection only."""
    bits = x.numerator.bit_length() - x.denominator.bit_length() - 1
    return math.floor(bits * _LOG2_BITS)


def _digits_at_most(x: Fraction) -> int:
    """An upper estimate of |log10(x)| + 1 for the same purpose."""
    bits = max(x.numerator.bit_length(), x.denominator.bit_length())
    return bits * 302 // 1000 + 1


def _log10_of_sum(p: Interval, q: Interval) -> Interval:
    """Enclosure of log10(10**p + 10**q)."""
    big, small = (p, q) if p.hi >= q.hi else (q, p)
    gap = small.hi - big.hi
    if gap < -200:
        excess = _NEGLIGIBLE
    else:
        # log10(1 + t) <= t / ln(10) < t / 2.3
        excess = pow10(gap).hi / Fraction(23, 10)
    return Interval(max(p.lo, q.lo), big.hi + excess)


@dataclass(frozen=True)
class LogMagnitude:
    level: int
    exact: Fraction | None = None
    enclosure: Interval | None = None

    # -- constructors --------------------------------------------------------------

    @classmethod
    def of(cls, value: int | Fraction) -> LogMagnitude:
        value = Fraction(value)
        if value <= 0:
            raise ValueError("LogMagnitude holds positive values only")
        if _digits_at_least(value) >= EXACT_MAX_DIGITS:
            return cls.from_log10(log10(value))
        return cls(0, exact=value)

    @classmethod
    def from_log10(cls, iv: Interval) -> LogMagnitude:
        if iv.lo > 0 and _digits_at_least(iv.lo) >= LEVEL1_MAX_DIGITS:
            return cls(2, enclosure=log10_interval(iv))
        return cls(1, enclosure=iv)

    @classmethod
    def from_loglog10(cls, iv: Interval) -> LogMagnitude:
        if iv.hi <= _DOWNGRADE_LOGLOG:
            return cls.from_log10(pow10(iv))
        return cls(2, enclosure=iv)

    @classmethod
    def enclosing(cls, iv: Interval) -> LogMagnitude:
        """A value known only to lie in ``iv``; exact if the interval is a point."""
        if iv.is_point:
            return cls.of(iv.lo)
        return cls.from_log10(log10_interval(iv))

    # -- views ----------------------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.level == 0

    def log10(self) -> Interval:
        if self.level == 0:
            return log10(self.exact)
        if self.level == 1:
            return self.enclosure
        if self.enclosure.hi <= _DOWNGRADE_LOGLOG:
            return pow10(self.enclosure)
        raise OverflowError("log10 of a level-2 magnitude is not representable")

    def loglog10(self) -> Interval:
        if self.level == 2:
            return self.enclosure
        inner = self.log10()
        if inner.lo <= 0:
            raise ValueError("log10(log10(x)) needs x > 10")
        return log10_interval(inner)

    def upper(self) -> Fraction:
        """Upper endpoint in the representation's own coordinate."""
        return self.exact if self.level == 0 else self.enclosure.hi

    def lifted(self, level: int) -> Interval:
        """Enclosure of the iterated log at ``level`` (1 or 2)."""
        if level == 1:
            return self.log10()
        if level == 2:
            return self.loglog10()
        raise ValueError(f"cannot lift to level {level}")

    # -- arithmetic ---------------------------------------------------------------------

    def __mul__(self, other: LogMagnitude | int | Fraction) -> LogMagnitude:
        other = _coerce(other)
        if self.level == 0 and other.level == 0:
            return LogMagnitude.of(self.exact * other.exact)
        if other.is_exact and other.exact == 1:
            return self
        if self.is_exact and self.exact == 1:
            return other
        level = max(self.level, other.level)
        if level == 1:
            return LogMagnitude.from_log10(self.log10() + other.log10())
        return LogMagnitude.from_loglog10(_log10_of_sum(self.loglog10(), other.loglog10()))

    __rmul__ = __mul__

    def __add__(self, other: LogMagnitude | int | Fraction) -> LogMagnitude:
        other = _coerce(other)
        if self.level == 0 and other.level == 0:
            return LogMagnitude.of(self.exact + other.exact)
        level = max(self.level, other.level)
        if level == 1:
            return LogMagnitude.from_log10(_log10_of_sum(self.log10(), other.log10()))
        # a + b <= 2 max(a, b)
        top = interval_max(self.loglog10(), other.loglog10())
        shifted = _log10_of_sum(top, log10_interval(log10(2)))
        return LogMagnitude.from_loglog10(Interval(top.lo, shifted.hi))

    __radd__ = __add__

    def __pow__(self, k: int | Fraction) -> LogMagnitude:
        k = Fraction(k)
        if k <= 0:
            raise ValueError("only positive exponents are supported")
        if self.level == 0:
            if self.exact == 1:
                return self
            if k.denominator == 1:
                if _digits_at_most(self.exact) * k < EXACT_MAX_DIGITS:
                    return LogMagnitude.of(self.exact ** int(k))
            return LogMagnitude.from_log10(self.log10() * k)
        if self.level == 1:
            return LogMagnitude.from_log10(self.enclosure * k)
        return LogMagnitude.from_loglog10(self.enclosure + log10(k))

    def raised_to(self, exponent: LogMagnitude) -> LogMagnitude:
        """self ** exponent where the exponent itself may be a magnitude."""
        if exponent.level == 0:
            return self ** exponent.exact
        if self.is_exact and self.exact == 1:
            return self
        base_loglog = self.loglog10()
        return LogMagnitude.from_loglog10(exponent.loglog10() + base_loglog) if exponent.level == 2 \
            else LogMagnitude.from_loglog10(exponent.log10() + base_loglog)

    # -- ordering ---------------------------------------------------------------------------

    def compare(self, other: LogMagnitude | int | Fraction) -> int:
        other = _coerce(other)
        if self.level == 0 and other.level == 0:
            return (self.exact > other.exact) - (self.exact < other.exact)
        level = max(self.level, other.level, 1)
        a, b = self.lifted(level), other.lifted(level)
        if a.hi < b.lo:
            return -1
        if a.lo > b.hi:
            return 1
        if a.is_point and b.is_point and a.lo == b.lo:
            return 0
        raise IndeterminateComparison(f"enclosures overlap at level {level}: {a} vs {b}")

    def __lt__(self, other) -> bool:
        return self.compare(other) < 0

    def __le__(self, other) -> bool:
        return self.compare(other) <= 0

    def __gt__(self, other) -> bool:
        return self.compare(other) > 0

    def __ge__(self, other) -> bool:
        return self.compare(other) >= 0

    # -- rendering ---------------------------------------------------------------------------

    def to_row(self, digits: int = 6) -> dict[str, str]:
        if self.level == 0:
            value = self.exact
            rendered = int_str(value.numerator) if value.denominator == 1 else decimal_up(value, 20)
            row = {"kind": "exact", "value": rendered, "rounded": "up"}
            row["log10"] = decimal_up(log10(value).hi, digits)
            return row
        kind = "log10" if self.level == 1 else "loglog10"
        row = {"kind": kind, "value": scientific_up(self.enclosure.hi), "rounded": "up"}
        if self.level == 1 and self.enclosure.lo > 0:
            row["loglog10"] = decimal_up(log10_interval(self.enclosure).hi, digits)
        return row

    def __repr__(self) -> str:
        if self.level == 0:
            return f"LogMagnitude(exact={self.exact})"
        return f"LogMagnitude(level={self.level}, {self.enclosure!r})"


def _coerce(x: LogMagnitude | int | Fraction) -> LogMagnitude:
    if isinstance(x, LogMagnitude):
        return x
    return LogMagnitude.of(x)


def lm_max(*values: LogMagnitude | int | Fraction) -> LogMagnitude:
    """Maximum; when enclosures overlap the result encloses the true maximum."""
    items = [_coerce(v) for v in values]
    if all(v.level == 0 for v in items):
        return LogMagnitude.of(max(v.exact for v in items))
    level = max(max(v.level for v in items), 1)
    iv = items[0].lifted(level)
    for v in items[1:]:
        iv = interval_max(iv, v.lifted(level))
    if level == 1:
        return LogMagnitude.from_log10(iv)
    return LogMagnitude.from_loglog10(iv)


def natural_log_magnitude(x: int | Fraction) -> Interval:
    """Convenience: enclosure of ln(x)."""
    return ln(x)
