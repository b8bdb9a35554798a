"""Truncated l-adic scalars and integer valuation helpers.

A :class:`PadicScalar` stores ``rep / ell**denom_exp`` where ``rep`` is only
known modulo ``ell**precision``.  Precision is relative to the integral
representative, so the absolute precision of the value is
``precision - denom_exp``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class PrecisionError(ArithmeticError):
    """Raised when a computation has no significant l-adic digits left."""


class NotAUnitError(ArithmeticError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


def val_int(n: int, ell: int) -> int:
    """Largest k with ell**k dividing n."""
    if n == 0:
        raise ValueError("valuation of 0 is undefined")
    if ell < 2:
        raise ValueError(f"ell must be a prime, got {ell}")
    n = abs(n)
    k = 0
    while n % ell == 0:
        n //= ell
        k += 1
    return k


def val_factorial(n: int, ell: int) -> int:
    """v_ell(n!) by Legendre's formula."""
    if n < 0:
        raise ValueError("factorial of a negative integer")
    total = 0
    power = ell
    while power <= n:
        total += n // power
        power *= ell
    return total


def digit_sum(n: int, base: int) -> int:
    s = 0
    while n:
        n, r = divmod(n, base)
        s += r
    return s


@dataclass(frozen=True)
class PadicScalar:
    ell: int
    precision: int
    rep: int
    denom_exp: int = 0

    def __post_init__(self) -> None:
        if self.precision <= 0:
            raise PrecisionError(
                f"precision exhausted (N={self.precision}) for ell={self.ell}"
            )
        if self.denom_exp < 0:
            raise ValueError("denominator exponent must be nonnegative")
        ell, n, rep, d = self.ell, self.precision, self.rep % self.ell**self.precision, self.denom_exp
        # cancel common powers of ell so that (rep, d) is canonical
        while d > 0 and rep % ell == 0 and n > 1:
            rep //= ell
            d -= 1
            n -= 1
        if d > 0 and rep % ell == 0:
            raise PrecisionError(f"precision exhausted while cancelling ell={ell}")
        object.__setattr__(self, "rep", rep)
        object.__setattr__(self, "denom_exp", d)
        object.__setattr__(self, "precision", n)

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_int(cls, value: int, ell: int, precision: int) -> PadicScalar:
        return cls(ell, precision, value)

    @classmethod
    def from_fraction(cls, value: Fraction | int, ell: int, precision: int) -> PadicScalar:
        """Absolute precision ``precision`` (value known mod ell**precision)."""
        value = Fraction(value)
        if value == 0:
            return cls(ell, precision, 0)
        num, den = value.numerator, value.denominator
        d = val_int(den, ell)
        unit_den = den // ell**d
        n = precision + d
        rep = num * pow(unit_den, -1, ell**n)
        return cls(ell, n, rep, d)

    # -- queries ------------------------------------------------------------

    @property
    def modulus(self) -> int:
        return self.ell**self.precision

    @property
    def absolute_precision(self) -> int:
        return self.precision - self.denom_exp

    @property
    def is_indistinguishable_from_zero(self) -> bool:
        return self.rep == 0

    def valuation(self) -> int:
        if self.rep == 0:
            raise PrecisionError(
                f"value indistinguishable from zero mod {self.ell}^{self.absolute_precision}"
            )
        return val_int(self.rep, self.ell) - self.denom_exp

    def is_unit(self) -> bool:
        return self.denom_exp == 0 and self.rep % self.ell != 0

    def to_fraction(self) -> Fraction:
        """The representative as a rational (only meaningful modulo precision)."""
        return Fraction(self.rep, self.ell**self.denom_exp)

    def congruent(self, other: PadicScalar | int) -> bool:
        """Equality at the common absolute precision."""
        diff = self - other
        return diff.rep == 0

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other: PadicScalar | int | Fraction) -> PadicScalar:
        if isinstance(other, PadicScalar):
            if other.ell != self.ell:
                raise ValueError(f"mixed primes {self.ell} and {other.ell}")
            return other
        if isinstance(other, (int, Fraction)):
            # exact constants get enough precision never to be the bottleneck
            return PadicScalar.from_fraction(other, self.ell, self.precision + 1)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        d = max(self.denom_exp, other.denom_exp)
        a = self.rep * self.ell ** (d - self.denom_exp)
        b = other.rep * self.ell ** (d - other.denom_exp)
        absolute = min(self.absolute_precision, other.absolute_precision)
        return PadicScalar(self.ell, absolute + d, a + b, d)

    __radd__ = __add__

    def __neg__(self) -> PadicScalar:
        return PadicScalar(self.ell, self.precision, -self.rep, self.denom_exp)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = min(self.precision, other.precision)
        return PadicScalar(self.ell, n, self.rep * other.rep, self.denom_exp + other.denom_exp)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> PadicScalar:
        if k < 0:
            return self.inverse() ** (-k)
        result = PadicScalar(self.ell, self.precision, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> PadicScalar:
        """Inverse of a unit (valuation 0)."""
        if not self.is_unit():
            raise NotAUnitError(f"{self!r} is not an {self.ell}-adic unit")
        return PadicScalar(self.ell, self.precision, pow(self.rep, -1, self.modulus))

    def divide_by_ell_power(self, k: int) -> PadicScalar:
        """Multiply by ell**(-k); negative k multiplies by a power of ell."""
        if k >= 0:
            return PadicScalar(self.ell, self.precision, self.rep, self.denom_exp + k)
        return PadicScalar(self.ell, self.precision - k, self.rep * self.ell ** (-k), self.denom_exp)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        v = other.valuation()
        unit = other.divide_by_ell_power(v)
        return (self * unit.inverse()).divide_by_ell_power(v)

    def __repr__(self) -> str:
        tail = f"/{self.ell}^{self.denom_exp}" if self.denom_exp else ""
        return f"PadicScalar({self.rep}{tail} mod {self.ell}^{self.precision})"
