"""Exact arithmetic in the cyclotomic tower K_n = Q_l(zeta_{l^(n+1)}) over K_0 = Q_l(zeta_l).

An element of K_n is stored in the power basis ``1, zeta, ..., zeta^(D-1)``
with ``D = l^n (l-1)``.  All coefficients share one truncation: the element is
``l^(-scale) * sum(a_i zeta^i)`` with each integer ``a_i`` known modulo
``l^precision``.  Keeping a shared scale lets exact divisions by powers of
``l`` (normalized traces, inverses) be recorded without touching the digits.

Valuations are normalized by ``v(zeta_l - 1) = 1``, so ``v(l) = e = l - 1``
and the uniformizer ``pi_n = zeta - 1`` of K_n has ``v(pi_n) = l^(-n)``.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .padic import PadicScalar, PrecisionError, is_prime, val_int

MAX_DEGREE = 2500


class TowerSizeError(ValueError):
    """The requested level exceeds the practical degree cap."""


class TowerConsistencyError(RuntimeError):
    """An internal identity failed; signals a bug or corrupted precision."""


# -- configuration -------------------------------------------------------------------


@dataclass(frozen=True)
class TowerConfig:
    ell: int
    n_max: int
    precision: int

    def __post_init__(self) -> None:
        if self.ell == 2:
            raise ValueError("towers over l = 2 are not supported (1 + 2 does not generate cleanly)")
        if self.ell < 3 or not is_prime(self.ell):
            raise ValueError(f"l must be an odd prime, got {self.ell}")
        if self.n_max < 0:
            raise ValueError("n_max must be nonnegative")
        if self.precision < 1:
            raise ValueError("precision must be positive")
        if degree(self.ell, self.n_max) > MAX_DEGREE:
            raise TowerSizeError(
                f"[K_{self.n_max}:Q_{self.ell}] = {degree(self.ell, self.n_max)} exceeds the cap {MAX_DEGREE}"
            )

    @property
    def e(self) -> int:
        return self.ell - 1

    @property
    def u(self) -> int:
        """sigma acts as zeta -> zeta^u."""
        return 1 + self.ell

    def degree(self, n: int) -> int:
        return degree(self.ell, n)

    def check_level(self, n: int) -> None:
        if not 0 <= n <= self.n_max:
            raise ValueError(f"level {n} outside 0..{self.n_max}")


def degree(ell: int, n: int) -> int:
    return ell**n * (ell - 1)


# -- polynomial helpers over Z / l^N ----------------------------------------------------


def _reduce(coeffs: Sequence[int], ell: int, n: int, modulus: int) -> list[int]:
    """Reduce sum(c_i x^i) modulo Phi_{l^(n+1)} and modulus."""
    block = ell**n
    period = block * ell
    d = block * (ell - 1)
    if len(coeffs) <= d:
        out = [c % modulus for c in coeffs]
        out.extend([0] * (d - len(out)))
        return out
    folded = [0] * period
    for start in range(0, len(coeffs), period):
        chunk = coeffs[start:start + period]
        for i, c in enumerate(chunk):
            folded[i] += c
    top = folded[d:]
    if any(top):
        for k in range(ell - 1):
            lo = k * block
            folded[lo:lo + block] = [a - b for a, b in zip(folded[lo:lo + block], top)]
    return [c % modulus for c in folded[:d]]


def _slot_bytes(bound: int) -> int:
    return (bound.bit_length() + 8) // 8


def _pack(coeffs: Sequence[int], width: int) -> int:
    return int.from_bytes(b"".join(c.to_bytes(width, "little") for c in coeffs), "little")


def _unpack(value: int, width: int, count: int) -> list[int]:
    raw = value.to_bytes(width * count, "little")
    return [int.from_bytes(raw[i * width:(i + 1) * width], "little") for i in range(count)]


def poly_mul(a: Sequence[int], b: Sequence[int], modulus: int) -> list[int]:
    """Product of two polynomials with coefficients in [0, modulus), by Kronecker substitution."""
    if not a or not b:
        return []
    width = _slot_bytes(modulus * modulus * min(len(a), len(b)))
    product = _pack(a, width) * _pack(b, width)
    return [c % modulus for c in _unpack(product, width, len(a) + len(b) - 1)]


@lru_cache(maxsize=256)
def _binomial_row(h: int, modulus: int) -> tuple[int, ...]:
    """Coefficients of (1 + x)^h modulo ``modulus``."""
    row = [1]
    for k in range(1, h + 1):
        row.append(row[-1] * (h - k + 1) // k)
    return tuple(c % modulus for c in row)


def taylor_shift(coeffs: Sequence[int], modulus: int) -> list[int]:
    """Coefficients of p(1 + y) in y, given those of p(x), modulo ``modulus``.

    Divide and conquer: p = lo + x^h hi gives p(1+y) = lo(1+y) + (1+y)^h hi(1+y).
    """
    m = len(coeffs)
    if m <= 24:
        out = [c % modulus for c in coeffs]
        for i in range(m - 1, 0, -1):
            for j in range(i - 1, m - 1):
                out[j] = (out[j] + out[j + 1]) % modulus
        return out
    h = m // 2
    low = taylor_shift(coeffs[:h], modulus)
    high = poly_mul(taylor_shift(coeffs[h:], modulus), _binomial_row(h, modulus), modulus)
    out = high[:m]
    out.extend([0] * (m - len(out)))
    for i, c in enumerate(low):
        out[i] = (out[i] + c) % modulus
    return out


# -- elements -------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TowerElement:
    """``l^(-scale) * sum(coeffs[i] * zeta^i)`` with coefficients known mod ``l^precision``."""

    ell: int
    level: int
    precision: int
    coeffs: tuple[int, ...]
    scale: int = 0
    _pi_cache: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self) -> None:
        d = degree(self.ell, self.level)
        if len(self.coeffs) != d:
            raise ValueError(f"level {self.level} needs {d} coefficients, got {len(self.coeffs)}")
        n, s = self.precision, self.scale
        if n < 1:
            raise PrecisionError(f"precision exhausted (N={n}) at level {self.level}")
        modulus = self.ell**n
        coeffs = tuple(c % modulus for c in self.coeffs)
        # cancel common factors of l against the scale
        while s > 0 and all(c % self.ell == 0 for c in coeffs):
            if n == 1:
                raise PrecisionError(
                    f"precision exhausted while dividing by {self.ell}^{self.scale} at level {self.level}"
                )
            coeffs = tuple(c // self.ell for c in coeffs)
            n -= 1
            s -= 1
        if s < 0:
            coeffs = tuple(c * self.ell ** (-s) for c in coeffs)
            n -= s
            s = 0
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "precision", n)
        object.__setattr__(self, "scale", s)

    # -- constructors --------------------------------------------------------------------

    @classmethod
    def from_coeffs(cls, ell: int, level: int, precision: int, coeffs: Sequence[int], scale: int = 0) -> TowerElement:
        """Arbitrary-length coefficient list, reduced modulo the cyclotomic polynomial."""
        reduced = _reduce(list(coeffs), ell, level, ell**precision)
        return cls(ell, level, precision, tuple(reduced), scale)

    @classmethod
    def constant(cls, value: int | Fraction | PadicScalar, ell: int, level: int, precision: int) -> TowerElement:
        if isinstance(value, PadicScalar):
            rep, scale, n = value.rep, value.denom_exp, value.precision
        else:
            scalar = PadicScalar.from_fraction(Fraction(value), ell, precision)
            rep, scale, n = scalar.rep, scalar.denom_exp, scalar.precision
        coeffs = [0] * degree(ell, level)
        coeffs[0] = rep
        return cls(ell, level, n, tuple(coeffs), scale)

    @classmethod
    def zeta_power(cls, ell: int, level: int, precision: int, k: int = 1) -> TowerElement:
        period = ell ** (level + 1)
        coeffs = [0] * period
        coeffs[k % period] = 1
        return cls.from_coeffs(ell, level, precision, coeffs)

    @classmethod
    def uniformizer(cls, ell: int, level: int, precision: int) -> TowerElement:
        """pi_n = zeta_{l^(n+1)} - 1."""
        return cls.from_coeffs(ell, level, precision, [-1, 1])

    # -- basic views -------------------------------------------------------------------------

    @property
    def e(self) -> int:
        return self.ell - 1

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    @property
    def modulus(self) -> int:
        return self.ell**self.precision

    @property
    def absolute_precision(self) -> int:
        """The value is known modulo l^absolute_precision times the integer ring."""
        return self.precision - self.scale

    @property
    def is_indistinguishable_from_zero(self) -> bool:
        return not any(self.coeffs)

    @property
    def content(self) -> int:
        """Largest k <= precision with every coefficient divisible by l^k."""
        best = self.precision
        for c in self.coeffs:
            if c:
                best = min(best, val_int(c, self.ell))
                if best == 0:
                    break
        return best

    def coefficient(self, i: int) -> PadicScalar:
        return PadicScalar(self.ell, self.precision, self.coeffs[i], self.scale)

    def with_precision(self, precision: int) -> TowerElement:
        """Forget digits (never adds any)."""
        precision = min(precision, self.precision)
        return TowerElement(self.ell, self.level, precision, self.coeffs, self.scale)

    # -- valuation -----------------------------------------------------------------------------

    def pi_coefficients(self) -> list[int]:
        """Coefficients in the basis (zeta - 1)^j, modulo l^precision (scale not applied)."""
        if not self._pi_cache:
            self._pi_cache.append(taylor_shift(self.coeffs, self.modulus))
        return self._pi_cache[0]

    def valuation(self) -> Fraction:
        """v(x) with v(l) = e; raises PrecisionError if x is indistinguishable from zero."""
        best = None
        step = Fraction(1, self.ell**self.level)
        for j, b in enumerate(self.pi_coefficients()):
            if b:
                candidate = self.e * val_int(b, self.ell) + j * step
                if best is None or candidate < best:
                    best = candidate
        if best is None:
            raise PrecisionError(
                f"element indistinguishable from zero at precision {self.precision} (level {self.level})"
            )
        return best - self.e * self.scale

    def valuation_lower_bound(self) -> Fraction:
        """A certified lower bound, valid even when the element looks like zero."""
        if self.is_indistinguishable_from_zero:
            return Fraction(self.e * self.absolute_precision)
        return self.valuation()

    # -- ring operations --------------------------------------------------------------------

    def _check_compatible(self, other: TowerElement) -> None:
        if self.ell != other.ell or self.level != other.level:
            raise ValueError(
                f"incompatible elements (l={self.ell}, n={self.level}) and (l={other.ell}, n={other.level})"
            )

    def _lift(self, other) -> TowerElement:
        if isinstance(other, TowerElement):
            self._check_compatible(other)
            return other
        if isinstance(other, (int, Fraction, PadicScalar)):
            if isinstance(other, PadicScalar):
                return TowerElement.constant(other, self.ell, self.level, self.precision)
            # exact constants get one digit more than needed
            return TowerElement.constant(other, self.ell, self.level, max(self.absolute_precision + 1, 1))
        return NotImplemented

    def __add__(self, other) -> TowerElement:
        other = self._lift(other)
        if other is NotImplemented:
            return other
        s = max(self.scale, other.scale)
        absolute = min(self.absolute_precision, other.absolute_precision)
        fa, fb = self.ell ** (s - self.scale), self.ell ** (s - other.scale)
        coeffs = tuple(a * fa + b * fb for a, b in zip(self.coeffs, other.coeffs))
        return TowerElement(self.ell, self.level, absolute + s, coeffs, s)

    __radd__ = __add__

    def __neg__(self) -> TowerElement:
        return TowerElement(self.ell, self.level, self.precision, tuple(-c for c in self.coeffs), self.scale)

    def __sub__(self, other) -> TowerElement:
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> TowerElement:
        return (-self) + other

    def __mul__(self, other) -> TowerElement:
        if isinstance(other, (int, Fraction, PadicScalar)):
            return self._scalar_mul(other)
        other = self._lift(other)
        if other is NotImplemented:
            return other
        # errors l^N1 * b + l^N2 * a are divisible by l^min(N1 + content(b), N2 + content(a))
        n = min(self.precision + other.content, other.precision + self.content)
        modulus = self.ell**n
        product = poly_mul([c % modulus for c in self.coeffs], [c % modulus for c in other.coeffs], modulus)
        reduced = _reduce(product, self.ell, self.level, modulus)
        return TowerElement(self.ell, self.level, n, tuple(reduced), self.scale + other.scale)

    __rmul__ = __mul__

    def _scalar_mul(self, c: int | Fraction | PadicScalar) -> TowerElement:
        if isinstance(c, PadicScalar):
            if c.ell != self.ell:
                raise ValueError("mixed primes")
            c_content = min(val_int(c.rep, self.ell), c.precision) if c.rep else c.precision
            n = min(self.precision + c_content, c.precision + self.content)
            return TowerElement(self.ell, self.level, n, tuple(a * c.rep for a in self.coeffs), self.scale + c.denom_exp)
        c = Fraction(c)
        if c == 0:
            return TowerElement(self.ell, self.level, max(self.absolute_precision, 1), (0,) * self.degree)
        num_v = val_int(c.numerator, self.ell)
        den_v = val_int(c.denominator, self.ell)
        unit_num = c.numerator // self.ell**num_v
        unit_den = c.denominator // self.ell**den_v
        factor = unit_num * pow(unit_den, -1, self.modulus) * self.ell**num_v
        # multiplying by l^k gains k digits of relative precision
        return TowerElement(
            self.ell, self.level, self.precision + num_v, tuple(a * factor for a in self.coeffs), self.scale + den_v
        )

    def __pow__(self, k: int) -> TowerElement:
        if k < 0:
            raise ValueError("negative powers: use inverse_level0 or solve explicitly")
        result = TowerElement.constant(1, self.ell, self.level, self.precision)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def congruent(self, other) -> bool:
        """Equality at the common absolute precision."""
        return (self - other).is_indistinguishable_from_zero

    # -- serialization ---------------------------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "ell": self.ell,
            "level": self.level,
            "precision": self.precision,
            "scale": self.scale,
            "coeffs": [str(c) for c in self.coeffs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)

    @classmethod
    def from_json_obj(cls, obj: dict) -> TowerElement:
        return cls(
            int(obj["ell"]),
            int(obj["level"]),
            int(obj["precision"]),
            tuple(int(c) for c in obj["coeffs"]),
            int(obj.get("scale", 0)),
        )

    def __repr__(self) -> str:
        nonzero = [(i, c) for i, c in enumerate(self.coeffs) if c]
        shown = " + ".join(f"{c}*z^{i}" for i, c in nonzero[:4]) or "0"
        if len(nonzero) > 4:
            shown += " + ..."
        tail = f" / {self.ell}^{self.scale}" if self.scale else ""
        return f"TowerElement(l={self.ell}, n={self.level}, N={self.precision}: ({shown}){tail})"


# -- Galois action, embeddings, traces --------------------------------------------------------


def galois_conjugate(x: TowerElement, a: int) -> TowerElement:
    """Image of x under zeta -> zeta^a (a prime to l)."""
    period = x.ell ** (x.level + 1)
    a %= period
    if a % x.ell == 0:
        raise ValueError(f"{a} is not prime to {x.ell}")
    if a == 1:
        return x
    image = [0] * period
    for i, c in enumerate(x.coeffs):
        if c:
            image[(i * a) % period] += c
    reduced = _reduce(image, x.ell, x.level, x.modulus)
    return TowerElement(x.ell, x.level, x.precision, tuple(reduced), x.scale)


def sigma(x: TowerElement, j: int = 1) -> TowerElement:
    """sigma^j(x) where sigma(zeta) = zeta^(1 + l)."""
    period = x.ell ** (x.level + 1)
    return galois_conjugate(x, pow(1 + x.ell, j, period))


def embed(x: TowerElement, target: int) -> TowerElement:
    """Image of x in K_target via zeta_{l^(n+1)} = zeta_{l^(m+1)}^(l^(m-n))."""
    if target < x.level:
        raise ValueError(f"cannot embed level {x.level} into lower level {target}")
    if target == x.level:
        return x
    stride = x.ell ** (target - x.level)
    coeffs = [0] * degree(x.ell, target)
    coeffs[::stride] = x.coeffs
    return TowerElement(x.ell, target, x.precision, tuple(coeffs), x.scale)


def trace_step(x: TowerElement) -> TowerElement:
    """Tr_{K_(n+1)/K_n}: the sum of sigma^(j l^n)(x) for j < l, read at level n."""
    if x.level < 1:
        raise ValueError("trace_step needs an element of level >= 1")
    n = x.level - 1
    total = [0] * x.degree
    for j in range(x.ell):
        conj = sigma(x, j * x.ell**n)
        total = [a + b for a, b in zip(total, conj.coeffs)]
    modulus = x.modulus
    total = [c % modulus for c in total]
    if any(c for i, c in enumerate(total) if i % x.ell):
        raise TowerConsistencyError("trace is not supported on zeta^l: result not in the subfield")
    return TowerElement(x.ell, n, x.precision, tuple(total[:: x.ell]), x.scale)


def trace_to_base(x: TowerElement) -> TowerElement:
    """Tr_{K_n/K_0} as a composition of trace steps."""
    while x.level > 0:
        x = trace_step(x)
    return x


def normalized_trace(x: TowerElement) -> TowerElement:
    """t(x) = l^(-n) Tr_{K_n/K_0}(x), an element of level 0."""
    n = x.level
    if x.precision <= n and not x.is_indistinguishable_from_zero:
        raise PrecisionError(f"normalized trace at level {n} needs precision N > {n}, have {x.precision}")
    traced = trace_to_base(x)
    try:
        return TowerElement(traced.ell, 0, traced.precision, traced.coeffs, traced.scale + n)
    except PrecisionError as exc:
        raise PrecisionError(
            f"normalized trace at level {n} needs precision N > {n + x.scale}; have {x.precision}"
        ) from exc


def inverse_level0(x: TowerElement) -> TowerElement:
    """1/x for x in K_0 via the product of the other Galois conjugates over the norm."""
    if x.level != 0:
        raise ValueError("inverse_level0 expects an element of K_0")
    if x.is_indistinguishable_from_zero:
        raise ZeroDivisionError("inverse of an element indistinguishable from zero")
    conjugates = TowerElement.constant(1, x.ell, 0, x.precision)
    for a in range(2, x.ell):
        conjugates = conjugates * galois_conjugate(x, a)
    norm = x * conjugates
    if any(norm.coeffs[1:]):
        raise TowerConsistencyError("norm of a base element is not rational")
    rep = norm.coeffs[0]
    if rep == 0:
        raise PrecisionError("norm indistinguishable from zero at this precision")
    k = val_int(rep, x.ell)
    if norm.precision - k < 1:
        raise PrecisionError("inverse lost all precision")
    # norm = l^(k - norm.scale) * unit with the unit known mod l^(N - k)
    unit = PadicScalar(x.ell, norm.precision - k, rep // x.ell**k)
    scaled = conjugates * unit.inverse()
    return TowerElement(x.ell, 0, scaled.precision, scaled.coeffs, scaled.scale + k - norm.scale)


# -- different -------------------------------------------------------------------------------------


def _cyclotomic_derivative_at_zeta(ell: int, n: int, precision: int) -> TowerElement:
    """Phi'_{l^(n+1)}(zeta) = sum_{k=1}^{l-1} k l^n zeta^(k l^n - 1); every exponent is < D."""
    coeffs = [0] * degree(ell, n)
    block = ell**n
    for k in range(1, ell):
        coeffs[k * block - 1] = k * block
    return TowerElement(ell, n, precision, tuple(coeffs))


def different_valuation(ell: int, n: int, precision: int | None = None) -> Fraction:
    """v(different of K_n/K_0) = v(Phi'_{l^(n+1)}(zeta_{l^(n+1)})) - v(Phi'_l(zeta_l))."""
    if n < 0:
        raise ValueError("level must be nonnegative")
    if precision is None:
        precision = n + 3
    top = _cyclotomic_derivative_at_zeta(ell, n, precision).valuation()
    bottom = _cyclotomic_derivative_at_zeta(ell, 0, precision).valuation()
    return top - bottom


# -- random elements -----------------------------------------------------------------------------

SAMPLE_KINDS = ("dense", "sparse", "pi_adic", "near_base")


def random_element(ell: int, level: int, precision: int, rng: random.Random, kind: str | None = None) -> TowerElement:
    """A nonzero random element mixing several shapes so that extreme valuations occur."""
    kind = kind or rng.choice(SAMPLE_KINDS)
    d = degree(ell, level)
    modulus = ell**precision
    for _ in range(100):
        if kind == "dense":
            coeffs = [rng.randrange(modulus) for _ in range(d)]
            x = TowerElement(ell, level, precision, tuple(coeffs))
        elif kind == "sparse":
            coeffs = [0] * d
            for _ in range(rng.randint(1, min(4, d))):
                coeffs[rng.randrange(d)] = rng.randrange(1, modulus)
            x = TowerElement(ell, level, precision, tuple(coeffs))
        elif kind == "pi_adic":
            # l^a * pi^b * (unit) keeps the valuation spread across the value group
            b = rng.randrange(d)
            a = rng.randrange(max(1, precision // 3))
            unit = [rng.randrange(modulus) for _ in range(d)]
            unit[0] = rng.randrange(1, ell) + ell * rng.randrange(modulus // ell)
            x = TowerElement.uniformizer(ell, level, precision) ** b * TowerElement(ell, level, precision, tuple(unit))
            x = x * ell**a
            x = x.with_precision(precision)
        elif kind == "near_base":
            base = TowerElement(ell, 0, precision, tuple(rng.randrange(modulus) for _ in range(ell - 1)))
            noise = [rng.randrange(modulus) for _ in range(d)]
            k = rng.randrange(1, max(2, precision // 2))
            x = embed(base, level) + TowerElement(ell, level, precision, tuple(noise)) * ell**k
            x = x.with_precision(precision)
        else:
            raise ValueError(f"unknown sample kind {kind!r}")
        if not x.is_indistinguishable_from_zero:
            return x
    raise RuntimeError("could not draw a nonzero element")


def closed_form_trace_step(x: TowerElement) -> TowerElement:
    """Tr(sum c_i zeta^i) = l * sum_{l | i} c_i zeta^(i/l); valid because the basis is reduced."""
    coeffs = [c * x.ell for c in x.coeffs[:: x.ell]]
    return TowerElement(x.ell, x.level - 1, x.precision + 1, tuple(coeffs), x.scale)


def galois_orbit_exponents(ell: int, n: int) -> list[int]:
    """u^j mod l^(n+1) for j < l^n."""
    period = ell ** (n + 1)
    return [pow(1 + ell, j, period) for j in range(ell**n)]


def is_in_base(x: TowerElement) -> bool:
    """Whether x is fixed by sigma at its precision (x lies in K_0)."""
    return sigma(x).congruent(x)
