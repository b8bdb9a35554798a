"""Finite-level operators on the tower: the projector t, the inverse rho of sigma - 1
on ker t, and the twisted operator sigma - lambda, with certified v-space bounds.

Over K_0 the field K_n has basis ``zeta^i`` for ``0 <= i < l^n``; the K_0
coordinate of ``zeta^i`` collects the power-basis coefficients of
``zeta^(i + l^n m)``.  sigma permutes these basis vectors up to l-th roots of
unity: ``sigma(zeta^i) = zeta_l^(q_i) zeta^(p(i))`` with ``p(i) = i u mod l^n``.
In these coordinates t(x) is the coordinate of ``zeta^0`` and both inverse
problems split into independent cyclic recurrences along the orbits of p.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .checks import render_number
from .padic import PadicScalar, PrecisionError, val_factorial, val_int
from .ramification import c5_bound, c6, w_sequence
from .tower import (
    TowerConfig,
    TowerElement,
    embed,
    inverse_level0,
    normalized_trace,
    random_element,
    sigma,
    trace_step,
)


class NonInvertibleError(ArithmeticError):
    """sigma - lambda is not invertible at this level."""


# -- certificates ----------------------------------------------------------------------


@dataclass(frozen=True)
class OperatorCertificate:
    """Outcome of a sampled v-space inequality ``v(lhs) >= v(rhs) - bound`` (or ``>``).

    ``worst_ratio`` is the minimum over samples of ``v(lhs) - v(rhs)`` and
    ``margin = worst_ratio + bound``; the verdict is pass iff every sample
    satisfies the inequality.
    """

    name: str
    ell: int
    e: int
    level: int
    samples: int
    skipped: int
    bound: Fraction
    worst_ratio: Fraction | None
    margin: Fraction | None
    strict: bool
    seed: int
    passed: bool
    violations: int = 0

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json_obj(self) -> dict:
        return {
            "name": self.name,
            "ell": self.ell,
            "e": self.e,
            "level": self.level,
            "bound": render_number(self.bound),
            "margin": render_number(self.margin),
            "worst_ratio": render_number(self.worst_ratio),
            "samples": self.samples,
            "skipped": self.skipped,
            "violations": self.violations,
            "strict": self.strict,
            "seed": self.seed,
            "verdict": self.verdict,
        }


def _lower_valuation(x: TowerElement) -> tuple[Fraction, bool]:
    """(valuation or certified lower bound, whether it is exact)."""
    if x.is_indistinguishable_from_zero:
        return x.valuation_lower_bound(), False
    return x.valuation(), True


def _certify(
    name: str,
    config: TowerConfig,
    level: int,
    bound: Fraction,
    pairs: Callable[[random.Random], tuple[TowerElement, TowerElement] | None],
    samples: int,
    seed: int,
    strict: bool = False,
) -> OperatorCertificate:
    """Draw ``samples`` (lhs, rhs) pairs; a pair of None, or a zero rhs, is skipped."""
    rng = random.Random(seed)
    worst = None
    skipped = violations = 0
    for _ in range(samples):
        pair = pairs(rng)
        if pair is None:
            skipped += 1
            continue
        lhs, rhs = pair
        if rhs.is_indistinguishable_from_zero:
            skipped += 1
            continue
        v_lhs, _ = _lower_valuation(lhs)
        ratio = v_lhs - rhs.valuation()
        ok = ratio > -bound if strict else ratio >= -bound
        if not ok:
            violations += 1
        if worst is None or ratio < worst:
            worst = ratio
    margin = None if worst is None else worst + bound
    return OperatorCertificate(
        name=name,
        ell=config.ell,
        e=config.e,
        level=level,
        samples=samples,
        skipped=skipped,
        bound=Fraction(bound),
        worst_ratio=worst,
        margin=margin,
        strict=strict,
        seed=seed,
        passed=violations == 0,
        violations=violations,
    )


# -- the projector t and its contraction ------------------------------------------------------


def relative_trace(x: TowerElement, base_level: int) -> TowerElement:
    """l^-(n-m) Tr_{K_n/K_m}(x), read back in K_n."""
    y = x
    while y.level > base_level:
        y = trace_step(y)
    y = TowerElement(y.ell, y.level, y.precision, y.coeffs, y.scale + (x.level - base_level))
    return embed(y, x.level)


def check_t_contraction(
    config: TowerConfig,
    n: int,
    samples: int,
    seed: int,
    bound: Fraction | None = None,
    base_level: int = 0,
    name: str = "t_contraction",
) -> OperatorCertificate:
    """v(x - t(x)) >= v(x - sigma x) - bound for random x in K_n.

    ``base_level = m`` replaces K_0 by K_m: t becomes the normalized trace to
    K_m and sigma its generator sigma^(l^m).
    """
    config.check_level(n)
    if not 0 <= base_level <= n:
        raise ValueError("base level must lie between 0 and n")
    if bound is None:
        bound = c5_bound(config.ell, config.e).exact
    step = config.ell**base_level

    def pair(rng: random.Random):
        x = random_element(config.ell, n, config.precision, rng)
        return x - relative_trace(x, base_level), x - sigma(x, step)

    return _certify(name, config, n, bound, pair, samples, seed)


def u_bound(ell: int, e: int, c4: Fraction, n: int) -> Fraction:
    """u_1 = e and u_n = e + |c4| sum_{k=1}^{n-1} l^-k."""
    return e + abs(Fraction(c4)) * sum((Fraction(1, ell**k) for k in range(1, n)), Fraction(0))


def check_u_recursion(config: TowerConfig, n: int, c4: Fraction, samples: int, seed: int) -> OperatorCertificate:
    """The level-n contraction exponent never exceeds u_n."""
    return check_t_contraction(
        config, n, samples, seed, bound=u_bound(config.ell, config.e, c4, n), name=f"u_recursion.n{n}"
    )


# -- one trace step --------------------------------------------------------------------------------


def check_trace_step_stated(config: TowerConfig, n: int, c4: Fraction, samples: int, seed: int) -> OperatorCertificate:
    """v(Tr_{K_(n+1)/K_n} x) >= v(x) + e - l^-n c4, exactly as the contraction is stated."""
    bound = -(config.e - Fraction(c4) / config.ell**n)
    return _trace_step_certificate("trace_step.stated", config, n, bound, samples, seed, strict=False)


def check_trace_step_derived(config: TowerConfig, n: int, c4: Fraction, samples: int, seed: int) -> OperatorCertificate:
    """v(Tr_{K_(n+1)/K_n} x) > v(x) + e + l^-n c4, the inequality obtained from the different."""
    bound = -(config.e + Fraction(c4) / config.ell**n)
    return _trace_step_certificate("trace_step.derived", config, n, bound, samples, seed, strict=True)


def _trace_step_certificate(name, config, n, bound, samples, seed, strict) -> OperatorCertificate:
    config.check_level(n + 1)

    def pair(rng: random.Random):
        x = random_element(config.ell, n + 1, config.precision, rng)
        return trace_step(x), x

    return _certify(name, config, n, bound, pair, samples, seed, strict=strict)


def check_trace_identity(config: TowerConfig, n: int, samples: int, seed: int) -> OperatorCertificate:
    """v(x - l^-1 Tr_{K_(n+1)/K_n} x) >= v(sigma x - x) - e for x in K_(n+1)."""
    config.check_level(n + 1)

    def pair(rng: random.Random):
        x = random_element(config.ell, n + 1, config.precision, rng)
        y = trace_step(x)
        y = TowerElement(y.ell, y.level, y.precision, y.coeffs, y.scale + 1)
        return x - embed(y, n + 1), sigma(x) - x

    return _certify("trace_identity", config, n, Fraction(config.e), pair, samples, seed)


# -- K_0 coordinates ------------------------------------------------------------------------------------


def base_coordinates(x: TowerElement) -> list[TowerElement]:
    """Coordinates of x in the K_0-basis zeta^i, 0 <= i < l^n."""
    block = x.ell**x.level
    return [
        TowerElement(x.ell, 0, x.precision, tuple(x.coeffs[i + block * m] for m in range(x.ell - 1)), x.scale)
        for i in range(block)
    ]


def from_base_coordinates(coords: list[TowerElement], level: int) -> TowerElement:
    ell = coords[0].ell
    block = ell**level
    if len(coords) != block:
        raise ValueError(f"level {level} needs {block} coordinates")
    scale = max(c.scale for c in coords)
    absolute = min(c.absolute_precision for c in coords)
    coeffs = [0] * (block * (ell - 1))
    for i, c in enumerate(coords):
        factor = ell ** (scale - c.scale)
        for m, a in enumerate(c.coeffs):
            coeffs[i + block * m] = a * factor
    return TowerElement(ell, level, absolute + scale, tuple(coeffs), scale)


@dataclass(frozen=True)
class Orbit:
    """A p-orbit i_0 -> i_1 -> ... with sigma(zeta^(i_k)) = zeta_l^(q_k) zeta^(i_(k+1))."""

    indices: tuple[int, ...]
    twists: tuple[int, ...]

    @property
    def total_twist(self) -> int:
        return sum(self.twists)


def sigma_orbits(ell: int, n: int) -> list[Orbit]:
    block = ell**n
    u = 1 + ell
    seen = [False] * block
    orbits = []
    for start in range(block):
        if seen[start]:
            continue
        indices, twists = [], []
        i = start
        while not seen[i]:
            seen[i] = True
            indices.append(i)
            q, i = divmod(i * u, block)
            twists.append(q % ell)
        orbits.append(Orbit(tuple(indices), tuple(twists)))
    return orbits


def _root(ell: int, k: int, precision: int) -> TowerElement:
    return TowerElement.zeta_power(ell, 0, precision, k % ell)


def _inverse_root_minus_one(ell: int, a: int, precision: int) -> TowerElement:
    """1/(zeta_l^a - 1) = -prod_{b != a} (1 - zeta_l^b) / l."""
    product = TowerElement.constant(1, ell, 0, precision + 1)
    for b in range(1, ell):
        if b != a % ell:
            product = product * (1 - _root(ell, b, precision + 1))
    negated = -product
    return TowerElement(ell, 0, negated.precision, negated.coeffs, negated.scale + 1)


# -- rho = (sigma - 1)^-1 on ker t -----------------------------------------------------------------------


@dataclass(frozen=True)
class SolveResult:
    solution: TowerElement
    residual_is_zero: bool
    valuation_margin: Fraction | None
    bound: Fraction


def rho_solve(config: TowerConfig, y: TowerElement) -> SolveResult:
    """z with (sigma - 1) z = y and t(z) = 0, for y in ker t.

    The solution is certified by its residual and by v(z) >= v(y) - c5.
    """
    n = y.level
    config.check_level(n)
    ell = y.ell
    if n < 1:
        raise ValueError("rho is only defined above the base (n >= 1)")
    coords = base_coordinates(y)
    if not coords[0].is_indistinguishable_from_zero:
        raise ValueError("rho_solve needs t(y) = 0")
    zero = TowerElement.constant(0, ell, 0, max(y.absolute_precision, 1))
    z: list[TowerElement | None] = [None] * ell**n
    z[0] = zero
    for orbit in sigma_orbits(ell, n):
        if len(orbit.indices) == 1 and orbit.indices[0] == 0:
            continue
        idx, tw = orbit.indices, orbit.twists
        s = len(idx)
        # (W - 1) z_(i_0) = sum_{k=1}^{s} (prod_{j=k}^{s-1} w_j) y_(i_k), indices mod s
        acc = None
        for k in range(1, s + 1):
            twist = sum(tw[k:s])
            term = coords[idx[k % s]] * _root(ell, twist, y.precision)
            acc = term if acc is None else acc + term
        a = orbit.total_twist % ell
        if a == 0:
            raise ArithmeticError("sigma - 1 is singular on ker t (bug)")
        z0 = acc * _inverse_root_minus_one(ell, a, acc.precision)
        z[idx[0]] = z0
        current = z0
        for k in range(s - 1):
            current = current * _root(ell, tw[k], current.precision) - coords[idx[k + 1]]
            z[idx[k + 1]] = current
    solution = from_base_coordinates(z, n)
    residual = sigma(solution) - solution - y
    bound = c5_bound(ell, config.e).exact
    margin = None
    if not y.is_indistinguishable_from_zero:
        v_z, _ = _lower_valuation(solution)
        margin = v_z - (y.valuation() - bound)
    return SolveResult(solution, residual.is_indistinguishable_from_zero, margin, bound)


def project_to_kernel(x: TowerElement) -> TowerElement:
    """x - t(x), the component in ker t."""
    return x - embed(normalized_trace(x), x.level)


# -- twisted inverse (sigma - lambda)^-1 ---------------------------------------------------------------------


def _as_base_element(lam: PadicScalar | TowerElement | int | Fraction, ell: int, precision: int) -> TowerElement:
    if isinstance(lam, TowerElement):
        if lam.level != 0:
            raise ValueError("lambda must lie in the base field K_0")
        return lam
    return TowerElement.constant(lam, ell, 0, precision)


@dataclass(frozen=True)
class TwistedResult:
    solution: TowerElement
    residual_is_zero: bool
    c6: int
    w_values: tuple[Fraction, ...]
    margin: Fraction | None
    contraction_observed: Fraction | None

    @property
    def certified(self) -> bool:
        return self.margin is not None and self.margin > 0


def twisted_invert(config: TowerConfig, lam, y: TowerElement, check_sample: TowerElement | None = None) -> TwistedResult:
    """z with (sigma - lambda) z = y.

    When v(lambda - 1) > 0 and lambda^(l^c6) != 1 the contraction margin
    w_c6 - c5 is returned; a positive margin is what makes sigma - lambda
    invertible on the completed tower.  ``check_sample`` (default: the kernel
    part of y) is used to observe v((lambda^(l^c6) - 1) rho(y)) - v(y) directly.
    """
    n = y.level
    ell = y.ell
    config.check_level(n)
    lam = _as_base_element(lam, ell, config.precision)
    if (lam - 1).is_indistinguishable_from_zero:
        raise NonInvertibleError("lambda = 1 is degenerate")
    if (lam ** (ell**n) - 1).is_indistinguishable_from_zero:
        raise NonInvertibleError(f"lambda^(l^{n}) = 1: sigma - lambda is not invertible at level {n}")
    coords = base_coordinates(y)
    z: list[TowerElement | None] = [None] * ell**n
    for orbit in sigma_orbits(ell, n):
        idx, tw = orbit.indices, orbit.twists
        s = len(idx)
        if s == 1 and idx[0] == 0:
            z[0] = coords[0] * inverse_level0(1 - lam)
            continue
        # backwards: z_(i_k) = w_k^-1 (lambda z_(i_(k+1)) + y_(i_(k+1)))
        acc = None
        lam_power = TowerElement.constant(1, ell, 0, lam.precision)
        for k in range(1, s + 1):
            inverse_twist = -sum(tw[:k])
            term = lam_power * coords[idx[k % s]] * _root(ell, inverse_twist, y.precision)
            acc = term if acc is None else acc + term
            lam_power = lam_power * lam
        # (1 - lambda^s W^-1) z_(i_0) = acc, i.e. z_(i_0) = W acc / (W - lambda^s)
        w_root = _root(ell, orbit.total_twist, lam.precision)
        denominator = w_root - lam_power
        if denominator.is_indistinguishable_from_zero:
            raise NonInvertibleError(f"lambda^{s} equals a root of unity on an orbit at level {n}")
        z0 = w_root * acc * inverse_level0(denominator)
        z[idx[0]] = z0
        current = z0
        for k in range(s - 1, 0, -1):
            nxt = idx[(k + 1) % s]
            current = (lam * current + coords[nxt]) * _root(ell, -tw[k], current.precision)
            z[idx[k]] = current
    solution = from_base_coordinates(z, n)
    residual = sigma(solution) - embed(lam, n) * solution - y

    c6_value = c6(ell, config.e)
    margin = None
    observed = None
    w_values: tuple[Fraction, ...] = ()
    if not (lam - 1).is_indistinguishable_from_zero and (lam - 1).valuation() > 0:
        seq = w_sequence(lam, c6_value, config.e)
        w_values = seq.values
        if not seq.truncated and len(seq.values) > c6_value:
            margin = seq.values[c6_value] - c5_bound(ell, config.e).exact
            sample = check_sample if check_sample is not None else (project_to_kernel(y) if n >= 1 else None)
            if sample is not None and n >= 1 and not sample.is_indistinguishable_from_zero:
                rho = rho_solve(config, sample).solution
                factor = lam ** (ell**c6_value) - 1
                v_out, _ = _lower_valuation(rho * embed(factor, n))
                observed = v_out - sample.valuation()
    return TwistedResult(solution, residual.is_indistinguishable_from_zero, c6_value, w_values, margin, observed)


# -- kernel of the logarithm -----------------------------------------------------------------------------------


def ker_log_order(ell: int, f: int, alpha: int) -> int:
    """(l^f - 1) l^alpha."""
    if f < 1 or alpha < 0:
        raise ValueError("need f >= 1 and alpha >= 0")
    return (ell**f - 1) * ell**alpha


@dataclass(frozen=True)
class DivisibilityLink:
    divisor: int
    multiple: int

    @property
    def holds(self) -> bool:
        return self.multiple % self.divisor == 0


def ker_log_chain(ell: int, f: int, alpha: int, n: int, field_degree: int | None = None) -> list[DivisibilityLink]:
    """(l^f - 1) l^alpha | (l^d - 1) l^(1 + v_l(d)) | (l^(n!) - 1) l^(1 + v_l(n!)).

    ``d`` is the local degree [E:Q_l] (default n); it must satisfy f | d and d <= n.
    """
    d = n if field_degree is None else field_degree
    if d > n:
        raise ValueError("the local degree cannot exceed n")
    if d % f:
        raise ValueError("the residue degree must divide the local degree")
    first = ker_log_order(ell, f, alpha)
    middle = (ell**d - 1) * ell ** (1 + val_int(d, ell))
    fact = math.factorial(n)
    last = (ell**fact - 1) * ell ** (1 + val_factorial(n, ell))
    return [DivisibilityLink(first, middle), DivisibilityLink(middle, last)]


__all__ = [
    "NonInvertibleError",
    "OperatorCertificate",
    "PrecisionError",
    "SolveResult",
    "TwistedResult",
    "base_coordinates",
    "check_t_contraction",
    "check_trace_identity",
    "check_trace_step_derived",
    "check_trace_step_stated",
    "check_u_recursion",
    "from_base_coordinates",
    "ker_log_chain",
    "ker_log_order",
    "project_to_kernel",
    "relative_trace",
    "rho_solve",
    "sigma_orbits",
    "twisted_invert",
    "u_bound",
]
