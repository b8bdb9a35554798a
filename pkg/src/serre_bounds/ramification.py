"""Ramification filtrations of the cyclotomic tower and the constants derived from them.

Lower numbering is measured directly: for sigma^j acting on K_n the index
``i(sigma^j) = l^n * v(sigma^j(pi_n) - pi_n)`` is the valuation in the
normalization of K_n.  Upper jumps follow from the Herbrand function, and the
contraction constants c1..c6 are exact rationals computed from the measured
jumps (never from their a priori bounds, which are asserted afterwards).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import NamedTuple

from .checks import CheckResult, check_eq, check_le
from .padic import PadicScalar, PrecisionError, val_int
from .rigorous import Interval, floor_certified, ln
from .tower import TowerConfig, TowerElement, different_valuation, sigma


class InsufficientLevelsError(ValueError):
    """The tower is too shallow to locate kappa."""


# -- lower and upper numbering ----------------------------------------------------------


@lru_cache(maxsize=64)
def lower_indices(config: TowerConfig, n: int) -> dict[int, int]:
    """``{j: i(sigma^j)}`` for every nontrivial sigma^j on K_n, 0 < j < l^n."""
    config.check_level(n)
    pi = TowerElement.uniformizer(config.ell, n, config.precision)
    scale = config.ell**n
    indices = {}
    for j in range(1, config.ell**n):
        index = (sigma(pi, j) - pi).valuation() * scale
        if index.denominator != 1:
            raise PrecisionError(f"non-integral lower index {index} for sigma^{j}")
        indices[j] = int(index)
    return indices


def lower_jumps(config: TowerConfig, n: int) -> list[tuple[int, int]]:
    """Breaks ``(u, |G_u|)`` of the lower filtration of Gal(K_n/K_0), u ascending.

    ``G_u = {s : i(s) >= u + 1}``, so a break sits at ``u = i - 1`` for each
    distinct index value and the group there has every element of index >= i.
    """
    if n == 0:
        return []
    indices = lower_indices(config, n)
    values = sorted(set(indices.values()))
    jumps = []
    for i in values:
        order = 1 + sum(1 for v in indices.values() if v >= i)
        jumps.append((i - 1, order))
    return jumps


def indices_depend_only_on_valuation(config: TowerConfig, n: int) -> bool:
    indices = lower_indices(config, n)
    by_class: dict[int, set[int]] = {}
    for j, i in indices.items():
        by_class.setdefault(val_int(j, config.ell), set()).add(i)
    return all(len(s) == 1 for s in by_class.values())


def herbrand_phi(lower: list[tuple[int, int]], u: Fraction | int) -> Fraction:
    """phi(u) = integral_0^u dt / (G_0 : G_t) for the given break data."""
    if not lower:
        return Fraction(u)
    total_order = lower[0][1]
    result = Fraction(0)
    previous = 0
    for brk, order in lower:
        if u <= previous:
            break
        span = min(Fraction(u), brk) - previous
        result += span * Fraction(order, total_order)
        previous = brk
    if u > previous:
        result += (Fraction(u) - previous) * Fraction(1, total_order)
    return result


def upper_jumps(lower: list[tuple[int, int]]) -> list[int]:
    """``[nu_0 = -1, nu_1, ..., nu_n]`` via the Herbrand function; integrality is enforced."""
    nus = [-1]
    for brk, _ in lower:
        nu = herbrand_phi(lower, brk)
        if nu.denominator != 1:
            raise ArithmeticError(f"non-integral upper jump {nu}: Hasse-Arf violated (bug or precision fault)")
        nus.append(int(nu))
    if any(b <= a for a, b in zip(nus, nus[1:])):
        raise ArithmeticError(f"upper jumps not strictly increasing: {nus}")
    return nus


def different_from_jumps(ell: int, nus: list[int], n: int) -> Fraction:
    """v(different of K_n/K_0) = sum_{i<n} (1 - l^(i-n)) (nu_(i+1) - nu_i)."""
    return sum(
        ((1 - Fraction(ell**i, ell**n)) * (nus[i + 1] - nus[i]) for i in range(n)),
        Fraction(0),
    )


def different_from_lower_indices(config: TowerConfig, n: int) -> Fraction:
    """Hilbert's formula: the sum of all lower indices, in units where v(l) = e."""
    if n == 0:
        return Fraction(0)
    return Fraction(sum(lower_indices(config, n).values()), config.ell**n)


# -- constants ------------------------------------------------------------------------------


class C5Bound(NamedTuple):
    exact: Fraction
    coarse: Fraction


def c5_bound(ell: int, e: int) -> C5Bound:
    """2 l e^2 / (l-1)^2 + e + 1/(l(l-1)), together with the coarser 6 e^2."""
    exact = Fraction(2 * ell * e * e, (ell - 1) ** 2) + e + Fraction(1, ell * (ell - 1))
    return C5Bound(exact, Fraction(6 * e * e))


def _perfect_power_exponent(value: int, base: int) -> int | None:
    k = 0
    while value % base == 0:
        value //= base
        k += 1
    return k if value == 1 else None


def c6(ell: int, e: int) -> int:
    """2 + floor(1/(e l (l-1)) + 2 l e/(l-1)^2 + log(2e)/log l), or 1 when l >= 4 e^2.

    The rational part is exact; the logarithm ratio is enclosed by rational
    intervals that are refined until the floor is determined.  When 2e is a
    power of l the ratio is that exponent, exactly.
    """
    if ell >= 4 * e * e:
        return 1
    rational = Fraction(1, e * ell * (ell - 1)) + Fraction(2 * ell * e, (ell - 1) ** 2)
    exponent = _perfect_power_exponent(2 * e, ell)
    if exponent is not None:
        return 2 + int((rational + exponent) // 1)

    def enclosure(bits: int) -> Interval:
        return ln(2 * e, bits) / ln(ell, bits) + rational

    return 2 + floor_certified(enclosure)


def kappa_of(nus: list[int], ell: int, e: int) -> int:
    """Largest i with nu_i < e/(l-1); needs the first jump past the threshold."""
    threshold = Fraction(e, ell - 1)
    below = [i for i, nu in enumerate(nus) if nu < threshold]
    if len(below) == len(nus):
        raise InsufficientLevelsError(
            f"all {len(nus) - 1} measured jumps lie below e/(l-1); a deeper tower is required"
        )
    return max(below)


# -- profiles -----------------------------------------------------------------------------------


@dataclass(frozen=True)
class RamificationProfile:
    ell: int
    e: int
    level: int
    lower: tuple[tuple[int, int], ...]
    upper: tuple[int, ...]
    kappa: int
    c1: Fraction
    c2: Fraction
    c3: Fraction
    c4: Fraction
    c5: C5Bound
    c6: int
    differents: tuple[Fraction, ...] = field(default=())

    def to_json_obj(self) -> dict:
        from .checks import render_number

        return {
            "ell": self.ell,
            "e": self.e,
            "level": self.level,
            "lower_jumps": [{"break": u, "order": o} for u, o in self.lower],
            "upper_jumps": list(self.upper),
            "kappa": self.kappa,
            "c1": render_number(self.c1),
            "c2": render_number(self.c2),
            "c3": render_number(self.c3),
            "c4": render_number(self.c4),
            "c5_bound": render_number(self.c5.exact),
            "c6": self.c6,
            "different_valuations": [render_number(d) for d in self.differents],
        }


def kappa_and_constants(ell: int, e: int, level: int, lower, nus: list[int], differents=()) -> RamificationProfile:
    kappa = kappa_of(nus, ell, e)
    if kappa + 1 >= len(nus):
        raise InsufficientLevelsError(f"need nu_{kappa + 1}; measure at least {kappa + 1} levels")
    c1 = -e * kappa + nus[kappa + 1] + 1 - Fraction(e * ell, ell - 1)
    c2 = Fraction(e * ell ** (kappa + 1), ell - 1) - sum(ell**i * (nus[i + 1] - nus[i]) for i in range(kappa + 1))
    c3 = c2 * Fraction(1 - ell, ell)
    c4 = c3 - 1
    return RamificationProfile(
        ell=ell,
        e=e,
        level=level,
        lower=tuple(lower),
        upper=tuple(nus),
        kappa=kappa,
        c1=c1,
        c2=c2,
        c3=c3,
        c4=c4,
        c5=c5_bound(ell, e),
        c6=c6(ell, e),
        differents=tuple(differents),
    )


def ramification_profile(config: TowerConfig, n: int | None = None) -> RamificationProfile:
    """Measure the filtration of K_n/K_0 (default n = n_max) and derive every constant."""
    n = config.n_max if n is None else n
    if n < 1:
        raise InsufficientLevelsError("at least one level is needed to measure jumps")
    lower = lower_jumps(config, n)
    nus = upper_jumps(lower)
    differents = [different_valuation(config.ell, k, config.precision) for k in range(n + 1)]
    return kappa_and_constants(config.ell, config.e, n, lower, nus, differents)


def fit_c1_c2(ell: int, e: int, differents: dict[int, Fraction]) -> tuple[Fraction, Fraction]:
    """Solve d_n - e n = c1 + l^(-n) c2 from the two smallest positive levels."""
    levels = sorted(k for k in differents if k >= 1)
    if len(levels) < 2:
        raise InsufficientLevelsError("fitting (c1, c2) needs two positive levels")
    a, b = levels[:2]
    ra, rb = differents[a] - e * a, differents[b] - e * b
    c2 = (ra - rb) / (Fraction(1, ell**a) - Fraction(1, ell**b))
    c1 = ra - c2 / ell**a
    return c1, c2


def profile_checks(config: TowerConfig, profile: RamificationProfile) -> list[CheckResult]:
    """Every structural claim about the jumps and constants, evaluated exactly."""
    ell, e, n, nus, kappa = profile.ell, profile.e, profile.level, profile.upper, profile.kappa
    results: list[CheckResult] = []
    results.append(
        CheckResult(
            "jumps.lower_index_depends_on_valuation",
            all(indices_depend_only_on_valuation(config, k) for k in range(1, n + 1)),
            "i(sigma^j) constant on {j : v_l(j) = k}",
            anchor="i_G(sigma^j) = v_{K_n}(sigma^j(pi_n) - pi_n)",
        )
    )
    results.append(
        CheckResult(
            "jumps.upper_increasing_integral",
            all(isinstance(x, int) for x in nus) and all(b > a for a, b in zip(nus, nus[1:])),
            f"nu = {list(nus)}",
            anchor="Hasse-Arf",
        )
    )
    tail = [nus[i + 1] - nus[i] for i in range(kappa + 1, n)]
    results.append(
        CheckResult(
            "jumps.constant_gap_after_kappa",
            all(g == e for g in tail),
            f"gaps for i >= kappa+1: {tail}",
            anchor="nu_{i+1} - nu_i = e",
        )
    )
    results.append(
        check_le(
            "jumps.kappa_bound",
            max(nus[kappa + 1], ell**kappa + 1),
            Fraction(e * ell, ell - 1),
            anchor="max{nu_{kappa+1}, l^kappa + 1} <= e l/(l-1)",
        )
    )
    growth = [(nus[i + 1], min(ell * nus[i], nus[i] + e)) for i in range(1, n)]
    results.append(
        CheckResult(
            "jumps.growth",
            all(a >= b for a, b in growth),
            f"(nu_(i+1), min(l nu_i, nu_i + e)) = {growth}",
            anchor="nu_{i+1} >= min{l nu_i, nu_i + e}",
        )
    )
    results.append(check_le("constants.c1", abs(profile.c1), 6 * e * e, anchor="|c1| <= 6e^2"))
    results.append(check_le("constants.c2", abs(profile.c2), 8 * e * e, anchor="|c2| <= 8e^2"))
    results.append(check_le("constants.c3", abs(profile.c3), 4 * e * e, anchor="|c3| <= 4e^2"))
    results.append(check_le("constants.c4", abs(profile.c4), 5 * e * e, anchor="|c4| <= 5e^2"))
    results.append(check_le("constants.c5", profile.c5.exact, profile.c5.coarse, anchor="|c5| <= 6e^2"))
    results.append(check_le("constants.c6", profile.c6, 7 * e, anchor="c6 <= 7e"))
    for k in range(1, n + 1):
        measured = profile.differents[k] if k < len(profile.differents) else different_valuation(ell, k, config.precision)
        results.append(
            check_eq(
                f"different.formula.n{k}",
                measured,
                e * k + profile.c1 + profile.c2 / ell**k,
                anchor="v(d_{K_n/K_v}) = en + c1 + l^{-n} c2",
            )
        )
        results.append(
            check_eq(
                f"different.jump_integral.n{k}",
                measured,
                different_from_jumps(ell, list(nus), k),
                anchor="v(d) = sum (1 - l^{i-n})(nu_{i+1} - nu_i)",
            )
        )
        results.append(
            check_eq(
                f"different.hilbert.n{k}",
                measured,
                different_from_lower_indices(config, k),
                anchor="v(d) = sum of lower indices",
            )
        )
        results.append(
            check_le(f"different.size.n{k}", abs(measured - e * k), 14 * e * e, anchor="|c1| + |c2| <= 14e^2")
        )
        if k >= 1 and k - 1 < len(profile.differents):
            step = measured - profile.differents[k - 1]
            results.append(
                check_eq(
                    f"different.step.n{k}",
                    step,
                    e + profile.c3 / ell ** (k - 1),
                    anchor="v(d_{K_{n+1}/K_n}) = e + l^{-n} c3",
                )
            )
    return results


# -- the w-sequence ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class WSequence:
    values: tuple[Fraction, ...]
    truncated: bool
    recursion_holds: bool
    equality_holds: bool

    @property
    def ok(self) -> bool:
        return self.recursion_holds and self.equality_holds


def _power_minus_one_valuations(lam, ell: int, e: int, count: int) -> tuple[list[Fraction], bool]:
    values: list[Fraction] = []
    power = lam
    for i in range(count + 1):
        diff = power - 1
        if isinstance(diff, PadicScalar):
            if diff.is_indistinguishable_from_zero:
                return values, True
            values.append(Fraction(e * diff.valuation()))
        else:
            if diff.is_indistinguishable_from_zero:
                return values, True
            values.append(diff.valuation())
        if i < count:
            power = power**ell
    return values, False


def w_sequence(lam: PadicScalar | TowerElement, count: int, e: int | None = None) -> WSequence:
    """w_i = v(lam^(l^i) - 1) for i = 0..count, with the recursion checks.

    A PadicScalar is read inside K_0, so its valuation is e * v_l.  If a power
    becomes indistinguishable from 1 at the working precision the list is
    returned truncated and flagged.
    """
    ell = lam.ell
    e = ell - 1 if e is None else e
    if isinstance(lam, TowerElement) and lam.level != 0:
        raise ValueError("w_sequence expects an element of the base field")
    values, truncated = _power_minus_one_valuations(lam, ell, e, count)
    if values and values[0] <= 0:
        raise ValueError(f"need v(lambda - 1) > 0, got {values[0]}")
    recursion, equality = True, True
    for a, b in zip(values, values[1:]):
        lower = min(e + a, ell * a)
        if b < lower:
            recursion = False
        if e + a != ell * a and b != lower:
            equality = False
    return WSequence(tuple(values), truncated, recursion, equality)
