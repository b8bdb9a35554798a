"""Explicit global bounds: Serre homothety exponents, Galois-image thresholds and
effective Manin-Mumford bounds, evaluated exactly or as rigorous upper bounds.

Every operation takes an :class:`AbelianContext` (or plain numbers) and
returns either an exact integer or a :class:`LogMagnitude` whose upper
endpoint is guaranteed to dominate the true value of the formula.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Callable

from .magnitude import LogMagnitude, lm_max
from .padic import val_factorial
from .rigorous import Interval, exp, ln, ln2, log10

VARIETY_TYPES = ("generic", "elliptic-nonCM-power", "CM")

LOMBARDO_EXPONENT = Fraction(19, 10) * 10**10
ELLIPTIC_POWER_EXPONENT = 2 * 10**10
LOMBARDO_POWER = 12395


class ContextError(ValueError):
    """Malformed or inconsistent context input."""


class ParameterRequired(LookupError):
    """A bound needs a parameter that has no effective value."""

    def __init__(self, parameter: str, status: str):
        super().__init__(f"parameter {parameter!r} is required: {status}")
        self.parameter = parameter
        self.status = status


PARAMETER_STATUS = {
    "c_A": "the Serre constant of a general abelian variety is not known effectively; supply c_A",
    "c_g": "c(g) depends on max_S c(S) over semisimple subgroup classes, never made explicit; supply c_g",
    "alpha": "alpha and beta exist but are not effective; supply both",
    "beta": "alpha and beta exist but are not effective; supply both",
    "deltaV": "the degree of definition of V is an input",
    "ell": "the prime l is an input",
    "rep_dim": "the representation dimension n is an input",
    "classNumber": "the class number h_K is an input",
    "disc3": "the discriminant of K(E[3]) is an input",
    "normP": "the norm of the auxiliary prime is an input",
    "logDiscK": "log of the discriminant of K is an input",
}


# -- context --------------------------------------------------------------------------------


def _rational(value, name: str) -> Fraction:
    if isinstance(value, bool):
        raise ContextError(f"{name} must be a number, got a boolean")
    if isinstance(value, float):
        raise ContextError(f"{name}: binary floats are not accepted; pass a decimal string")
    try:
        return Fraction(value)
    except (TypeError, ValueError) as exc:
        raise ContextError(f"{name}: cannot read {value!r} as an exact rational") from exc


def _integer(value, name: str) -> int:
    q = _rational(value, name)
    if q.denominator != 1:
        raise ContextError(f"{name} must be an integer, got {value!r}")
    return int(q)


@dataclass(frozen=True)
class AbelianContext:
    g: int = 1
    degK: int = 1
    hF: Fraction = Fraction(0)
    logDiscK: Fraction = Fraction(0)
    classNumber: int | None = None
    normP: int | None = None
    deltaV: int | None = None
    type: str = "generic"
    c_A: int | None = None
    c_g: int | None = None
    alpha: Fraction | None = None
    beta: Fraction | None = None
    disc3: int | None = None
    ell: int | None = None
    rep_dim: int | None = None
    grh: bool = False
    ell_unramified: bool = False
    good_reduction: bool = False

    def __post_init__(self) -> None:
        if self.g < 1:
            raise ContextError("g must be >= 1")
        if self.degK < 1:
            raise ContextError("degK must be >= 1")
        if self.hF < 0 or self.logDiscK < 0:
            raise ContextError("hF and logDiscK must be nonnegative")
        if self.type not in VARIETY_TYPES:
            raise ContextError(f"type must be one of {', '.join(VARIETY_TYPES)}")
        for name in ("classNumber", "normP", "deltaV", "disc3", "rep_dim", "c_g"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ContextError(f"{name} must be >= 1")
        if self.c_A is not None and self.c_A < 0:
            raise ContextError("c_A must be nonnegative")
        if self.ell is not None and (self.ell < 2 or any(self.ell % p == 0 for p in range(2, math.isqrt(self.ell) + 1))):
            raise ContextError("ell must be a prime")
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ContextError(f"{name} must be positive")

    @classmethod
    def from_mapping(cls, data: dict) -> AbelianContext:
        known = {f.name: f for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise ContextError(f"unknown context field(s): {', '.join(sorted(unknown))}")
        kwargs = {}
        for name, value in data.items():
            if value is None:
                continue
            if name == "type":
                kwargs[name] = str(value)
            elif name in ("grh", "ell_unramified", "good_reduction"):
                if not isinstance(value, bool):
                    raise ContextError(f"{name} must be true or false")
                kwargs[name] = value
            elif name in ("hF", "logDiscK", "alpha", "beta"):
                kwargs[name] = _rational(value, name)
            else:
                kwargs[name] = _integer(value, name)
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text: str) -> AbelianContext:
        try:
            data = json.loads(text, parse_float=Fraction)
        except json.JSONDecodeError as exc:
            raise ContextError(f"context is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ContextError("context JSON must be an object")
        return cls.from_mapping(data)

    def require(self, name: str):
        value = getattr(self, name)
        if value is None:
            raise ParameterRequired(name, PARAMETER_STATUS.get(name, "required input"))
        return value


# -- shared pieces ---------------------------------------------------------------------------


def _max_with_log(exact_terms: list[Fraction], log_argument: int) -> LogMagnitude:
    """max{terms..., ln(log_argument)} as a LogMagnitude, exact when the logarithm loses."""
    top = max(exact_terms)
    if log_argument <= 1:
        return LogMagnitude.of(top)
    enclosure = ln(log_argument)
    if enclosure.hi <= top:
        return LogMagnitude.of(top)
    return lm_max(LogMagnitude.of(top), LogMagnitude.enclosing(enclosure))


def faltings_term(degK: int, hF: Fraction) -> LogMagnitude:
    """[K:Q] max{1, h_F, log [K:Q]}."""
    return LogMagnitude.of(degK) * _max_with_log([Fraction(1), Fraction(hF)], degK)


def _log10_e() -> Interval:
    return Interval.point(1) / ln(10)


# -- Galois-image thresholds ------------------------------------------------------------------------


def xi(ctx: AbelianContext) -> LogMagnitude:
    """((7g)^(8g^2) [K:Q] max{1, h_F, log [K:Q]})^(2g^2)."""
    g = ctx.g
    inner = LogMagnitude.of(7 * g) ** (8 * g * g) * faltings_term(ctx.degK, ctx.hF)
    return inner ** (2 * g * g)


def semisimplicity_threshold(ctx: AbelianContext) -> LogMagnitude:
    """g^(2g^2) Xi^g."""
    g = ctx.g
    return LogMagnitude.of(g) ** (2 * g * g) * xi(ctx) ** g


def _lcm_by_prime_powers(m: int) -> int:
    result = 1
    for p in range(2, m + 1):
        if all(p % q for q in range(2, math.isqrt(p) + 1)):
            power = p
            while power * p <= m:
                power *= p
            result *= power
    return result


def serre_c_large_prime(g: int) -> int:
    """lcm(1, ..., 2g); checked to divide (2g)! and to stay below e^(3g)."""
    if g < 1:
        raise ValueError("g must be >= 1")
    value = math.lcm(*range(1, 2 * g + 1))
    if value != _lcm_by_prime_powers(2 * g):
        raise ArithmeticError("lcm disagrees with its prime-power factorization")
    if math.factorial(2 * g) % value:
        raise ArithmeticError("lcm(1..2g) does not divide (2g)!")
    if not value <= exp(3 * g).lo:
        raise ArithmeticError("lcm(1..2g) exceeds e^(3g)")
    return value


def serre_c_small_prime(ell: int, c_g: int | None) -> int:
    """(l-1) l^(1 + 2 v_l(c_g!)), checked against (l c_g!)^2."""
    if c_g is None:
        raise ParameterRequired("c_g", PARAMETER_STATUS["c_g"])
    value = (ell - 1) * ell ** (1 + 2 * val_factorial(c_g, ell))
    if value > (ell * math.factorial(c_g)) ** 2:
        raise ArithmeticError("small-prime exponent exceeds (l c_g!)^2")
    return value


def m_exponent(ell: int, n: int) -> int:
    """n! (l^(n!) - 1) l^(1 + v_l(n!))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    f = math.factorial(n)
    return f * (ell**f - 1) * ell ** (1 + val_factorial(n, ell))


@dataclass(frozen=True)
class SymbolicBound:
    formula: str
    missing: tuple[str, ...]

    def to_row(self) -> dict:
        return {"kind": "symbolic", "value": self.formula, "rounded": "none", "missing": list(self.missing)}


def ell0_zywina(ctx: AbelianContext) -> LogMagnitude | SymbolicBound:
    """alpha N(p)^beta max{[K:Q], h_F}^(2g^3), or alpha max{log D_K, h_F}^beta under GRH."""
    missing = tuple(name for name in ("alpha", "beta") if getattr(ctx, name) is None)
    if ctx.grh:
        if missing:
            return SymbolicBound("alpha*max{log(D_K), h_F}^beta", missing)
        term = LogMagnitude.of(max(ctx.logDiscK, ctx.hF, Fraction(1, 10**30)))
        return LogMagnitude.of(ctx.alpha) * term ** ctx.beta
    if ctx.normP is None:
        missing = missing + ("normP",)
    if missing:
        return SymbolicBound(f"alpha*N(p)^beta*M^(2g^3), M = max{{[K:Q], h_F}}, 2g^3 = {2 * ctx.g**3}", missing)
    term = LogMagnitude.of(max(Fraction(ctx.degK), ctx.hF)) ** (2 * ctx.g**3)
    return LogMagnitude.of(ctx.alpha) * LogMagnitude.of(ctx.normP) ** ctx.beta * term


def eckstein_elliptic_threshold(degK: int, h_K: int, disc3: int) -> LogMagnitude:
    """max{(48 [K:Q] h_K)^(3 (48 [K:Q] h_K)^2), D_{K(E[3])}}."""
    base = 48 * degK * h_K
    return lm_max(LogMagnitude.of(base) ** (3 * base * base), LogMagnitude.of(disc3))


def lombardo_c(degK: int, hF: Fraction) -> LogMagnitude:
    """e^(1.9 10^10) ([K:Q] max{1, h_F, log [K:Q]})^12395, as a level-1 magnitude."""
    log10_value = _log10_e() * LOMBARDO_EXPONENT + faltings_term(degK, hF).log10() * LOMBARDO_POWER
    return LogMagnitude.from_log10(log10_value)


def general_linear_order(dim: int, q: int) -> int:
    """|GL_dim(F_q)| = prod_{k<dim} (q^dim - q^k)."""
    return math.prod(q**dim - q**k for k in range(dim))


def cm_c(degK: int, g: int, ell_unramified: bool = False, good_reduction: bool = False) -> int:
    """[K:Q] |GL_2g(F_3)|, refined to |GL_2g(F_3)| or 1."""
    if good_reduction:
        return 1
    order = general_linear_order(2 * g, 3)
    return order if ell_unramified else degK * order


def _cm_exponent(ctx: AbelianContext) -> int:
    return ctx.degK * 3 ** (5 * ctx.g * ctx.g)


def _elliptic_power_exponent(ctx: AbelianContext, g_power: int) -> LogMagnitude:
    """e^(2 10^10) g^g_power ([K:Q] max{1, h_F, log [K:Q]})^12395 as a level-1 magnitude."""
    log10_value = (
        _log10_e() * ELLIPTIC_POWER_EXPONENT
        + log10(ctx.g**g_power)
        + faltings_term(ctx.degK, ctx.hF).log10() * LOMBARDO_POWER
    )
    return LogMagnitude.from_log10(log10_value)


# -- Manin-Mumford bounds ------------------------------------------------------------------------------


def torsion_translates_bound(ctx: AbelianContext) -> LogMagnitude:
    """T(V) <= 16^((c_A + 3) g^3) delta^g, with the CM and elliptic-power specializations."""
    delta = ctx.require("deltaV")
    g = ctx.g
    tail = LogMagnitude.of(delta) ** g
    if ctx.c_A is not None:
        return LogMagnitude.of(16) ** ((ctx.c_A + 3) * g**3) * tail
    if ctx.type == "CM":
        return LogMagnitude.of(16) ** _cm_exponent(ctx) * tail
    if ctx.type == "elliptic-nonCM-power":
        return LogMagnitude.of(16).raised_to(_elliptic_power_exponent(ctx, 3)) * tail
    raise ParameterRequired("c_A", PARAMETER_STATUS["c_A"])


def curve_torsion_bound(ctx: AbelianContext) -> LogMagnitude:
    """|C_tors| <= 4^((2 c_A + 2) g), with the CM and elliptic-power specializations."""
    g = ctx.g
    if ctx.c_A is not None:
        return LogMagnitude.of(4) ** ((2 * ctx.c_A + 2) * g)
    if ctx.type == "CM":
        return LogMagnitude.of(4) ** _cm_exponent(ctx)
    if ctx.type == "elliptic-nonCM-power":
        return LogMagnitude.of(4).raised_to(_elliptic_power_exponent(ctx, 1))
    raise ParameterRequired("c_A", PARAMETER_STATUS["c_A"])


def weil_height_bound(g: int, hF: Fraction) -> Fraction:
    """An upper bound for 4^(g+1) h_F + 3 g log 2 (log 2 rounded up)."""
    return 4 ** (g + 1) * Fraction(hF) + 3 * g * ln2().hi


def _tower_exponent(g: int, coefficient: int) -> LogMagnitude:
    """coefficient * g^(12 g^(4g)), exact while it is small enough to write down."""
    top = 12 * g ** (4 * g)
    if g == 1:
        return LogMagnitude.of(coefficient)
    if top * log10(g).hi < 10**4:
        return LogMagnitude.of(coefficient * g**top)
    return LogMagnitude.from_log10(log10(coefficient) + log10(g) * top)


def _height_term(logDiscK: Fraction, hF: Fraction) -> LogMagnitude:
    return LogMagnitude.of(max(Fraction(1), Fraction(logDiscK), Fraction(hF)))


def effective_prime_bound(g: int, logDiscK: Fraction, hF: Fraction) -> LogMagnitude:
    """(12g)^(25 g^(12 g^(4g))) max{1, log D_K, h_F}^2."""
    exponent = _tower_exponent(g, 25)
    return LogMagnitude.of(12 * g).raised_to(exponent) * _height_term(logDiscK, hF) ** 2


def buium_torsion_bound(g: int, logDiscK: Fraction, hF: Fraction) -> LogMagnitude:
    """(12g)^(26 g^(12 g^(4g))) max{1, log D_K, h_F}^(8g+4)."""
    exponent = _tower_exponent(g, 26)
    return LogMagnitude.of(12 * g).raised_to(exponent) * _height_term(logDiscK, hF) ** (8 * g + 4)


def torsion_point_degree_bound(degK: int, ctors: LogMagnitude) -> LogMagnitude:
    """[Q(x):Q] <= [K:Q] |C_tors|."""
    return LogMagnitude.of(degK) * ctors


def field_extension_degrees(g: int) -> tuple[int, int, int]:
    """(12^(4g^2), prod_{k<=2g} (2^k - 1)(3^k - 1), 6^(3g^2)), middle <= right checked."""
    semistable = 12 ** (4 * g * g)
    product = math.prod((2**k - 1) * (3**k - 1) for k in range(1, 2 * g + 1))
    bound = 6 ** (3 * g * g)
    if product > bound:
        raise ArithmeticError("connectedness degree exceeds 6^(3g^2)")
    return semistable, product, bound


# -- registry ---------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundOp:
    name: str
    evaluate: Callable[[AbelianContext], object]
    anchor: str


def _ctors_for_degree(ctx: AbelianContext) -> LogMagnitude:
    try:
        return curve_torsion_bound(ctx)
    except ParameterRequired:
        return buium_torsion_bound(ctx.g, ctx.logDiscK, ctx.hF)


def _require_ell(ctx: AbelianContext) -> int:
    return ctx.require("ell")


OPERATIONS: dict[str, BoundOp] = {
    op.name: op
    for op in [
        BoundOp("xi", xi, "Xi(A) = ((7g)^{8g^2}[K:Q]max{1,h_F(A),log[K:Q]})^{2g^2}"),
        BoundOp(
            "semisimplicity_threshold",
            semisimplicity_threshold,
            "l > g^{2g^2} Xi(A)^g",
        ),
        BoundOp("serre_c_large_prime", lambda c: serre_c_large_prime(c.g), "c = lcm(1..2g) | (2g)!, c <= e^{3g}"),
        BoundOp(
            "serre_c_small_prime",
            lambda c: serre_c_small_prime(_require_ell(c), c.require("c_g")),
            "c = (l-1) l^{1+2v_l(c(g)!)} <= (l c(g)!)^2",
        ),
        BoundOp(
            "m_exponent",
            lambda c: m_exponent(_require_ell(c), c.require("rep_dim")),
            "m = n!(l^{n!}-1) l^{1+v_l(n!)}",
        ),
        BoundOp("ell0_zywina", ell0_zywina, "l_0 = alpha N(p)^beta max{[K:Q], h_F(A)}^{2g^3}"),
        BoundOp(
            "eckstein_elliptic_threshold",
            lambda c: eckstein_elliptic_threshold(c.degK, c.require("classNumber"), c.require("disc3")),
            "l >= max{(48[K:Q]h_K)^{3(48[K:Q]h_K)^2}, D_{K(E[3])}}",
        ),
        BoundOp(
            "lombardo_c",
            lambda c: lombardo_c(c.degK, c.hF),
            "c <= e^{1.9*10^10}([K:Q]max{1,h_F(E),log[K:Q]})^{12395}",
        ),
        BoundOp(
            "cm_c",
            lambda c: cm_c(c.degK, c.g, c.ell_unramified, c.good_reduction),
            "c = [K:Q] |GL_{2g}(F_3)|",
        ),
        BoundOp("torsion_translates_bound", torsion_translates_bound, "T(V) <= 16^{(c(A)+3)g^3} delta(V)^g"),
        BoundOp("curve_torsion_bound", curve_torsion_bound, "|C_tors| <= 4^{(2c(A)+2)g}"),
        BoundOp(
            "weil_height_bound",
            lambda c: weil_height_bound(c.g, c.hF),
            "h(x) <= 4^{g+1} h_F(A) + 3g log 2",
        ),
        BoundOp(
            "effective_prime_bound",
            lambda c: effective_prime_bound(c.g, c.logDiscK, c.hF),
            "p <= (12g)^{25g^{12g^{4g}}} max{1, log D_K, h_F(J)}^2",
        ),
        BoundOp(
            "buium_torsion_bound",
            lambda c: buium_torsion_bound(c.g, c.logDiscK, c.hF),
            "|C_tors| <= (12g)^{26g^{12g^{4g}}} max{1, log D_K, h_F(J)}^{8g+4}",
        ),
        BoundOp(
            "torsion_point_degree_bound",
            lambda c: torsion_point_degree_bound(c.degK, _ctors_for_degree(c)),
            "[Q(x):Q] <= [K:Q] |C_tors|",
        ),
        BoundOp(
            "field_extension_degrees",
            lambda c: field_extension_degrees(c.g),
            "[K(A[12]):K] <= 12^{4g^2}; prod_{k<=2g}(2^k-1)(3^k-1) <= 6^{3g^2}",
        ),
    ]
}


def as_magnitude(value) -> LogMagnitude:
    if isinstance(value, LogMagnitude):
        return value
    return LogMagnitude.of(value)


__all__ = [
    "AbelianContext",
    "BoundOp",
    "ContextError",
    "OPERATIONS",
    "ParameterRequired",
    "SymbolicBound",
    "buium_torsion_bound",
    "cm_c",
    "curve_torsion_bound",
    "eckstein_elliptic_threshold",
    "effective_prime_bound",
    "ell0_zywina",
    "field_extension_degrees",
    "general_linear_order",
    "lombardo_c",
    "m_exponent",
    "semisimplicity_threshold",
    "serre_c_large_prime",
    "serre_c_small_prime",
    "torsion_point_degree_bound",
    "torsion_translates_bound",
    "weil_height_bound",
    "xi",
]
