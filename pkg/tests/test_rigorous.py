from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from serre_bounds.rigorous import (
    IndeterminateComparison,
    Interval,
    decimal_down,
    decimal_up,
    euler_e,
    exp,
    floor_certified,
    int_str,
    ln,
    ln2,
    log10,
    log10_interval,
    pow10,
    scientific_up,
)

mpmath.mp.dps = 80


def mp(x: Fraction) -> mpmath.mpf:
    return mpmath.mpf(x.numerator) / x.denominator


def encloses(iv: Interval, value: mpmath.mpf) -> bool:
    return mp(iv.lo) <= value <= mp(iv.hi)


def test_constants_are_tight():
    assert encloses(ln2(), mpmath.log(2))
    assert encloses(euler_e(), mpmath.e)
    assert ln2().width < Fraction(1, 10**20)
    assert (Interval.point(1) / ln(10)).width < Fraction(1, 10**20)


@given(st.integers(min_value=1, max_value=10**30))
def test_ln_and_log10_enclose_mpmath(n):
    assert encloses(ln(n), mpmath.log(n))
    assert encloses(log10(n), mpmath.log10(n))


@given(st.fractions(min_value=Fraction(1, 10**6), max_value=10**6))
def test_ln_of_rationals(q):
    assert encloses(ln(q), mpmath.log(mp(q)))


@given(st.fractions(min_value=-50, max_value=50, max_denominator=1000))
def test_exp_and_pow10(q):
    assert encloses(exp(q), mpmath.exp(mp(q)))
    assert encloses(pow10(q), mpmath.power(10, mp(q)))


def test_log10_interval_is_monotone():
    iv = log10_interval(Interval(Fraction(10), Fraction(1000)))
    assert iv.lo <= 1 and iv.hi >= 3


def test_interval_arithmetic_is_outward():
    a, b = Interval(Fraction(-1), Fraction(2)), Interval(Fraction(3), Fraction(4))
    assert (a * b) == Interval(Fraction(-4), Fraction(8))
    assert (a - b) == Interval(Fraction(-5), Fraction(-1))
    assert a.contains(0) and not b.contains(0)


def test_floor_certified_of_log_ratio():
    # floor(log 4 / log 3) = 1
    value = floor_certified(lambda bits: ln(4, bits) / ln(3, bits))
    assert value == 1


def test_floor_certified_refuses_exact_integers():
    with pytest.raises(IndeterminateComparison):
        floor_certified(lambda bits: ln(9, bits) / ln(3, bits), max_bits=256)


def test_decimal_rounding_directions():
    third = Fraction(1, 3)
    assert decimal_up(third, 3) == "0.334"
    assert decimal_down(third, 3) == "0.333"
    assert decimal_up(Fraction(-1, 3), 3) == "-0.333"


def test_rendering_of_numbers_longer_than_the_str_limit():
    n = 7**9000 + 1  # 7606 digits
    assert int_str(n)[-4:] == f"{n % 10**4:04d}" and len(int_str(n)) == 7606
    assert decimal_up(Fraction(n, 3), 2).endswith(f".{((n % 3) * 100 + 2) // 3:02d}")
    assert scientific_up(Fraction(n)).endswith("e+7605")


def test_scientific_up_rounds_up_and_carries():
    assert scientific_up(Fraction(12345678901234567890), 4) == "1.235e+19"
    assert scientific_up(Fraction(99999 * 10**20), 3) == "1.00e+25"
    assert scientific_up(Fraction(7, 2)) == "3.500000"
