import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from serre_bounds.magnitude import LogMagnitude, lm_max
from serre_bounds.rigorous import IndeterminateComparison, Interval, log10


def level1(x: int) -> LogMagnitude:
    return LogMagnitude.from_log10(log10(x))


def test_small_values_stay_exact():
    assert LogMagnitude.of(7) ** 16 == LogMagnitude.of(7**16)
    assert (LogMagnitude.of(7) ** 16).exact == 33232930569601


def test_large_powers_move_to_level_one_without_computing_them():
    big = LogMagnitude.of(24) ** (10**50)
    assert big.level == 1
    truth = log10(24) * 10**50
    assert big.enclosure.lo <= truth.lo and truth.hi <= big.enclosure.hi


def test_level_two_for_towers():
    exponent = LogMagnitude.from_log10(Interval(Fraction(3 * 10**6), Fraction(3 * 10**6 + 1)))
    value = LogMagnitude.of(36).raised_to(exponent)
    assert value.level == 2
    assert 3 * 10**6 < value.enclosure.lo


def test_level_two_downgrades_when_small():
    value = LogMagnitude.from_loglog10(Interval(Fraction(2), Fraction(2)))
    assert value.level == 1 and value.enclosure.contains(100)


def test_comparisons_across_levels():
    a = LogMagnitude.of(10**100)
    b = LogMagnitude.from_log10(Interval(Fraction(200), Fraction(201)))
    c = LogMagnitude.from_loglog10(Interval(Fraction(2000), Fraction(2001)))
    assert a < b < c
    assert lm_max(a, b) == b


def test_overlapping_enclosures_are_indeterminate():
    a = LogMagnitude.from_log10(Interval(Fraction(10), Fraction(12)))
    b = LogMagnitude.from_log10(Interval(Fraction(11), Fraction(13)))
    with pytest.raises(IndeterminateComparison):
        a.compare(b)


def test_positive_values_only():
    with pytest.raises(ValueError):
        LogMagnitude.of(0)


def test_rows_render_upward():
    row = (LogMagnitude.of(2) ** 100000).to_row()
    assert row["kind"] == "log10" and row["rounded"] == "up"
    assert Fraction(row["value"]) >= 100000 * log10(2).hi - Fraction(1, 10**6)


@given(
    st.integers(min_value=2, max_value=10**6),
    st.integers(min_value=2, max_value=10**6),
    st.integers(min_value=1, max_value=60),
)
def test_level_one_arithmetic_encloses_exact(a, b, k):
    exact = a * b**k + a
    lm = level1(a) * level1(b) ** k + level1(a)
    truth = log10(exact)
    assert lm.enclosure.lo <= truth.hi and truth.lo <= lm.enclosure.hi


def test_cross_representation_agreement_below_a_million():
    rng = random.Random(7)
    for _ in range(500):
        a, b, k = rng.randrange(1, 1000), rng.randrange(1, 1000), rng.randrange(1, 3)
        exact = a * b**k
        if exact >= 10**6:
            continue
        assert (LogMagnitude.of(a) * LogMagnitude.of(b) ** k).exact == exact
        lifted = level1(a) * level1(b) ** k
        truth = log10(exact)
        assert lifted.enclosure.lo <= truth.lo and truth.hi <= lifted.enclosure.hi
