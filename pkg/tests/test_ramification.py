import random
from fractions import Fraction

import mpmath
import pytest

from serre_bounds.padic import PadicScalar, is_prime, val_int
from serre_bounds.ramification import (
    InsufficientLevelsError,
    c5_bound,
    c6,
    different_from_jumps,
    different_from_lower_indices,
    fit_c1_c2,
    herbrand_phi,
    indices_depend_only_on_valuation,
    kappa_of,
    lower_indices,
    lower_jumps,
    profile_checks,
    ramification_profile,
    upper_jumps,
    w_sequence,
)
from serre_bounds.tower import TowerConfig, TowerElement, different_valuation

SHAPES = [(3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (5, 3), (7, 1), (7, 2)]


def herbrand_oracle(breaks: list[tuple[int, int]], total: int) -> list[int]:
    """phi(u) = integral_0^u dt / (G_0 : G_t), summed unit step by unit step."""
    def order_at(t: int) -> int:
        return max([o for b, o in breaks if b >= t], default=1)

    out = [-1]
    for b, _ in breaks:
        out.append(sum(Fraction(order_at(t), total) for t in range(1, b + 1)))
    return out


@pytest.mark.parametrize("ell, n", SHAPES)
def test_lower_indices_match_closed_form(ell, n):
    # sigma^j(zeta) - zeta = zeta (zeta^((1+l)^j - 1) - 1) and v_l((1+l)^j - 1) = 1 + v_l(j)
    config = TowerConfig(ell, n, 20)
    indices = lower_indices(config, n)
    assert set(indices) == set(range(1, ell**n))
    for j, index in indices.items():
        assert index == ell ** (1 + val_int(j, ell))


def test_lower_jumps_first_level():
    assert lower_jumps(TowerConfig(3, 1, 20), 1) == [(2, 3)]


def test_lower_jumps_trivial_group():
    assert lower_jumps(TowerConfig(3, 1, 20), 0) == []


@pytest.mark.parametrize("ell, n", [(3, 1), (3, 2), (5, 2), (7, 2)])
def test_indices_depend_only_on_valuation(ell, n):
    assert indices_depend_only_on_valuation(TowerConfig(ell, n, 20), n)


@pytest.mark.parametrize("ell, n", SHAPES)
def test_upper_jumps_are_multiples_of_e(ell, n):
    config = TowerConfig(ell, n, 20)
    lower = lower_jumps(config, n)
    e = ell - 1
    expected = [-1] + [e * i for i in range(1, n + 1)]
    assert upper_jumps(lower) == expected == herbrand_oracle(lower, ell**n)


def test_phi_is_identity_below_first_break():
    lower = lower_jumps(TowerConfig(5, 2, 20), 2)
    first = lower[0][0]
    for u in range(first + 1):
        assert herbrand_phi(lower, u) == u


def test_upper_jumps_reject_non_integral():
    with pytest.raises(ArithmeticError):
        upper_jumps([(2, 9), (3, 3)])


@pytest.mark.parametrize("ell, n", SHAPES)
def test_different_three_ways(ell, n):
    config = TowerConfig(ell, n, 20)
    nus = upper_jumps(lower_jumps(config, n))
    d = different_valuation(ell, n)
    assert different_from_jumps(ell, nus, n) == d == different_from_lower_indices(config, n)


@pytest.mark.parametrize("ell, levels", [(3, 3), (5, 3), (7, 2)])
def test_profile_constants(ell, levels):
    config = TowerConfig(ell, levels, 20)
    profile = ramification_profile(config)
    e = ell - 1
    assert profile.kappa == 0
    assert (profile.c1, profile.c2, profile.c3, profile.c4) == (0, 0, 0, -1)
    assert all(check.passed for check in profile_checks(config, profile))
    diffs = {k: different_valuation(ell, k) for k in range(1, levels + 1)}
    c1, c2 = fit_c1_c2(ell, e, diffs)
    for k, d in diffs.items():
        assert d == e * k + c1 + c2 / ell**k


def test_kappa_needs_enough_levels():
    with pytest.raises(InsufficientLevelsError):
        kappa_of([-1], 3, 2)


def test_profile_json_is_exact():
    obj = ramification_profile(TowerConfig(3, 2, 20)).to_json_obj()
    assert obj["upper_jumps"] == [-1, 2, 4] and obj["c5_bound"] == "49/6" and obj["c6"] == 6


# -- c5 and c6 ------------------------------------------------------------------------------------------


def test_c5_example():
    assert c5_bound(3, 2).exact == Fraction(49, 6)


def test_c5_below_six_e_squared():
    for ell in [p for p in range(3, 100) if is_prime(p)]:
        for e in range(1, 101):
            bound = c5_bound(ell, e)
            assert bound.exact <= bound.coarse == 6 * e * e


def test_c5_decreases_in_ell_for_e_one():
    values = [c5_bound(p, 1).exact for p in range(3, 200) if is_prime(p)]
    assert all(a > b for a, b in zip(values, values[1:]))


def c6_oracle(ell: int, e: int) -> int:
    if ell >= 4 * e * e:
        return 1
    mpmath.mp.dps = 60
    value = (
        mpmath.mpf(1) / (e * ell * (ell - 1))
        + mpmath.mpf(2 * ell * e) / (ell - 1) ** 2
        + mpmath.log(2 * e) / mpmath.log(ell)
    )
    assert abs(value - mpmath.nint(value)) > mpmath.mpf(10) ** -40
    return 2 + int(mpmath.floor(value))


def test_c6_examples():
    assert c6(3, 2) == 6
    assert c6(37, 3) == 1


def test_c6_sweep_against_oracle():
    for ell in [p for p in range(3, 98) if is_prime(p)]:
        for e in range(1, 21):
            value = c6(ell, e)
            assert value == c6_oracle(ell, e)
            assert value <= 7 * e


def test_c6_fast_path():
    for ell in [p for p in range(3, 500) if is_prime(p)]:
        for e in range(1, 12):
            if ell >= 4 * e * e:
                assert c6(ell, e) == 1


# -- w-sequences ---------------------------------------------------------------------------------------------


def test_w_sequence_one_plus_ell():
    seq = w_sequence(PadicScalar.from_int(4, 3, 30), 3)
    assert seq.values[0] == 2


def test_w_sequence_ten():
    seq = w_sequence(PadicScalar.from_int(10, 3, 40), 6)
    assert [int(w) for w in seq.values] == [4, 6, 8, 10, 12, 14, 16]
    assert seq.recursion_holds and seq.equality_holds and not seq.truncated


def test_w_recursion_on_random_lambdas():
    rng = random.Random(11)
    for _ in range(100):
        lam = 1 + 5 * rng.randrange(1, 5**8)
        seq = w_sequence(PadicScalar.from_int(lam, 5, 60), 4)
        assert seq.recursion_holds and seq.equality_holds


def test_w_sequence_on_ramified_lambda():
    lam = 1 + (TowerElement.zeta_power(5, 0, 30, 1) - 1) * 7
    seq = w_sequence(lam, 4)
    assert seq.values[0] == 1 and seq.recursion_holds


def test_w_c6_beats_c5_on_samples():
    rng = random.Random(12)
    for ell in (3, 5, 7):
        e = ell - 1
        for _ in range(30):
            lam = 1 + ell ** rng.randint(1, 2) * rng.randrange(1, ell**4)
            seq = w_sequence(PadicScalar.from_int(lam, ell, 80), c6(ell, e))
            assert not seq.truncated
            assert seq.values[c6(ell, e)] > c5_bound(ell, e).exact


def test_w_sequence_truncates_at_low_precision():
    seq = w_sequence(PadicScalar.from_int(1 + 3**5, 3, 8), 6)
    assert seq.truncated
