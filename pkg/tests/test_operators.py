import random
from fractions import Fraction

import pytest

from serre_bounds.operators import (
    NonInvertibleError,
    check_t_contraction,
    check_trace_identity,
    check_trace_step_derived,
    check_trace_step_stated,
    check_u_recursion,
    ker_log_chain,
    ker_log_order,
    project_to_kernel,
    rho_solve,
    twisted_invert,
    u_bound,
)
from serre_bounds.padic import PadicScalar
from serre_bounds.ramification import c5_bound
from serre_bounds.tower import (
    TowerConfig,
    TowerElement,
    embed,
    normalized_trace,
    random_element,
    sigma,
)

# -- dense rational oracle ----------------------------------------------------------------------------


def reduce_power(ell: int, n: int, k: int) -> dict[int, int]:
    """zeta^k in the power basis of Q(zeta_{l^(n+1)}), via zeta^((l-1) l^n) = -sum_{m<l-1} zeta^(m l^n)."""
    block, period = ell**n, ell ** (n + 1)
    k %= period
    d = block * (ell - 1)
    if k < d:
        return {k: 1}
    r = k - d
    return {m * block + r: -1 for m in range(ell - 1)}


def sigma_matrix(ell: int, n: int, power: int = 1) -> list[list[Fraction]]:
    d = ell**n * (ell - 1)
    u = pow(1 + ell, power, ell ** (n + 1))
    cols = []
    for i in range(d):
        col = [Fraction(0)] * d
        for k, c in reduce_power(ell, n, i * u).items():
            col[k] += c
        cols.append(col)
    return [[cols[j][i] for j in range(d)] for i in range(d)]


def solve_exact(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Gaussian elimination on a consistent (possibly overdetermined) system of full column rank."""
    m = [row[:] + [b] for row, b in zip(rows, rhs)]
    ncols = len(rows[0])
    pivot_row = 0
    pivots = []
    for col in range(ncols):
        pr = next((r for r in range(pivot_row, len(m)) if m[r][col] != 0), None)
        if pr is None:
            continue
        m[pivot_row], m[pr] = m[pr], m[pivot_row]
        inv = 1 / m[pivot_row][col]
        m[pivot_row] = [x * inv for x in m[pivot_row]]
        for r in range(len(m)):
            if r != pivot_row and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[pivot_row])]
        pivots.append(col)
        pivot_row += 1
    assert len(pivots) == ncols, "system is not of full column rank"
    assert all(all(x == 0 for x in row) for row in m[pivot_row:]), "inconsistent system"
    return [m[i][-1] for i in range(ncols)]


def trace_matrix(ell: int, n: int) -> list[list[Fraction]]:
    d = ell**n * (ell - 1)
    total = [[Fraction(0)] * d for _ in range(d)]
    for j in range(ell**n):
        s = sigma_matrix(ell, n, j)
        total = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(total, s)]
    return [[x / ell**n for x in row] for row in total]


def oracle_rho(ell: int, n: int, y: list[int]) -> list[Fraction]:
    d = ell**n * (ell - 1)
    s = sigma_matrix(ell, n)
    minus_one = [[s[i][j] - (i == j) for j in range(d)] for i in range(d)]
    return solve_exact(minus_one + trace_matrix(ell, n), [Fraction(v) for v in y] + [Fraction(0)] * d)


def oracle_twisted(ell: int, n: int, lam: Fraction, y: list[int]) -> list[Fraction]:
    d = ell**n * (ell - 1)
    s = sigma_matrix(ell, n)
    shifted = [[s[i][j] - lam * (i == j) for j in range(d)] for i in range(d)]
    return solve_exact(shifted, [Fraction(v) for v in y])


def as_tower(ell: int, n: int, coeffs: list[Fraction], precision: int) -> TowerElement:
    total = TowerElement.constant(0, ell, n, precision)
    for i, c in enumerate(coeffs):
        if c:
            total = total + TowerElement.zeta_power(ell, n, precision, i) * c
    return total


def integer_kernel_element(ell: int, n: int, rng: random.Random) -> list[int]:
    """Integer coordinates of an element of ker t (coordinates at multiples of l^n removed)."""
    d = ell**n * (ell - 1)
    block = ell**n
    return [0 if i % block == 0 else rng.randint(-9, 9) for i in range(d)]


# -- rho ----------------------------------------------------------------------------------------------------


@pytest.mark.parametrize("ell, n", [(3, 1), (3, 2), (5, 1)])
def test_rho_matches_dense_oracle(ell, n):
    rng = random.Random(ell * n)
    config = TowerConfig(ell, n, 30)
    for _ in range(5):
        coeffs = integer_kernel_element(ell, n, rng)
        y = TowerElement.from_coeffs(ell, n, 30, coeffs)
        assert normalized_trace(y).is_indistinguishable_from_zero
        result = rho_solve(config, y)
        expected = as_tower(ell, n, oracle_rho(ell, n, coeffs), 30)
        assert (result.solution - expected).is_indistinguishable_from_zero
        assert result.residual_is_zero


def test_rho_example_zeta9():
    config = TowerConfig(3, 1, 20)
    z9 = TowerElement.zeta_power(3, 1, 20, 1)
    y = z9 - TowerElement.zeta_power(3, 1, 20, 4)
    result = rho_solve(config, y)
    z = result.solution
    assert (sigma(z) - z).congruent(y)
    assert normalized_trace(z).is_indistinguishable_from_zero


def test_rho_of_zero():
    config = TowerConfig(3, 1, 10)
    result = rho_solve(config, TowerElement.constant(0, 3, 1, 10))
    assert result.solution.is_indistinguishable_from_zero


def test_rho_requires_kernel_input():
    config = TowerConfig(3, 1, 10)
    with pytest.raises(ValueError):
        rho_solve(config, TowerElement.constant(1, 3, 1, 10))


@pytest.mark.parametrize("ell, n", [(3, 1), (3, 2), (5, 1), (5, 2), (7, 1)])
def test_rho_round_trip_and_bound(ell, n):
    config = TowerConfig(ell, n, 20)
    rng = random.Random(100 + ell + n)
    for _ in range(100):
        y = project_to_kernel(random_element(ell, n, 20, rng))
        result = rho_solve(config, y)
        assert result.residual_is_zero
        assert result.valuation_margin is None or result.valuation_margin >= 0


def test_rho_is_base_linear():
    config = TowerConfig(5, 1, 20)
    rng = random.Random(13)
    for _ in range(10):
        x = project_to_kernel(random_element(5, 1, 20, rng))
        y = project_to_kernel(random_element(5, 1, 20, rng))
        a = random_element(5, 0, 20, rng)
        lhs = rho_solve(config, embed(a, 1) * x + y).solution
        rhs = embed(a, 1) * rho_solve(config, x).solution + rho_solve(config, y).solution
        assert lhs.congruent(rhs)


# -- twisted inverse --------------------------------------------------------------------------------------------


@pytest.mark.parametrize("lam", [Fraction(2), Fraction(10), Fraction(-5, 7)])
def test_twisted_matches_dense_oracle(lam):
    ell, n = 3, 1
    config = TowerConfig(ell, n, 30)
    rng = random.Random(14)
    coeffs = [rng.randint(-9, 9) for _ in range(6)]
    y = TowerElement.from_coeffs(ell, n, 30, coeffs)
    result = twisted_invert(config, lam, y)
    expected = as_tower(ell, n, oracle_twisted(ell, n, lam, coeffs), 30)
    assert (result.solution - expected).is_indistinguishable_from_zero
    assert result.residual_is_zero


def test_twisted_unit_lambda_has_no_margin():
    config = TowerConfig(3, 1, 20)
    result = twisted_invert(config, 2, random_element(3, 1, 20, random.Random(1)))
    assert result.residual_is_zero and result.margin is None


def test_twisted_rejects_one():
    config = TowerConfig(3, 1, 20)
    with pytest.raises(NonInvertibleError):
        twisted_invert(config, 1, random_element(3, 1, 20, random.Random(1)))


def test_twisted_rejects_roots_of_unity_killed_at_this_level():
    config = TowerConfig(3, 1, 20)
    zeta3 = TowerElement.zeta_power(3, 0, 20, 1)
    with pytest.raises(NonInvertibleError):
        twisted_invert(config, zeta3, random_element(3, 1, 20, random.Random(1)))


def test_twisted_margin_for_ten():
    config = TowerConfig(3, 2, 20)
    y = random_element(3, 2, 20, random.Random(2))
    result = twisted_invert(config, PadicScalar.from_int(10, 3, 20), y)
    assert result.c6 == 6
    assert result.margin == Fraction(47, 6)
    assert result.certified and result.residual_is_zero
    assert result.contraction_observed is None or result.contraction_observed > 0


def test_twisted_ramified_lambda():
    config = TowerConfig(5, 1, 25)
    lam = 1 + (TowerElement.zeta_power(5, 0, 25, 1) - 1) * 3
    result = twisted_invert(config, lam, random_element(5, 1, 25, random.Random(3)))
    assert result.residual_is_zero and result.certified


# -- certificates ------------------------------------------------------------------------------------------------


def test_t_contraction_example_zeta9():
    x = TowerElement.zeta_power(3, 1, 20, 1)
    lhs = (x - embed(normalized_trace(x), 1)).valuation()
    rhs = (x - sigma(x)).valuation()
    assert (lhs, rhs) == (0, 1)
    assert lhs >= rhs - c5_bound(3, 2).exact


def test_base_elements_are_skipped():
    x = embed(random_element(3, 0, 10, random.Random(4)), 1)
    assert (sigma(x) - x).is_indistinguishable_from_zero


@pytest.mark.parametrize("ell, n", [(3, 1), (3, 2), (5, 1)])
def test_certificates_pass(ell, n):
    config = TowerConfig(ell, n, 20)
    assert check_t_contraction(config, n, 200, 1).passed
    assert check_u_recursion(config, n, Fraction(-1), 200, 1).passed
    assert check_trace_step_derived(config, n - 1, Fraction(-1), 200, 1).passed
    assert check_trace_identity(config, n - 1, 200, 1).passed


def test_shifted_base_contraction():
    config = TowerConfig(3, 3, 20)
    assert check_t_contraction(config, 3, 100, 5, base_level=1).passed
    assert check_t_contraction(config, 3, 100, 5, base_level=2).passed


def test_u_bound_values():
    assert u_bound(3, 2, Fraction(-1), 1) == 2
    assert u_bound(3, 2, Fraction(-1), 3) == 2 + Fraction(1, 3) + Fraction(1, 9)


def test_stated_trace_inequality_fails_at_one():
    # v(Tr 1) = v(l) = e while the stated form asks for e + l^-n |c4| > e
    config = TowerConfig(3, 2, 20)
    one = TowerElement.constant(1, 3, 1, 20)
    from serre_bounds.tower import trace_step

    assert trace_step(one).valuation() == 2
    assert not check_trace_step_stated(config, 0, Fraction(-1), 200, 1).passed


def test_certificates_are_deterministic():
    config = TowerConfig(5, 1, 20)
    a = check_t_contraction(config, 1, 50, 42).to_json_obj()
    b = check_t_contraction(config, 1, 50, 42).to_json_obj()
    assert a == b and a["seed"] == 42 and a["verdict"] == "pass"


# -- kernel of the logarithm -----------------------------------------------------------------------------------------


def test_ker_log_examples():
    assert ker_log_order(3, 1, 0) == 2
    assert ker_log_order(3, 2, 1) == 24


def test_ker_log_divisibility_chain():
    links = ker_log_chain(3, 2, 1, 2)
    assert [(link.divisor, link.multiple) for link in links] == [(24, 24), (24, 24)]
    assert all(link.holds for link in links)
    for ell in (3, 5, 7):
        for n in range(1, 5):
            for f in range(1, n + 1):
                for d in range(f, n + 1, f):
                    assert all(link.holds for link in ker_log_chain(ell, f, 1, n, field_degree=d))


def test_ker_log_rejects_bad_input():
    with pytest.raises(ValueError):
        ker_log_order(3, 0, 0)
