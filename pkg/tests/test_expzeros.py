import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cyclotoda.expzeros import (ExpSum, count_zeros, density_bounds, locate_zeros,
                                power_of_binomial, random_sum, verify_density_bound,
                                vertical_clearance, zero_order, zero_strip)

PI = np.pi


def test_strip_covers_zeros():
    assert zero_strip(ExpSum((0, 1), (1, 1))) >= 1.0
    f = ExpSum((0, 1), (2, 1))  # zeros at pi + 2 pi k - i log 2
    assert abs(f(PI - 1j * np.log(2))) < 1e-14
    assert zero_strip(f) > np.log(2)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_strip_dominance(seed):
    f = random_sum(np.random.default_rng(seed))
    L = zero_strip(f)
    x = np.linspace(-50, 50, 1000)
    assert np.all(np.abs(f(x + 1j * L)) > 0) and np.all(np.abs(f(x - 1j * L)) > 0)


@pytest.mark.parametrize("f, x1, x2, n", [
    (ExpSum((0, 1), (1, 1)), 0.0, 10 * PI, 5),
    (ExpSum((0, 1), (-1, 1)), -PI, PI, 1),
    (ExpSum((0, 1, 2), (1, -2, 1)), -PI, PI, 2),
])
def test_count_examples(f, x1, x2, n):
    assert count_zeros(f, x1, x2).count == n


def test_density_example():
    rep = verify_density_bound(ExpSum((0, 1), (1, 1)), 0.0, 10 * PI)
    assert rep.count == 5 and rep.passed
    assert (rep.bound_lo, rep.bound_hi) == pytest.approx((2, 8))


def test_tiny_window():
    f = ExpSum((0, 1, 2.5), (1, 0.3, 0.2j))
    lo, _ = density_bounds(f, 0.0, 0.01)
    assert lo < 0 and verify_density_bound(f, 0.0, 0.01).passed


def test_boundary_zero_perturbs():
    zc = count_zeros(ExpSum((0, 1), (1, 1)), PI, 4 * PI)
    assert zc.perturbed and zc.count == 1


def test_bad_window():
    with pytest.raises(ValueError):
        count_zeros(ExpSum((0, 1), (1, 1)), 1.0, 0.0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_multiplicity_cap(n):
    f = power_of_binomial(n)
    assert zero_order(f, 0.0, 0.3) == n
    assert count_zeros(f, -1.0, 1.0).count == n


def test_locate_matches_count():
    f = ExpSum((0, 1), (1, 1))
    z = locate_zeros(f, 0.0, 10 * PI)
    assert np.array(z).real == pytest.approx(PI * np.array([1, 3, 5, 7, 9]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(-10, 10), st.floats(0.5, 8), st.floats(0.5, 8))
def test_additivity(seed, x1, d1, d2):
    f = random_sum(np.random.default_rng(seed))
    x2, x3 = x1 + d1, x1 + d1 + d2
    h = zero_strip(f) + 1
    if min(vertical_clearance(f, x, h) for x in (x1, x2, x3)) < 1e-3:
        return
    assert count_zeros(f, x1, x2).count + count_zeros(f, x2, x3).count == \
        count_zeros(f, x1, x3).count


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(-10, 10), st.floats(0.5, 10))
def test_conjugate_coefficients_reflect_zeros(seed, x1, d):
    # conj(G(z)) = F(-conj z), so zeros of G are zeros of F reflected through Re z = 0
    f = random_sum(np.random.default_rng(seed))
    g = f.conjugate_coefficients()
    h = zero_strip(f) + 1
    if min(vertical_clearance(f, x, h) for x in (x1, x1 + d)) < 1e-3:
        return
    assert count_zeros(f, x1, x1 + d).count == count_zeros(g, -x1 - d, -x1).count


def test_real_coefficients_symmetric():
    f = ExpSum((0, 1.5, 2), (1.0, -0.4, 2.0))
    assert f.conjugate_coefficients() == f
    z = np.array(locate_zeros(f, -6, 6))
    assert np.sort_complex(z) == pytest.approx(np.sort_complex(-z.conj()), abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(-10, 10), st.floats(0.1, 15))
def test_density_never_breached(seed, x1, d):
    f = random_sum(np.random.default_rng(seed))
    assert verify_density_bound(f, x1, x1 + d, strict=False).passed
