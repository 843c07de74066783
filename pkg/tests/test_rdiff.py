import cmath
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cyclotoda.rdiff import (Essential, ExpMonomialSum, Frame, Meromorphic, Puncture,
                             RDifferential, Term, convert_frame, exponential_differential,
                             from_dict, invert_chart, local_form, monomial_differential, to_dict)

E = ExpMonomialSum.monomial


def test_monomial_sum_merges_and_sorts():
    s = ExpMonomialSum(((1, 2.0), (3, 1.0), (1, -2.0), (Fraction(1, 2), 1j)))
    assert s.exponents == (3, Fraction(1, 2))
    assert s.lowest() == (Fraction(1, 2), 1j)


def test_constant_differential_evaluates_to_one():
    q = monomial_differential(3, 1.0, 0, frame=Frame.DZ, puncture=Puncture.INFINITY)
    assert q.evaluate(0.3 + 2j) == pytest.approx(1.0)


def test_essential_value_at_one():
    q = RDifferential(2, Puncture.ZERO, Frame.DZ, (Term(E(1.0, 1), E(1.0, -1)),))
    assert q.evaluate(1.0) == pytest.approx(np.e, rel=1e-14)


def test_exponential_at_pi():
    q = exponential_differential(3, E(1j, 1))
    assert q.evaluate(np.pi) == pytest.approx(cmath.exp(1j * np.pi), abs=1e-14)


def test_saturation_flag():
    q = exponential_differential(2, E(1.0, 1))
    ev = q.evaluate_flagged(np.array([1.0, 800.0]))
    assert list(ev.saturated) == [False, True]


def test_local_form_pole():
    q = monomial_differential(2, 1.0, 3)
    assert local_form(q) == Meromorphic(3, 1.0)


def test_local_form_essential_at_infinity():
    assert isinstance(local_form(exponential_differential(2, E(1j, 1))), Essential)


def test_local_form_after_frame_change():
    q = monomial_differential(2, 1.0, -2, frame=Frame.DZ)
    assert local_form(q).m == 0


def test_frame_shifts():
    q = monomial_differential(2, 1.0, 1)
    assert convert_frame(q, Frame.DZ).terms[0].poly == E(1.0, -1)
    assert convert_frame(q, Frame.DZ_OVER_Z) == q


@pytest.mark.parametrize("q, poly, exp_arg", [
    (exponential_differential(2, E(1j, 1)), E(1.0, -4), E(1j, -1)),
    (monomial_differential(2, 1.0, 0, frame=Frame.DZ, puncture=Puncture.INFINITY),
     E(1.0, -4), ExpMonomialSum.zero()),
    (monomial_differential(2, 1.0, 1, frame=Frame.DZ, puncture=Puncture.INFINITY),
     E(1.0, -5), ExpMonomialSum.zero()),
])
def test_invert_chart_examples(q, poly, exp_arg):
    inv = invert_chart(q)
    assert inv.puncture == Puncture.ZERO
    assert inv.terms[0].poly == poly and inv.terms[0].exp_arg == exp_arg


def test_invert_chart_pointwise():
    q = exponential_differential(2, E(1j, 1))
    w = 0.3 + 0.1j
    # coefficient transforms as f(1/w) (d(1/w))^2 = f(1/w) w^{-4} (dw)^2
    assert invert_chart(q).evaluate(w) == pytest.approx(q.evaluate(1 / w) * w ** -4, rel=1e-13)


def test_rejects_malformed():
    with pytest.raises(ValueError):
        RDifferential(2, Puncture.ZERO, Frame.DZ, (Term(E(1.0, 0), E(1.0, 1)),))
    with pytest.raises(ValueError):
        RDifferential(0, Puncture.ZERO, Frame.DZ, (Term(E(1.0, 0)),))


def test_json_round_trip():
    q = RDifferential(3, Puncture.ZERO, Frame.DZ_OVER_Z,
                      (Term(E(2 - 1j, 3), E(0.5, -2)), Term(E(1.0, Fraction(1, 2)))))
    assert from_dict(to_dict(q)) == q


powers = st.integers(-4, 4)
coefs = st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False,
                           allow_infinity=False)


@st.composite
def differentials(draw):
    rank = draw(st.integers(2, 4))
    terms = tuple(Term(E(draw(coefs), draw(powers)),
                       E(draw(coefs), -draw(st.integers(1, 3)))) for _ in range(draw(st.integers(1, 3))))
    return RDifferential(rank, Puncture.ZERO, draw(st.sampled_from(list(Frame))), terms)


@settings(max_examples=60, deadline=None)
@given(differentials())
def test_invert_twice_is_identity(q):
    back = invert_chart(invert_chart(q))
    assert back.merged_terms() == q.merged_terms() and back.frame == q.frame


@settings(max_examples=60, deadline=None)
@given(differentials(), st.complex_numbers(min_magnitude=0.3, max_magnitude=3, allow_nan=False,
                                           allow_infinity=False))
def test_frame_conversion_scales_by_power(q, z):
    other = Frame.DZ if q.frame == Frame.DZ_OVER_Z else Frame.DZ_OVER_Z
    conv = convert_frame(q, other).evaluate(z)
    sign = 1 if q.frame == Frame.DZ else -1
    expect = q.evaluate(z) * z ** (sign * q.rank)
    assert abs(conv - expect) <= 1e-12 * max(1.0, abs(expect))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), coefs, powers)
def test_local_form_frame_invariant(rank, c, m):
    q = monomial_differential(rank, c, m)
    assert local_form(q) == local_form(convert_frame(q, Frame.DZ))
