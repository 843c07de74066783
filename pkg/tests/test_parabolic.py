from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from cyclotoda.parabolic import (AVector, BVector, Distinguished, PolytopeKind, blocks,
                                 convert_a_to_b, convert_b_to_a, distinguished_weights,
                                 has_wrap, is_member, k_vector, k_vector_oracle, nu_indices,
                                 project_to_polytope, sample_member)


def A(*v):
    return AVector(tuple(F(x) for x in v))


@pytest.mark.parametrize("vals, kind, m, expect", [
    ((F(1, 2), 0, F(-1, 2)), "P", None, True),
    ((F(1, 2), 0, F(-1, 2)), "P_R", None, True),
    ((F(-1), F(-2)), "P_QP", 1, True),
    ((F(1, 2), F(1, 2), F(-1)), "P", None, False),
    ((F(1, 4), F(1, 4), F(-1, 2)), "P_R", None, False),
])
def test_membership(vals, kind, m, expect):
    assert is_member(vals, kind, m) is expect


@pytest.mark.parametrize("vec, nu", [
    (A(0, 0, 0), ()),
    (A(F(1, 3), 0, F(-1, 3)), (1, 2)),
    (A(F(1, 3), F(1, 3), F(-2, 3)), (2,)),
])
def test_nu_indices(vec, nu):
    assert nu_indices(vec) == nu


@pytest.mark.parametrize("vec, k", [
    (A(0, 0, 0), (2, 0, -2)),
    (A(F(1, 3), 0, F(-1, 3)), (0, 0, 0)),
    (A(F(1, 3), F(1, 3), F(-2, 3)), (0, -2, 2)),
    (A(F(1, 4), F(-1, 4)), (0, 0)),
])
def test_k_vector(vec, k):
    assert k_vector(vec) == k
    assert k_vector_oracle(vec) == k


def test_wrap_detection():
    assert has_wrap(A(F(1, 3), F(1, 3), F(-2, 3)))
    assert not has_wrap(A(0, 0, 0))
    assert sorted(map(sorted, blocks(A(F(1, 3), F(1, 3), F(-2, 3))))) == [[0, 1, 2]]


def test_pole_k_vector_with_period():
    # b_2 = b_1 - m closes the cycle into one block {2, 1}
    assert k_vector(BVector((F(-1), F(-2)), 1)) == (-1, 1)
    assert k_vector(BVector((F(-3, 2), F(-3, 2)), 1)) == (1, -1)


@pytest.mark.parametrize("b, a", [
    ((F(-3, 2), F(-3, 2)), (F(0), F(0))),
    ((F(-1), F(-2)), (F(1, 4), F(-1, 4))),
])
def test_conversion(b, a):
    assert convert_b_to_a(BVector(b, 2)).values == a
    assert convert_a_to_b(AVector(a)) == BVector(b, 2)


def test_conversion_needs_m_equal_r():
    with pytest.raises(ValueError):
        convert_b_to_a(BVector((F(-1), F(-2)), 1))


def test_distinguished():
    b, a = distinguished_weights(2, 1, Distinguished.COMPLETE)
    assert b.values == (F(-3, 2), F(-3, 2)) and a.values == (0, 0)
    b, a = distinguished_weights(2, 1, Distinguished.Q_DOMINATED)
    assert b.values == (F(-5, 4), F(-7, 4)) and a.values == (F(1, 4), F(-1, 4))
    b, a = distinguished_weights(3, 2, "q_dominated")
    assert sum(b.values) == -6 and is_member(b.values, "P_QP", 2)


def test_projection_examples():
    # the trace-zero point (0.55, -0.55) breaks a_2 >= a_1 - 1, so that face is active
    assert project_to_polytope((0.6, -0.5), "P") == pytest.approx((0.5, -0.5))
    assert project_to_polytope((0.3, -0.1), "P") == pytest.approx((0.2, -0.2))
    assert project_to_polytope((0.5, 0.0, -0.5), "P") == pytest.approx((0.5, 0.0, -0.5))
    # (1.2, -1.2) violates a_2 >= a_1 - 1; the nearest point is on that face
    assert project_to_polytope((1.2, -1.2), "P") == pytest.approx((0.5, -0.5))


def qp_oracle(y, kind, m=None):
    r = len(y)
    period = 1.0 if kind in ("P", "P_R") else float(m)
    total = 0.0 if kind in ("P", "P_R") else -r * (r + 1) / 2
    cons = [{"type": "eq", "fun": lambda x: np.sum(x) - total}]
    cons += [{"type": "ineq", "fun": lambda x, i=i: x[i] - x[i + 1]} for i in range(r - 1)]
    cons += [{"type": "ineq", "fun": lambda x: x[-1] - x[0] + period}]
    if kind.endswith("_R"):
        cons += [{"type": "eq", "fun": lambda x, i=i: x[i] + x[r - 1 - i] - 2 * total / r}
                 for i in range(r // 2)]
    x0 = np.full(r, total / r)
    res = minimize(lambda x: np.sum((x - y) ** 2), x0, jac=lambda x: 2 * (x - y),
                   constraints=cons, method="SLSQP", options={"ftol": 1e-14, "maxiter": 500})
    return res.x


vectors = st.lists(st.floats(-3, 3), min_size=2, max_size=5)


@settings(max_examples=80, deadline=None)
@given(vectors, st.sampled_from(["P", "P_R", "P_QP", "P_QP_R"]), st.integers(1, 4))
def test_projection_matches_qp(y, kind, m):
    mm = m if kind.startswith("P_QP") else None
    x = project_to_polytope(y, kind, mm)
    assert is_member(x, kind, mm, tol=1e-9)
    ref = qp_oracle(np.asarray(y), kind, mm)
    assert np.sum((np.array(x) - y) ** 2) <= np.sum((ref - y) ** 2) + 1e-8
    assert project_to_polytope(x, kind, mm) == pytest.approx(x, abs=1e-10)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10 ** 6))
def test_k_vector_sums_to_zero(r, seed):
    rng = np.random.default_rng(seed)
    vals = sample_member(rng, r, "P")
    # snap to a coarse lattice so ties actually occur
    snapped = project_to_polytope(np.round(np.array(vals) * 4) / 4, "P")
    k = k_vector(AVector(tuple(snapped)))
    assert sum(k) == 0
    assert k == k_vector_oracle(AVector(tuple(snapped)))
