import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cyclotoda.cyclicfiber import (Applicability, CyclicFiber, GInvariantMetric, adjoint, audit,
                                   canonical_metric, check_eps_orthogonality, check_norm_bounds,
                                   common_norm, eigenvalues, metric_from_gram, operator_norm,
                                   random_fiber, random_metric, v_basis, v_gram)


def test_v_basis_small():
    v = v_basis(CyclicFiber(2, 1.0))
    assert v[:, 0] == pytest.approx([1, 1]) and v[:, 1] == pytest.approx([1, -1])
    f = CyclicFiber(2, 1.0).matrix()
    assert f @ v[:, 1] == pytest.approx(-v[:, 1])


def test_eigenvalues_r3():
    tau = np.exp(2j * np.pi / 3)
    assert eigenvalues(CyclicFiber(3, 1.0)) == pytest.approx([1, tau, tau ** 2])


@pytest.mark.parametrize("r, alpha, diag", [(3, 2.0, (0.25, 1, 4)), (2, 1.0, (1, 1))])
def test_canonical_metric(r, alpha, diag):
    assert canonical_metric(CyclicFiber(r, alpha)).diag == pytest.approx(diag)


def test_gram_by_hand():
    g = v_gram(GInvariantMetric(np.array([4.0, 0.25])), CyclicFiber(2, 1.0))
    assert g[0, 0] == pytest.approx(17 / 4) and g[0, 1] == pytest.approx(15 / 4)


def test_canonical_norm_of_f():
    fib = CyclicFiber(3, 2.0 * np.exp(0.4j))
    h = canonical_metric(fib)
    # f is unitary up to |alpha| for h_can, so the operator norm is |alpha|
    assert operator_norm(h, fib) == pytest.approx(2.0, rel=1e-12)
    assert operator_norm(h, fib, "frobenius") == pytest.approx(np.sqrt(3) * 2.0, rel=1e-12)


def test_eps_orthogonality_at_canonical():
    fib = CyclicFiber(4, 0.7)
    rep = check_eps_orthogonality(canonical_metric(fib), fib, 0.01, 0.5)
    assert rep.status == Applicability.HOLDS and rep.lhs == pytest.approx(0, abs=1e-12)


def test_eps_orthogonality_small_perturbation():
    fib = CyclicFiber(2, 1.0)
    h = GInvariantMetric(np.array([np.exp(0.01), np.exp(-0.01)]))
    g = v_gram(h, fib)
    eps = abs(g[0, 1]) / g[0, 0].real
    assert check_eps_orthogonality(h, fib, eps, 0.5).status == Applicability.HOLDS


def test_not_applicable():
    fib = CyclicFiber(3, 1.0)
    h = GInvariantMetric.normalized([5.0, 1.0, 0.2])
    assert check_eps_orthogonality(h, fib, 0.6, 0.9).status == Applicability.NOT_APPLICABLE
    assert check_norm_bounds(h, fib, 0.1).status == Applicability.NOT_APPLICABLE


def test_norm_bounds_by_singular_value():
    fib = CyclicFiber(2, 1.0)
    h = GInvariantMetric(np.array([4.0, 0.25]))
    c = operator_norm(h, fib)
    assert c == pytest.approx(4.0)
    assert check_norm_bounds(h, fib, max(c, np.sqrt(2))).status == Applicability.HOLDS


def test_audit_small():
    res = audit(500, seed=3)
    assert all(v.violations == 0 for v in res.values())
    assert all(v.applicable > 0 for v in res.values())


seeds = st.integers(0, 2 ** 32 - 1)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_diagonalisation(seed):
    rng = np.random.default_rng(seed)
    fib = random_fiber(rng)
    v = v_basis(fib)
    resid = fib.matrix() @ v - v @ np.diag(eigenvalues(fib))
    assert np.linalg.norm(resid) <= 1e-12 * max(1.0, np.linalg.norm(v)) * abs(fib.alpha) ** fib.r


@settings(max_examples=100, deadline=None)
@given(seeds, st.floats(0.0, 1.0))
def test_gram_diagonal_is_constant_and_inverts(seed, spread):
    rng = np.random.default_rng(seed)
    fib = random_fiber(rng)
    h = random_metric(rng, fib, spread)
    assert h.is_unimodular(1e-10)
    g = v_gram(h, fib)
    b = common_norm(h, fib)
    assert np.max(np.abs(np.diag(g) - b)) <= 1e-12 * b * 10
    assert np.allclose(g, g.conj().T, rtol=1e-12, atol=1e-12 * b)
    assert metric_from_gram(g, fib) == pytest.approx(h.diag, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_canonical_metric_properties(seed):
    fib = random_fiber(np.random.default_rng(seed))
    h = canonical_metric(fib)
    assert h.is_unimodular(1e-10)
    g = v_gram(h, fib)
    b = fib.r * abs(fib.alpha) ** (-(fib.r - 1))
    assert g == pytest.approx(b * np.eye(fib.r), rel=1e-10, abs=1e-10 * b)
    f, fd = fib.matrix(), adjoint(h, fib)
    assert np.linalg.norm(f @ fd - fd @ f) <= 1e-12 * max(1.0, np.linalg.norm(f) ** 2) * 10
