import numpy as np
import pytest

from cyclotoda.growthorder import growth_data, special_intervals
from cyclotoda.parabolic import AVector, Distinguished, distinguished_weights, is_member
from cyclotoda.rdiff import ExpMonomialSum, exponential_differential, monomial_differential
from cyclotoda.toda.boundary import boundary_from_model
from cyclotoda.toda.grid import ChartGrid
from cyclotoda.toda.oracles import flat_solution
from cyclotoda.toda.solver import solve_dirichlet
from cyclotoda.weights import (IllPosedFitError, WeightFit, compare_weights, extract_pole_weights,
                               extract_special_weights, round_k)

POLE = ChartGrid.log_polar(1e-3, 1e-1, 64, 16)
STRIP = ChartGrid.cartesian(-2.0, 2.0, 0.0, 20.0, 9, 101)
EXP = exponential_differential(2, ExpMonomialSum.monomial(1j, 1))


def test_flat_state_gives_q_dominated_weights():
    fit = extract_pole_weights(flat_solution(monomial_differential(2, 1.0, 1), POLE), 1)
    assert fit.raw == pytest.approx((-1.25, -1.75), abs=1e-9)
    assert fit.k == (0, 0) and fit.k_raw == pytest.approx((0, 0), abs=1e-8)
    assert fit.ordering_violation == 0


def test_complete_round_trip_small_grid():
    q = monomial_differential(2, 1.0, 1)
    b, _ = distinguished_weights(2, 1, Distinguished.COMPLETE)
    state = solve_dirichlet(q, POLE, boundary_from_model(b, q, POLE))
    fit = extract_pole_weights(state, 1)
    assert compare_weights(b.values, fit, prescribed_k=(1, -1)).passed
    assert is_member(fit.values, "P_QP", 1, tol=1e-9)


def test_ill_posed_radii():
    state = flat_solution(monomial_differential(2, 1.0, 1), POLE)
    s = POLE.axis1
    with pytest.raises(IllPosedFitError):
        extract_pole_weights(state, 1, radii=[s[30], s[30], s[30], s[30]])


def test_radii_must_be_rows():
    state = flat_solution(monomial_differential(2, 1.0, 1), POLE)
    with pytest.raises(ValueError):
        extract_pole_weights(state, 1, radii=np.linspace(-5, -4, 6))


def test_pole_extraction_needs_log_polar():
    with pytest.raises(ValueError):
        extract_pole_weights(flat_solution(EXP, STRIP), 1)


def test_flat_state_on_strip():
    iv = special_intervals(growth_data(EXP))[0]
    fit = extract_special_weights(flat_solution(EXP, STRIP), iv)
    assert fit.raw == pytest.approx((0.25, -0.25), abs=1e-9)
    assert fit.k == (0, 0)


def test_special_round_trip_small_grid():
    iv = special_intervals(growth_data(EXP))[0]
    a = AVector((0.0, 0.0))
    state = solve_dirichlet(EXP, STRIP, boundary_from_model(a, EXP, STRIP, iv))
    fit = extract_special_weights(state, iv)
    assert compare_weights(a.values, fit, tol_b=0.02).passed
    assert is_member(fit.values, "P", tol=1e-9)


def test_round_k_picks_nearest_structure():
    # near-tie b_1 ~ b_2 with k estimate close to the merged-block value
    assert round_k((-1.48, -1.52), (0.9, -0.9), 1) == (1, -1)
    assert round_k((-1.0, -2.0), (-0.8, 1.1), 1) == (-1, 1)
    assert round_k((0.4, -0.4), (0.01, -0.02), 1) == (0, 0)


def test_compare_examples():
    ok = compare_weights((-1.5, -1.5), (-1.5, -1.5))
    assert ok.passed and ok.max_deviation == 0
    assert compare_weights((-1.5, -1.5), (-1.46, -1.54)).passed
    bad = compare_weights((-1.5, -1.5), (-1.5, -1.5), prescribed_k=(1, -1), fitted_k=(0, -1))
    assert not bad.passed and bad.weights_passed and not bad.k_passed and bad.k_mismatch == (1,)


def test_fit_serialises():
    fit = extract_pole_weights(flat_solution(monomial_differential(2, 1.0, 1), POLE), 1)
    d = fit.to_dict()
    assert isinstance(fit, WeightFit) and d["kind"] == "pole" and len(d["values"]) == 2
