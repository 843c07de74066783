"""Read parabolic and special-interval weights off computed Toda states.

Only slope coefficients of the asymptotic templates are trusted; the
additive constants are fitted but discarded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .growthorder import SpecialInterval
from .parabolic import PolytopeKind, k_vector, project_to_polytope
from .toda.boundary import chart_correction, special_exponent
from .toda.equations import TodaState
from .toda.grid import Chart

MAX_CONDITION = 1e8
TIE_TOL = 0.05
POLE_WINDOW = (0.05, 0.5)
RAY_WINDOW = (0.4, 0.8)


class IllPosedFitError(ValueError):
    """The regression design matrix is too badly conditioned."""


@dataclass(frozen=True)
class WeightFit:
    """Regression estimates.

    ``raw`` are the slope estimates before projection and ``values`` the
    projected ones.  ``k_raw``/``k`` are the log coefficients before and
    after structural rounding.
    """

    kind: str
    raw: tuple[float, ...]
    values: tuple[float, ...]
    k_raw: tuple[float, ...]
    k: tuple[int, ...]
    residual_norms: tuple[float, ...]
    samples: tuple[float, ...]
    condition: float
    ordering_violation: float
    chart_correction: str
    residual_decay_rate: float = float("nan")
    m: int | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "raw": list(self.raw), "values": list(self.values),
                "k_raw": list(self.k_raw), "k": list(self.k),
                "residual_norms": list(self.residual_norms), "samples": list(self.samples),
                "condition": self.condition, "ordering_violation": self.ordering_violation,
                "chart_correction": self.chart_correction,
                "residual_decay_rate": self.residual_decay_rate, "m": self.m}


def _fit(design: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    cond = float(np.linalg.cond(design))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise IllPosedFitError(f"design matrix condition number {cond:.3g} exceeds {MAX_CONDITION:g}")
    coef, *_ = np.linalg.lstsq(design, targets, rcond=None)
    return coef, targets - design @ coef, cond


def _ordering_violation(values: np.ndarray, period: float) -> float:
    gaps = list(values[:-1] - values[1:]) + [values[-1] - values[0] + period]
    return float(max(0.0, -min(gaps)))


def round_k(raw_weights: Sequence[float], k_raw: Sequence[float], period: float,
            tie_tol: float = TIE_TOL) -> tuple[int, ...]:
    """Nearest k among the block structures compatible with the estimated weights.

    Candidate structures come from grouping ties at ``2*tie_tol``, ``tie_tol``
    and exact equality.
    """
    cands = {k_vector(tuple(raw_weights), period, tol) for tol in (2 * tie_tol, tie_tol, 1e-12)}
    target = np.asarray(k_raw, float)
    return min(sorted(cands), key=lambda k: float(np.sum((np.asarray(k) - target) ** 2)))


def _decay_rate(abscissa: np.ndarray, resid: np.ndarray) -> float:
    """Empirical power-law decay of the fit residual along the samples."""
    half = abscissa.size // 2
    if half < 2:
        return float("nan")
    lo = np.sqrt(np.mean(resid[:, :half] ** 2))
    hi = np.sqrt(np.mean(resid[:, half:] ** 2))
    t_lo, t_hi = np.mean(np.abs(abscissa[:half])), np.mean(np.abs(abscissa[half:]))
    if lo == 0 or hi == 0 or t_lo == t_hi:
        return float("nan")
    return float(np.log(lo / hi) / np.log(t_hi / t_lo))


def default_radii(state: TodaState, window: tuple[float, float] = POLE_WINDOW,
                  count: int = 12) -> np.ndarray:
    """Node values of ``s`` spread over a fractional window measured from the inner edge."""
    s = state.grid.axis1
    span = s[-1] - s[0]
    lo, hi = s[0] + window[0] * span, s[0] + window[1] * span
    inside = np.flatnonzero((s >= lo) & (s <= hi))
    pick = np.unique(np.round(np.linspace(0, inside.size - 1, min(count, inside.size))).astype(int))
    return s[inside[pick]]


def extract_pole_weights(state: TodaState, m: int, radii: Sequence[float] | None = None
                         ) -> WeightFit:
    """Fit ``(b, k)`` at a pole of order ``m`` from a log-polar state.

    Circle averages of ``w_i/2`` plus the chart correction are regressed on
    ``{1, s, log(-s)}``; ``b_i = -slope - i`` and ``k_i`` is twice the
    ``log(-s)`` coefficient.
    """
    grid = state.grid
    if grid.chart != Chart.LOG_POLAR:
        raise ValueError("pole extraction needs a log-polar state")
    s_all = grid.axis1
    radii = default_radii(state) if radii is None else np.asarray(radii, float)
    if radii.size < 4:
        raise ValueError("need at least 4 sample radii")
    rows = np.array([int(np.argmin(np.abs(s_all - v))) for v in radii])
    if np.any(np.abs(s_all[rows] - radii) > 1e-9 * max(1.0, np.max(np.abs(radii)))):
        raise ValueError("sample radii must be grid rows")
    if np.any(rows == 0) or np.any(rows == grid.n1 - 1) or np.any(radii >= 0):
        raise ValueError("sample radii must be interior and inside the unit disc")
    r = state.r
    corr = chart_correction(grid, r)
    target = (state.w / 2 + corr).mean(axis=2)[:, rows]
    design = np.column_stack([np.ones(rows.size), radii, np.log(-radii)])
    coef, resid, cond = _fit(design, target.T)
    raw = -coef[1] - np.arange(1, r + 1)
    k_raw = 2 * coef[2]
    k = round_k(raw, k_raw, m)
    proj = project_to_polytope(tuple(raw), PolytopeKind.P_QP, m)
    return WeightFit("pole", tuple(map(float, raw)), tuple(map(float, proj)),
                     tuple(map(float, k_raw)), k,
                     tuple(float(np.linalg.norm(resid[:, i])) for i in range(r)),
                     tuple(map(float, radii)), cond, _ordering_violation(raw, m),
                     "log|(dz)^{j/2}|_h = w_i/2 + (j/2) s + (j/4) log 2, j = r+1-2i",
                     _decay_rate(radii, resid.T), m)


def ray_samples(state: TodaState, interval: SpecialInterval, count: int = 16,
                window: tuple[float, float] = RAY_WINDOW) -> np.ndarray:
    """Points on the central ray of ``interval`` inside the grid, geometric in ``|z|``."""
    grid = state.grid
    if grid.chart != Chart.CARTESIAN:
        raise ValueError("ray extraction is implemented for Cartesian grids")
    d = np.exp(1j * interval.center.value)
    ts = []
    for lo, hi, comp in ((grid.lo1, grid.hi1, d.real), (grid.lo2, grid.hi2, d.imag)):
        if abs(comp) > 1e-14:
            ts.append(sorted((lo / comp, hi / comp)))
    t0 = max([0.0] + [a for a, _ in ts])
    t1 = min(b for _, b in ts)
    if t1 <= t0:
        raise ValueError("central ray does not cross the grid")
    lo, hi = t0 + window[0] * (t1 - t0), t0 + window[1] * (t1 - t0)
    if lo <= 0:
        lo = hi / 4
    return np.geomspace(lo, hi, count) * d


def extract_special_weights(state: TodaState, interval: SpecialInterval,
                            samples: np.ndarray | None = None) -> WeightFit:
    """Fit ``a`` toward a special interval along its central ray.

    ``w_i/2`` plus the chart correction is regressed on ``{1, X, log(2 - X)}``
    with ``X = Re(alpha z^{+-rho})`` (cubic interpolation between nodes);
    ``a_i = -slope``.
    """
    grid = state.grid
    pts = ray_samples(state, interval) if samples is None else np.asarray(samples, complex)
    if pts.size < 8:
        raise ValueError("need at least 8 ray samples")
    r = state.r
    corr = chart_correction(grid, r)
    x_field, _ = special_exponent(interval, grid)
    coords = np.column_stack([pts.real, pts.imag])
    method = "cubic" if min(grid.shape) >= 4 else "linear"
    vals = np.stack([RegularGridInterpolator((grid.axis1, grid.axis2), state.w[i] / 2 + corr[i],
                                             method=method)(coords) for i in range(r)])
    x = RegularGridInterpolator((grid.axis1, grid.axis2), x_field, method=method)(coords)
    design = np.column_stack([np.ones(x.size), x, np.log(2 - x)])
    coef, resid, cond = _fit(design, vals.T)
    raw = -coef[1]
    k_raw = coef[2] * 2
    k = round_k(raw, k_raw, 1)
    proj = project_to_polytope(tuple(raw), PolytopeKind.P)
    return WeightFit("special", tuple(map(float, raw)), tuple(map(float, proj)),
                     tuple(map(float, k_raw)), k,
                     tuple(float(np.linalg.norm(resid[:, i])) for i in range(r)),
                     tuple(float(v) for v in np.abs(pts)), cond, _ordering_violation(raw, 1),
                     "log|(dz)^{j/2}|_h = w_i/2 + (j/4) log 2, j = r+1-2i",
                     _decay_rate(x, resid.T))


@dataclass(frozen=True)
class WeightComparison:
    passed: bool
    weights_passed: bool
    k_passed: bool
    max_deviation: float
    deviations: tuple[float, ...]
    k_mismatch: tuple[int, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {"pass": self.passed, "weights_pass": self.weights_passed, "k_pass": self.k_passed,
                "max_deviation": self.max_deviation, "deviations": list(self.deviations),
                "k_mismatch": list(self.k_mismatch)}


def compare_weights(prescribed: Sequence[float], fit: WeightFit | Sequence[float],
                    tol_b: float = 0.05, tol_k: int = 0,
                    prescribed_k: Sequence[int] | None = None,
                    fitted_k: Sequence[int] | None = None) -> WeightComparison:
    """Per-index comparison of prescribed and fitted weights (and k if given)."""
    values = fit.values if isinstance(fit, WeightFit) else tuple(fit)
    if fitted_k is None and isinstance(fit, WeightFit):
        fitted_k = fit.k
    dev = tuple(abs(float(a) - float(b)) for a, b in zip(prescribed, values))
    if len(dev) != len(prescribed) or len(values) != len(prescribed):
        raise ValueError("length mismatch")
    w_ok = max(dev) <= tol_b
    mism: tuple[int, ...] = ()
    k_ok = True
    if prescribed_k is not None and fitted_k is not None:
        mism = tuple(i + 1 for i, (a, b) in enumerate(zip(prescribed_k, fitted_k))
                     if abs(int(a) - int(b)) > tol_k)
        k_ok = not mism
    return WeightComparison(w_ok and k_ok, w_ok, k_ok, max(dev), dev, mism)
