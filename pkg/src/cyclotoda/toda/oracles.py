"""Closed-form solutions used as references for the solver."""

from __future__ import annotations

import numpy as np

from ..rdiff import RDifferential
from .equations import TodaState, assemble_qnorm, flat_constants
from .grid import Chart, ChartGrid


def hyperbolic_density(a: float, radius: np.ndarray) -> np.ndarray:
    """Coefficient of the complete hyperbolic metric on a punctured disc against ``|dz|^2``.

    ``2 a^2 |z|^{2(a-1)} / (1 - |z|^{2a})^2`` for ``a > 0`` and the cusp metric
    ``2 / (|z|^2 (log |z|^2)^2)`` for ``a = 0``.  Both have curvature ``-2``.
    """
    rad = np.asarray(radius, dtype=float)
    if np.any((rad <= 0) | (rad >= 1)):
        raise ValueError("radius must lie in (0, 1)")
    if a < 0:
        raise ValueError("a must be non-negative")
    if a == 0:
        return 2.0 / (rad ** 2 * np.log(rad ** 2) ** 2)
    return 2 * a * a * rad ** (2 * (a - 1)) / (1 - rad ** (2 * a)) ** 2


def hyperbolic_fields(a: float, grid: ChartGrid) -> np.ndarray:
    """``w_1 = -w_2 = -(1/2) log g_xi`` for the chart coordinate ``xi``."""
    rad = np.abs(grid.z)
    dens = hyperbolic_density(a, rad)
    if grid.chart == Chart.LOG_POLAR:
        dens = dens * rad ** 2
    w1 = -0.5 * np.log(dens)
    return np.stack([w1, -w1])


def hyperbolic_oracle(a: float, grid: ChartGrid) -> TodaState:
    """Exact rank-2 solution with ``q = 0``."""
    return TodaState(grid, hyperbolic_fields(a, grid), np.zeros(grid.shape))


def flat_solution(q: RDifferential, grid: ChartGrid) -> TodaState:
    """``w_i = -((r+1-2i)/r) log|q|_g``; exact where ``|q|_g`` is constant or ``log|q|_g`` harmonic."""
    qnorm, flags = assemble_qnorm(q, grid)
    if flags.any() or np.any(qnorm <= 0):
        raise ValueError("flat solution needs a nowhere-vanishing finite q on the grid")
    return TodaState(grid, flat_constants(q.rank, 0.5 * np.log(qnorm)), qnorm)
