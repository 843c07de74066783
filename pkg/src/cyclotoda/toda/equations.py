"""The cyclic Toda system on a chart grid with Euclidean background metric.

With ``E_l = exp(w_{l+1} - w_l)`` for ``l < r`` and
``E_r = exp(w_1 - w_r) |q|^2`` the equations read

    (1/2) Lap w_i = E_{i-1} - E_i        (indices mod r),

which is the harmonic-metric condition for ``h = sum e^{w_i}`` on the
line bundles ``K^{(r+1-2i)/2}``.  The norm convention is
``|(d xi)^{j/2}|^2 = 2^{j/2}`` for the chart coordinate ``xi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..rdiff import Frame, Puncture, RDifferential, convert_frame
from .grid import Chart, ChartGrid


class FlaggedDomainError(ValueError):
    """Raised when ``|q|^2`` overflowed at some node."""


def assemble_qnorm(q: RDifferential | None, grid: ChartGrid, rank: int | None = None
                   ) -> tuple[np.ndarray, np.ndarray]:
    """``|q|_g^2`` at the nodes and a mask of nodes where evaluation saturated.

    In the log-polar chart the coefficient against ``(d zeta)^r`` equals the
    coefficient against ``(dz/z)^r``; in the Cartesian chart it is the
    coefficient against ``(dz)^r``.
    """
    if q is None:
        return np.zeros(grid.shape), np.zeros(grid.shape, dtype=bool)
    if grid.chart == Chart.LOG_POLAR:
        if q.puncture != Puncture.ZERO:
            raise ValueError("log-polar grids need a differential centred at the origin")
        qq = convert_frame(q, Frame.DZ_OVER_Z)
    else:
        qq = convert_frame(q, Frame.DZ)
    ev = qq.evaluate_flagged(grid.z)
    val = np.asarray(ev.value)
    flags = np.asarray(ev.saturated) | ~np.isfinite(val)
    with np.errstate(over="ignore", invalid="ignore"):
        qn = 2.0 ** q.rank * np.abs(np.where(flags, 0, val)) ** 2
    flags |= ~np.isfinite(qn)
    return np.where(flags, np.inf, qn), flags


def links(w: np.ndarray, qnorm: np.ndarray) -> np.ndarray:
    """Link weights ``E_l``, shape ``(r, ...)``; ``E_r`` carries ``|q|^2``."""
    e = np.exp(np.roll(w, -1, axis=0) - w)
    e[-1] = e[-1] * qnorm
    return e


def nonlinearity(w: np.ndarray, qnorm: np.ndarray) -> np.ndarray:
    """``F_i = E_{i-1} - E_i``."""
    e = links(w, qnorm)
    return np.roll(e, 1, axis=0) - e


def residual_fields(w: np.ndarray, qnorm: np.ndarray, grid: ChartGrid) -> np.ndarray:
    """``R_i = (1/2) Lap_h w_i - F_i`` on interior nodes, zero on the boundary."""
    out = np.zeros_like(w)
    f = nonlinearity(w, qnorm)
    inner = grid.interior_index
    for i in range(w.shape[0]):
        out[i].ravel()[inner] = 0.5 * (grid.laplacian @ w[i].ravel()) - f[i].ravel()[inner]
    return out


def jacobian_blocks(w_inner: np.ndarray, q_inner: np.ndarray) -> sp.csr_matrix:
    """``dF/dw`` on interior unknowns (field-major ordering), a weighted graph Laplacian."""
    r, n = w_inner.shape
    e = links(w_inner, q_inner)
    rows, cols, vals = [], [], []
    base = np.arange(n)
    for l in range(r):
        a, b = l, (l + 1) % r
        ia, ib = a * n + base, b * n + base
        rows += [ia, ib, ia, ib]
        cols += [ia, ib, ib, ia]
        vals += [e[l], e[l], -e[l], -e[l]]
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(r * n, r * n))


def flat_constants(r: int, log_qg: np.ndarray | float) -> np.ndarray:
    """``w_i = -((r+1-2i)/r) log|q|_g``, stacked along a new first axis."""
    coef = np.array([-(r + 1 - 2 * i) / r for i in range(1, r + 1)])
    return coef.reshape((r,) + (1,) * np.ndim(log_qg)) * np.asarray(log_qg)[None]


@dataclass(frozen=True)
class SolveReport:
    converged: bool
    newton_steps: int
    residual_history: tuple[float, ...]
    max_residual: float
    trace_deviation: float
    linear_iterations: tuple[int, ...] = ()
    picard_sweeps: int = 0
    tol_effective: float = float("nan")
    seconds: float = float("nan")

    def to_dict(self, timing: bool = False) -> dict:
        d = {"converged": self.converged, "newton_steps": self.newton_steps,
             "residual_history": list(self.residual_history), "max_residual": self.max_residual,
             "trace_deviation": self.trace_deviation,
             "linear_iterations": list(self.linear_iterations),
             "picard_sweeps": self.picard_sweeps, "tol_effective": self.tol_effective}
        if timing:
            d["seconds"] = self.seconds
        return d


@dataclass(frozen=True)
class TodaState:
    """Fields ``w_i`` on a grid together with ``|q|_g^2``."""

    grid: ChartGrid
    w: np.ndarray
    qnorm: np.ndarray
    report: SolveReport | None = None

    @property
    def r(self) -> int:
        return self.w.shape[0]

    def residual(self) -> np.ndarray:
        return residual_fields(self.w, self.qnorm, self.grid)

    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residual())))

    def trace_deviation(self) -> float:
        return float(np.max(np.abs(self.w.sum(axis=0))))


def residual(state: TodaState) -> np.ndarray:
    return state.residual()


def convert_convention(state: TodaState) -> np.ndarray:
    """``u_i = w_i + ((r+1-2i)/2) log 2``."""
    r = state.r
    shift = np.array([(r + 1 - 2 * i) / 2 * np.log(2) for i in range(1, r + 1)])
    return state.w + shift[:, None, None]


def residual_u_convention(u: np.ndarray, qnorm: np.ndarray, grid: ChartGrid) -> np.ndarray:
    """Residual of the system written for ``u`` with the unnormalised norm.

    ``(1/4) Lap u_i = e^{u_i - u_{i-1}} - e^{u_{i+1} - u_i}``, where the wrap
    link carries ``|q|'^2 = 2^{-r} |q|_g^2``.  It equals half the residual of
    the ``w`` system at ``w = u - ((r+1-2i)/2) log 2``.
    """
    r = u.shape[0]
    e = np.exp(np.roll(u, -1, axis=0) - u)
    e[-1] = e[-1] * qnorm * 2.0 ** (-r)
    f = np.roll(e, 1, axis=0) - e
    out = np.zeros_like(u)
    inner = grid.interior_index
    for i in range(r):
        out[i].ravel()[inner] = 0.25 * (grid.laplacian @ u[i].ravel()) - f[i].ravel()[inner]
    return out


def log_tr_s(state1: TodaState, state2: TodaState) -> np.ndarray:
    """``log sum_i exp(w2_i - w1_i)``, the log-trace of the relative endomorphism."""
    if state1.grid != state2.grid:
        raise ValueError("states live on different grids")
    d = state2.w - state1.w
    m = d.max(axis=0)
    return m + np.log(np.exp(d - m).sum(axis=0))
