"""Damped Newton solver for the Dirichlet problem and the exhaustion driver."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import RegularGridInterpolator

from ..rdiff import RDifferential
from .equations import (FlaggedDomainError, SolveReport, TodaState, assemble_qnorm,
                        jacobian_blocks, nonlinearity)
from .grid import ChartGrid
from .linalg import solve_spd


class NonConvergenceError(RuntimeError):
    def __init__(self, message: str, history: Sequence[float]):
        super().__init__(f"{message}; residual history: {[f'{h:.3e}' for h in history]}")
        self.history = tuple(history)


@dataclass(frozen=True)
class SolverConfig:
    newton_tol: float = 1e-10
    max_newton: int = 50
    backtrack: float = 0.5
    min_step: float = 2.0 ** -20
    armijo: float = 1e-4
    picard_sweeps: int = 20
    cg_tol: float = 1e-12
    linear_solver: str = "cg"

    def __post_init__(self):
        if min(self.newton_tol, self.cg_tol, self.min_step, self.armijo) <= 0:
            raise ValueError("tolerances must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtracking factor must lie in (0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)


def rounding_floor(grid: ChartGrid, scale: float) -> float:
    """Size of the residual attainable in double precision for fields of size ``scale``."""
    lap = 2.0 / grid.h1 ** 2 + 2.0 / grid.h2 ** 2
    return 8 * np.finfo(float).eps * max(scale, 1.0) * lap


class _System:
    """Residual and Newton matrix restricted to interior unknowns."""

    def __init__(self, grid: ChartGrid, qnorm: np.ndarray, w_boundary: np.ndarray):
        self.grid = grid
        self.r = w_boundary.shape[0]
        self.lii, self.lib = grid.laplacian_split
        self.q_in = qnorm.ravel()[grid.interior_index]
        wb = w_boundary.reshape(self.r, -1)[:, grid.boundary_index]
        self.rhs_b = np.stack([0.5 * (self.lib @ wb[i]) for i in range(self.r)])
        self.n = grid.interior_index.size
        self.neg_half_lap = sp.block_diag([-0.5 * self.lii] * self.r, format="csr")

    def residual(self, x: np.ndarray) -> np.ndarray:
        w = x.reshape(self.r, self.n)
        lap = np.stack([0.5 * (self.lii @ w[i]) for i in range(self.r)]) + self.rhs_b
        return (lap - nonlinearity(w, self.q_in)).ravel()

    def newton_matrix(self, x: np.ndarray) -> sp.csr_matrix:
        return (self.neg_half_lap + jacobian_blocks(x.reshape(self.r, self.n), self.q_in)).tocsr()

    def picard_matrix(self, x: np.ndarray) -> sp.csr_matrix:
        jac = jacobian_blocks(x.reshape(self.r, self.n), self.q_in)
        return (self.neg_half_lap + sp.diags(jac.diagonal())).tocsr()


def harmonic_extension(grid: ChartGrid, boundary: np.ndarray, cfg: SolverConfig | None = None
                       ) -> np.ndarray:
    """Discrete-harmonic extension of each component's boundary values."""
    cfg = cfg or SolverConfig()
    lii, lib = grid.laplacian_split
    out = np.array(boundary, dtype=float, copy=True).reshape(boundary.shape[0], -1)
    for i in range(out.shape[0]):
        rhs = lib @ out[i, grid.boundary_index]
        x, _ = solve_spd(-lii, rhs, cfg.linear_solver, cfg.cg_tol)
        out[i, grid.interior_index] = x
    return out.reshape(boundary.shape)


def solve_dirichlet(q: RDifferential | np.ndarray | None, grid: ChartGrid, boundary: np.ndarray,
                    cfg: SolverConfig | None = None, initial: np.ndarray | None = None
                    ) -> TodaState:
    """Solve the Toda system with the boundary values of ``boundary`` held fixed.

    Parameters
    ----------
    q
        The differential, an explicit array of ``|q|_g^2`` on the nodes, or
        ``None`` for ``q = 0``.
    boundary
        Array of shape ``(r, n1, n2)``; only its boundary nodes are read.
    initial
        Optional starting fields; defaults to the harmonic extension.
    """
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    boundary = np.asarray(boundary, dtype=float)
    r = boundary.shape[0]
    if boundary.shape[1:] != grid.shape:
        raise ValueError("boundary array does not match the grid")
    if isinstance(q, RDifferential):
        if q.rank != r:
            raise ValueError("boundary rank differs from the differential's rank")
        qnorm, flags = assemble_qnorm(q, grid)
        if flags.any():
            raise FlaggedDomainError(f"|q|^2 overflowed at {int(flags.sum())} nodes")
    elif q is None:
        qnorm = np.zeros(grid.shape)
    else:
        qnorm = np.asarray(q, dtype=float)
        if not np.all(np.isfinite(qnorm)):
            raise FlaggedDomainError("|q|^2 is not finite everywhere")
    trace_b = np.abs(boundary.sum(axis=0))[grid.boundary_mask]
    if trace_b.size and trace_b.max() > 1e-9:
        raise ValueError(f"boundary data must have zero trace (deviation {trace_b.max():.2e})")

    w0 = harmonic_extension(grid, boundary, cfg) if initial is None else np.array(initial, float)
    w0 = np.where(grid.boundary_mask[None], boundary, w0)
    system = _System(grid, qnorm, boundary)
    inner = grid.interior_index
    x = w0.reshape(r, -1)[:, inner].ravel()

    tol = max(cfg.newton_tol, rounding_floor(grid, float(np.max(np.abs(boundary)))))
    res = system.residual(x)
    history = [float(np.max(np.abs(res)))]
    lin_its: list[int] = []
    picard = 0
    steps = 0
    while history[-1] > tol:
        if steps >= cfg.max_newton:
            raise NonConvergenceError(f"no convergence in {cfg.max_newton} Newton steps", history)
        steps += 1
        delta, its = solve_spd(system.newton_matrix(x), res, cfg.linear_solver, cfg.cg_tol)
        lin_its.append(its)
        phi = res @ res
        t = 1.0
        while True:
            trial = x + t * delta
            res_t = system.residual(trial)
            if np.all(np.isfinite(res_t)) and res_t @ res_t <= (1 - 2 * cfg.armijo * t) * phi:
                break
            t *= cfg.backtrack
            if t < cfg.min_step:
                trial = None
                break
        if trial is None:
            # lagged-nonlinearity sweeps when the Newton direction stalls
            for _ in range(cfg.picard_sweeps):
                d, its = solve_spd(system.picard_matrix(x), res, cfg.linear_solver, cfg.cg_tol)
                lin_its.append(its)
                x = x + d
                res = system.residual(x)
                picard += 1
            history.append(float(np.max(np.abs(res))))
            if not np.isfinite(history[-1]):
                raise NonConvergenceError("Picard fallback diverged", history)
            continue
        x, res = trial, res_t
        history.append(float(np.max(np.abs(res))))

    w = w0.reshape(r, -1).copy()
    w[:, inner] = x.reshape(r, -1)
    w = w.reshape(boundary.shape)
    report = SolveReport(True, steps, tuple(history), history[-1],
                         float(np.max(np.abs(w.sum(axis=0)))), tuple(lin_its), picard, tol,
                         time.perf_counter() - t0)
    return TodaState(grid, w, qnorm, report)


def _periodic_interpolator(state: TodaState, i: int) -> RegularGridInterpolator:
    g = state.grid
    a2 = g.axis2
    vals = state.w[i]
    if g.periodic:
        a2 = np.concatenate([a2, [g.hi2]])
        vals = np.concatenate([vals, vals[:, :1]], axis=1)
    return RegularGridInterpolator((g.axis1, a2), vals, method="linear")


def sample_fields(state: TodaState, points1: np.ndarray, points2: np.ndarray) -> np.ndarray:
    """Linear interpolation of all fields at chart points (exact at nodes)."""
    g = state.grid
    p2 = np.mod(points2 - g.lo2, g.hi2 - g.lo2) + g.lo2 if g.periodic else points2
    pts = np.column_stack([np.ravel(points1), np.ravel(p2)])
    return np.stack([_periodic_interpolator(state, i)(pts).reshape(np.shape(points1))
                     for i in range(state.r)])


@dataclass(frozen=True)
class ExhaustionResult:
    states: tuple[TodaState, ...]
    core_differences: tuple[float, ...]

    @property
    def strictly_decreasing(self) -> bool:
        d = self.core_differences
        return all(b < a for a, b in zip(d, d[1:]))


def exhaustion_solve(q: RDifferential | None, grids: Sequence[ChartGrid],
                     boundary_rule: Callable[[ChartGrid], np.ndarray],
                     core: tuple[float, float], cfg: SolverConfig | None = None
                     ) -> ExhaustionResult:
    """Solve on an increasing family of domains and compare on a fixed core.

    ``core`` is the range of the first chart coordinate (``s`` or ``x``) that
    every grid must contain.  Differences are sup-norms over the core nodes
    of the last grid between consecutive solutions.
    """
    states = tuple(solve_dirichlet(q, g, boundary_rule(g), cfg) for g in grids)
    ref = grids[-1]
    sel = (ref.axis1 >= core[0] - 1e-12) & (ref.axis1 <= core[1] + 1e-12)
    p1, p2 = np.meshgrid(ref.axis1[sel], ref.axis2, indexing="ij")
    for g in grids:
        if g.lo1 > core[0] + 1e-12 or g.hi1 < core[1] - 1e-12:
            raise ValueError("core is not contained in every grid")
    samples = [sample_fields(s, p1, p2) for s in states]
    diffs = tuple(float(np.max(np.abs(b - a))) for a, b in zip(samples, samples[1:]))
    return ExhaustionResult(states, diffs)
