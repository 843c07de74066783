"""Model boundary data built from prescribed weights.

Both cases share the template

    w_i = -2 a_i X + k_i log(sigma) + c_i

with ``X`` a harmonic exponent and ``sigma`` a positive affine function of
``X`` or ``s``:

* pole of order ``m`` in the log-polar chart: ``X = m s``, ``sigma = -s`` and
  ``a_i = (b_i + (r+1)/2)/m``, so the ``s``-slope of ``w_i`` is ``-(2 b_i + r + 1)``;
* special interval: ``X = Re(alpha z^{-rho})`` (``z^{+rho}`` at infinity) and
  ``sigma = 2 - X``.

``k`` follows the cyclic block rule.  Within a block the constants are fixed
so that the template solves the open Toda chain to leading order, and each
block's mean constant equals the mean of the flat constants
``-((r+1-2i)/(2r)) log Q`` over the block, where ``Q = |q|_g^2 e^{-2X}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..growthorder import SpecialInterval
from ..parabolic import AVector, BVector, PolytopeKind, blocks, is_member, k_vector
from ..rdiff import Meromorphic, RDifferential, local_form
from .equations import assemble_qnorm
from .grid import Chart, ChartGrid


@dataclass(frozen=True)
class ModelTemplate:
    """Evaluated template pieces; ``fields`` has shape ``(r, n1, n2)``."""

    fields: np.ndarray
    a: tuple[float, ...]
    k: tuple[int, ...]
    exponent: np.ndarray
    sigma: np.ndarray


def chart_correction(grid: ChartGrid, r: int) -> np.ndarray:
    """``log|(dz)^{j/2}|_h - w_i/2`` with ``j = r+1-2i``, shape ``(r, n1, n2)``.

    Log-polar: ``(j/2) s + (j/4) log 2``; Cartesian: ``(j/4) log 2``.
    """
    j = np.array([r + 1 - 2 * i for i in range(1, r + 1)], dtype=float)[:, None, None]
    base = j / 4 * np.log(2.0) * np.ones((1,) + grid.shape)
    if grid.chart == Chart.LOG_POLAR:
        return base + j / 2 * grid.mesh[0][None]
    return base


def _chain_offsets(chain: list[int], r: int, log_g2: np.ndarray, log_q: np.ndarray
                   ) -> dict[int, np.ndarray]:
    n = len(chain)
    off = {chain[0]: np.zeros_like(log_q)}
    for t in range(1, n):
        prev, cur = chain[t - 1], chain[t]
        step = np.log(t * (n - t) / 2.0) + log_g2
        if prev == r - 1 and cur == 0:
            step = step - log_q
        off[cur] = off[prev] + step
    return off


def template_fields(a: tuple[float, ...], k: tuple[int, ...], chains: list[list[int]],
                    exponent: np.ndarray, sigma: np.ndarray, log_g2: np.ndarray,
                    log_q: np.ndarray) -> np.ndarray:
    r = len(a)
    flat = [-(r + 1 - 2 * (i + 1)) / (2 * r) * log_q for i in range(r)]
    out = np.empty((r,) + exponent.shape)
    log_sigma = np.log(sigma)
    for chain in chains:
        off = _chain_offsets(chain, r, log_g2, log_q)
        shift = sum(flat[i] - off[i] for i in chain) / len(chain)
        for i in chain:
            out[i] = -2 * a[i] * exponent + k[i] * log_sigma + off[i] + shift
    out -= out.mean(axis=0, keepdims=True)  # removes rounding drift only
    return out


def _qlog(q: RDifferential, grid: ChartGrid) -> np.ndarray:
    qnorm, flags = assemble_qnorm(q, grid)
    if flags.any() or np.any(qnorm <= 0):
        raise ValueError("q must be finite and nonzero on the grid")
    return np.log(qnorm)


def pole_template(b: BVector, q: RDifferential, grid: ChartGrid, k=None) -> ModelTemplate:
    """Template for a pole of order ``m = b.m`` on a log-polar grid inside the unit disc."""
    if grid.chart != Chart.LOG_POLAR:
        raise ValueError("pole templates live on log-polar grids")
    if grid.hi1 >= 0:
        raise ValueError("log-polar grid must satisfy |z| < 1")
    if not is_member(b.values, PolytopeKind.P_QP, b.m):
        raise ValueError(f"b = {b.values} is not in the polytope for m = {b.m}")
    lf = local_form(q)
    if not isinstance(lf, Meromorphic) or lf.m != b.m:
        raise ValueError("pole order of q differs from the weight vector's m")
    r = b.r
    a = tuple((float(v) + (r + 1) / 2) / b.m for v in b.values)
    kk = tuple(k) if k is not None else k_vector(b)
    s = grid.mesh[0]
    x = b.m * s
    log_q = _qlog(q, grid) - 2 * x
    fields = template_fields(a, kk, blocks(b), x, -s, np.zeros_like(s), log_q)
    return ModelTemplate(fields, a, kk, x, -s)


def special_exponent(interval: SpecialInterval, grid: ChartGrid) -> tuple[np.ndarray, np.ndarray]:
    """``X = Re(alpha z^{orientation rho})`` and ``log|dX-gradient|^2`` on the nodes.

    The branch of ``z^rho`` is taken with ``arg z`` within ``pi`` of the
    interval's centre.
    """
    z = grid.z.astype(complex)
    rho = float(interval.rho)
    centre = interval.center.value
    arg = centre + np.angle(z * np.exp(-1j * centre))
    power = interval.orientation * rho
    mod = np.abs(z)
    with np.errstate(divide="ignore"):
        log_mod = np.log(mod)
    a_val = interval.alpha * np.exp(power * log_mod + 1j * power * arg)
    # |dA/dz| for A = alpha z^power
    log_g = np.log(abs(interval.alpha) * abs(power)) + (power - 1) * log_mod if power != 1 \
        else np.full(mod.shape, np.log(abs(interval.alpha)))
    if grid.chart == Chart.LOG_POLAR:
        log_g = log_g + log_mod
    return a_val.real, 2 * log_g


def special_template(a_vec: AVector, q: RDifferential, interval: SpecialInterval,
                     grid: ChartGrid, k=None) -> ModelTemplate:
    """Template toward a special interval; valid where ``X < 2``."""
    if not is_member(a_vec.values, PolytopeKind.P):
        raise ValueError(f"a = {a_vec.values} is not in the polytope")
    x, log_g2 = special_exponent(interval, grid)
    sigma = 2.0 - x
    if np.any(sigma <= 0):
        raise ValueError("grid leaves the region where the special-interval template is defined")
    a = tuple(float(v) for v in a_vec.values)
    kk = tuple(k) if k is not None else k_vector(a_vec)
    log_q = _qlog(q, grid) - 2 * x
    fields = template_fields(a, kk, blocks(a_vec), x, sigma, log_g2, log_q)
    return ModelTemplate(fields, a, kk, x, sigma)


def boundary_from_model(weights: AVector | BVector, q: RDifferential, grid: ChartGrid,
                        interval: SpecialInterval | None = None, k=None) -> np.ndarray:
    """Model fields on every node; the solver reads only the boundary nodes."""
    if isinstance(weights, BVector):
        return pole_template(weights, q, grid, k).fields
    if interval is None:
        raise ValueError("a-vector boundary data need a special interval")
    return special_template(weights, q, interval, grid, k).fields
