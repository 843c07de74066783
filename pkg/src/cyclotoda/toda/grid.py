"""Uniform grids on a planar chart and the 5-point Laplacian."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
import scipy.sparse as sp

MIN_NODES = 8


class Chart(str, Enum):
    LOG_POLAR = "log_polar"
    CARTESIAN = "cartesian"


@dataclass(frozen=True)
class ChartGrid:
    """Tensor grid; axis 0 is ``s`` (or ``x``), axis 1 is ``theta`` (or ``y``).

    For ``LOG_POLAR`` the chart coordinate is ``zeta = s + i theta`` with
    ``z = exp(zeta)``; ``theta`` is periodic with ``n2`` nodes on ``[0, 2 pi)``.
    For ``CARTESIAN`` both axes include their end points.
    """

    chart: Chart
    lo1: float
    hi1: float
    lo2: float
    hi2: float
    n1: int
    n2: int

    def __post_init__(self):
        object.__setattr__(self, "chart", Chart(self.chart))
        if self.n1 < MIN_NODES or self.n2 < MIN_NODES:
            raise ValueError(f"need at least {MIN_NODES} nodes per axis")
        if not (self.hi1 > self.lo1 and self.hi2 > self.lo2):
            raise ValueError("empty coordinate range")

    @classmethod
    def log_polar(cls, r_min: float, r_max: float, n_s: int, n_theta: int) -> "ChartGrid":
        return cls(Chart.LOG_POLAR, float(np.log(r_min)), float(np.log(r_max)), 0.0,
                   2 * np.pi, n_s, n_theta)

    @classmethod
    def log_polar_s(cls, s_min: float, s_max: float, n_s: int, n_theta: int) -> "ChartGrid":
        return cls(Chart.LOG_POLAR, s_min, s_max, 0.0, 2 * np.pi, n_s, n_theta)

    @classmethod
    def cartesian(cls, x0: float, x1: float, y0: float, y1: float, nx: int, ny: int) -> "ChartGrid":
        return cls(Chart.CARTESIAN, x0, x1, y0, y1, nx, ny)

    @property
    def periodic(self) -> bool:
        return self.chart == Chart.LOG_POLAR

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n1, self.n2)

    @property
    def h1(self) -> float:
        return (self.hi1 - self.lo1) / (self.n1 - 1)

    @property
    def h2(self) -> float:
        if self.periodic:
            return (self.hi2 - self.lo2) / self.n2
        return (self.hi2 - self.lo2) / (self.n2 - 1)

    @cached_property
    def axis1(self) -> np.ndarray:
        return self.lo1 + self.h1 * np.arange(self.n1)

    @cached_property
    def axis2(self) -> np.ndarray:
        return self.lo2 + self.h2 * np.arange(self.n2)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.axis1, self.axis2, indexing="ij")

    @cached_property
    def chart_coordinate(self) -> np.ndarray:
        u, v = self.mesh
        return u + 1j * v

    @cached_property
    def z(self) -> np.ndarray:
        """The coordinate ``z`` at each node."""
        xi = self.chart_coordinate
        return np.exp(xi) if self.periodic else xi

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        m = np.zeros(self.shape, dtype=bool)
        m[0, :] = m[-1, :] = True
        if not self.periodic:
            m[:, 0] = m[:, -1] = True
        return m

    @property
    def interior_mask(self) -> np.ndarray:
        return ~self.boundary_mask

    @cached_property
    def interior_index(self) -> np.ndarray:
        return np.flatnonzero(self.interior_mask.ravel())

    @cached_property
    def boundary_index(self) -> np.ndarray:
        return np.flatnonzero(self.boundary_mask.ravel())

    @cached_property
    def laplacian(self) -> sp.csr_matrix:
        """5-point Laplacian rows for interior nodes, columns for all nodes."""
        n1, n2 = self.shape
        idx = np.arange(n1 * n2).reshape(self.shape)
        rows, cols, vals = [], [], []
        i1, i2 = np.nonzero(self.interior_mask)
        me = idx[i1, i2]
        c1, c2 = 1.0 / self.h1 ** 2, 1.0 / self.h2 ** 2
        rows.append(me); cols.append(me); vals.append(np.full(me.size, -2 * (c1 + c2)))
        for d1, d2, c in ((1, 0, c1), (-1, 0, c1), (0, 1, c2), (0, -1, c2)):
            j2 = (i2 + d2) % n2 if self.periodic else i2 + d2
            rows.append(me); cols.append(idx[i1 + d1, j2]); vals.append(np.full(me.size, c))
        lap = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                            shape=(n1 * n2, n1 * n2))
        return lap[self.interior_index]

    @cached_property
    def laplacian_split(self) -> tuple[sp.csr_matrix, sp.csr_matrix]:
        """``(L_II, L_IB)`` so that ``(Lap w)_I = L_II w_I + L_IB w_B``."""
        lap = self.laplacian.tocsc()
        return lap[:, self.interior_index].tocsr(), lap[:, self.boundary_index].tocsr()

    def apply_laplacian(self, field: np.ndarray) -> np.ndarray:
        """Discrete Laplacian on interior nodes (zero on the boundary)."""
        out = np.zeros(self.n1 * self.n2)
        out[self.interior_index] = self.laplacian @ field.ravel()
        return out.reshape(self.shape)

    def refine(self) -> "ChartGrid":
        """Halve both spacings, keeping all existing nodes."""
        n2 = 2 * self.n2 if self.periodic else 2 * self.n2 - 1
        return ChartGrid(self.chart, self.lo1, self.hi1, self.lo2, self.hi2, 2 * self.n1 - 1, n2)

    def to_dict(self) -> dict:
        return {"chart": self.chart.value, "ranges": [self.lo1, self.hi1, self.lo2, self.hi2],
                "nodes": [self.n1, self.n2]}

    @classmethod
    def from_dict(cls, d: dict) -> "ChartGrid":
        lo1, hi1, lo2, hi2 = (float(v) for v in d["ranges"])
        n1, n2 = (int(v) for v in d["nodes"])
        chart = Chart(d["chart"])
        if chart == Chart.LOG_POLAR and d.get("radii", False):
            lo1, hi1 = float(np.log(lo1)), float(np.log(hi1))
        return cls(chart, lo1, hi1, lo2, hi2, n1, n2)

    def header(self) -> str:
        names = ("s", "theta") if self.periodic else ("x", "y")
        return (f"chart={self.chart.value} {names[0]}_min={self.lo1!r} {names[0]}_max={self.hi1!r} "
                f"{names[1]}_min={self.lo2!r} {names[1]}_max={self.hi2!r} "
                f"n_{names[0]}={self.n1} n_{names[1]}={self.n2}")

    @property
    def axis_names(self) -> tuple[str, str]:
        return ("s", "theta") if self.periodic else ("x", "y")
