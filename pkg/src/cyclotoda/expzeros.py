"""Zeros of finite exponential sums ``F(z) = sum_k a_k exp(i c_k z)``.

Zeros are counted with the argument principle on rectangles
``[x1, x2] x [-(L+1), L+1]`` where ``L`` bounds ``|Im z|`` on the zero set.
The count obeys the density bound

    |N(x1, x2) - (c_n - c_0)(x2 - x1)/(2 pi)| <= 3n.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

MAX_REFINEMENTS = 12


class ContourDegeneracyError(RuntimeError):
    pass


class DensityBoundViolation(AssertionError):
    pass


@dataclass(frozen=True)
class ExpSum:
    c: tuple[float, ...]
    a: tuple[complex, ...]

    def __post_init__(self):
        c = tuple(float(x) for x in self.c)
        a = tuple(complex(x) for x in self.a)
        if len(c) != len(a) or len(c) < 2:
            raise ValueError("need at least two terms with matching c and a")
        if any(y <= x for x, y in zip(c, c[1:])):
            raise ValueError("frequencies must be strictly increasing")
        if any(x == 0 for x in a):
            raise ValueError("coefficients must be non-zero")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return len(self.c) - 1

    @property
    def span(self) -> float:
        return self.c[-1] - self.c[0]

    @property
    def gap(self) -> float:
        return float(np.min(np.diff(self.c)))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        c = np.asarray(self.c)
        a = np.asarray(self.a)
        return np.sum(a[:, None] * np.exp(1j * c[:, None] * z.ravel()[None, :]), axis=0).reshape(z.shape)

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        c = np.asarray(self.c)
        a = np.asarray(self.a) * 1j * c
        return np.sum(a[:, None] * np.exp(1j * c[:, None] * z.ravel()[None, :]), axis=0).reshape(z.shape)

    def conjugate_coefficients(self) -> "ExpSum":
        return ExpSum(self.c, tuple(np.conj(self.a)))

    def to_dict(self) -> dict:
        return {"c": list(self.c), "a": [[x.real, x.imag] for x in self.a]}

    @classmethod
    def from_dict(cls, d: dict) -> "ExpSum":
        a = [complex(*x) if isinstance(x, (list, tuple)) else complex(x) for x in d["a"]]
        return cls(tuple(d["c"]), tuple(a))


def zero_strip(f: ExpSum) -> float:
    """Half-width ``L`` of a horizontal strip containing every zero.

    For ``Im z >= L`` the lowest frequency dominates and for ``Im z <= -L`` the
    highest one does.
    """
    mags = np.abs(np.asarray(f.a))
    best = 0.0
    for k in (0, f.n):
        ratio = (mags.sum() - mags[k]) / mags[k]
        best = max(best, np.log(ratio) / f.gap)
    return float(max(best, 0.0) + 1.0)


def _segment_integral(f: ExpSum, z0: complex, z1: complex, m: int) -> complex:
    t = np.linspace(0.0, 1.0, m + 1)
    z = z0 + (z1 - z0) * t
    g = f.derivative(z) / f(z) * (z1 - z0)
    return (g.sum() - 0.5 * (g[0] + g[-1])) / m


def vertical_clearance(f: ExpSum, x: float, height: float, samples: int = 4001) -> float:
    """Newton-step estimate ``min |F/F'|`` of the distance from ``Re z = x`` to a zero.

    The coarse minimum over a sample grid is polished by a bounded scalar search.
    """
    y = np.linspace(-height, height, samples)
    ratio = lambda t: float(np.abs(f(x + 1j * t)) / max(abs(complex(f.derivative(x + 1j * t))), 1e-300))
    vals = np.abs(f(x + 1j * y)) / np.maximum(np.abs(f.derivative(x + 1j * y)), 1e-300)
    k = int(np.argmin(vals))
    step = y[1] - y[0]
    res = minimize_scalar(ratio, bounds=(y[k] - step, y[k] + step), method="bounded",
                          options={"xatol": 1e-12})
    return float(min(vals[k], res.fun))


@dataclass(frozen=True)
class ZeroCount:
    count: int
    raw: complex
    x1: float
    x2: float
    perturbed: bool
    refinements: int


def count_zeros(f: ExpSum, x1: float, x2: float, min_distance: float = 1e-6) -> ZeroCount:
    """Number of zeros (with multiplicity) with real part in ``(x1, x2)``."""
    if not x1 < x2:
        raise ValueError("need x1 < x2")
    height = zero_strip(f) + 1.0
    perturbed = False
    for _ in range(10):
        moved = False
        if vertical_clearance(f, x1, height) < min_distance:
            x1 += 1e-3
            moved = True
        if vertical_clearance(f, x2, height) < min_distance:
            x2 += 1e-3
            moved = True
        perturbed |= moved
        if not moved:
            break
    corners = [x1 - 1j * height, x2 - 1j * height, x2 + 1j * height, x1 + 1j * height]
    lengths = [abs(corners[(k + 1) % 4] - corners[k]) for k in range(4)]
    freq = max(1.0, max(abs(c) for c in f.c))
    base = [max(64, int(16 * L * freq)) for L in lengths]
    prev = None
    for level in range(MAX_REFINEMENTS + 1):
        total = sum(_segment_integral(f, corners[k], corners[(k + 1) % 4], base[k] * 2 ** level)
                    for k in range(4))
        val = total / (2j * np.pi)
        near = abs(val.real - round(val.real)) < 0.1 and abs(val.imag) < 0.1
        if prev is not None and near and abs(val - prev) < 0.05:
            return ZeroCount(int(round(val.real)), complex(val), x1, x2, perturbed, level)
        prev = val
    raise ContourDegeneracyError(f"argument integral did not stabilise (last value {prev})")


@dataclass(frozen=True)
class DensityReport:
    count: int
    bound_lo: float
    bound_hi: float
    passed: bool
    x1: float
    x2: float
    perturbed: bool

    def to_dict(self) -> dict:
        return {"count": self.count, "bound_lo": self.bound_lo, "bound_hi": self.bound_hi,
                "pass": self.passed, "x1": self.x1, "x2": self.x2, "perturbed": self.perturbed}


def density_bounds(f: ExpSum, x1: float, x2: float, slack: int = 3) -> tuple[float, float]:
    mid = f.span * (x2 - x1) / (2 * np.pi)
    return mid - slack * f.n, mid + slack * f.n


def verify_density_bound(f: ExpSum, x1: float, x2: float, strict: bool = True) -> DensityReport:
    """Count zeros and check the density bound; a breach raises when ``strict``."""
    zc = count_zeros(f, x1, x2)
    lo, hi = density_bounds(f, zc.x1, zc.x2)
    ok = lo <= zc.count <= hi
    rep = DensityReport(zc.count, float(lo), float(hi), bool(ok), zc.x1, zc.x2, zc.perturbed)
    if strict and not ok:
        raise DensityBoundViolation(f"zero count {zc.count} outside [{lo:.3f}, {hi:.3f}]")
    return rep


def zero_order(f: ExpSum, center: complex, radius: float, m: int = 512) -> int:
    """Number of zeros inside a small circle, by the argument principle."""
    t = np.linspace(0.0, 2 * np.pi, m, endpoint=False)
    z = center + radius * np.exp(1j * t)
    dz = 1j * radius * np.exp(1j * t)
    val = np.mean(f.derivative(z) / f(z) * dz) * 2 * np.pi / (2j * np.pi)
    return int(round(val.real))


def power_of_binomial(n: int, root: complex = 1.0) -> ExpSum:
    """``(exp(i z) - root)^n`` expanded; it has zeros of order exactly ``n``."""
    from math import comb
    a = [comb(n, k) * (-root) ** (n - k) for k in range(n + 1)]
    return ExpSum(tuple(float(k) for k in range(n + 1)), tuple(a))


def locate_zeros(f: ExpSum, x1: float, x2: float, seeds_per_unit: int = 4,
                 tol: float = 1e-12) -> list[complex]:
    """Diagnostic listing of zeros by Newton iteration from a seed lattice."""
    height = zero_strip(f)
    xs = np.linspace(x1, x2, max(2, int((x2 - x1) * seeds_per_unit)))
    ys = np.linspace(-height, height, max(2, int(2 * height * seeds_per_unit)))
    z = (xs[:, None] + 1j * ys[None, :]).ravel()
    for _ in range(60):
        with np.errstate(all="ignore"):
            z = z - f(z) / f.derivative(z)
    good = np.isfinite(z) & (np.abs(f(np.where(np.isfinite(z), z, 0))) < 1e-8)
    found: list[complex] = []
    for w in z[good]:
        if x1 < w.real < x2 and all(abs(w - u) > 1e-6 for u in found):
            found.append(complex(w))
    return sorted(found, key=lambda w: (w.real, w.imag))


def random_sum(rng: np.random.Generator, n_max: int = 4) -> ExpSum:
    n = int(rng.integers(1, n_max + 1))
    c = np.sort(rng.choice(np.arange(0, 13), size=n + 1, replace=False) * 0.25 + rng.uniform(0, 0.1))
    a = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
    return ExpSum(tuple(c), tuple(a))


def load(path) -> ExpSum:
    with open(path) as fh:
        return ExpSum.from_dict(json.load(fh))
