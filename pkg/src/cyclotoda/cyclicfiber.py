"""Linear algebra of one fibre with a cyclic automorphism.

The fibre has basis ``e_0, ..., e_{r-1}`` with ``f(e_i) = e_{i+1}`` and
``f(e_{r-1}) = alpha^r e_0``.  Invariant metrics are diagonal in this basis
with unit determinant.  Hermitian forms are linear in the first slot.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class Applicability(str, Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    NOT_APPLICABLE = "not_applicable"


@dataclass(frozen=True)
class CyclicFiber:
    r: int
    alpha: complex

    def __post_init__(self):
        if self.r < 2:
            raise ValueError("rank must be at least 2")
        if self.alpha == 0:
            raise ValueError("alpha must be non-zero")

    def matrix(self) -> np.ndarray:
        """Matrix of ``f`` in the basis ``e``."""
        f = np.zeros((self.r, self.r), dtype=complex)
        for i in range(self.r - 1):
            f[i + 1, i] = 1.0
        f[0, self.r - 1] = self.alpha ** self.r
        return f


@dataclass(frozen=True)
class GInvariantMetric:
    """Diagonal metric ``h(e_j, e_j) = diag[j]``."""

    diag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        if np.any(d <= 0):
            raise ValueError("metric must be positive")
        object.__setattr__(self, "diag", d)

    @classmethod
    def normalized(cls, diag) -> "GInvariantMetric":
        d = np.asarray(diag, dtype=float)
        return cls(d / np.exp(np.mean(np.log(d))))

    def is_unimodular(self, tol: float = 1e-12) -> bool:
        return abs(np.sum(np.log(self.diag))) <= tol * len(self.diag)

    def norms(self) -> np.ndarray:
        """``|e_j|_h``."""
        return np.sqrt(self.diag)


def v_basis(fiber: CyclicFiber) -> np.ndarray:
    """Eigenvectors of ``f`` as columns, ``v_i = sum_j tau^{-ij} alpha^{-j} e_j``."""
    r = fiber.r
    tau = np.exp(2j * np.pi / r)
    i, j = np.meshgrid(np.arange(r), np.arange(r), indexing="xy")
    return tau ** (-(i * j)) * complex(fiber.alpha) ** (-j.astype(float))


def eigenvalues(fiber: CyclicFiber) -> np.ndarray:
    tau = np.exp(2j * np.pi / fiber.r)
    return tau ** np.arange(fiber.r) * fiber.alpha


def canonical_metric(fiber: CyclicFiber) -> GInvariantMetric:
    """``h_j = |alpha|^{2j - (r-1)}``, the metric making the ``v_i`` orthogonal."""
    j = np.arange(fiber.r)
    return GInvariantMetric(float(abs(fiber.alpha)) ** (2.0 * j - (fiber.r - 1)))


def v_gram(h: GInvariantMetric, fiber: CyclicFiber) -> np.ndarray:
    """Gram matrix ``G[i, l] = h(v_i, v_l)``."""
    v = v_basis(fiber)
    return v.T @ np.diag(h.diag) @ v.conj()


def common_norm(h: GInvariantMetric, fiber: CyclicFiber) -> float:
    """``b(h) = h(v_i, v_i)``, the same for every ``i``."""
    return float(np.real(v_gram(h, fiber)[0, 0]))


def metric_from_gram(gram: np.ndarray, fiber: CyclicFiber) -> np.ndarray:
    """Recover ``h(e_j, e_j)`` from the ``v``-Gram matrix by Fourier inversion."""
    r = fiber.r
    tau = np.exp(2j * np.pi / r)
    a2 = float(abs(fiber.alpha)) ** 2
    out = np.empty(r)
    b = np.real(np.trace(gram)) / r
    idx = np.arange(r)
    for j in range(r):
        phase = tau ** (j * (idx[:, None] - idx[None, :]))
        off = gram * phase
        np.fill_diagonal(off, 0.0)
        out[j] = np.real(b * a2 ** j / r + a2 ** j * off.sum() / r ** 2)
    return out


def operator_norm(h: GInvariantMetric, fiber: CyclicFiber, norm: str = "spectral") -> float:
    """Norm of ``f`` with respect to ``h``.

    ``"spectral"`` is the operator norm, ``"frobenius"`` the Hilbert-Schmidt
    norm of ``f`` as an endomorphism.
    """
    s = np.sqrt(h.diag)
    weighted = (s[:, None] * fiber.matrix()) / s[None, :]
    if norm == "spectral":
        return float(np.linalg.norm(weighted, 2))
    if norm == "frobenius":
        return float(np.linalg.norm(weighted, "fro"))
    raise ValueError(f"unknown norm {norm!r}")


def adjoint(h: GInvariantMetric, fiber: CyclicFiber) -> np.ndarray:
    """Matrix of ``f^dagger`` with respect to ``h`` in the basis ``e``."""
    hm = np.diag(h.diag)
    return np.linalg.solve(hm, fiber.matrix().conj().T @ hm)


@dataclass(frozen=True)
class BoundReport:
    status: Applicability
    lhs: float = float("nan")
    rhs: float = float("nan")
    detail: str = ""


def orthogonality_defect(h: GInvariantMetric, fiber: CyclicFiber) -> float:
    """Smallest ``eps`` with ``|h(v_i, v_j)| <= eps b(h)`` for all ``i != j``."""
    g = v_gram(h, fiber)
    b = np.real(g[0, 0])
    off = np.abs(g - np.diag(np.diag(g)))
    return float(off.max() / b)


def check_eps_orthogonality(h: GInvariantMetric, fiber: CyclicFiber, eps: float,
                            delta: float) -> BoundReport:
    """If the ``v_i`` are ``eps``-orthogonal, then ``|log(h_j/h_can,j)| <= 2 C eps``.

    Here ``C = (r-1)/(1-delta)``. The hypothesis needs ``(r-1) eps < delta < 1``.
    """
    r = fiber.r
    if not ((r - 1) * eps < delta < 1):
        return BoundReport(Applicability.NOT_APPLICABLE, detail="need (r-1)eps < delta < 1")
    if orthogonality_defect(h, fiber) > eps:
        return BoundReport(Applicability.NOT_APPLICABLE, detail="metric is not eps-orthogonal")
    c = (r - 1) / (1 - delta)
    lhs = float(np.max(np.abs(np.log(h.diag / canonical_metric(fiber).diag))))
    rhs = 2 * c * eps
    status = Applicability.HOLDS if lhs <= rhs * (1 + 1e-12) + 1e-14 else Applicability.VIOLATED
    return BoundReport(status, lhs, rhs)


def check_norm_bounds(h: GInvariantMetric, fiber: CyclicFiber, c: float,
                      norm: str = "spectral") -> BoundReport:
    """Upper bounds on ``|e_i|_h`` and the two-sided bound, given ``|f|_h <= C``."""
    r = fiber.r
    a = float(abs(fiber.alpha))
    fn = operator_norm(h, fiber, norm)
    if c < np.sqrt(r) * a or fn > c * (1 + 1e-12):
        return BoundReport(Applicability.NOT_APPLICABLE, detail="need |f|_h <= C and C >= sqrt(r)|alpha|")
    e = h.norms()
    slack = 1 + 1e-10
    upper = np.array([a ** (-r) * c ** ((r + 1) / 2 + i) for i in range(r - 1)] + [c ** ((r - 1) / 2)])
    lo2, hi2 = a ** r * (c + 1) ** (-2 * r), a ** (-r) * (c + 1) ** (2 * r)
    ok = (np.all(e <= upper * slack) and np.all(e <= hi2 * slack) and np.all(e * slack >= lo2))
    worst = float(max(np.max(e / upper), np.max(e / hi2), np.max(lo2 / e)))
    return BoundReport(Applicability.HOLDS if ok else Applicability.VIOLATED, worst, 1.0)


def check_ratio_bound(h1: GInvariantMetric, h2: GInvariantMetric, fiber: CyclicFiber, c: float,
                      norm: str = "spectral") -> BoundReport:
    """``|alpha|^{2r}(C+1)^{-4r} <= |e_i|_{h1}/|e_i|_{h2} <= |alpha|^{-2r}(C+1)^{4r}``."""
    r = fiber.r
    a = float(abs(fiber.alpha))
    if (c < np.sqrt(r) * a or operator_norm(h1, fiber, norm) > c * (1 + 1e-12)
            or operator_norm(h2, fiber, norm) > c * (1 + 1e-12)):
        return BoundReport(Applicability.NOT_APPLICABLE, detail="need |f|_h <= C for both metrics")
    ratio = h1.norms() / h2.norms()
    lo, hi = a ** (2 * r) * (c + 1) ** (-4 * r), a ** (-2 * r) * (c + 1) ** (4 * r)
    slack = 1 + 1e-10
    ok = np.all(ratio <= hi * slack) and np.all(ratio * slack >= lo)
    worst = float(max(np.max(ratio / hi), np.max(lo / ratio)))
    return BoundReport(Applicability.HOLDS if ok else Applicability.VIOLATED, worst, 1.0)


@dataclass(frozen=True)
class AuditResult:
    cases: int
    applicable: int
    violations: int


def random_fiber(rng: np.random.Generator, r_max: int = 6) -> CyclicFiber:
    r = int(rng.integers(2, r_max + 1))
    mod = float(np.exp(rng.uniform(-1.5, 1.5)))
    return CyclicFiber(r, mod * np.exp(1j * rng.uniform(0, 2 * np.pi)))


def random_metric(rng: np.random.Generator, fiber: CyclicFiber, spread: float) -> GInvariantMetric:
    """Canonical metric perturbed by a log-normal diagonal factor."""
    base = canonical_metric(fiber).diag
    return GInvariantMetric.normalized(base * np.exp(rng.normal(0, spread, fiber.r)))


def audit(cases: int, seed: int, r_max: int = 6, norm: str = "spectral") -> dict[str, AuditResult]:
    """Randomised check of all fibre inequalities; violations indicate bugs."""
    rng = np.random.default_rng(seed)
    tallies = {k: [0, 0] for k in ("eps_orthogonality", "norm_bounds", "ratio_bound")}
    for _ in range(cases):
        fib = random_fiber(rng, r_max)
        h = random_metric(rng, fib, float(10 ** rng.uniform(-4, -0.5)))
        eps = orthogonality_defect(h, fib) * (1 + rng.uniform(0, 0.5))
        delta = min(0.999, (fib.r - 1) * eps + rng.uniform(0, 1) * (1 - (fib.r - 1) * eps)) \
            if (fib.r - 1) * eps < 1 else 0.5
        reports = {"eps_orthogonality": check_eps_orthogonality(h, fib, eps, delta)}
        h2 = random_metric(rng, fib, float(10 ** rng.uniform(-2, 0.3)))
        c = max(operator_norm(h, fib, norm), operator_norm(h2, fib, norm),
                np.sqrt(fib.r) * abs(fib.alpha)) * (1 + rng.uniform(0, 0.3))
        reports["norm_bounds"] = check_norm_bounds(h2, fib, c, norm)
        reports["ratio_bound"] = check_ratio_bound(h, h2, fib, c, norm)
        for k, rep in reports.items():
            if rep.status != Applicability.NOT_APPLICABLE:
                tallies[k][0] += 1
            if rep.status == Applicability.VIOLATED:
                tallies[k][1] += 1
    return {k: AuditResult(cases, v[0], v[1]) for k, v in tallies.items()}
