"""Parabolic weight polytopes and integer log-correction vectors.

Two families of weights are handled.

* ``a``-vectors: ``a_1 >= ... >= a_r >= a_1 - 1`` with ``sum a = 0``.
* ``b``-vectors for a pole of order ``m``: ``b_1 >= ... >= b_r >= b_1 - m``
  with ``sum b = -r(r+1)/2``.

Both are instances of one cyclic pattern with period ``1`` (resp. ``m``).
The real variants add the symmetry ``x_i + x_{r+1-i} = const``.
Exact :class:`fractions.Fraction` entries are compared exactly, floats with
an absolute slack of ``1e-12``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

TOL = 1e-12


class PolytopeKind(str, Enum):
    P = "P"
    P_R = "P_R"
    P_QP = "P_QP"
    P_QP_R = "P_QP_R"


class Distinguished(str, Enum):
    COMPLETE = "complete"
    Q_DOMINATED = "q_dominated"


@dataclass(frozen=True)
class AVector:
    values: tuple

    @property
    def r(self) -> int:
        return len(self.values)

    @property
    def period(self):
        return 1

    @property
    def total(self):
        return 0

    def to_dict(self) -> dict:
        return {"kind": "a", "values": [float(v) for v in self.values]}


@dataclass(frozen=True)
class BVector:
    values: tuple
    m: int

    @property
    def r(self) -> int:
        return len(self.values)

    @property
    def period(self):
        return self.m

    @property
    def total(self):
        return Fraction(-self.r * (self.r + 1), 2)

    def to_dict(self) -> dict:
        return {"kind": "b", "m": self.m, "values": [float(v) for v in self.values]}


WeightVector = AVector | BVector


def _close(x, y, tol=TOL) -> bool:
    if isinstance(x, Fraction) and isinstance(y, Fraction):
        return x == y
    return abs(float(x) - float(y)) <= tol


def _geq(x, y, tol=TOL) -> bool:
    if isinstance(x, Fraction) and isinstance(y, Fraction):
        return x >= y
    return float(x) >= float(y) - tol


def _kind_params(kind: PolytopeKind, r: int, m: int | None):
    if kind in (PolytopeKind.P, PolytopeKind.P_R):
        return Fraction(1), Fraction(0)
    if m is None or m < 1:
        raise ValueError("pole weights need a positive pole order m")
    return Fraction(m), Fraction(-r * (r + 1), 2)


def is_member(values: Sequence, kind: PolytopeKind | str, m: int | None = None,
              tol: float = TOL) -> bool:
    """Check the defining inequalities of the chosen polytope."""
    kind = PolytopeKind(kind)
    r = len(values)
    period, total = _kind_params(kind, r, m)
    if r < 2:
        return False
    if not _close(sum(values), total, tol * r):
        return False
    if not all(_geq(values[i], values[i + 1], tol) for i in range(r - 1)):
        return False
    if not _geq(values[-1], values[0] - period, tol):
        return False
    if kind in (PolytopeKind.P_R, PolytopeKind.P_QP_R):
        pair = 2 * total / r
        if not all(_close(values[i] + values[r - 1 - i], pair, tol) for i in range(r)):
            return False
    return True


def _as_pattern(vec: WeightVector | Sequence, period=None):
    if isinstance(vec, (AVector, BVector)):
        return tuple(vec.values), vec.period
    if period is None:
        raise ValueError("raw sequences need an explicit period")
    return tuple(vec), period


def nu_indices(vec: WeightVector | Sequence, period=None, tol: float = TOL) -> tuple[int, ...]:
    """1-based positions ``i`` with a strict descent ``x_i > x_{i+1}``."""
    vals, _ = _as_pattern(vec, period)
    return tuple(i + 1 for i in range(len(vals) - 1) if not _close(vals[i], vals[i + 1], tol))


def has_wrap(vec: WeightVector | Sequence, period=None, tol: float = TOL) -> bool:
    vals, per = _as_pattern(vec, period)
    return _close(vals[-1], vals[0] - per, tol)


def blocks(vec: WeightVector | Sequence, period=None, tol: float = TOL) -> list[list[int]]:
    """Chains of 0-based indices linked by ties, in cyclic chain order."""
    vals, per = _as_pattern(vec, period)
    r = len(vals)
    cuts = [0] + list(nu_indices(vals, per, tol)) + [r]
    out = [list(range(a, b)) for a, b in zip(cuts, cuts[1:])]
    if has_wrap(vals, per, tol) and len(out) > 1:
        out = [out[-1] + out[0]] + out[1:-1]
    return out


def k_from_blocks(r: int, chains: Sequence[Sequence[int]]) -> tuple[int, ...]:
    k = [0] * r
    for chain in chains:
        s = len(chain)
        for t, i in enumerate(chain):
            k[i] = s - 1 - 2 * t
    return tuple(k)


def k_vector(vec: WeightVector | Sequence, period=None, tol: float = TOL) -> tuple[int, ...]:
    """Integer log-correction vector by the cyclic block rule."""
    vals, per = _as_pattern(vec, period)
    return k_from_blocks(len(vals), blocks(vals, per, tol))


def k_vector_printed(vec: WeightVector | Sequence, period=None, tol: float = TOL) -> tuple[int, ...]:
    """Closed formula ``nu_{j+1} - nu_j + 1 - 2(i - nu_j)`` for the non-wrap case.

    ``j(i)`` is the block containing ``i`` with ``nu_0 = 0``, ``nu_{l+1} = r``.
    """
    vals, per = _as_pattern(vec, period)
    r = len(vals)
    nu = (0,) + nu_indices(vals, per, tol) + (r,)
    out = []
    for i in range(1, r + 1):
        j = max(t for t in range(len(nu) - 1) if nu[t] < i)
        out.append(nu[j + 1] - nu[j] + 1 - 2 * (i - nu[j]))
    return tuple(out)


def residue_nilpotent(vec: WeightVector | Sequence, period=None, tol: float = TOL) -> np.ndarray:
    """Nilpotent part of the residue on the associated graded space.

    ``e_i -> e_{i+1}`` when ``x_i = x_{i+1}`` and ``e_r -> e_1`` when the wrap
    equality holds; all other basis vectors are killed.
    """
    vals, per = _as_pattern(vec, period)
    r = len(vals)
    n = np.zeros((r, r))
    for i in range(r - 1):
        if _close(vals[i], vals[i + 1], tol):
            n[i + 1, i] = 1.0
    if has_wrap(vals, per, tol):
        n[0, r - 1] = 1.0
    return n


def _rank(m: np.ndarray) -> int:
    if m.size == 0:
        return 0
    return int(np.linalg.matrix_rank(m, tol=1e-9))


def _kernel(m: np.ndarray) -> np.ndarray:
    u, s, vh = np.linalg.svd(m)
    rank = int((s > 1e-9).sum())
    return vh[rank:].conj().T


def weight_filtration(n: np.ndarray) -> dict[int, np.ndarray]:
    """Monodromy weight filtration ``W_k`` of a nilpotent matrix.

    Uses ``W_k = sum_{j >= max(0, -k)} N^j ker N^{k+2j+1}``; each entry is a
    matrix whose columns span ``W_k``.
    """
    r = n.shape[0]
    powers = [np.eye(r)]
    for _ in range(2 * r + 2):
        powers.append(powers[-1] @ n)
    out = {}
    for k in range(-r, r + 1):
        cols = []
        for j in range(max(0, -k), r + 1):
            e = k + 2 * j + 1
            if e < 0:
                continue
            ker = _kernel(powers[min(e, len(powers) - 1)])
            if ker.size:
                cols.append(powers[j] @ ker)
        out[k] = np.hstack(cols) if cols else np.zeros((r, 0))
    return out


def k_vector_oracle(vec: WeightVector | Sequence, period=None, tol: float = TOL) -> tuple[int, ...]:
    """Weights of the basis vectors under the residue's weight filtration."""
    vals, per = _as_pattern(vec, period)
    r = len(vals)
    filt = weight_filtration(residue_nilpotent(vals, per, tol))
    ks = []
    for i in range(r):
        e = np.zeros((r, 1))
        e[i] = 1.0
        for k in range(-r, r + 1):
            w = filt[k]
            if _rank(np.hstack([w, e])) == _rank(w):
                ks.append(k)
                break
        else:
            raise ArithmeticError("basis vector outside every filtration step")
    # the filtration must be split by the basis
    for k, w in filt.items():
        if _rank(w) != sum(1 for x in ks if x <= k):
            raise ArithmeticError("weight filtration is not split by the basis")
    return tuple(ks)


def convert_b_to_a(b: BVector) -> AVector:
    """``a_i = (b_i + (r+1)/2)/r`` for a pole of order ``m = r``."""
    if b.m != b.r:
        raise ValueError("conversion needs m = r")
    r = b.r
    shift = Fraction(r + 1, 2)
    return AVector(tuple((v + shift) / r if isinstance(v, Fraction) else (v + float(shift)) / r
                         for v in b.values))


def convert_a_to_b(a: AVector) -> BVector:
    r = a.r
    shift = Fraction(r + 1, 2)
    return BVector(tuple(r * v - shift if isinstance(v, Fraction) else r * v - float(shift)
                         for v in a.values), r)


def distinguished_weights(r: int, m: int, which: Distinguished | str) -> tuple[BVector, AVector]:
    """Weights of the complete solution and of the flat (q-dominated) solution."""
    which = Distinguished(which)
    if m < 1:
        raise ValueError("m must be positive")
    if which == Distinguished.COMPLETE:
        return (BVector(tuple(Fraction(-(r + 1), 2) for _ in range(r)), m),
                AVector(tuple(Fraction(0) for _ in range(r))))
    a = tuple(Fraction(r + 1 - 2 * i, 2 * r) for i in range(1, r + 1))
    b = tuple(m * ai - Fraction(r + 1, 2) for ai in a)
    return BVector(b, m), AVector(a)


def project_to_polytope(raw: Sequence[float], kind: PolytopeKind | str,
                        m: int | None = None) -> tuple[float, ...]:
    """Euclidean projection onto the polytope by active-set enumeration.

    Every subset of the ``r`` cyclic order constraints is tried as an active
    set; the equality-constrained projection that is feasible and has
    non-negative multipliers is the unique minimiser.
    """
    kind = PolytopeKind(kind)
    y = np.asarray(raw, dtype=float)
    r = y.size
    period, total = _kind_params(kind, r, m)
    # inequality rows g.x >= h:  x_i - x_{i+1} >= 0,  x_r - x_1 >= -period
    g = np.zeros((r, r))
    h = np.zeros(r)
    for i in range(r - 1):
        g[i, i], g[i, i + 1] = 1.0, -1.0
    g[r - 1, r - 1], g[r - 1, 0] = 1.0, -1.0
    h[r - 1] = -float(period)
    eq_rows = [np.ones(r)]
    eq_rhs = [float(total)]
    if kind in (PolytopeKind.P_R, PolytopeKind.P_QP_R):
        pair = 2 * float(total) / r
        for i in range(r // 2):
            row = np.zeros(r)
            row[i] += 1.0
            row[r - 1 - i] += 1.0
            eq_rows.append(row)
            eq_rhs.append(pair)
    a_eq, b_eq = np.array(eq_rows), np.array(eq_rhs)
    best = None
    for size in range(r + 1):
        for active in itertools.combinations(range(r), size):
            a = np.vstack([a_eq, g[list(active)]]) if active else a_eq
            b = np.concatenate([b_eq, h[list(active)]]) if active else b_eq
            # KKT: x = y + a^T lam,  a x = b
            gram = a @ a.T
            lam, *_ = np.linalg.lstsq(gram, b - a @ y, rcond=None)
            x = y + a.T @ lam
            if np.max(np.abs(a @ x - b)) > 1e-9:
                continue
            if np.any(g @ x - h < -1e-10):
                continue
            mult = lam[len(b_eq):]
            if np.any(mult < -1e-10):
                continue
            dist = float(np.sum((x - y) ** 2))
            if best is None or dist < best[0] - 1e-15:
                best = (dist, x)
        if best is not None:
            break
    if best is None:
        raise ArithmeticError("projection failed: empty polytope")
    return tuple(float(v) for v in best[1])


def sample_member(rng: np.random.Generator, r: int, kind: PolytopeKind | str,
                  m: int | None = None) -> tuple[float, ...]:
    """Random member: project a random vector onto the polytope."""
    kind = PolytopeKind(kind)
    period, total = _kind_params(kind, r, m)
    y = np.sort(rng.uniform(-float(period), float(period), r))[::-1] + float(total) / r
    return project_to_polytope(y, kind, m)
