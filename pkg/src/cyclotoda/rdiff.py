"""Exponential-monomial sums and holomorphic r-differentials near a puncture.

A differential is stored as a finite sum of terms ``f(z) * exp(g(z))`` times
``(dz)^r`` or ``(dz/z)^r``, where ``f`` and ``g`` are finite sums of rational
powers of ``z`` with complex coefficients.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np

_EXP_SATURATION = 700.0


class Puncture(str, Enum):
    ZERO = "zero"
    INFINITY = "infinity"


class Frame(str, Enum):
    DZ = "dz"
    DZ_OVER_Z = "dz_over_z"


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**9)
    return Fraction(x)


@dataclass(frozen=True)
class ExpMonomialSum:
    """Finite sum ``sum_k c_k z^{e_k}`` with rational exponents.

    Terms are kept sorted by decreasing exponent, with equal exponents merged
    and zero coefficients dropped.
    """

    terms: tuple[tuple[Fraction, complex], ...] = ()

    def __post_init__(self):
        acc: dict[Fraction, complex] = {}
        for e, c in self.terms:
            e = _frac(e)
            acc[e] = acc.get(e, 0j) + complex(c)
        clean = tuple(sorted(((e, c) for e, c in acc.items() if c != 0),
                             key=lambda t: t[0], reverse=True))
        object.__setattr__(self, "terms", clean)

    @classmethod
    def monomial(cls, coef, exponent) -> "ExpMonomialSum":
        return cls(((_frac(exponent), complex(coef)),))

    @classmethod
    def zero(cls) -> "ExpMonomialSum":
        return cls(())

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def exponents(self) -> tuple[Fraction, ...]:
        return tuple(e for e, _ in self.terms)

    def lowest(self) -> tuple[Fraction, complex]:
        """Term with the smallest exponent (dominant as z -> 0)."""
        if not self.terms:
            raise ValueError("empty sum has no lowest term")
        return self.terms[-1]

    def highest(self) -> tuple[Fraction, complex]:
        if not self.terms:
            raise ValueError("empty sum has no highest term")
        return self.terms[0]

    def is_integral(self) -> bool:
        return all(e.denominator == 1 for e in self.exponents)

    def __add__(self, other: "ExpMonomialSum") -> "ExpMonomialSum":
        return ExpMonomialSum(self.terms + other.terms)

    def __neg__(self) -> "ExpMonomialSum":
        return ExpMonomialSum(tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other: "ExpMonomialSum") -> "ExpMonomialSum":
        return self + (-other)

    def scale(self, factor: complex) -> "ExpMonomialSum":
        return ExpMonomialSum(tuple((e, c * factor) for e, c in self.terms))

    def shift(self, k) -> "ExpMonomialSum":
        """Multiply by ``z^k``."""
        k = _frac(k)
        return ExpMonomialSum(tuple((e + k, c) for e, c in self.terms))

    def invert(self) -> "ExpMonomialSum":
        """Substitute ``z -> 1/w``, i.e. negate every exponent."""
        return ExpMonomialSum(tuple((-e, c) for e, c in self.terms))

    def evaluate(self, z, log_z=None):
        """Evaluate on scalars or arrays using the principal branch.

        ``log_z`` may be supplied to select another branch of ``log z``.
        """
        z = np.asarray(z, dtype=complex)
        if log_z is None:
            with np.errstate(divide="ignore"):
                log_z = np.log(z)
        out = np.zeros(np.shape(z), dtype=complex)
        for e, c in self.terms:
            if e.denominator == 1:
                out = out + c * z ** int(e)
            else:
                out = out + c * np.exp(float(e) * log_z)
        return out if out.shape else complex(out)

    def __eq__(self, other):
        if not isinstance(other, ExpMonomialSum):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({c:g})z^{e}" for e, c in self.terms)


@dataclass(frozen=True)
class Term:
    """One summand ``poly(z) * exp(exp_arg(z))``."""

    poly: ExpMonomialSum
    exp_arg: ExpMonomialSum = field(default_factory=ExpMonomialSum.zero)


class Evaluation(NamedTuple):
    value: complex | np.ndarray
    saturated: bool | np.ndarray


@dataclass(frozen=True)
class RDifferential:
    """Holomorphic r-differential ``sum_k f_k exp(g_k) (frame)^r`` at a puncture.

    ``preset`` marks differentials that carry hand-supplied growth data
    (``"airy"``), whose terms are informational only.
    """

    rank: int
    puncture: Puncture
    frame: Frame
    terms: tuple[Term, ...]
    preset: str | None = None

    def __post_init__(self):
        if self.rank < 2:
            raise ValueError("rank must be at least 2")
        object.__setattr__(self, "puncture", Puncture(self.puncture))
        object.__setattr__(self, "frame", Frame(self.frame))
        if self.preset is None and not any(not t.poly.is_zero() for t in self.terms):
            raise ValueError("differential is identically zero")
        for t in self.terms:
            for e in t.exp_arg.exponents:
                if e == 0:
                    raise ValueError("exponential arguments must not contain constants")
                if (e > 0) != (self.puncture == Puncture.INFINITY):
                    raise ValueError("exponential argument must grow towards the puncture")

    def merged_terms(self) -> tuple[Term, ...]:
        """Group summands by exponent argument and drop cancelled groups."""
        groups: dict[ExpMonomialSum, ExpMonomialSum] = {}
        for t in self.terms:
            groups[t.exp_arg] = groups.get(t.exp_arg, ExpMonomialSum.zero()) + t.poly
        return tuple(Term(p, g) for g, p in groups.items() if not p.is_zero())

    def is_meromorphic(self) -> bool:
        return all(t.exp_arg.is_zero() for t in self.merged_terms())

    def evaluate_flagged(self, z) -> Evaluation:
        """Coefficient in the stored frame, with a flag where ``exp`` saturates."""
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_z = np.log(z)
        total = np.zeros(np.shape(z), dtype=complex)
        sat = np.zeros(np.shape(z), dtype=bool)
        for t in self.terms:
            g = t.exp_arg.evaluate(z, log_z) if not t.exp_arg.is_zero() else np.zeros_like(total)
            g = np.asarray(g, dtype=complex)
            over = g.real > _EXP_SATURATION
            sat |= over
            with np.errstate(over="ignore", invalid="ignore"):
                total = total + np.asarray(t.poly.evaluate(z, log_z)) * np.exp(np.where(over, 0.0, g))
        total = np.where(sat, np.inf + 0j, total)
        sat |= ~np.isfinite(total)
        if total.shape:
            return Evaluation(total, sat)
        return Evaluation(complex(total), bool(sat))

    def evaluate(self, z):
        return self.evaluate_flagged(z).value


def convert_frame(q: RDifferential, frame: Frame | str) -> RDifferential:
    """Rewrite ``q`` in the requested frame, using ``(dz)^r = z^r (dz/z)^r``."""
    frame = Frame(frame)
    if frame == q.frame:
        return q
    k = q.rank if frame == Frame.DZ_OVER_Z else -q.rank
    terms = tuple(Term(t.poly.shift(k), t.exp_arg) for t in q.terms)
    return RDifferential(q.rank, q.puncture, frame, terms, q.preset)


def invert_chart(q: RDifferential) -> RDifferential:
    """Re-express ``q`` in the coordinate ``w = 1/z`` and swap the puncture.

    In the ``dz`` frame, ``(dz)^r = (-1)^r w^{-2r} (dw)^r``; in the ``dz/z``
    frame only the sign ``(-1)^r`` appears.
    """
    sign = (-1) ** q.rank
    extra = -2 * q.rank if q.frame == Frame.DZ else 0
    terms = tuple(Term(t.poly.invert().shift(extra).scale(sign), t.exp_arg.invert())
                  for t in q.terms)
    other = Puncture.ZERO if q.puncture == Puncture.INFINITY else Puncture.INFINITY
    return RDifferential(q.rank, other, q.frame, terms, q.preset)


def to_zero_chart(q: RDifferential) -> RDifferential:
    return invert_chart(q) if q.puncture == Puncture.INFINITY else q


@dataclass(frozen=True)
class Meromorphic:
    """``q = (alpha0 z^m + higher) (dz/z)^r`` in the chart centred at the puncture."""

    m: int
    alpha0: complex


@dataclass(frozen=True)
class Essential:
    """Wild singularity; growth data are computed by :mod:`cyclotoda.growthorder`."""

    q: RDifferential


def local_form(q: RDifferential) -> Meromorphic | Essential:
    """Normal form at the puncture in the chart where the puncture sits at 0."""
    if q.preset is not None:
        return Essential(q)
    q0 = convert_frame(to_zero_chart(q), Frame.DZ_OVER_Z)
    if not q0.is_meromorphic():
        return Essential(q)
    poly = ExpMonomialSum.zero()
    for t in q0.merged_terms():
        poly = poly + t.poly
    if poly.is_zero():
        raise ValueError("differential is identically zero")
    if not poly.is_integral():
        raise ValueError("meromorphic differential must have integer exponents")
    m, a0 = poly.lowest()
    return Meromorphic(int(m), a0)


# ---------------------------------------------------------------- JSON codec

def _sum_from_json(rows: Iterable[Sequence]) -> ExpMonomialSum:
    terms = []
    for row in rows:
        num, den, re, im = row
        terms.append((Fraction(int(num), int(den)), complex(float(re), float(im))))
    return ExpMonomialSum(tuple(terms))


def _sum_to_json(s: ExpMonomialSum) -> list:
    return [[e.numerator, e.denominator, c.real, c.imag] for e, c in s.terms]


def from_dict(d: dict) -> RDifferential:
    if d.get("preset") == "airy":
        from .growthorder import airy_differential
        return airy_differential()
    try:
        terms = tuple(Term(_sum_from_json(t["poly"]), _sum_from_json(t.get("exp_arg", [])))
                      for t in d["terms"])
        return RDifferential(int(d["rank"]), Puncture(d.get("puncture", "zero")),
                             Frame(d.get("frame", "dz")), terms, None)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed differential: {exc}") from exc


def to_dict(q: RDifferential) -> dict:
    d = {"rank": q.rank, "puncture": q.puncture.value, "frame": q.frame.value,
         "terms": [{"poly": _sum_to_json(t.poly), "exp_arg": _sum_to_json(t.exp_arg)}
                   for t in q.terms]}
    if q.preset:
        d["preset"] = q.preset
    return d


def load(path) -> RDifferential:
    with open(path) as fh:
        return from_dict(json.load(fh))


def monomial_differential(rank: int, coef: complex, power, frame=Frame.DZ_OVER_Z,
                          puncture=Puncture.ZERO) -> RDifferential:
    """``coef * z^power (frame)^rank`` with no exponential factor."""
    return RDifferential(rank, puncture, frame, (Term(ExpMonomialSum.monomial(coef, power)),))


def exponential_differential(rank: int, exp_arg: ExpMonomialSum, poly: ExpMonomialSum | None = None,
                             frame=Frame.DZ, puncture=Puncture.INFINITY) -> RDifferential:
    """``poly * exp(exp_arg) (frame)^rank``; ``poly`` defaults to 1."""
    poly = poly if poly is not None else ExpMonomialSum.monomial(1.0, 0)
    return RDifferential(rank, puncture, frame, (Term(poly, exp_arg),))
