"""Directional growth orders of exponential factors near a puncture.

Everything is computed in the chart where the puncture sits at ``w = 0``.
An exponent ``A = alpha w^{-rho} + (lower order)`` grows along direction
``theta`` exactly when ``Re(alpha e^{-i rho theta}) > 0``.  Directions are
exact rational multiples of pi whenever the coefficients allow it, and are
otherwise carried at 50 significant digits so that structural zeros of
``cos`` are recognised as zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Sequence

import mpmath

from .rdiff import (ExpMonomialSum, Frame, Meromorphic, Puncture, RDifferential, Term,
                    convert_frame, local_form, to_zero_chart)

_MP_DPS = 50
_FLOAT_BAND = 1e-12
_MP_ZERO = mpmath.mpf(10) ** (-35)

mpmath.mp.dps = max(mpmath.mp.dps, _MP_DPS)


# -------------------------------------------------------------------- angles

def _exact_arg(c: complex) -> Fraction | None:
    """``arg(c)/pi`` as a fraction when it is one of the obvious exact values."""
    re, im = c.real, c.imag
    if im == 0:
        return Fraction(0) if re > 0 else Fraction(1)
    if re == 0:
        return Fraction(1, 2) if im > 0 else Fraction(-1, 2)
    if abs(re) == abs(im):
        base = Fraction(1, 4) if re > 0 else Fraction(3, 4)
        return base if im > 0 else -base
    return None


def _mp_arg(c: complex):
    return mpmath.atan2(mpmath.mpf(c.imag), mpmath.mpf(c.real))


@total_ordering
@dataclass(frozen=True, eq=False)
class Angle:
    """A direction, exact as ``pi_multiple * pi`` when ``pi_multiple`` is set."""

    pi_multiple: Fraction | None
    hp: mpmath.mpf

    @classmethod
    def exact(cls, frac) -> "Angle":
        frac = Fraction(frac)
        return cls(frac, mpmath.mpf(frac.numerator) / frac.denominator * mpmath.pi)

    @classmethod
    def numeric(cls, value) -> "Angle":
        return cls(None, mpmath.mpf(value))

    @property
    def value(self) -> float:
        return float(self.hp)

    def __add__(self, other: "Angle") -> "Angle":
        if self.pi_multiple is not None and other.pi_multiple is not None:
            return Angle.exact(self.pi_multiple + other.pi_multiple)
        return Angle.numeric(self.hp + other.hp)

    def __sub__(self, other: "Angle") -> "Angle":
        return self + (-other)

    def __neg__(self) -> "Angle":
        if self.pi_multiple is not None:
            return Angle.exact(-self.pi_multiple)
        return Angle.numeric(-self.hp)

    def half(self) -> "Angle":
        if self.pi_multiple is not None:
            return Angle.exact(self.pi_multiple / 2)
        return Angle.numeric(self.hp / 2)

    def _key_cmp(self, other: "Angle") -> int:
        if self.pi_multiple is not None and other.pi_multiple is not None:
            d = self.pi_multiple - other.pi_multiple
            return (d > 0) - (d < 0)
        d = self.hp - other.hp
        if abs(d) < _MP_ZERO:
            return 0
        return 1 if d > 0 else -1

    def __eq__(self, other):
        return isinstance(other, Angle) and self._key_cmp(other) == 0

    def __lt__(self, other):
        return self._key_cmp(other) < 0

    def __hash__(self):
        return hash(round(float(self.hp), 9))

    def to_dict(self) -> dict:
        pm = None if self.pi_multiple is None else str(self.pi_multiple)
        return {"pi_multiple": pm, "value": self.value}

    def __repr__(self) -> str:
        if self.pi_multiple is not None:
            return f"Angle({self.pi_multiple}*pi)"
        return f"Angle({self.value:.15g})"


def reduce_angle(theta: Angle, lo: Angle) -> Angle:
    """Representative of ``theta`` modulo ``2 pi`` in ``[lo, lo + 2 pi)``."""
    if theta.pi_multiple is not None and lo.pi_multiple is not None:
        f = theta.pi_multiple
        span = f - lo.pi_multiple
        k = math.floor(span / 2)
        return Angle.exact(f - 2 * k)
    two_pi = 2 * mpmath.pi
    k = mpmath.floor((theta.hp - lo.hp) / two_pi)
    v = theta.hp - k * two_pi
    if theta.pi_multiple is not None:
        return Angle.exact(theta.pi_multiple - 2 * int(k))
    return Angle.numeric(v)


def principal_angle(theta: Angle) -> Angle:
    """Representative of ``theta`` modulo ``2 pi`` in ``(-pi, pi]``."""
    t = reduce_angle(theta, Angle.exact(-1))
    return t + Angle.exact(2) if t == Angle.exact(-1) else t


# ------------------------------------------------------------- sign calculus

def top_term(a: ExpMonomialSum) -> tuple[Fraction, complex]:
    """``(rho, alpha)`` with ``alpha w^{-rho}`` the most singular term."""
    e, c = a.lowest()
    if e >= 0:
        raise ValueError("exponent must be a pole at the puncture")
    return -e, c


def _cos_sign(rho: Fraction, alpha: complex, theta: Angle, orientation: int = -1) -> int:
    """Sign of ``Re(alpha e^{i orientation rho theta})``."""
    phi = _exact_arg(alpha)
    if phi is not None and theta.pi_multiple is not None:
        psi = (phi + orientation * rho * theta.pi_multiple) % 2
        if psi == Fraction(1, 2) or psi == Fraction(3, 2):
            return 0
        return 1 if (psi < Fraction(1, 2) or psi > Fraction(3, 2)) else -1
    approx = math.cos(math.atan2(alpha.imag, alpha.real)
                      + orientation * float(rho) * theta.value)
    if abs(approx) > _FLOAT_BAND:
        return 1 if approx > 0 else -1
    rho_mp = mpmath.mpf(rho.numerator) / rho.denominator
    val = mpmath.cos(_mp_arg(alpha) + orientation * rho_mp * theta.hp)
    if abs(val) < _MP_ZERO:
        return 0
    return 1 if val > 0 else -1


def leading_sign(a: ExpMonomialSum, theta: Angle) -> int:
    """Sign of ``Re(alpha e^{-i rho theta})`` for the top term of ``a``."""
    if a.is_zero():
        raise ValueError("leading sign of zero is undefined")
    rho, alpha = top_term(a)
    return _cos_sign(rho, alpha, theta)


class Order(str, Enum):
    LESS = "less"
    GREATER = "greater"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


def compare(a: ExpMonomialSum, b: ExpMonomialSum, theta: Angle) -> Order:
    """Growth order of ``exp(a)`` against ``exp(b)`` along ``theta``."""
    if a == b:
        return Order.EQUAL
    s = leading_sign(b - a, theta)
    if s > 0:
        return Order.LESS
    if s < 0:
        return Order.GREATER
    return Order.INCOMPARABLE


# ------------------------------------------------------------ growth data

@dataclass(frozen=True)
class GrowthTerm:
    exp_arg: ExpMonomialSum
    a: Fraction
    j: int = 0


@dataclass(frozen=True)
class Sector:
    """Open direction range ``(lo, hi)``; a full circle when ``periodic``."""

    lo: Angle
    hi: Angle
    terms: tuple[GrowthTerm, ...]
    periodic: bool = False

    @property
    def branch_base(self) -> Angle:
        return self.lo


@dataclass(frozen=True)
class SectorialGrowthData:
    """Growth terms per sector in the chart centred at the puncture.

    ``orientation`` records how directions are reported to the caller: ``-1``
    when the puncture is at the origin of the user's coordinate and ``+1``
    when it is at infinity (directions are then negated on output).
    """

    sectors: tuple[Sector, ...]
    orientation: int = -1


class DirectionKind(str, Enum):
    SIMPLY_POSITIVE = "simply_positive"
    SIMPLY_NEGATIVE = "simply_negative"
    NEUTRAL = "neutral"
    TURNING = "turning"
    NON_SINGLE = "non_single"


@dataclass(frozen=True)
class DirectionClass:
    theta: Angle
    kind: DirectionKind
    dominant: ExpMonomialSum | None = None


def airy_differential() -> RDifferential:
    """Preset: ``z^{-1/4} exp(-(2/3) z^{3/2}) (dz)^2`` near infinity."""
    term = Term(ExpMonomialSum.monomial(1.0, Fraction(-1, 4)),
                ExpMonomialSum.monomial(-2.0 / 3.0, Fraction(3, 2)))
    return RDifferential(2, Puncture.INFINITY, Frame.DZ, (term,), preset="airy")


def growth_data(q: RDifferential, branch_base: Angle | None = None) -> SectorialGrowthData:
    """Group the summands of ``q`` by exponent and build the sector list.

    Integral exponents give one periodic sector.  Otherwise a single sector
    ``(base, base + 2 pi)`` is used with ``log w`` continued from ``base``.
    """
    orientation = 1 if q.puncture == Puncture.INFINITY else -1
    q0 = to_zero_chart(q)
    groups = q0.merged_terms()
    terms = tuple(GrowthTerm(t.exp_arg, t.poly.lowest()[0]) for t in groups)
    if not terms:
        raise ValueError("differential is identically zero")
    integral = all(t.exp_arg.is_integral() for t in groups)
    if branch_base is None and integral:
        sec = Sector(Angle.exact(0), Angle.exact(2), terms, periodic=True)
    else:
        base = branch_base if branch_base is not None else Angle.exact(-1)
        sec = Sector(base, base + Angle.exact(2), terms, periodic=False)
    return SectorialGrowthData((sec,), orientation)


def _sector_for(data: SectorialGrowthData, theta: Angle) -> tuple[Sector, Angle]:
    for sec in data.sectors:
        if sec.periodic:
            return sec, reduce_angle(theta, sec.lo)
        if sec.lo <= theta <= sec.hi:
            return sec, theta
    raise ValueError(f"direction {theta} is outside the analysed sectors")


def _maximal(exps: Sequence[ExpMonomialSum], theta: Angle) -> list[ExpMonomialSum]:
    out = []
    for x in exps:
        if not any(compare(x, y, theta) == Order.LESS for y in exps if y != x):
            out.append(x)
    return out


def classify_direction(data: SectorialGrowthData, theta: Angle) -> DirectionClass:
    """Kind of the direction ``theta`` (in the puncture-centred chart)."""
    sec, th = _sector_for(data, theta)
    exps = [t.exp_arg for t in sec.terms]
    top = _maximal(exps, th)
    if len(top) != 1:
        return DirectionClass(theta, DirectionKind.NON_SINGLE)
    m = top[0]
    if m.is_zero():
        return DirectionClass(theta, DirectionKind.NEUTRAL, m)
    s = leading_sign(m, th)
    kind = {1: DirectionKind.SIMPLY_POSITIVE, -1: DirectionKind.SIMPLY_NEGATIVE,
            0: DirectionKind.TURNING}[s]
    return DirectionClass(theta, kind, m)


def _zero_directions(rho: Fraction, alpha: complex, sec: Sector) -> list[Angle]:
    """All ``theta`` in the sector with ``Re(alpha e^{-i rho theta}) = 0``."""
    phi = _exact_arg(alpha)
    out = []
    # rho*theta = phi - 1/2 - k  (units of pi)
    if sec.lo.pi_multiple is not None and sec.hi.pi_multiple is not None and phi is not None:
        lo, hi = sec.lo.pi_multiple, sec.hi.pi_multiple
        kmin = math.floor(phi - Fraction(1, 2) - rho * hi) - 1
        kmax = math.ceil(phi - Fraction(1, 2) - rho * lo) + 1
        for k in range(kmin, kmax + 1):
            t = (phi - Fraction(1, 2) - k) / rho
            if (lo <= t < hi) if sec.periodic else (lo < t < hi):
                out.append(Angle.exact(t))
        return out
    rho_mp = mpmath.mpf(rho.numerator) / rho.denominator
    phi_mp = _mp_arg(alpha)
    lo, hi = sec.lo.hp, sec.hi.hp
    kmin = int(mpmath.floor((phi_mp - mpmath.pi / 2 - rho_mp * hi) / mpmath.pi)) - 1
    kmax = int(mpmath.ceil((phi_mp - mpmath.pi / 2 - rho_mp * lo) / mpmath.pi)) + 1
    for k in range(kmin, kmax + 1):
        t = Angle.numeric((phi_mp - mpmath.pi / 2 - k * mpmath.pi) / rho_mp)
        if (sec.lo <= t < sec.hi) if sec.periodic else (sec.lo < t < sec.hi):
            out.append(t)
    return out


def _candidate_points(sec: Sector) -> list[Angle]:
    exps = [t.exp_arg for t in sec.terms]
    tops = []
    for i, x in enumerate(exps):
        if not x.is_zero():
            tops.append(top_term(x))
        for y in exps[i + 1:]:
            tops.append(top_term(y - x))
    pts: list[Angle] = []
    for rho, alpha in set(tops):
        for t in _zero_directions(rho, alpha, sec):
            if t not in pts:
                pts.append(t)
    return sorted(pts)


def _turning_in_sector(data: SectorialGrowthData, sec: Sector) -> list[Angle]:
    kinds = (DirectionKind.TURNING, DirectionKind.NON_SINGLE)
    pts = [t for t in _candidate_points(sec)
           if classify_direction(SectorialGrowthData((sec,), data.orientation), t).kind in kinds]
    if not sec.periodic:
        pts = [sec.lo] + pts + [sec.hi]
    return pts


def turning_set(data: SectorialGrowthData) -> list[Angle]:
    """Sorted directions that are turning or have no single growth order."""
    out: list[Angle] = []
    for sec in data.sectors:
        for t in _turning_in_sector(data, sec):
            if t not in out:
                out.append(t)
    return sorted(out)


@dataclass(frozen=True)
class NegativeInterval:
    lo: Angle
    hi: Angle
    leading: tuple[tuple[Fraction, complex], ...]

    @property
    def length(self) -> Angle:
        return self.hi - self.lo


@dataclass(frozen=True)
class SpecialInterval:
    """Special interval in user directions, ``theta1 < theta < theta1 + pi/rho``.

    ``orientation`` is ``-1`` for a puncture at the origin, where
    ``Re(alpha e^{-i rho theta}) < 0`` inside, and ``+1`` at infinity, where
    ``Re(alpha e^{+i rho theta}) < 0`` inside.
    """

    theta1: Angle
    rho: Fraction
    alpha: complex
    orientation: int = -1

    @property
    def theta2(self) -> Angle:
        return self.theta1 + Angle.exact(Fraction(1) / self.rho)

    @property
    def center(self) -> Angle:
        return self.theta1 + Angle.exact(Fraction(1, 2) / self.rho)

    def sign_at(self, theta: Angle) -> int:
        return _cos_sign(self.rho, self.alpha, theta, self.orientation)

    def check(self) -> bool:
        """Re-verify both defining properties independently."""
        inner = [self.theta1 + Angle.exact(Fraction(k, 8) / self.rho) for k in range(1, 8)]
        return (self.sign_at(self.theta1) == 0 and self.sign_at(self.theta2) == 0
                and all(self.sign_at(t) < 0 for t in inner))

    def to_dict(self) -> dict:
        return {"theta1": self.theta1.to_dict(), "theta2": self.theta2.to_dict(),
                "rho": str(self.rho), "alpha": {"re": self.alpha.real, "im": self.alpha.imag}}


def negative_intervals(data: SectorialGrowthData) -> list[NegativeInterval]:
    """Maximal direction intervals (puncture chart) on which growth is negative."""
    out = []
    for sec in data.sectors:
        pts = _turning_in_sector(data, sec)
        if sec.periodic:
            if not pts:
                continue
            bounds = list(zip(pts, pts[1:] + [pts[0] + Angle.exact(2)]))
        else:
            bounds = list(zip(pts[:-1], pts[1:]))
        sub = SectorialGrowthData((sec,), data.orientation)
        comps = []
        for lo, hi in bounds:
            mid = lo + (hi - lo).half()
            c = classify_direction(sub, mid)
            neg = c.kind == DirectionKind.SIMPLY_NEGATIVE
            comps.append((lo, hi, neg, top_term(c.dominant) if neg else None))
        runs: list[list] = []
        for comp in comps:
            if comp[2] and runs and runs[-1][-1][2] and runs[-1][-1][1] == comp[0]:
                runs[-1].append(comp)
            elif comp[2]:
                runs.append([comp])
        if sec.periodic and len(runs) > 1 and comps[0][2] and comps[-1][2]:
            first = runs.pop(0)
            runs[-1].extend(first)
        for run in runs:
            lo, hi = run[0][0], run[-1][1]
            if hi < lo or (sec.periodic and hi == lo):
                hi = hi + Angle.exact(2)
            lead = tuple(dict.fromkeys(c[3] for c in run))
            out.append(NegativeInterval(lo, hi, lead))
    return out


def _is_special(iv: NegativeInterval) -> bool:
    if len(iv.leading) != 1:
        return False
    rho = iv.leading[0][0]
    return iv.length == Angle.exact(Fraction(1) / rho)


def special_intervals(data: SectorialGrowthData) -> list[SpecialInterval]:
    """Negative intervals of length exactly ``pi/rho`` with one leading term.

    Directions are reported in the user's coordinate: for a puncture at
    infinity the puncture-chart interval ``(lo, hi)`` becomes ``(-hi, -lo)``.
    When a candidate touches the edge of a non-periodic sector, the analysis is
    repeated with the branch of ``log`` re-based at the candidate's left end.
    """
    found: list[SpecialInterval] = []
    ivs = negative_intervals(data)
    sec0 = data.sectors[0]
    if not sec0.periodic:
        for iv in list(ivs):
            if iv.hi == sec0.hi and not _is_special(iv):
                moved = SectorialGrowthData((Sector(iv.lo, iv.lo + Angle.exact(2), sec0.terms),),
                                            data.orientation)
                for other in negative_intervals(moved):
                    if other.lo == iv.lo:
                        ivs = [x for x in ivs if x is not iv and x.lo != sec0.lo]
                        ivs.append(other)
    for iv in ivs:
        if not _is_special(iv):
            continue
        rho, alpha = iv.leading[0]
        lo = principal_angle(iv.lo if data.orientation < 0 else -iv.hi)
        found.append(SpecialInterval(lo, rho, alpha, data.orientation))
    return sorted(found, key=lambda s: s.theta1)


# ----------------------------------------------------------- moduli summary

class FactorKind(str, Enum):
    P_FACTOR = "P"
    P_QP_FACTOR = "P_QP"
    UNIQUE = "unique"


@dataclass(frozen=True)
class ModuliFactor:
    kind: FactorKind
    interval: SpecialInterval | None = None
    m: int | None = None

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind.value}
        if self.interval is not None:
            d["interval"] = self.interval.to_dict()
        if self.m is not None:
            d["m"] = self.m
        return d


@dataclass(frozen=True)
class ModuliDescriptor:
    factors: tuple[ModuliFactor, ...]

    @property
    def unique(self) -> bool:
        return len(self.factors) == 1 and self.factors[0].kind == FactorKind.UNIQUE

    def to_dict(self) -> dict:
        return {"unique": self.unique, "factors": [f.to_dict() for f in self.factors]}


def _check_open_ties(data: SectorialGrowthData) -> None:
    """Reject data whose directions fail to have a single order on an open set."""
    for sec in data.sectors:
        pts = _candidate_points(sec)
        probes = ([sec.lo + Angle.exact(Fraction(k, 7)) for k in range(14)] if not pts
                  else [a + (b - a).half() for a, b in zip(pts, pts[1:])])
        if not sec.periodic:
            probes = [p for p in probes if sec.lo < p < sec.hi]
        sub = SectorialGrowthData((sec,), data.orientation)
        for p in probes:
            if classify_direction(sub, p).kind == DirectionKind.NON_SINGLE:
                raise ValueError("growth data tie on an open set of directions")


def classify_moduli(q: RDifferential) -> ModuliDescriptor:
    """Which parameters label the harmonic metrics of ``q`` near its puncture."""
    lf = local_form(q)
    if isinstance(lf, Meromorphic):
        if lf.m <= 0:
            return ModuliDescriptor((ModuliFactor(FactorKind.UNIQUE),))
        return ModuliDescriptor((ModuliFactor(FactorKind.P_QP_FACTOR, m=lf.m),))
    data = growth_data(q)
    _check_open_ties(data)
    ivs = special_intervals(data)
    if not ivs:
        return ModuliDescriptor((ModuliFactor(FactorKind.UNIQUE),))
    return ModuliDescriptor(tuple(ModuliFactor(FactorKind.P_FACTOR, interval=iv) for iv in ivs))


@dataclass(frozen=True)
class RefinedExponents:
    ell: int
    m: int
    d: Fraction
    directions: tuple[Angle, ...]


def refined_exponents(q: RDifferential) -> RefinedExponents:
    """Exponents of ``q = z^ell exp(alpha z^{-m} + ...) (dz/z)^r`` at the origin.

    ``directions`` are the solutions in ``[0, 2 pi)`` of
    ``-m theta + arg(alpha) = pi (mod 2 pi)``.
    """
    q0 = convert_frame(to_zero_chart(q), Frame.DZ_OVER_Z)
    groups = q0.merged_terms()
    if len(groups) != 1 or len(groups[0].poly.terms) != 1 or groups[0].exp_arg.is_zero():
        raise ValueError("unsupported form: expected a single monomial times one exponential")
    ell, _ = groups[0].poly.terms[0]
    rho, alpha = top_term(groups[0].exp_arg)
    if rho.denominator != 1 or ell.denominator != 1 or not groups[0].exp_arg.is_integral():
        raise ValueError("unsupported form: exponents must be integers")
    m = int(rho)
    d = Fraction(int(ell), m) + q.rank
    phi = _exact_arg(alpha)
    dirs = []
    for k in range(m):
        if phi is not None:
            th = reduce_angle(Angle.exact((phi - 1 - 2 * k) / m), Angle.exact(0))
        else:
            th = reduce_angle(Angle.numeric((_mp_arg(alpha) - mpmath.pi - 2 * k * mpmath.pi) / m),
                              Angle.exact(0))
        dirs.append(th)
    return RefinedExponents(int(ell), m, d, tuple(sorted(dirs)))
