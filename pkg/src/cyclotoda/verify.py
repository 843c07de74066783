"""Acceptance checks, grouped into suites for the ``verify`` command.

Each check returns a :class:`CriterionResult` with the measured numbers in
``detail`` so failures are diagnosable from the JSON report alone.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from . import cyclicfiber, expzeros
from .growthorder import (FactorKind, airy_differential, classify_moduli, growth_data,
                          special_intervals)
from .parabolic import (AVector, BVector, Distinguished, PolytopeKind, distinguished_weights,
                        has_wrap, k_vector, k_vector_oracle, k_vector_printed)
from .rdiff import (ExpMonomialSum, Frame, Puncture, RDifferential, Term,
                    exponential_differential, monomial_differential)
from .toda.boundary import boundary_from_model
from .toda.equations import log_tr_s
from .toda.grid import ChartGrid
from .toda.oracles import flat_solution, hyperbolic_oracle
from .toda.solver import exhaustion_solve, solve_dirichlet
from .weights import compare_weights, extract_pole_weights, extract_special_weights


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number:2d}: {self.name}"

    def to_dict(self, timing: bool = False) -> dict:
        d = {"number": self.number, "name": self.name, "pass": self.passed, "detail": self.detail}
        if timing:
            d["seconds"] = self.seconds
        return d


def _timed(number: int, name: str, fn: Callable[[], tuple[bool, dict]]) -> CriterionResult:
    t0 = time.perf_counter()
    ok, detail = fn()
    return CriterionResult(number, name, bool(ok), detail, time.perf_counter() - t0)


# ------------------------------------------------------------------ 1. hyperbolic

def _interior_error(state, exact) -> float:
    return float(np.max(np.abs(state.w - exact)[:, 1:-1]))


def check_hyperbolic(sizes=(128, 256), radii=(0.05, 0.5), max_seconds=30.0
                     ) -> CriterionResult:
    def run():
        rows, ok = [], True
        for a in (1.0, 0.5, 0.0):
            errs, secs = [], []
            for n in sizes:
                g = ChartGrid.log_polar(radii[0], radii[1], n, n)
                exact = hyperbolic_oracle(a, g).w
                st = solve_dirichlet(None, g, exact)
                errs.append(_interior_error(st, exact))
                secs.append(st.report.seconds)
            ratio = errs[0] / errs[1]
            good = errs[0] <= 1e-3 and 3 <= ratio <= 5 and max(secs) <= max_seconds
            ok &= good
            rows.append({"a": a, "errors": errs, "ratio": ratio, "pass": good,
                         "within_time": max(secs) <= max_seconds})
        return ok, {"cases": rows}
    return _timed(1, "hyperbolic oracle: error <= 1e-3, refinement ratio in [3,5]", run)


# ------------------------------------------------------------------ 2. flat

def check_flat(tol=1e-8) -> CriterionResult:
    def run():
        rows, ok = [], True
        coef = 1.7 * np.exp(0.3j)
        for r in (2, 3, 4):
            q = monomial_differential(r, coef, 0, frame=Frame.DZ, puncture=Puncture.INFINITY)
            for rect in ((-1.0, 2.0, 0.5, 1.5, 33, 17), (0.0, 0.3, -4.0, 4.0, 9, 65)):
                g = ChartGrid.cartesian(*rect)
                exact = flat_solution(q, g).w
                for start in ("harmonic", "zero"):
                    init = None if start == "harmonic" else np.zeros_like(exact)
                    st = solve_dirichlet(q, g, exact, initial=init)
                    err = float(np.max(np.abs(st.w - exact)))
                    ok &= err <= tol
                    rows.append({"r": r, "grid": list(rect), "start": start, "error": err})
        return ok, {"cases": rows, "tol": tol}
    return _timed(2, "flat-solution oracle within 1e-8", run)


# ------------------------------------------------------------------ 3. pole round trip

POLE_CASES: tuple[tuple[int, int, tuple], ...] = (
    (2, 1, (Fraction(-3, 2), Fraction(-3, 2))),
    (2, 1, (Fraction(-1), Fraction(-2))),
    (3, 2, (-1.3, -2.0, -2.7)),
)


def pole_round_trip(r: int, m: int, b: tuple, n_s: int = 128, n_theta: int = 32,
                    radii=(1e-3, 1e-1)) -> dict:
    q = monomial_differential(r, 1.0, m)
    g = ChartGrid.log_polar(radii[0], radii[1], n_s, n_theta)
    bv = BVector(tuple(b), m)
    t0 = time.perf_counter()
    st = solve_dirichlet(q, g, boundary_from_model(bv, q, g))
    fit = extract_pole_weights(st, m)
    secs = time.perf_counter() - t0
    k = k_vector(bv)
    cmp = compare_weights([float(v) for v in b], fit, tol_b=0.05, prescribed_k=k)
    return {"r": r, "m": m, "b": [float(v) for v in b], "b_hat": list(fit.values),
            "b_raw": list(fit.raw), "k": list(k), "k_hat": list(fit.k), "k_raw": list(fit.k_raw),
            "max_deviation": cmp.max_deviation, "ordering_violation": fit.ordering_violation,
            "pass": cmp.passed, "seconds": secs}


def check_pole_round_trip(max_seconds=120.0) -> CriterionResult:
    def run():
        rows = [pole_round_trip(*case) for case in POLE_CASES]
        ok = all(row["pass"] and row["seconds"] <= max_seconds for row in rows)
        for row in rows:
            row.pop("seconds")
        return ok, {"cases": rows}
    return _timed(3, "pole-weight round trip: b within 0.05, k exact", run)


# ------------------------------------------------------------------ 4. special interval

def strip_differential() -> RDifferential:
    return exponential_differential(2, ExpMonomialSum.monomial(1j, 1))


def special_round_trip(a: tuple, n_x: int = 17, n_y: int = 201, height: float = 20.0) -> dict:
    q = strip_differential()
    interval = special_intervals(growth_data(q))[0]
    g = ChartGrid.cartesian(-2.0, 2.0, 0.0, height, n_x, n_y)
    st = solve_dirichlet(q, g, boundary_from_model(AVector(tuple(a)), q, g, interval))
    fit = extract_special_weights(st, interval)
    cmp = compare_weights([float(v) for v in a], fit, tol_b=0.02)
    return {"a": [float(v) for v in a], "a_hat": list(fit.values), "a_raw": list(fit.raw),
            "k_hat": list(fit.k), "max_deviation": cmp.max_deviation,
            "residual_decay_rate": fit.residual_decay_rate, "pass": cmp.passed}


def check_special_round_trip() -> CriterionResult:
    def run():
        rows = [special_round_trip(a) for a in ((0, 0), (Fraction(1, 4), Fraction(-1, 4)))]
        return all(r["pass"] for r in rows), {"cases": rows}
    return _timed(4, "special-interval round trip: a within 0.02", run)


# ------------------------------------------------------------------ 5. classifier

def classifier_fixtures() -> list[tuple[str, RDifferential, Callable]]:
    e = ExpMonomialSum.monomial
    inf, dz = Puncture.INFINITY, Frame.DZ

    def p_interval(lo: Fraction, hi: Fraction):
        def ok(desc):
            if len(desc.factors) != 1 or desc.factors[0].kind != FactorKind.P_FACTOR:
                return False
            iv = desc.factors[0].interval
            return iv.theta1.pi_multiple == lo and iv.theta2.pi_multiple == hi
        return ok

    def unique(desc):
        return desc.unique

    def pole(m):
        return lambda desc: (len(desc.factors) == 1 and desc.factors[0].m == m
                             and desc.factors[0].kind == FactorKind.P_QP_FACTOR)

    cos_z = RDifferential(2, inf, dz, (Term(e(0.5, 0), e(1j, 1)), Term(e(0.5, 0), e(-1j, 1))))
    mixed = RDifferential(3, inf, dz, (Term(e(1.0, 0), e(1j, 1)), Term(e(2.0, 0), e(-1j, 1)),
                                       Term(e(1.0, 1), e(-1.0, 1))))
    cases = [("exp(iz) -> P on (0, pi)", strip_differential(), p_interval(Fraction(0), Fraction(1))),
             ("cos z -> unique", cos_z, unique),
             ("mixed-direction sum -> unique", mixed, unique),
             ("Airy -> P on (-pi/3, pi/3)", airy_differential(),
              p_interval(Fraction(-1, 3), Fraction(1, 3)))]
    for r in (2, 3):
        for m in (-2, -1, 0, 1, 2, 3):
            expect = unique if m <= 0 else pole(m)
            label = f"z^{m} (dz/z)^{r} -> " + ("unique" if m <= 0 else f"P(q,P), m={m}")
            cases.append((label, monomial_differential(r, 1.0, m), expect))
    return cases


def check_classifier() -> CriterionResult:
    def run():
        rows = []
        for label, q, expect in classifier_fixtures():
            desc = classify_moduli(q)
            rows.append({"case": label, "result": desc.to_dict(), "pass": bool(expect(desc))})
        return all(r["pass"] for r in rows), {"cases": rows}
    return _timed(5, "classifier fixtures", run)


# ------------------------------------------------------------------ 6. k-vector

def _lattice(lo: Fraction, hi: Fraction, max_den: int) -> list[Fraction]:
    vals = {Fraction(p, d) for d in range(1, max_den + 1)
            for p in range(math.floor(lo * d), math.ceil(hi * d) + 1)}
    return sorted((v for v in vals if lo <= v <= hi), reverse=True)


def rational_members(r: int, period: Fraction, total: Fraction, max_den: int = 4
                     ) -> Iterator[tuple[Fraction, ...]]:
    """All members of the polytope with entries of denominator at most ``max_den``."""
    centre = total / r
    lat = _lattice(centre - period, centre + period, max_den)

    def rec(prefix: list, rest: Fraction):
        k = len(prefix)
        if k == r:
            if rest == 0 and prefix[-1] >= prefix[0] - period:
                yield tuple(prefix)
            return
        for v in lat:
            if k and v > prefix[-1]:
                continue
            floor = (prefix[0] if k else v) - period
            if v < floor:
                break
            left = r - k - 1
            if rest - v > left * v or rest - v < left * floor:
                continue
            yield from rec(prefix + [v], rest - v)

    yield from rec([], total)


def enumerate_cases(r_max: int = 5, m_max: int = 6, max_den: int = 4):
    for r in range(2, r_max + 1):
        for vals in rational_members(r, Fraction(1), Fraction(0), max_den):
            yield AVector(vals)
        for m in range(1, m_max + 1):
            for vals in rational_members(r, Fraction(m), Fraction(-r * (r + 1), 2), max_den):
                yield BVector(vals, m)


def check_k_vectors(min_cases: int = 10_000) -> CriterionResult:
    def run():
        total = oracle_bad = nonwrap = printed_bad = 0
        examples = []
        for vec in enumerate_cases():
            total += 1
            k = k_vector(vec)
            if k != k_vector_oracle(vec):
                oracle_bad += 1
                if len(examples) < 5:
                    examples.append({"vector": [str(v) for v in vec.values], "k": list(k)})
            if not has_wrap(vec):
                nonwrap += 1
                printed_bad += k_vector_printed(vec) != k
        ok = total >= min_cases and oracle_bad == 0 and printed_bad == 0
        return ok, {"cases": total, "oracle_disagreements": oracle_bad, "non_wrap_cases": nonwrap,
                    "printed_disagreements": printed_bad, "examples": examples}
    return _timed(6, "k-vector block rule vs weight-filtration oracle", run)


# ------------------------------------------------------------------ 7. fibres

def check_fibers(cases: int = 10_000, seed: int = 0) -> CriterionResult:
    def run():
        res = cyclicfiber.audit(cases, seed, r_max=6)
        detail = {k: {"applicable": v.applicable, "violations": v.violations}
                  for k, v in res.items()}
        detail["cases"] = cases
        detail["seed"] = seed
        return all(v.violations == 0 for v in res.values()), detail
    return _timed(7, "cyclic-fibre inequality audit", run)


# ------------------------------------------------------------------ 8. subharmonicity

def check_subharmonicity(pairs: int = 5, seed: int = 0, n: int = 64) -> CriterionResult:
    """``Lap_h log Tr(s) >= -eps_h`` with ``eps_h = 10 max(residual)`` and ``log Tr(s) >= log r``."""
    def run():
        rng = np.random.default_rng(seed)
        r = 3
        q = monomial_differential(r, 1.0, 1)
        g = ChartGrid.log_polar(1e-2, 0.5, n, n)
        base = boundary_from_model(distinguished_weights(r, 1, Distinguished.COMPLETE)[0], q, g)
        theta = g.mesh[1]

        def perturbed():
            coef = rng.normal(size=(r, 3))
            phase = rng.uniform(0, 2 * np.pi, size=(r, 3))
            v = np.stack([sum(coef[i, j] * np.cos((j + 1) * theta + phase[i, j]) for j in range(3))
                          for i in range(r)])
            return base + v - v.mean(axis=0)

        rows, ok = [], True
        for _ in range(pairs):
            s1 = solve_dirichlet(q, g, perturbed())
            s2 = solve_dirichlet(q, g, perturbed())
            f = log_tr_s(s1, s2)
            lap_min = float(g.apply_laplacian(f)[1:-1].min())
            eps = 10 * max(s1.report.max_residual, s2.report.max_residual)
            gap = float(f.min() - np.log(r))
            good = lap_min >= -eps and gap >= -1e-12
            ok &= good
            rows.append({"min_laplacian": lap_min, "eps_h": eps, "min_excess_over_log_r": gap,
                         "pass": good})
        return ok, {"pairs": rows, "seed": seed}
    return _timed(8, "subharmonicity of log Tr(s)", run)


# ------------------------------------------------------------------ 9. zeros

def check_zero_density(sums: int = 100, seed: int = 0) -> CriterionResult:
    def run():
        rng = np.random.default_rng(seed)
        violations = additivity_fail = splits = 0
        rows = []
        for _ in range(sums):
            f = expzeros.random_sum(rng, 4)
            length = float(rng.uniform(0.5, 50.0))
            x1 = float(rng.uniform(-30, 30))
            x3 = x1 + length
            rep = expzeros.verify_density_bound(f, x1, x3, strict=False)
            violations += not rep.passed
            height = expzeros.zero_strip(f) + 1.0
            for _ in range(20):
                x2 = float(rng.uniform(x1 + 0.01 * length, x3 - 0.01 * length))
                if expzeros.vertical_clearance(f, x2, height) >= 1e-3:
                    break
            else:
                continue
            left = expzeros.count_zeros(f, x1, x2)
            right = expzeros.count_zeros(f, x2, x3)
            whole = expzeros.count_zeros(f, x1, x3)
            consistent = left.x2 == right.x1 and whole.x1 == left.x1 and whole.x2 == right.x2
            splits += consistent
            if consistent and left.count + right.count != whole.count:
                additivity_fail += 1
            rows.append({"n": f.n, "window": [x1, x3], "count": rep.count,
                         "bounds": [rep.bound_lo, rep.bound_hi]})
        ok = violations == 0 and additivity_fail == 0 and splits > 0
        return ok, {"sums": sums, "seed": seed, "bound_violations": violations,
                    "additivity_checked": splits, "additivity_failures": additivity_fail,
                    "windows": rows}
    return _timed(9, "zero-density bound and count additivity", run)


# ------------------------------------------------------------------ 10. exhaustion

def exhaustion_grids(ks=(3, 4, 5, 6), h: float = 0.04, n_theta: int = 32, outer: float = 0.5
                     ) -> list[ChartGrid]:
    """Annuli on a common ``s``-lattice anchored at the outer radius.

    The inner radius is ``e^{-k}`` snapped to the lattice.
    """
    top = math.log(outer)
    out = []
    for k in ks:
        n = int(round((top + k) / h)) + 1
        out.append(ChartGrid.log_polar_s(top - (n - 1) * h, top, n, n_theta))
    return out


def check_exhaustion(h: float = 0.04) -> CriterionResult:
    def run():
        q = monomial_differential(2, 1.0, 1)
        b = distinguished_weights(2, 1, Distinguished.COMPLETE)[0]
        res = exhaustion_solve(q, exhaustion_grids(h=h), lambda g: boundary_from_model(b, q, g),
                               (math.log(0.2), math.log(0.4)))
        d = res.core_differences
        ok = res.strictly_decreasing and d[-1] <= 1e-3
        return ok, {"weights": [float(v) for v in b.values], "core_differences": list(d),
                    "strictly_decreasing": res.strictly_decreasing, "final_gap": d[-1],
                    "inner_radii": [math.exp(s.grid.lo1) for s in res.states]}
    return _timed(10, "exhaustion: core differences decreasing, final gap <= 1e-3", run)


CHECKS: dict[int, Callable[..., CriterionResult]] = {
    1: check_hyperbolic, 2: check_flat, 3: check_pole_round_trip, 4: check_special_round_trip,
    5: check_classifier, 6: check_k_vectors, 7: check_fibers, 8: check_subharmonicity,
    9: check_zero_density, 10: check_exhaustion,
}
SEEDED = {7, 8, 9}

SUITES: dict[str, tuple[int, ...]] = {
    "oracle": (1, 2, 8, 10),
    "roundtrip": (3, 4),
    "parabolic": (5, 6),
    "fibers": (7,),
    "zeros": (9,),
    "all": tuple(range(1, 11)),
}


def run_suite(name: str, seed: int = 0, echo: Callable[[str], None] | None = None
              ) -> list[CriterionResult]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    out = []
    for num in SUITES[name]:
        res = CHECKS[num](seed=seed) if num in SEEDED else CHECKS[num]()
        if echo:
            echo(res.line())
        out.append(res)
    return out
