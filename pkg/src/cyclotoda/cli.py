"""Command-line entry point: ``cyclotoda {classify,solve,extract,zeros,verify}``."""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__, expzeros, io, rdiff, verify
from .growthorder import classify_moduli, growth_data, refined_exponents, special_intervals
from .parabolic import AVector, BVector, Distinguished, distinguished_weights
from .rdiff import Meromorphic, local_form
from .toda.boundary import boundary_from_model
from .toda.grid import ChartGrid
from .toda.oracles import flat_solution
from .toda.solver import NonConvergenceError, SolverConfig, solve_dirichlet
from .weights import extract_pole_weights, extract_special_weights


class CliError(Exception):
    pass


def _number(v: Any):
    if isinstance(v, str):
        return Fraction(v)
    return v


def _grid_override(text: str | None) -> tuple[int, int] | None:
    if text is None:
        return None
    try:
        n1, n2 = (int(t) for t in text.lower().split("x"))
    except ValueError as exc:
        raise CliError(f"--grid expects NxM, got {text!r}") from exc
    return n1, n2


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    cfg = io.read_json(path)
    if not isinstance(cfg, dict):
        raise CliError("config must be a JSON object")
    return cfg


def _solver_config(cfg: dict) -> SolverConfig:
    try:
        return SolverConfig(**cfg.get("solver", {}))
    except TypeError as exc:
        raise CliError(f"bad solver config: {exc}") from exc


def _load_q(path: str) -> rdiff.RDifferential:
    try:
        return rdiff.from_dict(io.read_json(path))
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _load_grid(path: str, override: tuple[int, int] | None) -> ChartGrid:
    d = io.read_json(path)
    try:
        grid = ChartGrid.from_dict(d)
    except (KeyError, ValueError, TypeError) as exc:
        raise CliError(f"bad grid JSON: {exc}") from exc
    if override:
        grid = ChartGrid(grid.chart, grid.lo1, grid.hi1, grid.lo2, grid.hi2, *override)
    return grid


def _weights_boundary(wdata: dict, q, grid: ChartGrid) -> tuple[np.ndarray, dict]:
    kind = wdata.get("kind")
    if kind == "flat":
        return flat_solution(q, grid).w, {"kind": "flat"}
    if kind == "b":
        lf = local_form(q)
        if not isinstance(lf, Meromorphic):
            raise CliError("b-weights need a meromorphic differential")
        m = int(wdata.get("m", lf.m))
        if "distinguished" in wdata:
            b = distinguished_weights(q.rank, m, Distinguished(wdata["distinguished"]))[0]
        else:
            b = BVector(tuple(_number(v) for v in wdata["values"]), m)
        return boundary_from_model(b, q, grid, k=wdata.get("k")), b.to_dict()
    if kind == "a":
        intervals = special_intervals(growth_data(q))
        idx = int(wdata.get("interval", 0))
        if idx >= len(intervals):
            raise CliError(f"q has {len(intervals)} special intervals; index {idx} is out of range")
        if "distinguished" in wdata:
            a = distinguished_weights(q.rank, 1, Distinguished(wdata["distinguished"]))[1]
        else:
            a = AVector(tuple(_number(v) for v in wdata["values"]))
        d = a.to_dict()
        d["interval"] = intervals[idx].to_dict()
        return boundary_from_model(a, q, grid, intervals[idx], k=wdata.get("k")), d
    raise CliError("weights JSON needs kind 'b', 'a' or 'flat'")


def _say(args, text: str) -> None:
    if not args.quiet:
        print(text)


def _finish(args, manifest: io.RunManifest, t0: float) -> None:
    manifest.timing["seconds"] = time.perf_counter() - t0
    path = manifest.write(args.out)
    _say(args, f"manifest: {path}")


def _inputs(*paths: str | None) -> dict[str, str]:
    return {Path(p).name: io.sha256_file(p) for p in paths if p}


# ------------------------------------------------------------------ commands

def cmd_classify(args) -> int:
    t0 = time.perf_counter()
    q = _load_q(args.q)
    desc = classify_moduli(q)
    result: dict = {"moduli": desc.to_dict()}
    if not isinstance(local_form(q), Meromorphic):
        try:
            ex = refined_exponents(q)
            result["refined_exponents"] = {"ell": ex.ell, "m": ex.m, "d": ex.d}
        except ValueError as exc:
            result["refined_exponents"] = {"unsupported": str(exc)}
    man = io.RunManifest("classify", _inputs(args.q), _load_config(args.config), args.seed)
    result["run_id"] = man.run_id
    man.outputs["classify.json"] = io.write_json(Path(args.out) / "classify.json", result)
    man.summary = {"unique": desc.unique, "factors": len(desc.factors)}
    _say(args, io.dumps(result).rstrip())
    _finish(args, man, t0)
    return 0


def cmd_solve(args) -> int:
    t0 = time.perf_counter()
    cfg = _load_config(args.config)
    solver = _solver_config(cfg)
    q = _load_q(args.q)
    grid = _load_grid(args.grid_json, _grid_override(args.grid))
    if args.boundary:
        boundary = io.read_boundary_csv(args.boundary, grid)
        wdesc: dict = {"kind": "csv"}
    elif args.weights:
        boundary, wdesc = _weights_boundary(io.read_json(args.weights), q, grid)
    else:
        raise CliError("solve needs --weights or --boundary")
    config = {"solver": solver.to_dict(), "grid": grid.to_dict(), "weights": wdesc}
    man = io.RunManifest("solve", _inputs(args.q, args.grid_json, args.weights, args.boundary),
                         config, args.seed)
    try:
        state = solve_dirichlet(q, grid, boundary, solver)
    except NonConvergenceError as exc:
        report = {"run_id": man.run_id, "converged": False, "residual_history": list(exc.history),
                  "config": config}
        man.outputs["report.json"] = io.write_json(Path(args.out) / "report.json", report)
        man.summary = {"pass": False}
        _finish(args, man, t0)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    rep = state.report
    report = {"run_id": man.run_id, **rep.to_dict(timing=False), "config": config,
              "chart_correction": {"chart": grid.chart.value,
                                   "formula": _correction_text(grid)}}
    man.outputs["solution.csv"] = io.write_grid_csv(Path(args.out) / "solution.csv", state,
                                                    man.run_id)
    man.outputs["report.json"] = io.write_json(Path(args.out) / "report.json", report)
    man.timing["solve_seconds"] = rep.seconds
    ok = rep.max_residual <= rep.tol_effective and rep.trace_deviation <= 1e-9
    man.summary = {"pass": ok, "max_residual": rep.max_residual,
                   "trace_deviation": rep.trace_deviation}
    _say(args, f"max_residual={rep.max_residual:.3e} newton_steps={rep.newton_steps} "
               f"trace_deviation={rep.trace_deviation:.3e}")
    _finish(args, man, t0)
    return 0 if ok else 1


def _correction_text(grid: ChartGrid) -> str:
    if grid.periodic:
        return "log|(dz)^{j/2}|_h = w_i/2 + (j/2) s + (j/4) log 2, j = r+1-2i"
    return "log|(dz)^{j/2}|_h = w_i/2 + (j/4) log 2, j = r+1-2i"


def cmd_extract(args) -> int:
    t0 = time.perf_counter()
    q = _load_q(args.q)
    state = io.read_grid_csv(args.csv)
    lf = local_form(q)
    if isinstance(lf, Meromorphic):
        if lf.m < 1:
            raise CliError("pole weights need a pole order m >= 1")
        fit = extract_pole_weights(state, lf.m)
    else:
        intervals = special_intervals(growth_data(q))
        if not intervals:
            raise CliError("q has no special interval to extract weights toward")
        fit = extract_special_weights(state, intervals[args.interval])
    man = io.RunManifest("extract", _inputs(args.q, args.csv), _load_config(args.config),
                         args.seed)
    result = {"run_id": man.run_id, **fit.to_dict()}
    man.outputs["weights.json"] = io.write_json(Path(args.out) / "weights.json", result)
    man.summary = {"values": list(fit.values), "k": list(fit.k)}
    _say(args, io.dumps(result).rstrip())
    _finish(args, man, t0)
    return 0


def cmd_zeros(args) -> int:
    t0 = time.perf_counter()
    d = io.read_json(args.expsum)
    try:
        f = expzeros.ExpSum.from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"bad exponential-sum JSON: {exc}") from exc
    window = args.window or d.get("window")
    if window is None:
        raise CliError("zeros needs a window (JSON 'window' or --window X1 X2)")
    rep = expzeros.verify_density_bound(f, float(window[0]), float(window[1]), strict=False)
    man = io.RunManifest("zeros", _inputs(args.expsum), {"window": list(map(float, window))},
                         args.seed)
    result = {"run_id": man.run_id, **rep.to_dict()}
    man.outputs["zeros.json"] = io.write_json(Path(args.out) / "zeros.json", result)
    man.summary = {"pass": rep.passed}
    _say(args, io.dumps(result).rstrip())
    _finish(args, man, t0)
    return 0 if rep.passed else 1


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    results = verify.run_suite(args.suite, seed=args.seed, echo=None if args.quiet else print)
    man = io.RunManifest("verify", {}, {"suite": args.suite}, args.seed)
    report = {"run_id": man.run_id, "suite": args.suite, "seed": args.seed,
              "criteria": [r.to_dict() for r in results],
              "pass": all(r.passed for r in results)}
    man.outputs[f"verify_{args.suite}.json"] = io.write_json(
        Path(args.out) / f"verify_{args.suite}.json", report)
    man.timing.update({f"criterion_{r.number}": r.seconds for r in results})
    man.summary = {str(r.number): r.passed for r in results}
    _finish(args, man, t0)
    return 0 if report["pass"] else 1


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--out", default=".", help="output directory (default: .)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomised audits")
    common.add_argument("--grid", help="override grid node counts, e.g. 128x64")
    common.add_argument("--quiet", action="store_true", help="suppress console output")

    p = argparse.ArgumentParser(prog="cyclotoda", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[common], help="moduli type of a differential")
    c.add_argument("q", help="differential JSON")
    c.set_defaults(func=cmd_classify)

    s = sub.add_parser("solve", parents=[common], help="Dirichlet solve of the Toda system")
    s.add_argument("q", help="differential JSON")
    s.add_argument("grid_json", metavar="grid", help="grid JSON {chart, ranges, nodes}")
    src = s.add_mutually_exclusive_group()
    src.add_argument("--weights", help="weights JSON (kind b, a or flat)")
    src.add_argument("--boundary", help="grid CSV with boundary values")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("extract", parents=[common], help="fit weights from a solution CSV")
    e.add_argument("csv", help="solution CSV")
    e.add_argument("q", help="differential JSON")
    e.add_argument("--interval", type=int, default=0, help="special-interval index")
    e.set_defaults(func=cmd_extract)

    z = sub.add_parser("zeros", parents=[common], help="zero count and density bound")
    z.add_argument("expsum", help="exponential-sum JSON {c, a[, window]}")
    z.add_argument("--window", type=float, nargs=2, metavar=("X1", "X2"))
    z.set_defaults(func=cmd_zeros)

    v = sub.add_parser("verify", parents=[common], help="run acceptance suites")
    v.add_argument("suite", choices=sorted(verify.SUITES))
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    Path(args.out).mkdir(parents=True, exist_ok=True)
    try:
        return args.func(args)
    except (CliError, io.SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
