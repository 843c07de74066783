"""File formats: grid CSV, deterministic JSON and run manifests."""

from __future__ import annotations

import hashlib
import json
import os
import platform
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .toda.equations import TodaState
from .toda.grid import Chart, ChartGrid

CSV_DIGITS = 17


class SchemaError(ValueError):
    """Malformed input file; the message carries line and column when known."""


def read_json(path: str | os.PathLike) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
                          f"{exc.msg}") from exc


def _clean(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, fixed separators and non-finite floats as strings."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def write_json(path: str | os.PathLike, obj: Any) -> str:
    text = dumps(obj)
    Path(path).write_text(text)
    return sha256_text(text)


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def sha256_file(path: str | os.PathLike) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _fmt(v: float) -> str:
    return f"{v:.{CSV_DIGITS}g}"


def write_grid_csv(path: str | os.PathLike, state: TodaState, run_id: str | None = None) -> str:
    """Header comment, column names, then one row per node with ``s`` outermost."""
    g = state.grid
    head = "# " + g.header() + (f" run_id={run_id}" if run_id else "")
    a, b = g.axis_names
    cols = [a, b] + [f"w_{i + 1}" for i in range(state.r)] + ["qnorm"]
    lines = [head, ",".join(cols)]
    u, v = g.mesh
    for i in range(g.n1):
        for j in range(g.n2):
            vals = [u[i, j], v[i, j]] + [state.w[k, i, j] for k in range(state.r)] \
                + [state.qnorm[i, j]]
            lines.append(",".join(_fmt(x) for x in vals))
    text = "\n".join(lines) + "\n"
    Path(path).write_text(text)
    return sha256_text(text)


def _parse_header(line: str) -> ChartGrid:
    if not line.startswith("#"):
        raise SchemaError("grid CSV must start with a '# chart=...' header (line 1)")
    fields = dict(tok.split("=", 1) for tok in line[1:].split() if "=" in tok)
    try:
        chart = Chart(fields["chart"])
        a, b = ("s", "theta") if chart == Chart.LOG_POLAR else ("x", "y")
        return ChartGrid(chart, float(fields[f"{a}_min"]), float(fields[f"{a}_max"]),
                         float(fields[f"{b}_min"]), float(fields[f"{b}_max"]),
                         int(fields[f"n_{a}"]), int(fields[f"n_{b}"]))
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"bad grid CSV header (line 1): {exc}") from exc


def read_grid_csv(path: str | os.PathLike) -> TodaState:
    lines = Path(path).read_text().splitlines()
    if len(lines) < 3:
        raise SchemaError(f"{path}: grid CSV is too short")
    grid = _parse_header(lines[0])
    cols = lines[1].split(",")
    r = len(cols) - 3
    if r < 1 or cols[-1] != "qnorm":
        raise SchemaError(f"{path}: unexpected columns on line 2: {lines[1]}")
    try:
        data = np.array([[float(x) for x in ln.split(",")] for ln in lines[2:] if ln.strip()])
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric entry: {exc}") from exc
    if data.shape != (grid.n1 * grid.n2, r + 3):
        raise SchemaError(f"{path}: expected {grid.n1 * grid.n2} rows of {r + 3} values")
    w = np.stack([data[:, 2 + k].reshape(grid.shape) for k in range(r)])
    return TodaState(grid, w, data[:, -1].reshape(grid.shape))


def read_boundary_csv(path: str | os.PathLike, grid: ChartGrid) -> np.ndarray:
    """Fields from a grid CSV, checked against ``grid``."""
    state = read_grid_csv(path)
    if state.grid != grid:
        raise SchemaError(f"{path}: CSV grid does not match the requested grid")
    return state.w


def run_id(command: str, input_hashes: dict[str, str], config: dict, seed: int) -> str:
    payload = dumps({"command": command, "inputs": input_hashes, "config": config,
                     "seed": seed, "version": __version__})
    return sha256_text(payload)[:16]


@dataclass
class RunManifest:
    """Record tying a run's inputs, configuration and outputs together by hash."""

    command: str
    input_hashes: dict[str, str]
    config: dict
    seed: int
    version: str = __version__
    timing: dict[str, float] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)

    @property
    def run_id(self) -> str:
        return run_id(self.command, self.input_hashes, self.config, self.seed)

    def to_dict(self) -> dict:
        return {"run_id": self.run_id, "command": self.command, "inputs": self.input_hashes,
                "config": self.config, "seed": self.seed, "version": self.version,
                "timing": self.timing, "summary": self.summary, "outputs": self.outputs,
                "platform": platform.python_version()}

    def write(self, out_dir: str | os.PathLike) -> Path:
        path = Path(out_dir) / "manifest.json"
        write_json(path, self.to_dict())
        return path
