"""Run configuration, parameter grids, figure presets and tabular output."""
from __future__ import annotations

import csv
import io
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateAngleError,
    DegenerateSteadyStateError,
    InfeasibleSteadyStateError,
    ParseError,
    UndefinedRectificationError,
)
from .liouvillian import assemble
from .observables import heat_report, rectification
from .operators import SystemSpec
from .solver import max_entry, steady_state
from .spectrum import KINDS, BathSpec

SWEEPABLE = ("t_l", "t_r", "omega_l", "omega_r", "g", "kappa_lr", "kappa_rl")
MODES = ("single", "sweep", "rectification_map")
FORMATS = ("csv", "json")
REQUIRED = ("omega_l", "omega_r", "g", "t_l", "t_r", "kappa_ll", "kappa_rr")
NUMERIC = REQUIRED + ("kappa_lr", "kappa_rl")
ALLOWED = NUMERIC + ("spectrum", "sweep", "mode", "output", "format")
RESULT_COLUMNS = (
    "j_left", "j_right", "j_forward", "j_backward", "r",
    "first_law_residual", "entropy_production", "steady_residual", "nullspace_dim", "flags",
)
DEFAULT_GRID = 101
T_MIN, T_MAX = 0.01, 10.0
W_MIN, W_MAX = 0.1, 5.0
# relative to max|S_ij| * max|E_k|; below this both currents are numerical noise
NOISE_FLOOR = 1e-12
FIG5_NOTE = (
    "fig5 presets use g = 0.5 for panels a/c and g = 1 for panels b/d; "
    "the source is inconsistent and also gives g = 0.01 for panels a/c"
)


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    points: int

    def __post_init__(self):
        if self.name not in SWEEPABLE:
            raise ValueError(f"parameter {self.name!r} cannot be swept")
        if self.points < 1:
            raise ValueError("points must be >= 1")
        if self.min > self.max:
            raise ValueError("min must not exceed max")

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.min])
        return np.linspace(self.min, self.max, self.points)


@dataclass(frozen=True)
class RunSpec:
    system: SystemSpec
    baths: BathSpec
    axes: tuple = ()
    mode: str = "single"
    output: str | None = None
    format: str = "csv"
    name: str | None = None
    notes: tuple = ()

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.format not in FORMATS:
            raise ValueError(f"unknown format {self.format!r}")
        if len(self.axes) > 2:
            raise ValueError("at most two sweep axes")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValueError("sweep axes must be distinct")
        if self.mode == "single" and self.axes:
            raise ValueError("single mode takes no sweep axes")
        if self.mode == "sweep" and not self.axes:
            raise ValueError("sweep mode needs at least one axis")

    def grid(self) -> list:
        """Parameter overrides per row, row-major over the axes."""
        if not self.axes:
            return [{}]
        vals = [a.values() for a in self.axes]
        if len(vals) == 1:
            return [{self.axes[0].name: float(v)} for v in vals[0]]
        return [
            {self.axes[0].name: float(u), self.axes[1].name: float(v)}
            for u in vals[0] for v in vals[1]
        ]

    def with_spectrum(self, kind: str) -> "RunSpec":
        return replace(self, baths=replace(self.baths, kind=kind))

    def with_grid(self, points: int) -> "RunSpec":
        return replace(self, axes=tuple(replace(a, points=points) for a in self.axes))


@dataclass
class ResultRow:
    params: dict
    j_left: float | None = None
    j_right: float | None = None
    j_forward: float | None = None
    j_backward: float | None = None
    r: float | None = None
    first_law_residual: float = math.nan
    entropy_production: float | None = None
    steady_residual: float = math.nan
    nullspace_dim: int | None = None
    flags: list = field(default_factory=list)

    def record(self) -> dict:
        out = dict(self.params)
        for c in RESULT_COLUMNS:
            v = getattr(self, c)
            out[c] = ";".join(v) if c == "flags" else v
        return out


# -- configuration -----------------------------------------------------------

def _number(key, text, line):
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"non-numeric value {text!r}", key, line) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {text!r}", key, line)
    return v


def parse_config(text: str) -> RunSpec:
    """Parse the flat ``key = value`` run description.

    ``sweep = <param> <min> <max> <points>`` may appear up to twice.  Lines
    starting with ``#`` are comments.
    """
    values: dict = {}
    lines: dict = {}
    axes = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", None, lineno)
        key, _, value = (p.strip() for p in line.partition("="))
        if key not in ALLOWED:
            raise ParseError("unknown key", key, lineno)
        if key == "sweep":
            parts = value.split()
            if len(parts) != 4:
                raise ParseError("sweep needs '<param> <min> <max> <points>'", key, lineno)
            name = parts[0]
            if name not in SWEEPABLE:
                raise ParseError(f"parameter {name!r} cannot be swept", key, lineno)
            lo, hi = _number(key, parts[1], lineno), _number(key, parts[2], lineno)
            try:
                points = int(parts[3])
            except ValueError:
                raise ParseError(f"non-integer point count {parts[3]!r}", key, lineno) from None
            if points < 1:
                raise ParseError("points must be >= 1", key, lineno)
            if lo > hi:
                raise ParseError("sweep min exceeds max", key, lineno)
            if any(a.name == name for a, _ in axes):
                raise ParseError(f"axis {name!r} given twice", key, lineno)
            if len(axes) == 2:
                raise ParseError("at most two sweep axes", key, lineno)
            axes.append((Axis(name, lo, hi, points), lineno))
            continue
        if key in values:
            raise ParseError("duplicate key", key, lineno)
        lines[key] = lineno
        if key in NUMERIC:
            v = _number(key, value, lineno)
            if v < 0:
                raise ParseError("value must be nonnegative", key, lineno)
            values[key] = v
        elif key == "spectrum":
            if value not in KINDS:
                raise ParseError(f"unknown spectrum {value!r} (flat|ohmic)", key, lineno)
            values[key] = value
        elif key == "mode":
            if value not in MODES:
                raise ParseError(f"unknown mode {value!r}", key, lineno)
            values[key] = value
        elif key == "format":
            if value not in FORMATS:
                raise ParseError(f"unknown format {value!r}", key, lineno)
            values[key] = value
        else:
            values[key] = value

    for key in REQUIRED:
        if key not in values:
            raise ParseError("missing required key", key)

    try:
        system = SystemSpec(values["omega_l"], values["omega_r"], values["g"])
    except ValueError as exc:
        raise ParseError(str(exc), "omega_l", lines["omega_l"]) from None

    baths = BathSpec(
        t_left=values["t_l"], t_right=values["t_r"],
        kappa_ll=values["kappa_ll"], kappa_rr=values["kappa_rr"],
        kappa_lr=values.get("kappa_lr", 0.0), kappa_rl=values.get("kappa_rl", 0.0),
        kind=values.get("spectrum", "flat"),
    )
    mode = values.get("mode", "sweep" if axes else "single")
    if mode == "single" and axes:
        raise ParseError("single mode takes no sweep axes", "mode", lines.get("mode"))
    if mode == "sweep" and not axes:
        raise ParseError("sweep mode needs a sweep axis", "mode", lines.get("mode"))
    output = values.get("output")
    fmt = values.get("format")
    if fmt is None:
        fmt = "json" if output and output.lower().endswith(".json") else "csv"
    return RunSpec(system, baths, tuple(a for a, _ in axes), mode, output, fmt)


# -- presets -----------------------------------------------------------------

def _fig_base(g, t_l=1.0, t_r=1.0, kappa_cross=0.0):
    return SystemSpec(1.0, 1.0, g), BathSpec(t_l, t_r, 0.01, 0.01, kappa_cross, kappa_cross, "flat")


def preset(name: str, grid: int = DEFAULT_GRID) -> RunSpec:
    """Run specs for the reference parameter maps.

    fig4*: T_L x T_R maps at w_L = w_R = 1, kappa = 0.01 (a/c: g = 0.01,
    b/d: g = 1; a/b currents, c/d rectification).  fig5*: w_L x w_R
    rectification maps (a/b: T_L = 2, T_R = 1; c/d: T_L = 10, T_R = 0.5).
    fig6*: w_L x w_R rectification at T_L = 10, T_R = 0.5, g = 1 with cross
    couplings 0 (a), 0.005 (b) and 0.01 (c).
    """
    t_axes = (Axis("t_l", T_MIN, T_MAX, grid), Axis("t_r", T_MIN, T_MAX, grid))
    w_axes = (Axis("omega_l", W_MIN, W_MAX, grid), Axis("omega_r", W_MIN, W_MAX, grid))
    fig4 = {"fig4a": (0.01, "sweep"), "fig4b": (1.0, "sweep"),
            "fig4c": (0.01, "rectification_map"), "fig4d": (1.0, "rectification_map")}
    fig5 = {"fig5a": (0.5, 2.0, 1.0), "fig5b": (1.0, 2.0, 1.0),
            "fig5c": (0.5, 10.0, 0.5), "fig5d": (1.0, 10.0, 0.5)}
    fig6 = {"fig6a": 0.0, "fig6b": 0.005, "fig6c": 0.01}
    if name in fig4:
        g, mode = fig4[name]
        system, baths = _fig_base(g)
        return RunSpec(system, baths, t_axes, mode, name=name)
    if name in fig5:
        g, t_l, t_r = fig5[name]
        warnings.warn(FIG5_NOTE, UserWarning, stacklevel=2)
        system, baths = _fig_base(g, t_l, t_r)
        return RunSpec(system, baths, w_axes, "rectification_map", name=name, notes=(FIG5_NOTE,))
    if name in fig6:
        system, baths = _fig_base(1.0, 10.0, 0.5, fig6[name])
        return RunSpec(system, baths, w_axes, "rectification_map", name=name)
    raise KeyError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}")


PRESETS = tuple(f"fig4{c}" for c in "abcd") + tuple(f"fig5{c}" for c in "abcd") + tuple(f"fig6{c}" for c in "abc")


# -- execution ---------------------------------------------------------------

def point_specs(spec: RunSpec, overrides: dict) -> tuple:
    s, b = spec.system, spec.baths
    sys_kw = {"omega_l": s.omega_l, "omega_r": s.omega_r, "g": s.g}
    bath_kw = {"t_left": b.t_left, "t_right": b.t_right, "kappa_lr": b.kappa_lr, "kappa_rl": b.kappa_rl}
    rename = {"t_l": "t_left", "t_r": "t_right"}
    for k, v in overrides.items():
        if k in sys_kw:
            sys_kw[k] = v
        else:
            bath_kw[rename.get(k, k)] = v
    return SystemSpec(**sys_kw), replace(b, **bath_kw)


def solve_point(system: SystemSpec, baths: BathSpec) -> dict:
    """Steady state and heat bookkeeping for one parameter point; never raises on solver failure."""
    out = {"j_left": None, "j_right": None, "first_law_residual": math.nan, "entropy_production": None,
           "steady_residual": math.nan, "nullspace_dim": None, "flags": [], "noise": 0.0}
    try:
        gen = assemble(system, baths)
    except DegenerateAngleError:
        out["flags"].append("degenerate_angle")
        return out
    out["flags"].extend(gen.diagnostics)
    try:
        sol = steady_state(gen)
    except DegenerateSteadyStateError as exc:
        out["nullspace_dim"] = exc.nullspace_dim
        out["steady_residual"] = exc.residual
        out["flags"].append("degenerate_steady_state")
        return out
    except InfeasibleSteadyStateError as exc:
        out["nullspace_dim"] = exc.nullspace_dim
        out["steady_residual"] = exc.residual
        out["flags"].append("infeasible_steady_state")
        return out
    rep = heat_report(gen, sol)
    out.update(j_left=rep.j_left, j_right=rep.j_right, first_law_residual=rep.first_law_residual,
               entropy_production=rep.entropy_production, steady_residual=sol.residual,
               nullspace_dim=sol.nullspace_dim)
    out["noise"] = NOISE_FLOOR * max_entry(gen) * float(np.max(np.abs(np.linalg.eigvalsh(gen.hamiltonian))))
    if rep.entropy_production is None:
        out["flags"].append("zero_temperature")
    elif rep.entropy_production < -1e-10:
        out["flags"].append("second_law_violation")
    # currents at the noise floor (equilibrium, frozen qubits) carry no relative precision
    if rep.first_law_residual > 1e-10 * max(out["noise"], abs(rep.j_left)):
        out["flags"].append("first_law_violation")
    return out


class _PointCache:
    def __init__(self):
        self._store = {}

    def __call__(self, system, baths):
        key = (system, baths)
        if key not in self._store:
            self._store[key] = solve_point(system, baths)
        return self._store[key]


def compute_row(spec: RunSpec, overrides: dict, cache=None) -> ResultRow:
    cache = cache or _PointCache()
    row = ResultRow(params=dict(overrides))
    try:
        system, baths = point_specs(spec, overrides)
    except ValueError:
        row.flags.append("invalid_parameters")
        return row
    here = cache(system, baths)
    row.j_left, row.j_right = here["j_left"], here["j_right"]
    row.first_law_residual = here["first_law_residual"]
    row.entropy_production = here["entropy_production"]
    row.steady_residual = here["steady_residual"]
    row.nullspace_dim = here["nullspace_dim"]
    row.flags.extend(here["flags"])
    if spec.mode != "rectification_map":
        return row

    if baths.t_left == baths.t_right:
        row.flags.append("no_thermal_bias")
        return row
    there = cache(system, baths.swapped())
    for f in there["flags"]:
        tag = f"swapped:{f}"
        if tag not in row.flags:
            row.flags.append(tag)
    if here["j_right"] is None or there["j_right"] is None:
        row.flags.append("rectification_undefined")
        return row
    right_hot = baths.t_right > baths.t_left
    row.j_forward = here["j_right"] if right_hot else there["j_right"]
    row.j_backward = there["j_right"] if right_hot else here["j_right"]
    if max(abs(row.j_forward), abs(row.j_backward)) <= max(here["noise"], there["noise"]):
        row.flags.append("currents_below_noise_floor")
        return row
    try:
        row.r = rectification(row.j_forward, row.j_backward)
    except UndefinedRectificationError:
        row.flags.append("rectification_undefined")
    return row


def _rows_chunk(args):
    spec, chunk = args
    cache = _PointCache()
    return [compute_row(spec, o, cache) for o in chunk]


def run(spec: RunSpec, workers: int = 1) -> list:
    """One row per grid point, row-major; per-row failures become flags."""
    grid = spec.grid()
    if workers <= 1 or len(grid) < 2:
        cache = _PointCache()
        return [compute_row(spec, o, cache) for o in grid]
    n = min(workers, len(grid))
    size = math.ceil(len(grid) / n)
    chunks = [grid[i:i + size] for i in range(0, len(grid), size)]
    with ProcessPoolExecutor(max_workers=n) as pool:
        parts = list(pool.map(_rows_chunk, [(spec, c) for c in chunks]))
    return [row for part in parts for row in part]


# -- output ------------------------------------------------------------------

def columns_for(axes: Iterable) -> list:
    return [a.name if isinstance(a, Axis) else str(a) for a in axes] + list(RESULT_COLUMNS)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def render(rows: Sequence[ResultRow], fmt: str = "csv", axes: Iterable = ()) -> str:
    cols = columns_for(axes)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            rec = row.record()
            writer.writerow([_cell(rec.get(c)) for c in cols])
        return buf.getvalue()
    if fmt == "json":
        data = []
        for row in rows:
            rec = row.record()
            data.append({c: _json_value(rec.get(c)) for c in cols})
        return json.dumps(data, indent=1, allow_nan=False) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit(rows: Sequence[ResultRow], fmt: str = "csv", destination=None, axes: Iterable = ()) -> None:
    """Write rows as CSV or JSON to a path, a text stream, or stdout (``None``/``'-'``)."""
    text = render(rows, fmt, axes)
    if destination is None or destination == "-":
        sys.stdout.write(text)
    elif hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_bytes(text.encode("utf-8"))
