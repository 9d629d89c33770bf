import csv
import io
import json
import math
import warnings

import numpy as np
import pytest

from qdiode.errors import ParseError
from qdiode.sweep import (
    DEFAULT_GRID,
    PRESETS,
    RESULT_COLUMNS,
    Axis,
    RunSpec,
    columns_for,
    compute_row,
    emit,
    parse_config,
    preset,
    render,
    run,
    solve_point,
)
from qdiode.operators import SystemSpec
from qdiode.spectrum import BathSpec

MINIMAL = """\
omega_l = 1
omega_r = 1
g = 1
t_l = 3
t_r = 0.5
kappa_ll = 0.01
kappa_rr = 0.01
"""


# parse_config

def test_minimal_document_defaults():
    spec = parse_config(MINIMAL)
    assert spec.system == SystemSpec(1.0, 1.0, 1.0)
    assert spec.baths == BathSpec(3.0, 0.5, 0.01, 0.01, 0.0, 0.0, "flat")
    assert spec.mode == "single" and spec.axes == () and spec.format == "csv"
    assert spec.grid() == [{}]


def test_spectrum_values():
    assert parse_config(MINIMAL + "spectrum = ohmic\n").baths.kind == "ohmic"
    with pytest.raises(ParseError) as info:
        parse_config(MINIMAL + "spectrum = lorentzian\n")
    assert info.value.key == "spectrum" and info.value.line == 8


def test_sweep_axis_plan():
    spec = parse_config(MINIMAL + "sweep = t_l 0.1 10 100\n")
    assert spec.mode == "sweep"
    plan = spec.grid()
    assert len(plan) == 100
    assert plan[0] == {"t_l": 0.1} and plan[-1] == {"t_l": 10.0}


def test_two_axes_row_major():
    spec = parse_config(MINIMAL + "sweep = t_l 1 2 2\nsweep = g 0 1 3\n")
    assert [tuple(p.values()) for p in spec.grid()] == [
        (1.0, 0.0), (1.0, 0.5), (1.0, 1.0), (2.0, 0.0), (2.0, 0.5), (2.0, 1.0)
    ]


def test_comments_blank_lines_and_optional_keys():
    text = "# header\n\n" + MINIMAL + "kappa_lr = 0.005  # cross\nkappa_rl = 0.004\noutput = out.json\n"
    spec = parse_config(text)
    assert spec.baths.kappa_lr == 0.005 and spec.baths.kappa_rl == 0.004
    assert spec.output == "out.json" and spec.format == "json"


@pytest.mark.parametrize(
    "extra,key,line",
    [
        ("colour = red\n", "colour", 8),
        ("kappa_lr = lots\n", "kappa_lr", 8),
        ("kappa_lr = -0.1\n", "kappa_lr", 8),
        ("kappa_lr = nan\n", "kappa_lr", 8),
        ("g = 2\n", "g", 8),
        ("sweep = t_l 2 1 5\n", "sweep", 8),
        ("sweep = t_l 1 2 0\n", "sweep", 8),
        ("sweep = t_l 1 2\n", "sweep", 8),
        ("sweep = kappa_ll 1 2 3\n", "sweep", 8),
        ("sweep = t_l 1 2 3\nsweep = t_l 1 2 3\n", "sweep", 9),
        ("sweep = t_l 1 2 3\nsweep = t_r 1 2 3\nsweep = g 1 2 3\n", "sweep", 10),
        ("mode = sideways\n", "mode", 8),
        ("format = xml\n", "format", 8),
        ("sweep = t_l 1 2 3\nmode = single\n", "mode", 9),
        ("mode = sweep\n", "mode", 8),
    ],
)
def test_parse_errors_name_key_and_line(extra, key, line):
    with pytest.raises(ParseError) as info:
        parse_config(MINIMAL + extra)
    assert info.value.key == key and info.value.line == line
    assert repr(key) in str(info.value) and f"line {line}" in str(info.value)


def test_missing_key_and_malformed_line():
    with pytest.raises(ParseError) as info:
        parse_config(MINIMAL.replace("kappa_rr = 0.01\n", ""))
    assert info.value.key == "kappa_rr"
    with pytest.raises(ParseError) as info:
        parse_config("omega_l 1\n")
    assert info.value.line == 1


def test_all_zero_system_is_rejected():
    text = MINIMAL.replace("omega_l = 1", "omega_l = 0").replace("omega_r = 1", "omega_r = 0").replace("g = 1", "g = 0")
    with pytest.raises(ParseError):
        parse_config(text)


def test_runspec_invariants():
    s, b = SystemSpec(1, 1, 1), BathSpec(1, 1, 0.01, 0.01)
    with pytest.raises(ValueError):
        Axis("t_l", 2.0, 1.0, 3)
    with pytest.raises(ValueError):
        Axis("t_l", 1.0, 2.0, 0)
    with pytest.raises(ValueError):
        RunSpec(s, b, (Axis("g", 0, 1, 2), Axis("g", 0, 1, 2)), "sweep")
    with pytest.raises(ValueError):
        RunSpec(s, b, (), "sweep")


# presets

def test_fig4d_preset():
    spec = preset("fig4d")
    assert spec.mode == "rectification_map"
    assert spec.system == SystemSpec(1.0, 1.0, 1.0)
    assert spec.baths == BathSpec(1.0, 1.0, 0.01, 0.01, 0.0, 0.0, "flat")
    assert [a.name for a in spec.axes] == ["t_l", "t_r"]
    assert all(a.points == DEFAULT_GRID == 101 and a.min == 0.01 and a.max == 10.0 for a in spec.axes)


def test_fig6c_preset():
    b = preset("fig6c").baths
    assert b.kappa_ll == b.kappa_rr == b.kappa_lr == b.kappa_rl == 0.01
    assert (b.t_left, b.t_right) == (10.0, 0.5)


def test_fig5_presets_warn():
    for name in ("fig5a", "fig5b", "fig5c", "fig5d"):
        with pytest.warns(UserWarning, match="g = 0.01"):
            spec = preset(name)
        assert spec.notes


PRESET_TABLE = {
    # name: (g, T_L, T_R, cross kappa, mode, axes)
    "fig4a": (0.01, None, None, 0.0, "sweep", ("t_l", "t_r")),
    "fig4b": (1.0, None, None, 0.0, "sweep", ("t_l", "t_r")),
    "fig4c": (0.01, None, None, 0.0, "rectification_map", ("t_l", "t_r")),
    "fig4d": (1.0, None, None, 0.0, "rectification_map", ("t_l", "t_r")),
    "fig5a": (0.5, 2.0, 1.0, 0.0, "rectification_map", ("omega_l", "omega_r")),
    "fig5b": (1.0, 2.0, 1.0, 0.0, "rectification_map", ("omega_l", "omega_r")),
    "fig5c": (0.5, 10.0, 0.5, 0.0, "rectification_map", ("omega_l", "omega_r")),
    "fig5d": (1.0, 10.0, 0.5, 0.0, "rectification_map", ("omega_l", "omega_r")),
    "fig6a": (1.0, 10.0, 0.5, 0.0, "rectification_map", ("omega_l", "omega_r")),
    "fig6b": (1.0, 10.0, 0.5, 0.005, "rectification_map", ("omega_l", "omega_r")),
    "fig6c": (1.0, 10.0, 0.5, 0.01, "rectification_map", ("omega_l", "omega_r")),
}


@pytest.mark.parametrize("name", PRESETS)
def test_preset_fidelity(name):
    g, tl, tr, cross, mode, axes = PRESET_TABLE[name]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        spec = preset(name, grid=7)
    assert spec.system.g == g and spec.mode == mode
    assert tuple(a.name for a in spec.axes) == axes and all(a.points == 7 for a in spec.axes)
    b = spec.baths
    assert b.kappa_ll == b.kappa_rr == 0.01 and b.kappa_lr == b.kappa_rl == cross and b.kind == "flat"
    if tl is not None:
        assert (b.t_left, b.t_right) == (tl, tr)
    if axes[0] == "t_l":
        assert spec.system.omega_l == spec.system.omega_r == 1.0


def test_unknown_preset():
    with pytest.raises(KeyError):
        preset("fig7a")


# run

def test_single_point_run(golden):
    rows = run(RunSpec(*golden))
    assert len(rows) == 1
    row = rows[0]
    assert row.j_left == pytest.approx(0.0013062527201610, rel=1e-12)
    assert row.r is None and row.nullspace_dim == 1 and row.flags == []


def test_rectification_map_orientation():
    spec = RunSpec(SystemSpec(1, 1, 0.01), BathSpec(10.0, 0.01, 0.01, 0.01), mode="rectification_map")
    row = run(spec)[0]
    left_hot = solve_point(spec.system, spec.baths)["j_right"]
    right_hot = solve_point(spec.system, spec.baths.swapped())["j_right"]
    assert row.j_forward == right_hot and row.j_backward == left_hot
    assert row.r == pytest.approx(abs(right_hot + left_hot) / max(abs(right_hot), abs(left_hot)))
    assert row.r > 0.9


def test_symmetric_point_has_no_rectification():
    spec = RunSpec(SystemSpec(1, 1, 1), BathSpec(2.0, 2.0, 0.01, 0.01), mode="rectification_map")
    row = run(spec)[0]
    assert abs(row.j_left) <= 1e-10 and abs(row.j_right) <= 1e-10
    assert row.r is None and "no_thermal_bias" in row.flags
    assert "first_law_violation" not in row.flags


def test_grid_independence():
    spec = preset("fig4d", grid=4)
    rows = run(spec)
    for row in rows:
        single = RunSpec(spec.system, spec.baths.__class__(
            row.params["t_l"], row.params["t_r"], 0.01, 0.01), mode="rectification_map")
        alone = run(single)[0]
        assert (alone.j_left, alone.j_right, alone.r, alone.flags) == (row.j_left, row.j_right, row.r, row.flags)


def test_per_row_failures_become_flags():
    spec = RunSpec(SystemSpec(1, 1, 0), BathSpec(1, 2, 0.01, 0.01), (Axis("omega_r", 0.0, 2.0, 2),), "sweep")
    rows = run(spec)
    assert len(rows) == 2
    assert rows[0].flags == ["degenerate_angle"] and rows[0].j_left is None
    assert rows[1].flags == [] and rows[1].j_left is not None


def test_degenerate_point_keeps_residual_columns():
    spec = RunSpec(SystemSpec(1, 1, 0), BathSpec(1, 2, 0.01, 0.0))
    row = run(spec)[0]
    assert "degenerate_steady_state" in row.flags
    assert row.nullspace_dim > 1 and math.isfinite(row.steady_residual)


def test_determinism_across_worker_counts():
    spec = preset("fig4c", grid=6)
    serial = render(run(spec), "csv", spec.axes)
    assert render(run(spec), "csv", spec.axes) == serial
    assert render(run(spec, workers=3), "csv", spec.axes) == serial


def test_rectification_bounds_on_grid():
    rows = run(preset("fig4d", grid=9))
    values = [r.r for r in rows if r.r is not None]
    assert values and all(0.0 <= v <= 1.0 for v in values)


# emit

def test_empty_rows_give_header_only():
    text = render([], "csv", ["t_l"])
    assert text == ",".join(["t_l", *RESULT_COLUMNS]) + "\n"


def test_one_row_gives_two_lines(golden):
    text = render(run(RunSpec(*golden)), "csv")
    assert text.count("\n") == 2 and "\r" not in text


def test_csv_round_trip_is_bit_exact():
    spec = preset("fig4d", grid=3)
    rows = run(spec)
    text = render(rows, "csv", spec.axes)
    parsed = list(csv.DictReader(io.StringIO(text)))
    assert list(parsed[0]) == columns_for(spec.axes)
    for row, rec in zip(rows, parsed):
        for col in ("j_left", "j_right", "first_law_residual", "entropy_production"):
            assert float(rec[col]) == getattr(row, col)
        assert rec["r"] == "" if row.r is None else float(rec["r"]) == row.r
        assert float(rec["t_l"]) == row.params["t_l"]


def test_json_output_uses_null_for_missing():
    spec = preset("fig4d", grid=2)
    data = json.loads(render(run(spec), "json", spec.axes))
    assert len(data) == 4 and list(data[0]) == columns_for(spec.axes)
    diagonal = [d for d in data if d["t_l"] == d["t_r"]]
    assert diagonal and all(d["r"] is None for d in diagonal)


def test_emit_destinations(tmp_path, golden, capsys):
    rows = run(RunSpec(*golden))
    path = tmp_path / "out.csv"
    emit(rows, "csv", path)
    assert path.read_bytes() == render(rows, "csv").encode("utf-8")
    buf = io.StringIO()
    emit(rows, "json", buf)
    assert json.loads(buf.getvalue())[0]["nullspace_dim"] == 1
    emit(rows, "csv", None)
    assert capsys.readouterr().out == render(rows, "csv")
    with pytest.raises(OSError):
        emit(rows, "csv", tmp_path / "missing" / "out.csv")
    with pytest.raises(ValueError):
        render(rows, "xml")


def test_compute_row_flags_invalid_override():
    spec = RunSpec(SystemSpec(1, 1, 1), BathSpec(1, 2, 0.01, 0.01), (Axis("t_l", 0, 1, 2),), "sweep")
    row = compute_row(spec, {"t_l": -1.0})
    assert row.flags == ["invalid_parameters"]
