import io
import json
from functools import partial

import numpy as np
import pytest

from coulomb_model import QuantumNumbers
from metrics import SweepMetrics
from numerics import DEFAULT_QUADRATURE, DEFAULT_ROOT_TOL
from output import format_cell, write_object, write_table
from sweep import (
    LEVEL_COLUMNS,
    SweepRow,
    SweepRunner,
    coupling_grid,
    epsilon_columns,
    epsilon_row,
    ground_state_row,
    level_row,
)

S1, S2, P2 = QuantumNumbers(1, 0), QuantumNumbers(2, 0), QuantumNumbers(2, 1)


# ----------------------------------------------------------------------------------
# Cells and writers
# ----------------------------------------------------------------------------------

@pytest.mark.parametrize("value, text", [
    (None, ""),
    (True, "true"),
    (np.bool_(False), "false"),
    (3, "3"),
    (np.int64(2), "2"),
    ("none", "none"),
    (0.5, "5.00000000000e-01"),
    (-1.0 / 3.0, "-3.33333333333e-01"),
    (np.float64(7.29735e-3), "7.29735000000e-03"),
])
def test_format_cell(value, text):
    assert format_cell(value) == text


@pytest.mark.parametrize("value", [float("nan"), float("inf")])
def test_non_finite_cells_are_refused(value):
    with pytest.raises(ValueError):
        format_cell(value)


def test_csv_table_has_one_header(capsys):
    write_table([{"a": 1, "b": None}, {"a": 2, "b": 0.25}], ("a", "b"))
    assert capsys.readouterr().out == "a,b\n1,\n2,2.50000000000e-01\n"


def test_json_table_keeps_nulls(tmp_path):
    target = tmp_path / "t.json"
    write_table([{"a": np.float64(0.5), "b": None}], ("a", "b"), "json", str(target))
    assert json.loads(target.read_text()) == [{"a": 0.5, "b": None}]


def test_unknown_format():
    with pytest.raises(ValueError):
        write_table([], ("a",), "xml")


def test_write_object_refuses_nan(tmp_path):
    with pytest.raises(ValueError):
        write_object({"x": float("nan")}, str(tmp_path / "o.json"))


# ----------------------------------------------------------------------------------
# Grids and rows
# ----------------------------------------------------------------------------------

def test_coupling_grid_is_inclusive():
    grid = coupling_grid(0.01, 0.5, 50)
    assert grid[0] == 0.01
    assert grid[-1] == 0.5
    assert len(grid) == 50


@pytest.mark.parametrize("lo, hi, steps", [(0.0, 0.5, 10), (0.5, 0.1, 10), (0.1, 0.5, 1), (0.1, 0.5, 2.5)])
def test_coupling_grid_validation(lo, hi, steps):
    with pytest.raises(ValueError):
        coupling_grid(lo, hi, steps)


def test_epsilon_columns():
    assert epsilon_columns((S1, P2)) == ("alphaZ", "eps_10", "eps_21")


def test_level_row_without_bound_state():
    row = level_row(0.6, S1, DEFAULT_QUADRATURE, DEFAULT_ROOT_TOL)
    assert row.missing == ("10",)
    assert row.values["epsilon"] is None
    assert row.values["energy_model"] is None
    assert row.values["energy_klein_gordon"] is None
    assert row.values["energy_schrodinger"] == pytest.approx(-0.18)
    assert set(row.values) == set(LEVEL_COLUMNS)


def test_epsilon_row_marks_missing_states():
    row = epsilon_row(1.3, (S1, S2, P2), DEFAULT_QUADRATURE, DEFAULT_ROOT_TOL)
    assert row.missing == ("10", "21")
    assert row.values["eps_20"] > 0.0
    assert len(row.residuals) == 1


def test_ground_state_row_none():
    row = ground_state_row(1.5, (S1, S2, P2), DEFAULT_QUADRATURE, DEFAULT_ROOT_TOL)
    assert (row.values["ground_n"], row.values["ground_l"]) == ("none", "none")


# ----------------------------------------------------------------------------------
# Runner and metrics
# ----------------------------------------------------------------------------------

def _fake_row(alphaZ):
    missing = ("10",) if alphaZ > 0.5 else ()
    return SweepRow(alphaZ, {"alphaZ": alphaZ, "x": 2.0 * alphaZ}, missing, (alphaZ * 1e-13,))


def test_runner_keeps_grid_order():
    runner = SweepRunner("fake", [0.1, 0.2, 0.6, 0.7], _fake_row)
    runner.run()
    assert [r["alphaZ"] for r in runner.table()] == [0.1, 0.2, 0.6, 0.7]
    assert runner.metrics.solved_rows == 2
    assert runner.metrics.missing_rows == 2
    assert runner.metrics.compute_summary()["missing_cells"] == {"10": 2}


def test_runner_in_worker_processes_matches_serial():
    grid = coupling_grid(0.1, 0.4, 4)
    row = partial(epsilon_row, states=(S1, P2), quad=DEFAULT_QUADRATURE, tol=DEFAULT_ROOT_TOL)
    serial = SweepRunner("serial", grid, row)
    pooled = SweepRunner("pooled", grid, row, threads=2)
    serial.run()
    pooled.run()
    assert pooled.table() == serial.table()


def test_runner_rejects_zero_threads():
    with pytest.raises(ValueError):
        SweepRunner("x", [0.1], _fake_row, threads=0)


def test_metrics_summary():
    metrics = SweepMetrics("energy 1S")
    metrics.record_row((), (1e-13,))
    metrics.record_row(("10",))
    metrics.record_row(("10", "21"))
    summary = metrics.compute_summary()
    assert summary["rows"] == 3
    assert summary["solved"] == 1
    assert summary["missing_cells"] == {"10": 2, "21": 1}
    assert metrics.missing_rate == pytest.approx(2.0 / 3.0)
    assert metrics.worst_residual == 1e-13


def test_empty_metrics():
    metrics = SweepMetrics()
    assert metrics.missing_rate == 0.0
    assert metrics.worst_residual == 0.0
    assert "solved=0" in repr(metrics)


def test_metrics_report():
    metrics = SweepMetrics("epsilon")
    metrics.record_row(("20",))
    stream = io.StringIO()
    metrics.report(stream)
    text = stream.getvalue()
    assert "Sweep report - epsilon" in text
    assert "no bound state (20) : 1" in text
    assert "100.00%" in text
