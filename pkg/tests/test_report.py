import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fiscalpanel.dcce import MeanGroupResult
from fiscalpanel.diagnostics import TestResult
from fiscalpanel.panel import GroupSplit, PanelDataset, VariableSummary, cross_sectional_average
from fiscalpanel.report import (
    MISSING,
    RegressionLayout,
    coefficient_cells,
    diagnostics_rows,
    emit_figure_data,
    emit_regression_table,
    figure_rows,
    format_p,
    format_sig,
    read_figure_data,
    stars,
)
from fiscalpanel.synthetic import FiscalDGP


def mg(coefs, ses):
    return MeanGroupResult(units=(), mg_coefficients=coefs, mg_se=ses)


def test_table_cell_example():
    # 0.0331 / 0.00809 has a two-sided normal p-value far below 1%
    assert coefficient_cells(0.0331, 0.00809, 4.3e-5) == ("0.0331***", "(0.00809)")


@pytest.mark.parametrize("p,mark", [(0.5, ""), (0.10, ""), (0.0999, "*"), (0.05, "*"),
                                    (0.049, "**"), (0.01, "**"), (0.0099, "***"), (None, "")])
def test_stars(p, mark):
    assert stars(p) == mark


@pytest.mark.parametrize("x,text", [(0.0331, "0.0331"), (0.358, "0.358"), (-1.905, "-1.905"),
                                    (46.0734, "46.07"), (2776.63, "2777"), (0.0, "0"),
                                    (0.12345, "0.1235"), (0.00809, "0.00809")])
def test_format_sig(x, text):
    assert format_sig(x) == text


def test_format_sig_ties_round_half_even():
    # exactly representable ties
    assert format_sig(1.0625, 4) == "1.062"
    assert format_sig(1.1875, 4) == "1.188"
    assert format_sig(2.5, 1) == "2"


@given(st.floats(-1e6, 1e6, allow_nan=False).filter(lambda v: v != 0))
def test_format_sig_within_half_unit(x):
    text = format_sig(x)
    exponent = int(np.floor(np.log10(abs(x))))
    assert abs(float(text) - x) <= 0.5 * 10.0 ** (exponent - 3) * (1 + 1e-12)


def test_format_p():
    assert format_p(0.5) == "0.5000"
    assert format_p(0.01, "<=") == "<=0.0100"
    assert format_p(None) == MISSING


def test_regression_table(tmp_path):
    r1 = mg({"L.pb": 0.427, "L.debt": 0.0234}, {"L.pb": 0.0406, "L.debt": 0.00771})
    r2 = mg({"L.pb": 0.358, "L.debt": 0.0331, "ca": 0.0851},
            {"L.pb": 0.0427, "L.debt": 0.00809, "ca": 0.0391})
    layout = RegressionLayout(rows=(("L.pb", "Lagged pb"), ("L.debt", "Lagged debt"),
                                    ("ca", "Current account")),
                              headers=("Aggregate panel", "Aggregate panel"))
    path = tmp_path / "t.tsv"
    emit_regression_table([r1, r2], layout, path)
    lines = [line.split("\t") for line in path.read_text(encoding="utf-8").splitlines()]
    assert lines[0] == ["", "(1)", "(2)"]
    assert lines[4] == ["Lagged debt", "0.0234***", "0.0331***"]
    assert lines[5] == ["", "(0.00771)", "(0.00809)"]
    assert lines[6] == ["Current account", MISSING, "0.0851**"]
    assert lines[7] == ["", MISSING, "(0.0391)"]
    with pytest.raises(ValueError):
        emit_regression_table([r1], layout, path)


def test_regression_table_missing_column(tmp_path):
    layout = RegressionLayout(rows=(("x", "x"),), headers=("a", "b"))
    path = tmp_path / "t.tsv"
    emit_regression_table([mg({"x": 1.0}, {"x": 10.0}), None], layout, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[2] == "x\t1\t--"
    assert lines[3] == "\t(10)\t--"


def test_diagnostics_rows():
    s = VariableSummary(58.989, 52.55, 36.3432, 3.9, 260.1)
    cips = TestResult("CIPS", -2.608, 0.01, {"p_value_bound": "<=", "fisher_statistic": 166.81,
                                             "fisher_p_value": 0.0001})
    rows = diagnostics_rows([("debt", s, {"CD": TestResult("CD", -0.04, 0.97),
                                          "CD+": TestResult("CD+", 3389.32, 0.0),
                                          "CIPS": cips})])
    assert rows[1] == ["debt", "58.99", "52.55", "36.34", "3.9", "260.1", "-0.04 (0.9700)",
                       "3389 (0.0000)", "166.8 (0.0001)", "-2.608 (<=0.0100)"]


def test_figure_data_toy():
    panel = PanelDataset(("A", "B"), (2000, 2001), {"pb": np.array([[1.0, 2.0], [3.0, 5.0]])})
    rows = figure_rows(panel, [None, GroupSplit("g", ("B",))], ["pb"])
    assert rows == [["year", "group", "variable", "mean"],
                    ["2000", "all", "pb", "2.0"], ["2001", "all", "pb", "3.5"],
                    ["2000", "g", "pb", "3.0"], ["2001", "g", "pb", "5.0"]]


def test_figure_data_matches_cross_sectional_average(tmp_path):
    panel = FiscalDGP().panel(np.random.default_rng(0))
    high = GroupSplit("high_debt", panel.unit_ids[:20])
    path = tmp_path / "fig.tsv"
    emit_figure_data(panel, [None, high], path)
    data = read_figure_data(path)
    assert len(data[("all", "debt")]) == 33
    for var in ("pb", "debt", "ygap", "ggap"):
        np.testing.assert_array_equal(data[("all", var)], cross_sectional_average(panel, var))
        np.testing.assert_array_equal(data[("high_debt", var)],
                                      cross_sectional_average(panel, var, high))
