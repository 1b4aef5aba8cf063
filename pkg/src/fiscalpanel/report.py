"""Tab-separated report tables and figure data.

Rounding rule: table numbers are printed to a fixed number of significant
digits (4 for coefficients, standard errors and statistics) or decimals (4
for p-values) with Python's correctly rounded formatting, so exact ties
round half to even. Figure data keep full round-trip precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dcce import CONST, MeanGroupResult
from .diagnostics import TestResult
from .errors import EmptyGroup
from .panel import GroupSplit, PanelDataset, VariableSummary, cross_sectional_average

MISSING = "--"
SIG_DIGITS = 4
P_DECIMALS = 4
STAR_LEVELS = ((0.01, "***"), (0.05, "**"), (0.10, "*"))


def format_sig(x: float, digits: int = SIG_DIGITS) -> str:
    if x is None or not math.isfinite(x):
        return "nan" if x is None or math.isnan(x) else ("inf" if x > 0 else "-inf")
    if x == 0:
        return "0"
    return format(x, f".{digits}g")


def format_p(p: float | None, bound: str | None = None) -> str:
    if p is None:
        return MISSING
    text = format(p, f".{P_DECIMALS}f")
    return f"{bound}{text}" if bound else text


def stars(p: float | None) -> str:
    if p is None or not math.isfinite(p):
        return ""
    for level, mark in STAR_LEVELS:
        if p < level:
            return mark
    return ""


def coefficient_cells(coef: float, se: float, p: float) -> tuple[str, str]:
    """Coefficient with significance stars over its standard error in parentheses."""
    return format_sig(coef) + stars(p), f"({format_sig(se)})"


def write_tsv(path: str | Path, rows: Iterable[Sequence[str]]) -> None:
    text = "".join("\t".join(str(c) for c in row) + "\n" for row in rows)
    Path(path).write_text(text, encoding="utf-8", newline="\n")


# --- regression table -------------------------------------------------------------

@dataclass(frozen=True)
class RegressionLayout:
    """Row order and labels of a regression table.

    ``rows`` pairs coefficient names with display labels; ``headers`` gives
    one group label per result column.
    """

    rows: tuple[tuple[str, str], ...]
    headers: tuple[str, ...]


def regression_rows(results: Sequence[MeanGroupResult | None],
                    layout: RegressionLayout) -> list[list[str]]:
    if len(layout.headers) != len(results):
        raise ValueError("one header per result column is required")
    out = [[""] + [f"({k})" for k in range(1, len(results) + 1)],
           [""] + list(layout.headers)]
    for name, label in layout.rows:
        top, bottom = [label], [""]
        for res in results:
            if res is None or name not in res.mg_coefficients:
                top.append(MISSING)
                bottom.append(MISSING)
            else:
                c, s = coefficient_cells(res.mg_coefficients[name], res.mg_se[name],
                                         res.pvalue(name))
                top.append(c)
                bottom.append(s)
        out += [top, bottom]
    out.append(["Units"] + [MISSING if r is None else str(r.n_units) for r in results])
    out.append(["Half-panel jackknife"]
               + [MISSING if r is None else ("yes" if r.bias_corrected else "no") for r in results])
    return out


def emit_regression_table(results: Sequence[MeanGroupResult | None], layout: RegressionLayout,
                          path: str | Path) -> None:
    write_tsv(path, regression_rows(results, layout))


def default_rows(dependent: str, labels: Mapping[str, str], dummy: str | None,
                 extra: Sequence[str] = ()) -> tuple[tuple[str, str], ...]:
    """Lagged dependent, lagged debt, constant, gaps, break dummy, then ``extra``."""
    rows = [(f"L.{dependent}", f"Lagged {labels[dependent]}"),
            ("L.debt", f"Lagged {labels['debt']}"),
            (CONST, "Constant"),
            ("ygap", labels["ygap"]),
            ("ggap", labels["ggap"])]
    if dummy is not None:
        rows.append((dummy, f"{dummy[1:]} break dummy"))
    rows += [(v, labels[v]) for v in extra]
    return tuple(rows)


# --- summary and diagnostics table ---------------------------------------------

def _stat_cell(res: TestResult | None, p: float | None = None, bound: str | None = None) -> str:
    if res is None:
        return MISSING
    p = res.p_value if p is None else p
    return f"{format_sig(res.statistic)} ({format_p(p, bound)})"


def diagnostics_rows(entries: Sequence[tuple[str, VariableSummary, Mapping[str, TestResult]]]
                     ) -> list[list[str]]:
    """One row per variable: summary statistics then CD, CD+, CADF and CIPS.

    The CADF column is the Fisher combination of unit CADF p-values; the CIPS
    p-value is interpolated in the critical-value table and carries "<=" or
    ">=" when truncated at its ends.
    """
    out = [["variable", "mean", "median", "sd", "min", "max", "CD", "CD+", "CADF", "CIPS"]]
    for label, s, tests in entries:
        row = [label] + [format_sig(v) for v in (s.mean, s.median, s.sd, s.min, s.max)]
        row.append(_stat_cell(tests.get("CD")))
        row.append(_stat_cell(tests.get("CD+")))
        cips = tests.get("CIPS")
        if cips is None:
            row += [MISSING, MISSING]
        else:
            fisher = TestResult("CADF", cips.detail["fisher_statistic"],
                                cips.detail["fisher_p_value"])
            row.append(_stat_cell(fisher))
            row.append(_stat_cell(cips, bound=cips.detail.get("p_value_bound")))
        out.append(row)
    return out


def slope_rows(label: str, res: TestResult) -> list[list[str]]:
    d = res.detail
    return [["specification", "statistic", "p_value", "S", "slopes", "bandwidth",
             "null_mean", "null_var", "small_sample"],
            [label, format_sig(res.statistic), format_p(res.p_value), format_sig(d["S"]),
             str(d["k"]), str(d["bandwidth"]), format_sig(d["null_mean"]),
             format_sig(d["null_var"]), d["small_sample"]]]


# --- figure data -----------------------------------------------------------------

def figure_rows(panel: PanelDataset, groups: Sequence[GroupSplit | None],
                variables: Sequence[str]) -> list[list[str]]:
    """Per-year group means; ``None`` in ``groups`` stands for the full panel ("all")."""
    out = [["year", "group", "variable", "mean"]]
    for g in groups:
        if g is not None and not g.members:
            raise EmptyGroup(f"group {g.label} is empty")
        label = "all" if g is None else g.label
        for var in variables:
            means = cross_sectional_average(panel, var, g)
            out += [[str(y), label, var, repr(float(m))] for y, m in zip(panel.years, means)]
    return out


def emit_figure_data(panel: PanelDataset, groups: Sequence[GroupSplit | None],
                     path: str | Path, variables: Sequence[str] = ("pb", "debt", "ygap", "ggap")
                     ) -> None:
    write_tsv(path, figure_rows(panel, groups, variables))


def read_figure_data(path: str | Path) -> dict[tuple[str, str], np.ndarray]:
    """Parse a figure-data file back into ``{(group, variable): means by year}``."""
    series: dict[tuple[str, str], list[float]] = {}
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    for line in lines[1:]:
        _, group, var, mean = line.split("\t")
        series.setdefault((group, var), []).append(float(mean))
    return {k: np.array(v) for k, v in series.items()}
