"""Balanced country-year panels: ingestion, group splits and cross-sectional averages."""

from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateSplit,
    DuplicateRow,
    EmptyFile,
    EmptyGroup,
    MissingCell,
    UnknownVariable,
    UnparsableNumber,
    ValidationError,
)

log = logging.getLogger(__name__)

# plain decimal or scientific notation, dot separator only
_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PanelDataset:
    """Balanced N x T panel. Rows follow ``unit_ids``, columns follow ``years``.

    Ratio variables are kept in percent of GDP (58.99, not 0.5899).
    """

    unit_ids: tuple[str, ...]
    years: tuple[int, ...]
    variables: Mapping[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        units = tuple(str(u) for u in self.unit_ids)
        years = tuple(int(y) for y in self.years)
        if len(set(units)) != len(units):
            raise ValidationError("unit ids must be unique")
        if list(units) != sorted(units):
            raise ValidationError("unit ids must be sorted lexicographically")
        if not years:
            raise ValidationError("panel has no years")
        if any(b - a != 1 for a, b in zip(years, years[1:])):
            raise ValidationError("years must be strictly consecutive")
        shape = (len(units), len(years))
        frozen = {}
        for name, values in self.variables.items():
            arr = _readonly(values)
            if arr.shape != shape:
                raise ValidationError(f"variable {name!r} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"variable {name!r} contains non-finite values")
            frozen[name] = arr
        object.__setattr__(self, "unit_ids", units)
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "variables", dict(sorted(frozen.items())))

    @property
    def n_units(self) -> int:
        return len(self.unit_ids)

    @property
    def n_years(self) -> int:
        return len(self.years)

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.variables[name]
        except KeyError:
            raise UnknownVariable(name, self.variables) from None

    def __contains__(self, name: str) -> bool:
        return name in self.variables

    def series(self, var: str, unit: str) -> np.ndarray:
        return self[var][self.unit_index(unit)]

    def unit_index(self, unit: str) -> int:
        try:
            return self.unit_ids.index(unit)
        except ValueError:
            raise ValidationError(f"unknown unit {unit!r}") from None

    def with_variable(self, name: str, values: np.ndarray) -> "PanelDataset":
        new = dict(self.variables)
        new[name] = values
        return PanelDataset(self.unit_ids, self.years, new)

    def subset(self, members: Iterable[str]) -> "PanelDataset":
        members = sorted(set(members))
        if not members:
            raise EmptyGroup("cannot take an empty subset of units")
        idx = [self.unit_index(u) for u in members]
        return PanelDataset(tuple(members), self.years,
                            {k: v[idx] for k, v in self.variables.items()})

    def window(self, first: int, last: int) -> "PanelDataset":
        """Restrict to the years ``first..last`` inclusive."""
        cols = [j for j, y in enumerate(self.years) if first <= y <= last]
        if not cols:
            raise ValidationError(f"no years in window {first}-{last}")
        return PanelDataset(self.unit_ids, tuple(self.years[j] for j in cols),
                            {k: v[:, cols] for k, v in self.variables.items()})

    def to_csv(self, path: str | Path, delimiter: str = ",",
               unit_col: str = "country", year_col: str = "year") -> None:
        """Write in the long format read by :func:`ingest_table`.

        Values are written with ``repr`` so that re-ingesting is exact.
        """
        names = list(self.variables)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
            w.writerow([unit_col, year_col, *names])
            for i, unit in enumerate(self.unit_ids):
                for j, year in enumerate(self.years):
                    w.writerow([unit, year, *(repr(float(self.variables[n][i, j])) for n in names)])


@dataclass(frozen=True)
class GroupSplit:
    label: str
    members: tuple[str, ...]

    def __post_init__(self):
        members = tuple(sorted(set(self.members)))
        if not members:
            raise EmptyGroup(f"group {self.label!r} has no members")
        object.__setattr__(self, "members", members)

    def check_within(self, panel: PanelDataset) -> None:
        missing = set(self.members) - set(panel.unit_ids)
        if missing:
            raise ValidationError(
                f"group {self.label!r} names units absent from the panel: {', '.join(sorted(missing))}")


@dataclass(frozen=True)
class VariableSummary:
    mean: float
    median: float
    sd: float
    min: float
    max: float


@dataclass(frozen=True)
class TableSchema:
    """Column layout of a long-format panel file.

    ``columns`` maps panel variable names to file column names. When it is
    empty every non-key column is read under its own name.
    """

    unit_col: str = "country"
    year_col: str = "year"
    columns: Mapping[str, str] = field(default_factory=dict)


def _parse_number(text: str, line: int, column: str) -> float:
    s = text.strip()
    if not _NUMBER.match(s):
        raise UnparsableNumber(text, line, column)
    return float(s)


def ingest_table(path: str | Path, schema: TableSchema | Mapping[str, str] | None = None,
                 *, delimiter: str = ",", drop_incomplete: bool = False,
                 years: tuple[int, int] | None = None) -> PanelDataset:
    """Read a delimited long-format file into a balanced :class:`PanelDataset`.

    Rows may appear in any order. Units with holes raise :class:`MissingCell`
    unless ``drop_incomplete`` is set, in which case they are dropped with a
    warning. ``years`` optionally restricts the window before the balance check.
    """
    if schema is None:
        schema = TableSchema()
    elif not isinstance(schema, TableSchema):
        schema = TableSchema(columns=dict(schema))

    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        header = next(reader, None)
        if header is None or not any(h.strip() for h in header):
            raise EmptyFile(f"{path} is empty")
        header = [h.strip() for h in header]
        for key in (schema.unit_col, schema.year_col):
            if key not in header:
                raise ValidationError(f"{path}: header lacks required column {key!r}")
        columns = dict(schema.columns) or {h: h for h in header
                                            if h not in (schema.unit_col, schema.year_col)}
        for var, col in columns.items():
            if col not in header:
                raise UnknownVariable(col, [h for h in header
                                            if h not in (schema.unit_col, schema.year_col)])
        pos = {h: k for k, h in enumerate(header)}
        iu, iy = pos[schema.unit_col], pos[schema.year_col]

        cells: dict[tuple[str, int], dict[str, float]] = {}
        for line, row in enumerate(reader, start=2):
            if not row or not any(c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ValidationError(f"{path}: line {line} has {len(row)} fields, expected {len(header)}")
            unit = row[iu].strip()
            ytext = row[iy].strip()
            if not re.fullmatch(r"[+-]?\d+", ytext):
                raise UnparsableNumber(row[iy], line, schema.year_col)
            year = int(ytext)
            if years is not None and not (years[0] <= year <= years[1]):
                continue
            if (unit, year) in cells:
                raise DuplicateRow(unit, year, line)
            values = {}
            for var, col in columns.items():
                text = row[pos[col]]
                if text.strip() == "":
                    values[var] = None
                else:
                    values[var] = _parse_number(text, line, col)
            cells[(unit, year)] = values

    if not cells:
        raise EmptyFile(f"{path} has no data rows")

    units = sorted({u for u, _ in cells})
    all_years = sorted({y for _, y in cells})
    span = list(range(all_years[0], all_years[-1] + 1))
    names = sorted(columns)

    def first_hole(unit):
        for y in span:
            vals = cells.get((unit, y))
            if vals is None:
                return y, None
            for v in names:
                if vals[v] is None:
                    return y, v
        return None

    holes = {u: h for u in units if (h := first_hole(u)) is not None}
    if holes:
        if not drop_incomplete:
            u = next(iter(holes))
            raise MissingCell(u, *holes[u])
        for u in holes:
            log.warning("dropping unit %s: no observation for %s", u, holes[u][0])
        units = [u for u in units if u not in holes]
        if not units:
            raise EmptyFile(f"{path}: no complete units remain after dropping incomplete ones")

    data = {v: np.array([[cells[(u, y)][v] for y in span] for u in units], dtype=float)
            for v in names}
    return PanelDataset(tuple(units), tuple(span), data)


def median_debt_split(panel: PanelDataset, debt_var: str) -> tuple[GroupSplit, GroupSplit]:
    """Split units on their time-median debt ratio.

    Units strictly above the cross-unit median of unit medians form the
    high-debt group; the rest (at or below) form the low-debt group. Even
    counts use the mean of the two middle order statistics.
    """
    debt = panel[debt_var]
    unit_medians = np.median(debt, axis=1)
    cut = np.median(unit_medians)
    high = [u for u, m in zip(panel.unit_ids, unit_medians) if m > cut]
    low = [u for u, m in zip(panel.unit_ids, unit_medians) if m <= cut]
    if not high:
        raise DegenerateSplit(f"no unit has median {debt_var} strictly above the median {cut:g}")
    return GroupSplit("high_debt", tuple(high)), GroupSplit("low_debt", tuple(low))


def cross_sectional_average(panel: PanelDataset, var: str,
                            members: Sequence[str] | GroupSplit | None = None) -> np.ndarray:
    """Per-year arithmetic mean of ``var`` over ``members`` (all units if None)."""
    values = panel[var]
    if members is None:
        return values.mean(axis=0)
    if isinstance(members, GroupSplit):
        members = members.members
    members = sorted(set(members))
    if not members:
        raise EmptyGroup("cross-sectional average over an empty group")
    idx = [panel.unit_index(u) for u in members]
    return values[idx].mean(axis=0)


def summarize(panel: PanelDataset, var: str) -> VariableSummary:
    """Pooled summary statistics over all unit-year cells."""
    x = panel[var].ravel()
    return VariableSummary(mean=float(x.mean()), median=float(np.median(x)),
                           sd=float(x.std(ddof=1)) if x.size > 1 else 0.0,
                           min=float(x.min()), max=float(x.max()))
