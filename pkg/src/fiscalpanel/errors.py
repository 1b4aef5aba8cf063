"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` covers bad input
(files, configs, variable names) and maps to CLI exit status 2;
:class:`ComputationError` covers numerical failures and maps to status 3.
"""

from __future__ import annotations


class FiscalPanelError(Exception):
    """Base class for all package errors."""


class ValidationError(FiscalPanelError):
    pass


class ComputationError(FiscalPanelError):
    pass


# --- ingestion / data model -------------------------------------------------

class EmptyFile(ValidationError):
    pass


class MissingCell(ValidationError):
    def __init__(self, unit: str, year: int, variable: str | None = None):
        self.unit, self.year, self.variable = unit, year, variable
        what = f" variable {variable!r}" if variable else ""
        super().__init__(f"missing observation for unit {unit!r}, year {year}{what}")


class DuplicateRow(ValidationError):
    def __init__(self, unit: str, year: int, line: int):
        self.unit, self.year, self.line = unit, year, line
        super().__init__(f"duplicate row for unit {unit!r}, year {year} (line {line})")


class UnparsableNumber(ValidationError):
    def __init__(self, text: str, line: int, column: str):
        self.text, self.line, self.column = text, line, column
        super().__init__(f"cannot parse {text!r} as a number at line {line}, column {column!r}")


class UnknownVariable(ValidationError):
    def __init__(self, name: str, available=()):
        self.name = name
        hint = f" (available: {', '.join(sorted(available))})" if available else ""
        super().__init__(f"unknown variable {name!r}{hint}")


class EmptyGroup(ValidationError):
    pass


class DegenerateSplit(ComputationError):
    pass


class ConfigError(ValidationError):
    pass


# --- numerical ----------------------------------------------------------------

class SeriesTooShort(ComputationError):
    pass


class NonFiniteInput(ComputationError):
    pass


class ZeroTrend(ComputationError):
    pass


class ZeroVariance(ComputationError):
    def __init__(self, message: str, unit: str | None = None):
        self.unit = unit
        super().__init__(message)


# the cross-sectional dependence tests name the offending unit
ZeroVarianceUnit = ZeroVariance


class TooFewUnits(ComputationError):
    pass


class RankDeficient(ComputationError):
    def __init__(self, message: str, columns=()):
        self.columns = tuple(columns)
        super().__init__(message)


CollinearRegressors = RankDeficient


class InsufficientObservations(ComputationError):
    pass


class InsufficientDegreesOfFreedom(ComputationError):
    pass


class InconsistentCoefficientSets(ComputationError):
    pass


class UnitEstimationFailed(ComputationError):
    """Raised by the full estimator when one or more units cannot be fitted."""

    def __init__(self, failures: dict[str, Exception]):
        self.failures = dict(failures)
        lines = "; ".join(f"{u}: {e}" for u, e in self.failures.items())
        super().__init__(f"{len(self.failures)} unit(s) failed: {lines}")


class NonStationaryInertia(ComputationError):
    pass


class NonPositiveGrossRate(ComputationError):
    pass


class HorizonZero(ComputationError):
    pass
