"""Run configuration: TOML file, command-line overrides, environment override.

Example file::

    data = "panel.csv"
    output_dir = "out"
    gfc_break_year = 2008
    hp_lambda = 100
    csa_lags = "auto"
    jackknife = false
    seed = 0

    [columns]          # logical variable -> column in the data file
    pb = "primary_balance"
    debt = "debt"

    [groups]
    median_split = true
    industrial = ["AUS", "AUT"]
    emerging = ["BRA", "BGR"]

Logical variables are ``pb`` (primary balance), ``debt``, ``ca`` (current
account), ``gdp`` and ``gcons`` (levels, detrended into gaps) or ``ygap``
and ``ggap`` supplied directly.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .dcce import AUTO
from .errors import ConfigError

OUTPUT_DIR_ENV = "FISCALPANEL_OUTPUT_DIR"

LOGICAL_VARIABLES = ("pb", "debt", "ca", "gdp", "gcons", "ygap", "ggap")
DEFAULT_COLUMNS = {"pb": "pb", "debt": "debt", "ca": "ca", "gdp": "gdp", "gcons": "gcons"}

# settings that change how a run executes but not what it computes
EXECUTION_KEYS = ("output_dir", "workers")


@dataclass(frozen=True)
class SustainabilitySettings:
    """Scenario used to turn each estimated rule into a sustainability verdict."""

    r: float = 0.03
    g: float = 0.02
    horizon: int = 500
    # initial debt: None takes the group's cross-unit mean debt in the last year
    b0: float | None = None
    s0: float = 0.0


@dataclass(frozen=True)
class RunConfig:
    data: str | None = None
    synthetic: bool = False
    output_dir: str = "fiscalpanel-out"
    columns: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_COLUMNS))
    unit_col: str = "country"
    year_col: str = "year"
    delimiter: str = ","
    drop_incomplete: bool = False
    first_year: int | None = None
    last_year: int | None = None
    median_split: bool = True
    groups: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    gfc_break_year: int = 2008
    hp_lambda: float = 100.0
    csa_lags: int | str = AUTO
    jackknife: bool = False
    seed: int = 0
    workers: int = 1
    sustainability: SustainabilitySettings = SustainabilitySettings()

    def __post_init__(self):
        unknown = sorted(set(self.columns) - set(LOGICAL_VARIABLES))
        if unknown:
            raise ConfigError(f"unknown variable(s) {unknown} in column mapping; "
                              f"known: {list(LOGICAL_VARIABLES)}")
        cols = dict(self.columns)
        for needed in ("pb", "debt"):
            if needed not in cols:
                raise ConfigError(f"column mapping lacks {needed!r}")
        for gap, level in (("ygap", "gdp"), ("ggap", "gcons")):
            if gap not in cols and level not in cols:
                raise ConfigError(f"column mapping needs {gap!r} or the level series {level!r}")
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "groups", {k: tuple(v) for k, v in self.groups.items()})
        for name, members in self.groups.items():
            if name in ("all", "high_debt", "low_debt"):
                raise ConfigError(f"group name {name!r} is reserved")
            if not members:
                raise ConfigError(f"group {name!r} is empty")
        if self.csa_lags != AUTO and not (isinstance(self.csa_lags, int) and self.csa_lags >= 0):
            raise ConfigError(f"csa_lags must be a nonnegative integer or {AUTO!r}")
        if self.hp_lambda < 0:
            raise ConfigError("hp_lambda must be nonnegative")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if (self.data is None) == (not self.synthetic):
            raise ConfigError("set exactly one of 'data' or 'synthetic = true'")
        if isinstance(self.sustainability, Mapping):
            object.__setattr__(self, "sustainability", _build(SustainabilitySettings,
                                                              self.sustainability, "sustainability"))

    def validate_paths(self) -> None:
        if self.data is not None and not Path(self.data).is_file():
            raise ConfigError(f"data file {self.data!r} does not exist")

    def canonical(self) -> dict[str, Any]:
        """Settings that determine the results, in a stable JSON-ready form."""
        out = asdict(self)
        for k in EXECUTION_KEYS:
            out.pop(k)
        out["groups"] = {k: list(v) for k, v in self.groups.items()}
        # the file is identified by name here and by content hash in the manifest
        if self.data is not None:
            out["data"] = Path(self.data).name
        return out

    def digest(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _build(cls, raw: Mapping[str, Any], where: str):
    names = {f.name for f in fields(cls)}
    extra = sorted(set(raw) - names)
    if extra:
        raise ConfigError(f"unknown key(s) {extra} in {where}")
    try:
        return cls(**raw)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _flatten(raw: Mapping[str, Any]) -> dict[str, Any]:
    raw = dict(raw)
    groups = dict(raw.pop("groups", {}) or {})
    if "median_split" in groups:
        raw["median_split"] = bool(groups.pop("median_split"))
    if groups:
        raw["groups"] = groups
    return raw


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None,
                environ: Mapping[str, str] | None = None) -> RunConfig:
    """Merge the TOML file, then ``overrides`` (None values ignored), then the environment.

    A relative ``data`` path in the file is resolved against the file's directory.
    """
    raw: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file {str(path)!r} does not exist") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        raw = _flatten(raw)
        if "data" in raw and not Path(raw["data"]).is_absolute():
            raw["data"] = str(path.parent / raw["data"])
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    # a data source given as an override replaces the file's source
    if overrides.get("data") is not None:
        raw.pop("synthetic", None)
    if overrides.get("synthetic"):
        raw.pop("data", None)
    raw.update(overrides)
    env = os.environ if environ is None else environ
    if env.get(OUTPUT_DIR_ENV):
        raw["output_dir"] = env[OUTPUT_DIR_ENV]
    if "columns" in raw:
        # a partial mapping in the file extends the defaults it does not replace
        merged = dict(DEFAULT_COLUMNS)
        merged.update(raw["columns"])
        if "ygap" in raw["columns"]:
            merged.pop("gdp", None)
        if "ggap" in raw["columns"]:
            merged.pop("gcons", None)
        # an empty column name switches a default variable off
        raw["columns"] = {k: v for k, v in merged.items() if v}
    return _build(RunConfig, raw, "config")


def with_overrides(config: RunConfig, **kw) -> RunConfig:
    return replace(config, **{k: v for k, v in kw.items() if v is not None})
