"""End-to-end batch run: ingest, detrend, diagnose, estimate, report.

Every computation is pure; independent pieces (per-variable diagnostics,
per-group regressions) may run on a thread pool, and results are merged in a
fixed order before a single writer stage renders all files into a staging
directory. The staging directory replaces the outputs only when everything
succeeded, so a failed run leaves no partial artifacts behind.
"""

from __future__ import annotations

import hashlib
import json
import logging
import platform
import shutil
import tempfile
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import scipy

from . import __version__
from .config import RunConfig
from .dcce import EstimationOptions, MeanGroupResult, RegressionSpec, estimate_dcce
from .diagnostics import cd_plus_test, cd_test, cips_test, slope_homogeneity_test
from .errors import ConfigError, FiscalPanelError
from .hpfilter import FilterConfig, detrend_panel
from .panel import GroupSplit, PanelDataset, TableSchema, ingest_table, median_debt_split, summarize
from .report import (
    MISSING,
    RegressionLayout,
    default_rows,
    diagnostics_rows,
    emit_figure_data,
    emit_regression_table,
    format_sig,
    slope_rows,
    write_tsv,
)
from .sustainability import EconomyPath, FiscalRule, ponzi_decay_factor, simulate_debt_path
from .synthetic import FiscalDGP

log = logging.getLogger(__name__)

LABELS = {
    "pb": "primary balance-to-GDP ratio",
    "debt": "debt-to-GDP ratio",
    "ygap": "Output gap",
    "ggap": "Spending gap",
    "ca": "Current account-to-GDP ratio",
}
GROUP_TITLES = {"all": "Aggregate panel", "high_debt": "High-debt countries",
                "low_debt": "Low-debt countries"}
TABLE_VARIABLES = ("pb", "debt", "ygap", "ggap", "ca")
FIGURE_VARIABLES = ("pb", "debt", "ygap", "ggap")
BASE_REGRESSORS = ("L.debt", "ygap", "ggap")

STAGES = ("diagnose", "estimate", "figures")
DIAGNOSTICS_FILE = "summary_diagnostics.tsv"
SLOPE_FILE = "slope_homogeneity.tsv"
REGRESSION_FILE = "regressions.tsv"
LONG_RUN_FILE = "long_run_sustainability.tsv"
FIGURE_FILE = "figure_data.tsv"
MANIFEST_FILE = "manifest.txt"


@dataclass(frozen=True)
class PipelineResult:
    output_dir: Path
    files: tuple[str, ...]


# --- inputs ---------------------------------------------------------------------

def load_panel(config: RunConfig) -> PanelDataset:
    """Read (or simulate) the panel and derive output and spending gaps."""
    if config.synthetic:
        panel = synthetic_panel(config.seed)
        keep = {v: panel[v] for v in config.columns if v in panel}
        panel = PanelDataset(panel.unit_ids, panel.years, keep)
        if config.first_year is not None or config.last_year is not None:
            panel = panel.window(config.first_year or panel.years[0],
                                 config.last_year or panel.years[-1])
    else:
        config.validate_paths()
        window = None
        if config.first_year is not None or config.last_year is not None:
            window = (config.first_year if config.first_year is not None else -10**9,
                      config.last_year if config.last_year is not None else 10**9)
        schema = TableSchema(config.unit_col, config.year_col, dict(config.columns))
        panel = ingest_table(config.data, schema, delimiter=config.delimiter,
                             drop_incomplete=config.drop_incomplete, years=window)
    return add_gaps(panel, config)


def synthetic_panel(seed: int, n_units: int = 52, n_years: int = 33) -> PanelDataset:
    """Seeded synthetic dataset with the same variables as a real input file."""
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    return FiscalDGP(n_units=n_units, n_years=n_years).panel(rng, levels=True)


def add_gaps(panel: PanelDataset, config: RunConfig) -> PanelDataset:
    hp = FilterConfig(lam=config.hp_lambda)
    for gap, level in (("ygap", "gdp"), ("ggap", "gcons")):
        if level in config.columns:
            panel = detrend_panel(panel, level, hp, name=gap)
    return panel


def validate_against_panel(config: RunConfig, panel: PanelDataset) -> None:
    if not panel.years[0] < config.gfc_break_year <= panel.years[-1]:
        raise ConfigError(f"gfc_break_year {config.gfc_break_year} must lie in "
                          f"{panel.years[0] + 1}-{panel.years[-1]} so the dummy varies")
    for name, members in config.groups.items():
        GroupSplit(name, members).check_within(panel)


def build_groups(config: RunConfig, panel: PanelDataset) -> list[GroupSplit | None]:
    """Full panel (None), then the median-debt pair, then configured groups in file order."""
    groups: list[GroupSplit | None] = [None]
    if config.median_split:
        groups += list(median_debt_split(panel, "debt"))
    groups += [GroupSplit(name, members) for name, members in config.groups.items()]
    return groups


def regression_specs(config: RunConfig, panel: PanelDataset,
                     groups: Sequence[GroupSplit | None]) -> list[RegressionSpec]:
    """Two specifications per group: without and with the current account."""
    variants = [BASE_REGRESSORS]
    if "ca" in panel:
        variants.append(BASE_REGRESSORS + ("ca",))
    specs = []
    for g in groups:
        for regs in variants:
            specs.append(RegressionSpec("pb", regs, lag_dependent=1,
                                        dummy_year=config.gfc_break_year,
                                        csa_lags=config.csa_lags, group=g,
                                        label="all" if g is None else g.label))
    return specs


# --- stages -----------------------------------------------------------------------

def _map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def run_diagnostics(panel: PanelDataset, workers: int = 1):
    variables = [v for v in TABLE_VARIABLES if v in panel]

    def one(var):
        return (LABELS[var], summarize(panel, var),
                {"CD": cd_test(panel, var), "CD+": cd_plus_test(panel, var),
                 "CIPS": cips_test(panel, var)})

    return _map(one, variables, workers)


def slope_spec(config: RunConfig, panel: PanelDataset) -> RegressionSpec:
    regs = BASE_REGRESSORS + (("ca",) if "ca" in panel else ())
    return RegressionSpec("pb", regs, lag_dependent=1, dummy_year=config.gfc_break_year,
                          csa_lags=config.csa_lags, label="all")


def run_regressions(config: RunConfig, panel: PanelDataset,
                    specs: Sequence[RegressionSpec]) -> list[MeanGroupResult]:
    options = EstimationOptions(jackknife=config.jackknife, workers=1)
    return _map(lambda s: estimate_dcce(panel, s, options), specs, config.workers)


def long_run_rows(config: RunConfig, panel: PanelDataset, specs: Sequence[RegressionSpec],
                  results: Sequence[MeanGroupResult]) -> list[list[str]]:
    """Long-run response and sustainability verdict for each estimated rule.

    The rule is simulated with zero non-debt determinants from the scenario in
    the configuration; the initial debt defaults to the group's mean debt in
    the last sample year.
    """
    sc = config.sustainability
    out = [["regression", "group", "phi", "rho", "long_run_response", "decay_factor",
            "b0", "discounted_debt_end", "verdict", "note"]]
    for k, (spec, res) in enumerate(zip(specs, results), start=1):
        phi = res.mg_coefficients["L.pb"]
        rho = res.mg_coefficients["L.debt"]
        members = None if spec.group is None else spec.group.members
        debt = panel["debt"] if members is None else panel.subset(members)["debt"]
        b0 = sc.b0 if sc.b0 is not None else float(debt[:, -1].mean())
        lr = rho / (1.0 - phi) if phi < 1 else float("nan")
        row = [f"({k})", spec.label, format_sig(phi), format_sig(rho), format_sig(lr)]
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                path = simulate_debt_path(FiscalRule(phi, rho), EconomyPath(sc.r, sc.g),
                                          b0, sc.s0, sc.horizon)
                decay = ponzi_decay_factor(phi, rho)
            note = "; ".join(sorted({str(w.message) for w in caught}))
            row += [format_sig(decay), format_sig(b0), format_sig(float(path.discounted_b[-1])),
                    path.verdict.value, note or MISSING]
        except FiscalPanelError as exc:
            row += [MISSING, format_sig(b0), MISSING, "NotEvaluated", str(exc)]
        out.append(row)
    return out


# --- orchestration -------------------------------------------------------------------

def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def manifest_text(config: RunConfig, staged: Path, names: Sequence[str]) -> str:
    data_id = (f"synthetic seed {config.seed}" if config.synthetic
               else _sha256(Path(config.data)))
    lines = [
        f"fiscalpanel {__version__}",
        f"python {platform.python_version()}",
        f"numpy {np.__version__}",
        f"scipy {scipy.__version__}",
        f"config_sha256 {config.digest()}",
        f"data_sha256 {data_id}",
        "config " + json.dumps(config.canonical(), sort_keys=True),
        "files",
    ]
    lines += [f"{n}\t{_sha256(staged / n)}" for n in names]
    return "\n".join(lines) + "\n"


def run_pipeline(config: RunConfig, stages: Sequence[str] = STAGES) -> PipelineResult:
    """Run the requested stages and write their artifacts plus a manifest.

    Validation problems raise :class:`ValidationError` before any estimation;
    computation problems raise :class:`ComputationError`. Either way the
    output directory is left untouched.
    """
    unknown = set(stages) - set(STAGES)
    if unknown:
        raise ConfigError(f"unknown stage(s) {sorted(unknown)}")
    panel = load_panel(config)
    validate_against_panel(config, panel)
    groups = build_groups(config, panel)
    specs = regression_specs(config, panel, groups)
    for s in specs:
        s.check(panel)

    out_dir = Path(config.output_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    staged = Path(tempfile.mkdtemp(prefix=".fiscalpanel-", dir=out_dir.parent))
    try:
        names = _compute_and_write(config, panel, groups, specs, stages, staged)
        (staged / MANIFEST_FILE).write_text(manifest_text(config, staged, names),
                                            encoding="utf-8", newline="\n")
        names.append(MANIFEST_FILE)
        out_dir.mkdir(exist_ok=True)
        for n in names:
            (staged / n).replace(out_dir / n)
    finally:
        shutil.rmtree(staged, ignore_errors=True)
    return PipelineResult(out_dir, tuple(names))


def _compute_and_write(config, panel, groups, specs, stages, staged: Path) -> list[str]:
    names: list[str] = []
    if "diagnose" in stages:
        entries = run_diagnostics(panel, config.workers)
        slope = slope_homogeneity_test(panel, slope_spec(config, panel))
        write_tsv(staged / DIAGNOSTICS_FILE, diagnostics_rows(entries))
        label = "pb ~ " + " + ".join(("L.pb",) + slope_spec(config, panel).regressors)
        write_tsv(staged / SLOPE_FILE, slope_rows(label, slope))
        names += [DIAGNOSTICS_FILE, SLOPE_FILE]
    if "estimate" in stages:
        results = run_regressions(config, panel, specs)
        dummy = specs[0].dummy_name
        layout = RegressionLayout(
            rows=default_rows("pb", LABELS, dummy, ("ca",) if "ca" in panel else ()),
            headers=tuple(GROUP_TITLES.get(s.label, s.label) for s in specs))
        emit_regression_table(results, layout, staged / REGRESSION_FILE)
        write_tsv(staged / LONG_RUN_FILE, long_run_rows(config, panel, specs, results))
        names += [REGRESSION_FILE, LONG_RUN_FILE]
    if "figures" in stages:
        emit_figure_data(panel, groups, staged / FIGURE_FILE, FIGURE_VARIABLES)
        names.append(FIGURE_FILE)
    return names
