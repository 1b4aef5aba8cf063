"""Command-line entry point.

Exit status is 0 on success, 2 for invalid input or configuration and 3 when
a computation fails; errors are reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .config import RunConfig, load_config, tomllib
from .dcce import AUTO
from .errors import ComputationError, ConfigError, FiscalPanelError, ValidationError
from .report import write_tsv

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_COMPUTATION = 3

SCENARIO_KEYS = ("phi", "rho", "mu", "r", "g", "b0", "s0", "horizon", "discount")


def _csa_lags(text: str) -> int | str:
    if text == AUTO:
        return AUTO
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer or {AUTO!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("csa lags must be nonnegative")
    return value


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML run configuration")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--data", help="long-format delimited data file")
    src.add_argument("--synthetic", action="store_true", default=None,
                     help="use the seeded synthetic 52x33 dataset instead of a file")
    p.add_argument("--output-dir", help="directory for the artifacts")
    p.add_argument("--gfc-break-year", type=int, help="first year of the crisis dummy (default 2008)")
    p.add_argument("--hp-lambda", type=float, help="HP smoothing parameter (default 100)")
    p.add_argument("--csa-lags", type=_csa_lags, help=f"lags of cross-sectional averages or {AUTO!r}")
    p.add_argument("--jackknife", action=argparse.BooleanOptionalAction, default=None,
                   help="half-panel jackknife bias correction")
    p.add_argument("--median-split", action=argparse.BooleanOptionalAction, default=None,
                   help="add high/low median-debt groups")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="threads for independent regressions and tests")
    p.add_argument("--first-year", type=int)
    p.add_argument("--last-year", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fiscalpanel",
        description="Fiscal reaction functions on balanced country panels.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest-check", help="load and validate the panel, print its shape")
    _add_run_options(p)
    p = sub.add_parser("diagnose", help="summary statistics and diagnostic tests")
    _add_run_options(p)
    p = sub.add_parser("estimate", help="mean-group regressions and long-run responses")
    _add_run_options(p)
    p = sub.add_parser("report", help="full pipeline: diagnostics, regressions, figure data")
    _add_run_options(p)

    p = sub.add_parser("simulate", help="simulate debt under a fiscal rule")
    p.add_argument("--scenario", help=f"TOML file with keys {', '.join(SCENARIO_KEYS)}")
    for key in ("phi", "rho", "mu", "r", "g", "b0", "s0"):
        p.add_argument(f"--{key}", type=float)
    p.add_argument("--horizon", type=int)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--out", default="debt_path.tsv", help="trajectory file (TSV)")

    p = sub.add_parser("synth", help="write the seeded synthetic dataset as CSV")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--units", type=int, default=52)
    p.add_argument("--years", type=int, default=33)
    p.add_argument("--out", required=True)
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    overrides = {
        "data": args.data, "synthetic": args.synthetic, "output_dir": args.output_dir,
        "gfc_break_year": args.gfc_break_year, "hp_lambda": args.hp_lambda,
        "csa_lags": args.csa_lags, "jackknife": args.jackknife,
        "median_split": args.median_split, "seed": args.seed, "workers": args.workers,
        "first_year": args.first_year, "last_year": args.last_year,
    }
    return load_config(args.config, overrides)


def _scenario(args: argparse.Namespace) -> dict[str, Any]:
    raw: dict[str, Any] = {}
    if args.scenario:
        try:
            with open(args.scenario, "rb") as fh:
                raw = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"scenario file {args.scenario!r} does not exist") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{args.scenario}: {exc}") from None
    extra = sorted(set(raw) - set(SCENARIO_KEYS))
    if extra:
        raise ConfigError(f"unknown scenario key(s) {extra}")
    for key in SCENARIO_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            raw[key] = v
    missing = [k for k in ("phi", "rho", "r", "g", "b0", "horizon") if k not in raw]
    if missing:
        raise ConfigError(f"scenario lacks {missing}")
    return raw


def cmd_simulate(args: argparse.Namespace) -> int:
    from .sustainability import EconomyPath, FiscalRule, simulate_debt_path

    sc = _scenario(args)
    rule = FiscalRule(sc["phi"], sc["rho"], sc.get("mu", 0.0))
    economy = EconomyPath(sc["r"], sc["g"], sc.get("discount"))
    res = simulate_debt_path(rule, economy, sc["b0"], sc.get("s0", 0.0), int(sc["horizon"]),
                             args.tolerance)
    rows = [["t", "surplus", "debt", "discounted_debt"], ["0", repr(res.s0), repr(res.b0),
                                                          repr(res.b0)]]
    rows += [[str(t), repr(float(s)), repr(float(b)), repr(float(d))]
             for t, (s, b, d) in enumerate(zip(res.s, res.b, res.discounted_b), start=1)]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_tsv(out, rows)
    print(json.dumps({"verdict": res.verdict.value, "long_run_response": rule.long_run,
                      "discounted_debt_end": float(res.discounted_b[-1]), "output": str(out)},
                     sort_keys=True))
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    from .pipeline import synthetic_panel

    panel = synthetic_panel(args.seed, args.units, args.years)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    panel.to_csv(out)
    print(json.dumps({"units": panel.n_units, "years": [panel.years[0], panel.years[-1]],
                      "output": str(out)}, sort_keys=True))
    return EXIT_OK


def cmd_ingest_check(args: argparse.Namespace) -> int:
    from .pipeline import load_panel, validate_against_panel

    cfg = _run_config(args)
    panel = load_panel(cfg)
    validate_against_panel(cfg, panel)
    print(json.dumps({"units": panel.n_units, "years": [panel.years[0], panel.years[-1]],
                      "variables": sorted(panel.variables)}, sort_keys=True))
    return EXIT_OK


def cmd_pipeline(args: argparse.Namespace) -> int:
    from .pipeline import run_pipeline

    stages = {"diagnose": ("diagnose",), "estimate": ("estimate",),
              "report": ("diagnose", "estimate", "figures")}[args.command]
    result = run_pipeline(_run_config(args), stages)
    print(json.dumps({"output_dir": str(result.output_dir), "files": list(result.files)},
                     sort_keys=True))
    return EXIT_OK


COMMANDS = {
    "ingest-check": cmd_ingest_check,
    "diagnose": cmd_pipeline,
    "estimate": cmd_pipeline,
    "report": cmd_pipeline,
    "simulate": cmd_simulate,
    "synth": cmd_synth,
}


def _report_error(exc: Exception, code: int) -> int:
    print(json.dumps({"status": "error", "exit_code": code, "error": type(exc).__name__,
                      "message": str(exc)}, sort_keys=True), file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        return _report_error(exc, EXIT_VALIDATION)
    except (ComputationError, FiscalPanelError) as exc:
        return _report_error(exc, EXIT_COMPUTATION)


if __name__ == "__main__":
    sys.exit(main())
