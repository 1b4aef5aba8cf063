import json

import numpy as np
import pytest

from fiscalpanel.cli import EXIT_COMPUTATION, EXIT_OK, EXIT_VALIDATION, main
from fiscalpanel.config import OUTPUT_DIR_ENV, RunConfig, load_config
from fiscalpanel.errors import ConfigError, UnitEstimationFailed, ValidationError
from fiscalpanel.panel import ingest_table
from fiscalpanel.pipeline import (
    FIGURE_FILE,
    MANIFEST_FILE,
    REGRESSION_FILE,
    run_pipeline,
    synthetic_panel,
)


@pytest.fixture(scope="module")
def data_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "panel.csv"
    synthetic_panel(3).to_csv(path)
    return path


def write_config(tmp_path, text):
    path = tmp_path / "run.toml"
    path.write_text(text, encoding="utf-8")
    return path


# --- configuration ----------------------------------------------------------------------

def test_config_defaults_and_file(tmp_path, data_file):
    cfg_path = write_config(tmp_path, f"""
data = "{data_file}"
gfc_break_year = 2007
csa_lags = 2

[columns]
ca = ""

[groups]
median_split = false
north = ["U01", "U02", "U03"]
""")
    cfg = load_config(cfg_path, environ={})
    assert cfg.gfc_break_year == 2007 and cfg.csa_lags == 2
    assert cfg.hp_lambda == 100.0 and cfg.seed == 0 and cfg.jackknife is False
    assert "ca" not in cfg.columns and cfg.columns["pb"] == "pb"
    assert cfg.median_split is False and cfg.groups == {"north": ("U01", "U02", "U03")}


def test_flags_override_file_and_env_overrides_output(tmp_path, data_file):
    cfg_path = write_config(tmp_path, f'data = "{data_file}"\nseed = 4\noutput_dir = "a"\n')
    cfg = load_config(cfg_path, {"seed": 9, "hp_lambda": None}, environ={OUTPUT_DIR_ENV: "env"})
    assert cfg.seed == 9 and cfg.hp_lambda == 100.0 and cfg.output_dir == "env"
    cfg = load_config(cfg_path, {"synthetic": True}, environ={})
    assert cfg.synthetic and cfg.data is None


def test_relative_data_path_resolves_against_config(tmp_path):
    (tmp_path / "d.csv").write_text("country,year\n", encoding="utf-8")
    cfg = load_config(write_config(tmp_path, 'data = "d.csv"\n'), environ={})
    assert cfg.data == str(tmp_path / "d.csv")


@pytest.mark.parametrize("kwargs", [
    dict(synthetic=True, columns={"pb": "pb", "debt": "debt", "ygap": "y", "ggap": "g",
                                  "inflation": "cpi"}),
    dict(synthetic=True, columns={"pb": "pb", "ygap": "y", "ggap": "g"}),
    dict(synthetic=True, columns={"pb": "pb", "debt": "debt", "ggap": "g"}),
    dict(synthetic=True, csa_lags=-1),
    dict(synthetic=True, workers=0),
    dict(synthetic=True, groups={"all": ("U01",)}),
    dict(),
    dict(synthetic=True, data="x.csv"),
])
def test_config_validation(kwargs):
    with pytest.raises(ConfigError):
        RunConfig(**kwargs)


def test_config_unknown_key(tmp_path):
    with pytest.raises(ConfigError, match="unknown key"):
        load_config(write_config(tmp_path, "synthetic = true\nlambda = 3\n"), environ={})


def test_digest_ignores_execution_settings():
    a = RunConfig(synthetic=True, workers=1, output_dir="x")
    b = RunConfig(synthetic=True, workers=8, output_dir="y")
    assert a.digest() == b.digest()
    assert a.digest() != RunConfig(synthetic=True, seed=1).digest()


# --- pipeline -------------------------------------------------------------------------------

def test_pipeline_from_file(tmp_path, data_file):
    cfg = RunConfig(data=str(data_file), output_dir=str(tmp_path / "out"),
                    groups={"first_half": tuple(f"U{i:02d}" for i in range(1, 27))})
    result = run_pipeline(cfg)
    assert MANIFEST_FILE in result.files
    table = (tmp_path / "out" / REGRESSION_FILE).read_text(encoding="utf-8").splitlines()
    assert table[0].split("\t")[1:] == [f"({k})" for k in range(1, 9)]
    assert "first_half" in table[1]
    manifest = (tmp_path / "out" / MANIFEST_FILE).read_text(encoding="utf-8")
    assert f"config_sha256 {cfg.digest()}" in manifest


def test_pipeline_unknown_member_fails_before_writing(tmp_path, data_file):
    cfg = RunConfig(data=str(data_file), output_dir=str(tmp_path / "out"), groups={"g": ("ZZZ",)})
    with pytest.raises(ValidationError):
        run_pipeline(cfg)
    assert not (tmp_path / "out").exists()
    assert list(tmp_path.iterdir()) == []


def test_pipeline_failure_leaves_no_partial_outputs(tmp_path, data_file):
    # diagnostics succeed and are staged; a one-unit group then fails estimation
    cfg = RunConfig(data=str(data_file), output_dir=str(tmp_path / "out"),
                    groups={"solo": ("U07",)})
    with pytest.raises(UnitEstimationFailed) as err:
        run_pipeline(cfg)
    assert list(err.value.failures) == ["U07"]
    assert list(tmp_path.iterdir()) == []


# --- command line ----------------------------------------------------------------------------

def run_cli(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_cli_ingest_check(capsys, data_file):
    code, out, _ = run_cli(["ingest-check", "--data", str(data_file)], capsys)
    assert code == EXIT_OK
    info = json.loads(out)
    assert info["units"] == 52 and info["years"] == [1990, 2022]
    assert {"ygap", "ggap"} <= set(info["variables"])


def test_cli_break_year_outside_panel(capsys, data_file, tmp_path):
    code, _, err = run_cli(["report", "--data", str(data_file), "--gfc-break-year", "2030",
                            "--output-dir", str(tmp_path / "o")], capsys)
    assert code == EXIT_VALIDATION
    assert json.loads(err)["error"] == "ConfigError"
    assert not (tmp_path / "o").exists()


def test_cli_unknown_variable_in_config(capsys, tmp_path):
    cfg = write_config(tmp_path, 'synthetic = true\n[columns]\ninflation = "cpi"\n')
    code, _, err = run_cli(["estimate", "--config", str(cfg)], capsys)
    assert code == EXIT_VALIDATION and "inflation" in json.loads(err)["message"]


def test_cli_missing_data_file(capsys, tmp_path):
    code, _, _ = run_cli(["diagnose", "--data", str(tmp_path / "nope.csv")], capsys)
    assert code == EXIT_VALIDATION


def test_cli_computation_failure_exit_code(capsys, tmp_path, data_file):
    panel = ingest_table(data_file)
    debt = np.full_like(panel["debt"], 50.0)
    bad = tmp_path / "flat.csv"
    panel.with_variable("debt", debt).to_csv(bad)
    code, _, err = run_cli(["estimate", "--data", str(bad), "--output-dir", str(tmp_path / "o")],
                           capsys)
    assert code == EXIT_COMPUTATION
    assert json.loads(err)["error"] == "DegenerateSplit"


def test_cli_simulate(capsys, tmp_path):
    scen = tmp_path / "s.toml"
    scen.write_text("phi = 0.358\nrho = 0.033\nr = 0.03\ng = 0.02\nb0 = 74.8\nhorizon = 500\n",
                    encoding="utf-8")
    out = tmp_path / "path.tsv"
    code, text, _ = run_cli(["simulate", "--scenario", str(scen), "--out", str(out)], capsys)
    assert code == EXIT_OK and json.loads(text)["verdict"] == "Sustainable"
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t\tsurplus\tdebt\tdiscounted_debt" and len(lines) == 502
    code, text, _ = run_cli(["simulate", "--scenario", str(scen), "--rho", "0", "--r", "0.05",
                             "--horizon", "300", "--out", str(out)], capsys)
    assert json.loads(text)["verdict"] == "PonziViolation"
    code, _, _ = run_cli(["simulate", "--phi", "1.2", "--rho", "0", "--r", "0", "--g", "0",
                          "--b0", "1", "--horizon", "5", "--out", str(out)], capsys)
    assert code == EXIT_COMPUTATION
    code, _, _ = run_cli(["simulate", "--phi", "0.2", "--out", str(out)], capsys)
    assert code == EXIT_VALIDATION


def test_cli_synth_and_report(capsys, tmp_path, monkeypatch):
    data = tmp_path / "s.csv"
    assert run_cli(["synth", "--seed", "3", "--out", str(data)], capsys)[0] == EXIT_OK
    assert data.read_bytes() == _data_bytes(tmp_path)
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env_out"))
    code, out, _ = run_cli(["report", "--data", str(data), "--workers", "2"], capsys)
    assert code == EXIT_OK
    assert (tmp_path / "env_out" / FIGURE_FILE).exists()
    assert json.loads(out)["output_dir"] == str(tmp_path / "env_out")


def _data_bytes(tmp_path):
    ref = tmp_path / "ref.csv"
    synthetic_panel(3).to_csv(ref)
    return ref.read_bytes()
