"""
End-to-end tests for the command-line interface
"""

import io
import json

import numpy as np
import pandas as pd
import pytest

from cli import CONFIG_SCHEMA, atomic_write, config_help, main, resolve_settings
from config import (
    AMI_ESTIMATOR, DERIVED, EPOCHS, HORIZONS, MLP_LAYERS, PUBLISHED, RESIDUAL_FRACTION,
    SSA_WINDOW_LEN, TEST_LEN, VMD_ALPHA,
)
from errors import ConfigError
from series_core import series_to_frame, synthetic_wind_series

SMALL_RUN = """
[data]
synth_length = 400
synth_seeds = [0]
test_len = 60

[ssa]
window_len = 10
keep_components = 4

[psr]
dimension = 5

[vmd]
modes = 3
alpha = 2000.0
max_iter = 60

[predictor]
hidden = 4

[corrector]
hidden = 3
dimension = 4

[train]
epochs = 2
batch_size = 32

[experiment]
output_dir = "{output_dir}"
{extra}
"""


def run(tmp_path, *argv):
    return main(["--log-dir", str(tmp_path / "logs"), *argv])


def write_config(tmp_path, output_dir, extra="", name="run.toml"):
    path = tmp_path / name
    path.write_text(SMALL_RUN.format(output_dir=output_dir.as_posix(), extra=extra))
    return path


def write_series(path, values):
    frame = pd.DataFrame({'timestamp': [''] * len(values), 'speed_ms': [repr(float(v)) for v in values]})
    frame.to_csv(path, index=False)


def site_like_values():
    """3251 samples whose summary matches a published wind-site table"""
    n, mean, std, low, high = 3251, 8.3631, 3.5523, 0.3115, 19.9028
    total = n * mean
    squares = (n - 1) * std ** 2 + n * mean ** 2
    centre = (total - low - high) / (n - 2)
    spread = np.sqrt((squares - low ** 2 - high ** 2 - (n - 2) * centre ** 2) / (n - 3))
    body = np.full(n - 2, centre)
    body[:n - 3:2] += spread
    body[1:n - 3:2] -= spread
    return np.concatenate([[low], body, [high]])


def test_ingest_prints_summary(tmp_path, capsys):
    path = tmp_path / "site1.csv"
    write_series(path, site_like_values())
    assert run(tmp_path, "ingest", str(path)) == 0
    out = capsys.readouterr().out
    assert "DATASET SUMMARY: site1" in out
    for expected in ("3251", "8.3631", "3.5523", "19.9028", "0.3115"):
        assert expected in out


def test_ingest_split_summary(tmp_path, capsys):
    path = tmp_path / "synth.csv"
    series_to_frame(synthetic_wind_series(500, seed=1)).to_csv(path, index=False)
    assert run(tmp_path, "ingest", str(path), "--test-len", "100") == 0
    out = capsys.readouterr().out
    assert "Training Set" in out and "Testing Set" in out


def test_ingest_empty_file_is_data_error(tmp_path, capsys):
    path = tmp_path / "empty.csv"
    path.write_text("")
    assert run(tmp_path, "ingest", str(path)) == 2
    assert "EmptyInput" in capsys.readouterr().err


def test_ingest_reports_bad_row(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    rows = ["timestamp,speed_ms"] + [f",{i + 1.0}" for i in range(6)] + [",oops"]
    path.write_text("\n".join(rows) + "\n")
    assert run(tmp_path, "ingest", str(path)) == 2
    assert "row 7" in capsys.readouterr().err


def test_synth_writes_loadable_csv(tmp_path, capsys):
    out = tmp_path / "synth.csv"
    assert run(tmp_path, "synth", "--length", "100", "--seed", "3", "--out", str(out)) == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["timestamp", "speed_ms"]
    assert len(frame) == 100


def test_decompose_ssa(tmp_path):
    source = tmp_path / "synth.csv"
    series_to_frame(synthetic_wind_series(200, seed=2)).to_csv(source, index=False)
    out = tmp_path / "ssa.csv"
    assert run(tmp_path, "decompose", str(source), "--method", "ssa", "--out", str(out)) == 0

    frame = pd.read_csv(out)
    assert [c for c in frame.columns if c.startswith("component_")] == [f"component_{i}" for i in range(1, 21)]
    assert "reconstruction" in frame.columns
    assert len(frame) == 200
    sidecar = json.loads(out.with_suffix(".json").read_text())
    assert sidecar['L'] == 20 and len(sidecar['singular_values']) == 20


def test_decompose_vmd(tmp_path):
    source = tmp_path / "synth.csv"
    series_to_frame(synthetic_wind_series(200, seed=3)).to_csv(source, index=False)
    out = tmp_path / "vmd.csv"
    assert run(tmp_path, "decompose", str(source), "--method", "vmd", "--max-iter", "30", "--out", str(out)) == 0

    frame = pd.read_csv(out)
    assert [c for c in frame.columns if c.startswith("imf_")] == [f"imf_{i}" for i in range(1, 11)]
    assert "residual" in frame.columns
    sidecar = json.loads(out.with_suffix(".json").read_text())
    assert len(sidecar['center_freqs']) == 10
    assert sidecar['iterations'] <= 30


def test_decompose_to_stdout_keeps_sidecar(tmp_path, capsys):
    source = tmp_path / "synth.csv"
    series_to_frame(synthetic_wind_series(200, seed=3)).to_csv(source, index=False)
    capsys.readouterr()
    assert run(tmp_path, "decompose", str(source), "--method", "vmd", "--modes", "3", "--max-iter", "30") == 0

    captured = capsys.readouterr()
    frame = pd.read_csv(io.StringIO(captured.out))
    assert list(frame.columns) == ["index", "imf_1", "imf_2", "imf_3", "residual"]
    assert len(frame) == 200
    sidecar = json.loads([line for line in captured.err.splitlines() if line.startswith("{")][-1])
    assert sidecar['method'] == "vmd"
    assert len(sidecar['center_freqs']) == 3
    assert sidecar['iterations'] <= 30 and isinstance(sidecar['converged'], bool)


def test_decompose_sidecar_path(tmp_path, capsys):
    source = tmp_path / "synth.csv"
    series_to_frame(synthetic_wind_series(120, seed=4)).to_csv(source, index=False)
    sidecar = tmp_path / "meta" / "ssa.json"
    assert run(tmp_path, "decompose", str(source), "--method", "ssa", "--window", "8", "--keep", "4", "--sidecar", str(sidecar)) == 0
    assert json.loads(sidecar.read_text())['L'] == 8
    assert "reconstruction" in pd.read_csv(io.StringIO(capsys.readouterr().out)).columns


def test_decompose_requires_method(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        run(tmp_path, "decompose", str(tmp_path / "missing.csv"))
    assert excinfo.value.code == 1


def read_csv_blocks(text):
    return [pd.read_csv(io.StringIO(block)) for block in text.strip().split("\n\n")]


def test_tune_psr_outputs(tmp_path, capsys):
    source = tmp_path / "sine.csv"
    write_series(source, 5.0 + np.sin(2 * np.pi * np.arange(1000) / 24))
    capsys.readouterr()
    assert run(tmp_path, "tune-psr", str(source), "--out-dir", str(tmp_path / "psr")) == 0

    ami, cao, choice = read_csv_blocks(capsys.readouterr().out)
    assert list(ami.columns) == ["tau", "mutual_information"] and len(ami) == 24
    assert list(cao.columns) == ["d", "E", "dE"] and len(cao) == 10
    assert list(choice.columns) == ["tau", "d"]
    assert choice['tau'][0] == 6 and choice['d'][0] <= 4

    result = json.loads((tmp_path / "psr" / "psr.json").read_text())
    assert result['delay'] == 6
    assert result['dimension'] == choice['d'][0]
    assert result['estimator'] == "copula" and result['bins'] is None
    assert list(pd.read_csv(tmp_path / "psr" / "ami.csv").columns) == ["tau", "mutual_information"]


def test_tune_psr_histogram_without_files(tmp_path, capsys):
    source = tmp_path / "walk.csv"
    write_series(source, 10.0 + np.cumsum(np.random.default_rng(5).normal(size=400)) * 0.1)
    capsys.readouterr()
    assert run(tmp_path, "tune-psr", str(source), "--estimator", "histogram", "--bins", "8", "--tau-max", "6", "--d-max", "4") == 0

    ami, cao, choice = read_csv_blocks(capsys.readouterr().out)
    assert list(ami['tau']) == [1, 2, 3, 4, 5, 6]
    assert (ami['mutual_information'] >= -1e-12).all()
    assert list(cao['d']) == [1, 2, 3, 4]
    assert choice['tau'][0] in range(1, 7)
    assert not (tmp_path / "psr.json").exists()


def test_unknown_config_key_is_named(tmp_path, capsys):
    config = write_config(tmp_path, tmp_path / "out")
    config.write_text(config.read_text().replace("epochs = 2", "epchs = 2"))
    assert run(tmp_path, "forecast", str(config)) == 1
    err = capsys.readouterr().err
    assert "config error:" in err and "epchs" in err
    assert not (tmp_path / "out").exists()


def test_forecast_outputs_are_reproducible(tmp_path, capsys):
    first, second = tmp_path / "first", tmp_path / "second"
    assert run(tmp_path, "forecast", str(write_config(tmp_path, first, name="a.toml"))) == 0
    assert run(tmp_path, "forecast", str(write_config(tmp_path, second, name="b.toml"))) == 0

    forecasts = sorted(p.name for p in first.glob("forecast_*.csv"))
    assert forecasts == [f"forecast_synthetic-0_h{h}.csv" for h in (1, 2, 3)]
    for name in forecasts + ["predictor_synthetic-0.bin", "reports.csv", "manifest.json"]:
        assert (first / name).read_bytes() == (second / name).read_bytes(), name

    frame = pd.read_csv(first / forecasts[0])
    assert list(frame.columns) == ["index", "actual", "preliminary", "correction", "final"]
    assert len(frame) == 60
    np.testing.assert_allclose(frame['final'], frame['preliminary'] + frame['correction'], rtol=0, atol=1e-9)

    reports = pd.read_csv(first / "reports.csv")
    assert set(reports['model']) == {"SSA-AtGRU", "SSA-AtGRU-VMD-GRU"}
    assert len(reports) == 6

    manifest = json.loads((first / "manifest.json").read_text())
    assert manifest['runs']['synthetic-0']['seeds']['pipeline'] == 42


def test_forecast_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("FORECAST_SEED", "9")
    out = tmp_path / "out"
    assert run(tmp_path, "forecast", str(write_config(tmp_path, out))) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest['runs']['synthetic-0']['seeds']['pipeline'] == 9


def test_benchmark_tables(tmp_path, capsys):
    out = tmp_path / "bench"
    extra = 'horizons = [1]\npredictors = ["GRU"]\ndecomposers = ["None"]\ncorrectors = ["MLP"]'
    assert run(tmp_path, "benchmark", str(write_config(tmp_path, out, extra))) == 0

    results = pd.read_csv(out / "results.csv")
    assert list(results.columns) == ["dataset", "experiment", "model", "horizon", "RMSE", "MAE", "MAPE", "R2", "status"]
    assert len(results) == 3
    assert set(results['model']) == {"SSA-GRU", "SSA-AtGRU-GRU", "SSA-AtGRU-VMD-BPNN"}
    assert len(pd.read_csv(out / "matrix.csv")) == 3
    assert (out / "improvement.csv").exists()
    assert (out / "plot_synthetic-0_h1.csv").exists()
    assert "BENCHMARK COMPLETE" in capsys.readouterr().out


def test_gradcheck_command(tmp_path, capsys):
    assert run(tmp_path, "gradcheck", "--seeds", "2", "--kinds", "GRU", "AtGRU") == 0
    assert "AtGRU: max relative error" in capsys.readouterr().out
    assert run(tmp_path, "gradcheck", "--seeds", "1", "--kinds", "MLP", "--tolerance", "0") == 3


def test_resolve_settings_collects_every_problem():
    document = {'train': {'epchs': 3, 'batch_size': "big"}, 'extras': {}}
    with pytest.raises(ConfigError) as excinfo:
        resolve_settings(document, environ={})
    problems = excinfo.value.problems
    assert len(problems) == 3
    assert any("epchs" in p for p in problems)
    assert any("batch_size" in p for p in problems)
    assert any("[extras]" in p for p in problems)


def test_resolve_settings_values_and_environment():
    settings = resolve_settings({'vmd': {'alpha': 2000}}, environ={'FORECAST_JOBS': "4"})
    assert settings['vmd']['alpha'] == 2000.0
    assert settings['experiment']['jobs'] == 4
    with pytest.raises(ConfigError):
        resolve_settings({}, environ={'FORECAST_SEED': "abc"})
    with pytest.raises(ConfigError):
        resolve_settings({'vmd': {'init': "spiral"}}, environ={})


def test_schema_defaults_follow_config_constants():
    settings = resolve_settings({}, environ={})
    assert settings['data']['test_len'] == TEST_LEN
    assert settings['data']['residual_fraction'] == RESIDUAL_FRACTION
    assert settings['ssa']['window_len'] == SSA_WINDOW_LEN
    assert settings['vmd']['alpha'] == VMD_ALPHA
    assert settings['train']['epochs'] == EPOCHS
    assert settings['predictor']['layers'] == list(MLP_LAYERS)
    assert settings['experiment']['horizons'] == list(HORIZONS)
    assert settings['psr']['estimator'] == AMI_ESTIMATOR

    settings['experiment']['horizons'].append(9)
    assert resolve_settings({}, environ={})['experiment']['horizons'] == list(HORIZONS)
    assert all(spec[2] in (PUBLISHED, DERIVED) for keys in CONFIG_SCHEMA.values() for spec in keys.values())


def test_config_help_names_provenance():
    text = config_help()
    assert f"alpha = {VMD_ALPHA}  (float, {PUBLISHED}) moderate bandwidth constraint" in text
    assert f"window_len = {SSA_WINDOW_LEN}  (int, {PUBLISHED})" in text
    assert f"residual_fraction = {RESIDUAL_FRACTION}  (float, {DERIVED})" in text
    keys = sum(len(keys) for keys in CONFIG_SCHEMA.values())
    assert text.count(PUBLISHED) + text.count(DERIVED) == keys


def test_unknown_ami_estimator_is_rejected():
    with pytest.raises(ConfigError) as excinfo:
        resolve_settings({'psr': {'estimator': "kde"}}, environ={})
    assert any("estimator" in p for p in excinfo.value.problems)


def test_atomic_write_leaves_no_temporaries(tmp_path):
    target = tmp_path / "nested" / "file.txt"
    atomic_write(target, "hello\n")
    atomic_write(target, b"bytes\n")
    assert target.read_bytes() == b"bytes\n"
    assert [p.name for p in target.parent.iterdir()] == ["file.txt"]
