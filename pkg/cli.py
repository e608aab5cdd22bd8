#!/usr/bin/env python3
"""
Command-line entry point for the hybrid wind-speed forecasting toolkit
Subcommands: ingest, synth, decompose, tune-psr, forecast, benchmark, gradcheck
"""

import argparse
import json
import logging
import os
import re
import sys
import tempfile
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Dict, List, Optional, Union

import pandas as pd
from dotenv import load_dotenv

from config import (
    AMI_ESTIMATOR, AMI_ESTIMATORS, BATCH_SIZE, CORRECTOR_DELAY, CORRECTOR_DIMENSION,
    CORRECTOR_KIND, DECOMPOSER, DECOMPOSER_CHOICES, DERIVED, EPOCHS, EVALUATION_TARGET,
    EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, GRADCHECK_HIDDEN, GRADCHECK_SEEDS,
    GRADCHECK_TOLERANCE, GRADCHECK_WINDOW, HIDDEN_UNITS, HORIZONS, JOBS, LEARNING_RATE,
    LOG_DIR, LOSS, MLP_LAYERS, MODEL_KINDS, OPTIMIZER, OUTPUT_DIR, PIPELINE_SEED,
    PREDICTOR_KIND, PSR_AUTO, PSR_D_MAX, PSR_DELAY, PSR_DIMENSION, PSR_TAU_MAX,
    PSR_TOLERANCE, PUBLISHED, RESIDUAL_FRACTION, SSA_ENABLED, SSA_KEEP_COMPONENTS,
    SSA_WINDOW_LEN, SYNTH_LENGTH, SYNTH_SEEDS, TEST_LEN, VMD_ALPHA, VMD_DC, VMD_INIT,
    VMD_INIT_CHOICES, VMD_MAX_ITER, VMD_MODES, VMD_SEED, VMD_TAU, VMD_TOL,
)
from errors import ConfigError, DataError, ForecastError, NumericalFailure
from neural import ModelSpec, TrainConfig, gradient_check, params_to_bytes, random_instance
from pipeline import (
    PipelineConfig, SuiteConfig, forecast_frame, improvement_frame, matrix_frame,
    model_name, plot_frame, preliminary_reports, run_experiment_suite, run_hybrid,
    run_manifest, run_preliminary,
)
from psr import EmbeddingSpec, ami_profile, cao_profile, select_delay, select_dimension
from series_core import (
    Series, SplitSpec, load_series_csv, series_to_frame, split, summary_table,
    synthetic_wind_series,
)
from ssa import SsaConfig, ssa_decompose
from vmd import VmdConfig, vmd_decompose

logger = logging.getLogger(__name__)


# Run-config schema: section -> key -> (default, type, provenance, description)
CONFIG_SCHEMA = {
    'data': {
        'paths': ([], 'list[str]', DERIVED, "CSV files with a timestamp,speed_ms header; empty runs on synthetic data"),
        'test_len': (TEST_LEN, 'int', PUBLISHED, "trailing samples held out for testing"),
        'residual_fraction': (RESIDUAL_FRACTION, 'float', DERIVED, "trailing share of the training set used to fit residuals"),
        'target': (EVALUATION_TARGET, 'str', DERIVED, "score against the 'raw' or the SSA 'denoised' series"),
        'synth_length': (SYNTH_LENGTH, 'int', DERIVED, "length of each synthetic series"),
        'synth_seeds': (list(SYNTH_SEEDS), 'list[int]', DERIVED, "one synthetic dataset per seed"),
    },
    'ssa': {
        'enabled': (SSA_ENABLED, 'bool', PUBLISHED, "denoise the training series before fitting the predictor"),
        'window_len': (SSA_WINDOW_LEN, 'int', PUBLISHED, "SSA embedding dimension L"),
        'keep_components': (SSA_KEEP_COMPONENTS, 'int', PUBLISHED, "SSA reconstruction dimension p"),
    },
    'psr': {
        'delay': (PSR_DELAY, 'int', PUBLISHED, "predictor time delay"),
        'dimension': (PSR_DIMENSION, 'int', PUBLISHED, "predictor reconstruction dimension"),
        'auto': (PSR_AUTO, 'bool', DERIVED, "select delay by AMI and dimension by Cao on each training set"),
        'tau_max': (PSR_TAU_MAX, 'int', DERIVED, "delays scanned when auto"),
        'd_max': (PSR_D_MAX, 'int', DERIVED, "dimensions scanned when auto"),
        'tol': (PSR_TOLERANCE, 'float', DERIVED, "Cao saturation tolerance"),
        'estimator': (AMI_ESTIMATOR, 'str', DERIVED, "AMI estimator: copula or histogram"),
        'bins': (0, 'int', DERIVED, "histogram AMI bins, 0 for automatic"),
    },
    'vmd': {
        'modes': (VMD_MODES, 'int', PUBLISHED, "number of modes to be recovered"),
        'alpha': (VMD_ALPHA, 'float', PUBLISHED, "moderate bandwidth constraint"),
        'tau': (VMD_TAU, 'float', PUBLISHED, "noise-tolerance (dual ascent step)"),
        'dc': (VMD_DC, 'bool', PUBLISHED, "pin the first mode at zero frequency"),
        'init': (VMD_INIT, 'str', PUBLISHED, "center frequency initialization: zeros, uniform or random"),
        'tol': (VMD_TOL, 'float', PUBLISHED, "tolerance of convergence criterion"),
        'max_iter': (VMD_MAX_ITER, 'int', PUBLISHED, "maximum number of iterations"),
        'seed': (VMD_SEED, 'int', DERIVED, "seed for init = random"),
    },
    'predictor': {
        'kind': (PREDICTOR_KIND, 'str', PUBLISHED, "MLP, RNN, GRU or AtGRU"),
        'hidden': (HIDDEN_UNITS, 'int', PUBLISHED, "hidden units for RNN / GRU / AtGRU"),
        'layers': (list(MLP_LAYERS), 'list[int]', PUBLISHED, "MLP hidden layers (output layer of 1 implied)"),
    },
    'corrector': {
        'kind': (CORRECTOR_KIND, 'str', PUBLISHED, "MLP, RNN, GRU or AtGRU"),
        'hidden': (HIDDEN_UNITS, 'int', PUBLISHED, "hidden units for RNN / GRU / AtGRU"),
        'layers': (list(MLP_LAYERS), 'list[int]', PUBLISHED, "MLP hidden layers"),
        'decomposer': (DECOMPOSER, 'str', PUBLISHED, "residual decomposer: VMD, SSA or None"),
        'delay': (CORRECTOR_DELAY, 'int', DERIVED, "corrector time delay"),
        'dimension': (CORRECTOR_DIMENSION, 'int', DERIVED, "corrector window length"),
    },
    'train': {
        'epochs': (EPOCHS, 'int', DERIVED, "training epochs"),
        'batch_size': (BATCH_SIZE, 'int', DERIVED, "minibatch size"),
        'learning_rate': (LEARNING_RATE, 'float', DERIVED, "optimizer step size"),
        'optimizer': (OPTIMIZER, 'str', DERIVED, "Adam or SGD"),
        'loss': (LOSS, 'str', DERIVED, "training loss"),
    },
    'experiment': {
        'horizons': (list(HORIZONS), 'list[int]', PUBLISHED, "forecast horizons in steps"),
        'seed': (PIPELINE_SEED, 'int', DERIVED, "pipeline seed (env FORECAST_SEED overrides)"),
        'jobs': (JOBS, 'int', DERIVED, "parallel corrector jobs (env FORECAST_JOBS overrides)"),
        'output_dir': (OUTPUT_DIR, 'str', DERIVED, "directory for CSV, manifest and weight outputs"),
        'predictors': (list(MODEL_KINDS), 'list[str]', PUBLISHED, "predictor comparison arms"),
        'decomposers': (list(DECOMPOSER_CHOICES), 'list[str]', PUBLISHED, "error-decomposer ablation arms"),
        'correctors': (list(MODEL_KINDS), 'list[str]', PUBLISHED, "corrector ablation arms"),
    },
}


ENV_OVERRIDES = {'FORECAST_SEED': 'seed', 'FORECAST_JOBS': 'jobs'}


def setup_logging(log_dir: Union[str, Path] = LOG_DIR, verbose: bool = False) -> logging.Logger:
    """Log file, errors-only log file and a console handler on stderr"""
    log_dir = Path(log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)

    root = logging.getLogger()
    root.setLevel(logging.DEBUG if verbose else logging.INFO)

    # Drop handlers from an earlier call in the same process
    for handler in root.handlers[:]:
        if getattr(handler, '_forecast_handler', False):
            root.removeHandler(handler)
            handler.close()

    file_handler = logging.FileHandler(log_dir / 'forecast.log')
    file_handler.setLevel(logging.INFO)

    error_handler = logging.FileHandler(log_dir / 'forecast_errors.log')
    error_handler.setLevel(logging.ERROR)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.DEBUG if verbose else logging.INFO)

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    for handler in (file_handler, error_handler, console_handler):
        handler.setFormatter(formatter)
        handler._forecast_handler = True
        root.addHandler(handler)

    return root


# Output helpers

def atomic_write(path: Union[str, Path], data: Union[str, bytes]):
    """Write through a temporary file in the target directory, then rename"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = data.encode('utf-8') if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, 'wb') as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_frame(frame: pd.DataFrame, path: Union[str, Path]):
    atomic_write(path, frame.to_csv(index=False, lineterminator='\n'))
    logger.info(f"Wrote {path}")


def write_json(payload: Dict, path: Union[str, Path]):
    atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + '\n')
    logger.info(f"Wrote {path}")


def file_tag(name: str) -> str:
    return re.sub(r'[^A-Za-z0-9_.-]+', '_', name)


# Run-config handling

def _type_ok(value, kind: str) -> bool:
    if kind == 'bool':
        return isinstance(value, bool)
    if kind == 'int':
        return isinstance(value, int) and not isinstance(value, bool)
    if kind == 'float':
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind == 'str':
        return isinstance(value, str)
    if kind.startswith('list['):
        item = kind[5:-1]
        return isinstance(value, list) and all(_type_ok(v, item) for v in value)
    return False


def default_settings() -> Dict[str, Dict]:
    return {section: {key: (list(spec[0]) if isinstance(spec[0], list) else spec[0]) for key, spec in keys.items()}
            for section, keys in CONFIG_SCHEMA.items()}


def resolve_settings(document: Dict, environ: Optional[Dict[str, str]] = None) -> Dict[str, Dict]:
    """Merge a parsed run-config over the defaults; every problem is reported at once"""
    environ = os.environ if environ is None else environ
    settings = default_settings()
    problems = []

    for section, values in document.items():
        if section not in CONFIG_SCHEMA:
            problems.append(f"unknown section [{section}]")
            continue
        if not isinstance(values, dict):
            problems.append(f"[{section}] must be a table")
            continue
        for key, value in values.items():
            if key not in CONFIG_SCHEMA[section]:
                problems.append(f"unknown key '{key}' in [{section}]")
                continue
            kind = CONFIG_SCHEMA[section][key][1]
            if not _type_ok(value, kind):
                problems.append(f"[{section}] {key} must be {kind}, got {value!r}")
                continue
            settings[section][key] = float(value) if kind == 'float' else value

    for variable, key in ENV_OVERRIDES.items():
        raw = environ.get(variable)
        if raw is None or raw == "":
            continue
        try:
            settings['experiment'][key] = int(raw)
        except ValueError:
            problems.append(f"environment {variable} must be an integer, got {raw!r}")

    if not problems:
        problems = validate_settings(settings)
    if problems:
        raise ConfigError(problems)
    return settings


def load_run_config(path: Union[str, Path], environ: Optional[Dict[str, str]] = None) -> Dict[str, Dict]:
    try:
        with open(path, 'rb') as handle:
            document = tomllib.load(handle)
    except FileNotFoundError:
        raise ConfigError([f"config file {path} not found"])
    except tomllib.TOMLDecodeError as e:
        raise ConfigError([f"{path} is not valid TOML: {e}"])
    logger.info(f"Loaded run config {path}")
    return resolve_settings(document, environ)


def validate_settings(settings: Dict[str, Dict]) -> List[str]:
    """Build every config object once so value errors surface before any work starts"""
    problems = []
    checks = [
        lambda: SplitSpec(settings['data']['test_len']),
        lambda: SsaConfig(settings['ssa']['window_len'], settings['ssa']['keep_components']),
        lambda: EmbeddingSpec(settings['psr']['delay'], settings['psr']['dimension']),
        lambda: build_vmd_config(settings),
        lambda: build_train_config(settings),
        lambda: build_suite_config(settings),
    ]
    for check in checks:
        try:
            check()
        except ConfigError as e:
            problems.extend(e.problems)
        except DataError as e:
            problems.append(str(e))

    data = settings['data']
    if not data['paths'] and not data['synth_seeds']:
        problems.append("[data] needs either paths or at least one synth_seeds entry")
    if data['synth_length'] < 2:
        problems.append(f"[data] synth_length must be >= 2, got {data['synth_length']}")
    if settings['psr']['estimator'] not in AMI_ESTIMATORS:
        problems.append(f"[psr] estimator must be one of {list(AMI_ESTIMATORS)}, got {settings['psr']['estimator']!r}")
    return problems


def build_vmd_config(settings) -> VmdConfig:
    v = settings['vmd']
    return VmdConfig(v['modes'], v['alpha'], v['tau'], v['dc'], v['init'], v['tol'], v['max_iter'], v['seed'])


def build_train_config(settings) -> TrainConfig:
    t = settings['train']
    return TrainConfig(t['epochs'], t['batch_size'], t['learning_rate'], t['optimizer'], t['loss'])


def build_pipeline_config(settings, embedding: Optional[EmbeddingSpec] = None) -> PipelineConfig:
    psr, pred, corr, exp = settings['psr'], settings['predictor'], settings['corrector'], settings['experiment']
    embedding = embedding or EmbeddingSpec(psr['delay'], psr['dimension'])
    train_config = build_train_config(settings)
    return PipelineConfig(
        ssa=SsaConfig(settings['ssa']['window_len'], settings['ssa']['keep_components']),
        ssa_enabled=settings['ssa']['enabled'],
        embedding=embedding,
        predictor=ModelSpec(pred['kind'], embedding.dimension, pred['hidden'], tuple(pred['layers'])),
        predictor_train=train_config,
        error_decomposer=corr['decomposer'],
        vmd=build_vmd_config(settings),
        corrector=ModelSpec(corr['kind'], corr['dimension'], corr['hidden'], tuple(corr['layers'])),
        corrector_train=train_config,
        corrector_embedding=EmbeddingSpec(corr['delay'], corr['dimension']),
        horizons=tuple(exp['horizons']),
        seed=exp['seed'],
        residual_fraction=settings['data']['residual_fraction'],
        target=settings['data']['target'],
        jobs=exp['jobs'],
    )


def build_suite_config(settings, embedding: Optional[EmbeddingSpec] = None) -> SuiteConfig:
    exp = settings['experiment']
    return SuiteConfig(
        pipeline=build_pipeline_config(settings, embedding),
        test_len=settings['data']['test_len'],
        predictors=tuple(exp['predictors']),
        decomposers=tuple(exp['decomposers']),
        correctors=tuple(exp['correctors']),
    )


def config_help() -> str:
    lines = ["run-config keys (TOML):"]
    for section, keys in CONFIG_SCHEMA.items():
        lines.append(f"  [{section}]")
        for key, (default, kind, provenance, description) in keys.items():
            lines.append(f"    {key} = {json.dumps(default)}  ({kind}, {provenance}) {description}")
    lines.append("environment: FORECAST_SEED, FORECAST_JOBS override [experiment] seed / jobs")
    return "\n".join(lines)


def load_datasets(settings) -> List[Series]:
    data = settings['data']
    if data['paths']:
        return [load_series_csv(path) for path in data['paths']]
    logger.info(f"No data paths configured; generating {len(data['synth_seeds'])} synthetic series")
    return [synthetic_wind_series(data['synth_length'], seed) for seed in data['synth_seeds']]


def tune_embedding(train_series: Series, settings) -> EmbeddingSpec:
    psr = settings['psr']
    ami = ami_profile(train_series, psr['tau_max'], psr['bins'] or None, psr['estimator'])
    delay = select_delay(ami).tau
    dimension = select_dimension(cao_profile(train_series, delay, psr['d_max']), psr['tol']).dimension
    logger.info(f"PSR for '{train_series.name}': delay {delay}, dimension {dimension}")
    return EmbeddingSpec(delay, dimension)


def _settings_from_args(args) -> Dict[str, Dict]:
    settings = load_run_config(args.config)
    if args.jobs is not None:
        settings['experiment']['jobs'] = args.jobs
    if args.output_dir is not None:
        settings['experiment']['output_dir'] = args.output_dir
    return settings


# Commands

def cmd_ingest(args) -> int:
    series = load_series_csv(args.path, args.name)
    table = summary_table(series, args.test_len)

    print(f"📊 DATASET SUMMARY: {series.name}")
    print("=" * 50)
    print(table.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
    return EXIT_OK


def cmd_synth(args) -> int:
    series = synthetic_wind_series(args.length, args.seed)
    write_frame(series_to_frame(series), args.out)
    print(f"✅ Wrote {len(series)} synthetic samples (seed {args.seed}) to {args.out}")
    return EXIT_OK


def cmd_decompose(args) -> int:
    series = load_series_csv(args.path)
    frame = pd.DataFrame({'index': range(series.origin_index, series.origin_index + len(series))})

    if args.method == "ssa":
        config = SsaConfig(args.window, args.keep)
        decomposition = ssa_decompose(series, config)
        for i, component in enumerate(decomposition.components, start=1):
            frame[f"component_{i}"] = component.values
        frame['reconstruction'] = decomposition.reconstruct(config.keep_components)
        sidecar = {'method': 'ssa', 'L': decomposition.L, 'K': decomposition.K,
                   'singular_values': decomposition.singular_values.tolist()}
    else:
        config = VmdConfig(args.modes, args.alpha, args.tau, args.dc, args.init, args.tol, args.max_iter)
        decomposition = vmd_decompose(series, config)
        for i, mode in enumerate(decomposition.modes, start=1):
            frame[f"imf_{i}"] = mode.values
        frame['residual'] = decomposition.residual.values
        sidecar = {'method': 'vmd', 'center_freqs': decomposition.center_freqs.tolist(),
                   'iterations': decomposition.iterations, 'converged': decomposition.converged}

    if args.out:
        write_frame(frame, args.out)
        write_json(sidecar, Path(args.sidecar or Path(args.out).with_suffix('.json')))
    else:
        sys.stdout.write(frame.to_csv(index=False, lineterminator='\n'))
        if args.sidecar:
            write_json(sidecar, args.sidecar)
        else:
            # stdout stays a single CSV table; the sidecar goes to stderr as one JSON line
            print(json.dumps(sidecar, sort_keys=True), file=sys.stderr)
    return EXIT_OK


def psr_csv_blocks(ami, cao, delay, dimension) -> str:
    """AMI profile, Cao profile and the chosen (tau, d) as blank-line separated CSV tables"""
    tables = [
        pd.DataFrame(ami.values, columns=['tau', 'mutual_information']),
        pd.DataFrame(cao.values, columns=['d', 'E', 'dE']),
        pd.DataFrame({'tau': [delay.tau], 'd': [dimension.dimension]}),
    ]
    return "\n".join(table.to_csv(index=False, lineterminator='\n') for table in tables)


def cmd_tune_psr(args) -> int:
    series = load_series_csv(args.path)
    ami = ami_profile(series, args.tau_max, args.bins, args.estimator)
    delay = select_delay(ami)
    cao = cao_profile(series, delay.tau, args.d_max)
    dimension = select_dimension(cao, args.tol)

    sys.stdout.write(psr_csv_blocks(ami, cao, delay, dimension))
    logger.info(f"PSR for '{series.name}': delay {delay.tau}{' (no AMI minimum, argmin used)' if delay.no_minimum else ''}, "
                f"dimension {dimension.dimension}{' (saturated at d_max)' if dimension.saturated else ''}")

    if args.out_dir:
        out = Path(args.out_dir)
        write_frame(pd.DataFrame(ami.values, columns=['tau', 'mutual_information']), out / 'ami.csv')
        write_frame(pd.DataFrame(cao.values, columns=['d', 'E', 'dE']), out / 'cao.csv')
        write_json({'delay': delay.tau, 'no_minimum': delay.no_minimum, 'dimension': dimension.dimension,
                    'saturated': dimension.saturated, 'estimator': ami.estimator, 'bins': ami.bins}, out / 'psr.json')
    return EXIT_OK


def cmd_forecast(args) -> int:
    settings = _settings_from_args(args)
    out = Path(settings['experiment']['output_dir'])
    test_len = settings['data']['test_len']

    rows, manifests = [], {}
    for series in load_datasets(settings):
        train_series, test_series = split(series, SplitSpec(test_len))
        embedding = tune_embedding(train_series, settings) if settings['psr']['auto'] else None
        config = build_pipeline_config(settings, embedding)

        preliminary = run_preliminary(train_series, test_series, config)
        hybrid = run_hybrid(train_series, test_series, config, preliminary, dataset=series.name)

        tag = file_tag(series.name)
        for h, forecast in hybrid.forecasts.items():
            write_frame(forecast_frame(hybrid.actual, forecast), out / f"forecast_{tag}_h{h}.csv")
        atomic_write(out / f"predictor_{tag}.bin", params_to_bytes(preliminary.params))

        name = model_name(preliminary.kind, ssa_enabled=config.ssa_enabled)
        rows += [r.as_row() for r in preliminary_reports(preliminary, name, series.name)]
        rows += [r.as_row() for r in hybrid.reports]
        manifests[series.name] = run_manifest(config, [series.name])

    reports = pd.DataFrame(rows, columns=['dataset', 'model', 'horizon', 'RMSE', 'MAE', 'MAPE', 'R2'])
    write_frame(reports, out / 'reports.csv')
    write_json({'runs': manifests}, out / 'manifest.json')

    print("📈 FORECAST REPORTS")
    print("=" * 50)
    print(reports.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
    return EXIT_OK


def cmd_benchmark(args) -> int:
    settings = _settings_from_args(args)
    out = Path(settings['experiment']['output_dir'])

    tables, manifests, failures = [], {}, 0
    proposed = None
    for series in load_datasets(settings):
        embedding = None
        if settings['psr']['auto']:
            embedding = tune_embedding(split(series, SplitSpec(settings['data']['test_len']))[0], settings)
        suite = build_suite_config(settings, embedding)
        pc = suite.pipeline
        proposed = model_name(pc.predictor.kind, pc.error_decomposer, pc.corrector.kind, pc.ssa_enabled)

        result = run_experiment_suite([series], suite)
        tables.append(result.table)
        failures += result.failures
        for (dataset, h), curves in result.forecasts.items():
            write_frame(plot_frame(curves), out / f"plot_{file_tag(dataset)}_h{h}.csv")
        manifests[series.name] = run_manifest(pc, [series.name])

    table = pd.concat(tables, ignore_index=True)
    write_frame(table, out / 'results.csv')
    write_frame(matrix_frame(table), out / 'matrix.csv')
    write_frame(improvement_frame(table, proposed), out / 'improvement.csv')
    write_json({'runs': manifests}, out / 'manifest.json')

    print("🏁 BENCHMARK COMPLETE")
    print("=" * 50)
    print(matrix_frame(table).to_string(index=False, float_format=lambda v: f"{v:.4f}"))
    if failures:
        print(f"⚠️ {failures} cell(s) FAILED; see {out / 'results.csv'}")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    worst_overall = 0.0
    for kind in args.kinds:
        worst = 0.0
        for seed in range(args.seeds):
            params, inputs, targets = random_instance(kind, seed, args.hidden, args.window)
            errors = gradient_check(params, inputs, targets)
            worst = max(worst, max(errors.values()))
        status = "✅" if worst < args.tolerance else "❌"
        print(f"{status} {kind}: max relative error {worst:.3e} over {args.seeds} seeds")
        worst_overall = max(worst_overall, worst)

    if worst_overall >= args.tolerance:
        raise NumericalFailure(f"gradient check failed: max relative error {worst_overall:.3e} >= {args.tolerance}")
    return EXIT_OK


class CliParser(argparse.ArgumentParser):
    """Usage errors exit with the toolkit's usage code instead of argparse's 2"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> CliParser:
    parser = CliParser(prog="forecast", description="Hybrid SSA / AtGRU / VMD wind-speed forecasting toolkit")
    parser.add_argument('--verbose', action='store_true', help="debug-level console logging")
    parser.add_argument('--log-dir', default=os.environ.get('FORECAST_LOG_DIR') or LOG_DIR, help="directory for log files")
    commands = parser.add_subparsers(dest='command', required=True)

    ingest = commands.add_parser('ingest', help="load a CSV and print summary statistics")
    ingest.add_argument('path')
    ingest.add_argument('--name', help="dataset label (defaults to the file stem)")
    ingest.add_argument('--test-len', type=int, help="also summarize the train / test split")
    ingest.set_defaults(handler=cmd_ingest)

    synth = commands.add_parser('synth', help="write a seeded synthetic wind series")
    synth.add_argument('--length', type=int, default=SYNTH_LENGTH)
    synth.add_argument('--seed', type=int, default=0)
    synth.add_argument('--out', required=True)
    synth.set_defaults(handler=cmd_synth)

    decompose = commands.add_parser('decompose', help="SSA or VMD decomposition of a series")
    decompose.add_argument('path')
    decompose.add_argument('--method', choices=['ssa', 'vmd'], required=True)
    decompose.add_argument('--window', type=int, default=SSA_WINDOW_LEN, help="SSA window length L")
    decompose.add_argument('--keep', type=int, default=SSA_KEEP_COMPONENTS, help="SSA components in the reconstruction")
    decompose.add_argument('--modes', type=int, default=VMD_MODES)
    decompose.add_argument('--alpha', type=float, default=VMD_ALPHA)
    decompose.add_argument('--tau', type=float, default=VMD_TAU)
    decompose.add_argument('--dc', action='store_true')
    decompose.add_argument('--init', choices=VMD_INIT_CHOICES, default=VMD_INIT)
    decompose.add_argument('--tol', type=float, default=VMD_TOL)
    decompose.add_argument('--max-iter', type=int, default=VMD_MAX_ITER)
    decompose.add_argument('--out', help="CSV path (stdout when omitted)")
    decompose.add_argument('--sidecar', help="JSON sidecar path (next to --out, or one JSON line on stderr)")
    decompose.set_defaults(handler=cmd_decompose)

    tune = commands.add_parser('tune-psr', help="AMI delay and Cao dimension selection")
    tune.add_argument('path')
    tune.add_argument('--tau-max', type=int, default=PSR_TAU_MAX)
    tune.add_argument('--d-max', type=int, default=PSR_D_MAX)
    tune.add_argument('--tol', type=float, default=PSR_TOLERANCE)
    tune.add_argument('--estimator', choices=AMI_ESTIMATORS, default=AMI_ESTIMATOR)
    tune.add_argument('--bins', type=int, default=None, help="histogram estimator bins")
    tune.add_argument('--out-dir', help="also write ami.csv, cao.csv and psr.json here")
    tune.set_defaults(handler=cmd_tune_psr)

    for name, handler, text in (('forecast', cmd_forecast, "run the hybrid model from a run-config"),
                                ('benchmark', cmd_benchmark, "run the comparison experiments from a run-config")):
        command = commands.add_parser(name, help=text, epilog=config_help(),
                                      formatter_class=argparse.RawDescriptionHelpFormatter)
        command.add_argument('config', help="TOML run-config")
        command.add_argument('--jobs', type=int, help="cap on parallel corrector jobs")
        command.add_argument('--output-dir', help="overrides [experiment] output_dir")
        command.set_defaults(handler=handler)

    gradcheck = commands.add_parser('gradcheck', help="finite-difference check of every model's gradients")
    gradcheck.add_argument('--seeds', type=int, default=GRADCHECK_SEEDS)
    gradcheck.add_argument('--hidden', type=int, default=GRADCHECK_HIDDEN)
    gradcheck.add_argument('--window', type=int, default=GRADCHECK_WINDOW)
    gradcheck.add_argument('--tolerance', type=float, default=GRADCHECK_TOLERANCE)
    gradcheck.add_argument('--kinds', nargs='+', choices=MODEL_KINDS, default=list(MODEL_KINDS))
    gradcheck.set_defaults(handler=cmd_gradcheck)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    setup_logging(args.log_dir, args.verbose)

    try:
        return args.handler(args)
    except ConfigError as e:
        for problem in e.problems:
            print(f"config error: {problem}", file=sys.stderr)
        logger.error(f"Invalid configuration ({len(e.problems)} problem(s))")
        return e.exit_code
    except ForecastError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        logger.error(f"{args.command} failed: {type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected error in {args.command}: {e}")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
