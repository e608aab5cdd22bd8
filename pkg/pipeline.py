"""
Hybrid forecasting pipeline
SSA denoising, preliminary prediction, residual decomposition, per-mode error
correctors, superposition, evaluation and the comparison experiments
"""

import hashlib
import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from config import (
    CORRECTOR_DELAY, CORRECTOR_DIMENSION, CORRECTOR_KIND, DECOMPOSER,
    DECOMPOSER_CHOICES, EVALUATION_TARGET, FORECAST_STRATEGY, HORIZONS, JOBS,
    MIN_TRAINING_WINDOWS, MODEL_DISPLAY_NAMES, MODEL_KINDS, PIPELINE_SEED,
    PREDICTOR_KIND, PSR_DELAY, PSR_DIMENSION, RESIDUAL_FRACTION, TEST_LEN,
)
from errors import ConfigError, DegenerateRange, ForecastError, SeriesTooShort, ShapeMismatch
from neural import ModelSpec, NetworkParams, TrainConfig, forward, train
from psr import EmbeddingSpec
from series_core import (
    EvaluationReport, Normalizer, Series, SplitSpec, concatenate, evaluate,
    fit_normalizer, improvement, make_windows, split,
)
from ssa import SsaConfig, ssa_decompose, ssa_denoise
from vmd import VmdConfig, vmd_decompose

logger = logging.getLogger(__name__)

METRICS = ('RMSE', 'MAE', 'MAPE', 'R2')
RESULT_COLUMNS = ['dataset', 'experiment', 'model', 'horizon', *METRICS, 'status']
EVALUATION_TARGETS = ("raw", "denoised")


@dataclass(frozen=True)
class PipelineConfig:
    ssa: SsaConfig = field(default_factory=SsaConfig)
    ssa_enabled: bool = True
    embedding: EmbeddingSpec = field(default_factory=lambda: EmbeddingSpec(PSR_DELAY, PSR_DIMENSION))
    predictor: ModelSpec = field(default_factory=lambda: ModelSpec(PREDICTOR_KIND, PSR_DIMENSION))
    predictor_train: TrainConfig = field(default_factory=TrainConfig)
    error_decomposer: str = DECOMPOSER
    vmd: VmdConfig = field(default_factory=VmdConfig)
    corrector: ModelSpec = field(default_factory=lambda: ModelSpec(CORRECTOR_KIND, CORRECTOR_DIMENSION))
    corrector_train: TrainConfig = field(default_factory=TrainConfig)
    corrector_embedding: EmbeddingSpec = field(default_factory=lambda: EmbeddingSpec(CORRECTOR_DELAY, CORRECTOR_DIMENSION))
    horizons: Tuple[int, ...] = HORIZONS
    seed: int = PIPELINE_SEED
    residual_fraction: float = RESIDUAL_FRACTION
    target: str = EVALUATION_TARGET
    jobs: int = JOBS

    def __post_init__(self):
        object.__setattr__(self, "horizons", tuple(int(h) for h in self.horizons))
        problems = []
        if not self.horizons or any(h < 1 for h in self.horizons):
            problems.append(f"horizons must be a non-empty list of positive integers, got {list(self.horizons)}")
        if self.error_decomposer not in DECOMPOSER_CHOICES:
            problems.append(f"error decomposer must be one of {DECOMPOSER_CHOICES}, got '{self.error_decomposer}'")
        if self.target not in EVALUATION_TARGETS:
            problems.append(f"target must be one of {EVALUATION_TARGETS}, got '{self.target}'")
        if not 0 < self.residual_fraction < 1:
            problems.append(f"residual_fraction must lie in (0, 1), got {self.residual_fraction}")
        if self.jobs < 1:
            problems.append(f"jobs must be >= 1, got {self.jobs}")
        if self.predictor.input_dim != self.embedding.dimension:
            problems.append(f"predictor input_dim {self.predictor.input_dim} differs from embedding dimension {self.embedding.dimension}")
        if self.corrector.input_dim != self.corrector_embedding.dimension:
            problems.append(f"corrector input_dim {self.corrector.input_dim} differs from corrector dimension {self.corrector_embedding.dimension}")
        if problems:
            raise ConfigError(problems)


@dataclass(frozen=True)
class ResidualSet:
    """Per-horizon residuals on the residual-fitting slice of the training set"""

    residuals: Dict[int, Series]
    preliminary: Dict[int, Series]
    actual: Series


@dataclass(frozen=True)
class PreliminaryResult:
    kind: str
    params: NetworkParams
    normalizer: Normalizer
    loss_curve: List[float]
    actual: Series
    forecasts: Dict[int, Series]
    residuals: ResidualSet
    realized: Dict[int, Series]  # actual - preliminary over the test span


@dataclass(frozen=True)
class ModeCorrector:
    params: NetworkParams
    normalizer: Normalizer
    loss_curve: List[float]


@dataclass(frozen=True)
class HybridForecast:
    preliminary: Series
    correction: Series
    final: Series
    horizon: int

    def __post_init__(self):
        if not len(self.preliminary) == len(self.correction) == len(self.final):
            raise ShapeMismatch(f"horizon {self.horizon}: preliminary/correction/final lengths "
                                f"{len(self.preliminary)}/{len(self.correction)}/{len(self.final)} differ")


@dataclass(frozen=True)
class HybridResult:
    name: str
    actual: Series
    forecasts: Dict[int, HybridForecast]
    reports: List[EvaluationReport]
    correctors: Dict[int, List[ModeCorrector]]


def derive_seed(seed: int, role: str, index: int = 0) -> int:
    """Stable 32-bit seed for one component of a run"""
    digest = hashlib.sha256(f"{seed}:{role}:{index}".encode()).digest()
    return int.from_bytes(digest[:4], 'big')


def model_name(predictor: str, decomposer: Optional[str] = None, corrector: Optional[str] = None,
               ssa_enabled: bool = True) -> str:
    """SSA-<P> for predictor-only arms, SSA-<P>-<D>-<C> for hybrids (no <D> when undecomposed)"""
    parts = ["SSA"] if ssa_enabled else []
    parts.append(MODEL_DISPLAY_NAMES[predictor])
    if corrector is not None:
        if decomposer not in (None, "None"):
            parts.append(decomposer)
        parts.append(MODEL_DISPLAY_NAMES[corrector])
    return "-".join(parts)


def robust_normalizer(values, label: str) -> Normalizer:
    """Min-max normalizer; a constant input gets a unit-width range centred on the constant"""
    try:
        return fit_normalizer(values)
    except DegenerateRange:
        centre = float(np.asarray(values)[0])
        logger.warning(f"'{label}' is constant at {centre:.6g}; using a unit-width normalizer")
        return Normalizer(centre - 0.5, centre + 0.5)


def iterate_forecast(params: NetworkParams, buffer: np.ndarray, steps: int, spec: EmbeddingSpec) -> np.ndarray:
    """Feed each one-step prediction back into ``buffer`` (rows of ``spec.span`` values)"""
    paths = np.empty((len(buffer), steps))
    for step in range(steps):
        paths[:, step] = forward(params, buffer[:, ::spec.delay])
        buffer = np.concatenate([buffer[:, 1:], paths[:, step:step + 1]], axis=1)
    return paths


def recursive_forecast(params: NetworkParams, history: np.ndarray, origins, steps: int,
                       spec: EmbeddingSpec) -> np.ndarray:
    """Iterated one-step forecasting.

    Row i holds the 1..steps ahead forecasts issued at ``origins[i]``, the
    index of the last observed value; each prediction is fed back as input.
    """
    origins = np.asarray(origins, dtype=np.int64)
    span = spec.span
    if len(origins) and origins.min() < span - 1:
        raise SeriesTooShort(f"origin {int(origins.min())} has fewer than {span} values of history")

    buffer = history[origins[:, None] + np.arange(1 - span, 1)[None, :]]
    return iterate_forecast(params, buffer, steps, spec)


def horizon_forecasts(params: NetworkParams, history: np.ndarray, targets: np.ndarray,
                      horizons: Sequence[int], spec: EmbeddingSpec) -> Dict[int, np.ndarray]:
    """h-step forecast of every target index, for each h, from one shared set of recursions"""
    longest = max(horizons)
    first = int(targets[0]) - longest
    origins = np.arange(first, int(targets[-1]))
    paths = recursive_forecast(params, history, origins, longest, spec)
    return {h: paths[targets - h - first, h - 1] for h in horizons}


def evaluation_series(observed: Series, config: PipelineConfig) -> Series:
    """Scoring reference; the denoised variant is a two-sided smoother and never feeds a forecast"""
    if config.target == "denoised":
        return ssa_denoise(observed, config.ssa)
    return observed


def fitting_length(n_train: int, fraction: float) -> int:
    return max(1, int(round(fraction * n_train)))


def run_preliminary(train_series: Series, test_series: Series, config: PipelineConfig,
                    kind: Optional[str] = None) -> PreliminaryResult:
    """Train the predictor and produce test-span forecasts plus fitting-slice residuals"""
    kind = kind or config.predictor.kind
    spec = config.embedding
    normalizer = robust_normalizer(train_series.values, train_series.name)

    fitting = ssa_denoise(train_series, config.ssa) if config.ssa_enabled else train_series
    windows = make_windows(normalizer.transform(fitting.values), spec)
    if len(windows) < MIN_TRAINING_WINDOWS:
        raise SeriesTooShort(f"{len(windows)} training windows for d={spec.dimension}, tau={spec.delay}; "
                             f"need at least {MIN_TRAINING_WINDOWS}")

    role = f"predictor-{kind}"
    model_spec = replace(config.predictor, kind=kind, seed=derive_seed(config.seed, role))
    train_config = replace(config.predictor_train, seed=derive_seed(config.seed, role, 1))
    logger.info(f"Training {kind} predictor on {len(windows)} windows of '{train_series.name}'")
    trained = train(model_spec, windows, train_config)

    observed = concatenate(train_series, test_series)
    n_train = len(train_series)
    slice_len = fitting_length(n_train, config.residual_fraction)
    slice_start = n_train - slice_len
    if slice_start - max(config.horizons) < spec.span - 1:
        raise SeriesTooShort(f"residual slice of {slice_len} samples leaves too little history for "
                             f"span {spec.span} and horizon {max(config.horizons)}")

    history = normalizer.transform(observed.values)
    targets = np.arange(slice_start, len(observed))
    paths = horizon_forecasts(trained.params, history, targets, config.horizons, spec)

    fitting_actual = observed.window(slice_start, n_train)
    observed_test = observed.window(n_train, len(observed))
    actual = evaluation_series(observed, config).window(n_train, len(observed))
    forecasts, residuals, slice_forecasts, realized = {}, {}, {}, {}
    for h in config.horizons:
        predicted = normalizer.inverse(paths[h])
        slice_forecasts[h] = fitting_actual.with_values(predicted[:slice_len], f"{kind}-h{h}-fitting")
        residuals[h] = fitting_actual.with_values(fitting_actual.values - slice_forecasts[h].values, f"residual-h{h}")
        forecasts[h] = actual.with_values(predicted[slice_len:], f"{kind}-h{h}")
        realized[h] = observed_test.with_values(observed_test.values - forecasts[h].values, f"residual-h{h}-test")

    return PreliminaryResult(kind, trained.params, normalizer, trained.loss_curve, actual, forecasts,
                             ResidualSet(residuals, slice_forecasts, fitting_actual), realized)


@dataclass(frozen=True)
class ModeHistory:
    """Residual modes known at every forecast origin of one horizon.

    Each origin decomposes only the residual window that ends there, so a
    correction never sees residuals realized after its origin.
    """

    horizon: int
    training: List[Series]  # modes of the first window, the one correctors are fitted on
    tails: np.ndarray  # (origins, modes, span) trailing mode values at each origin


def decompose_residual(series: Series, decomposer: str, config: PipelineConfig) -> List[Series]:
    if decomposer == "VMD":
        return vmd_decompose(series, config.vmd).modes
    if decomposer == "SSA":
        window = max(2, config.vmd.modes)
        return ssa_decompose(series, SsaConfig(window, window)).components
    return [series]


def causal_width(fitted_len: int, horizon: int) -> int:
    """Residual window length; the first test origin's window is the whole usable fitting slice"""
    return fitted_len - horizon + 1


def _check_width(fitted_len: int, horizon: int, embedding: EmbeddingSpec):
    width = causal_width(fitted_len, horizon)
    if width < embedding.span + 1:
        raise SeriesTooShort(f"residual window of {width} samples is too short for corrector "
                             f"span {embedding.span} at horizon {horizon}")
    return width


def residual_modes(preliminary: PreliminaryResult, config: PipelineConfig,
                   decomposer: Optional[str] = None) -> Dict[int, ModeHistory]:
    """Decompose the sliding residual window ending at each test forecast origin"""
    decomposer = decomposer or config.error_decomposer
    span = config.corrector_embedding.span
    histories = {}
    for h in config.horizons:
        fitted = preliminary.residuals.residuals[h]
        width = _check_width(len(fitted), h, config.corrector_embedding)
        realized = concatenate(fitted, preliminary.realized[h], f"residual-h{h}-realized")
        origins = np.arange(len(fitted), len(realized)) - h

        logger.info(f"Decomposing {len(origins)} causal residual windows of {width} samples for horizon {h} ({decomposer})")
        decomposed = Parallel(n_jobs=config.jobs, prefer="threads")(
            delayed(decompose_residual)(realized.window(o - width + 1, o + 1), decomposer, config)
            for o in origins
        )
        tails = np.array([[mode.values[-span:] for mode in modes] for modes in decomposed])
        histories[h] = ModeHistory(h, decomposed[0], tails)
    return histories


def _fit_mode(mode: Series, spec: ModelSpec, train_config: TrainConfig, embedding: EmbeddingSpec) -> ModeCorrector:
    normalizer = robust_normalizer(mode.values, mode.name)
    windows = make_windows(normalizer.transform(mode.values), embedding)
    trained = train(spec, windows, train_config)
    return ModeCorrector(trained.params, normalizer, trained.loss_curve)


def train_corrector(residuals: ResidualSet, config: PipelineConfig, kind: Optional[str] = None,
                    decomposer: Optional[str] = None,
                    histories: Optional[Dict[int, ModeHistory]] = None) -> Dict[int, List[ModeCorrector]]:
    """One corrector per residual mode and horizon, fitted on the first causal window"""
    kind = kind or config.corrector.kind
    decomposer = decomposer or config.error_decomposer
    embedding = config.corrector_embedding

    correctors = {}
    for h, series in residuals.residuals.items():
        width = _check_width(len(series), h, embedding)
        if histories is not None:
            modes = histories[h].training
        else:
            modes = decompose_residual(series.window(0, width), decomposer, config)
        role = f"corrector-{kind}-{decomposer}-h{h}"
        jobs = []
        for index, mode in enumerate(modes):
            spec = replace(config.corrector, kind=kind, seed=derive_seed(config.seed, role, 2 * index))
            train_config = replace(config.corrector_train, seed=derive_seed(config.seed, role, 2 * index + 1))
            jobs.append(delayed(_fit_mode)(mode, spec, train_config, embedding))

        logger.info(f"Training {len(modes)} {kind} corrector(s) for horizon {h} ({decomposer} modes)")
        correctors[h] = Parallel(n_jobs=config.jobs, prefer="threads")(jobs)
    return correctors


def _mode_correction(corrector: ModeCorrector, tails: np.ndarray, h: int, embedding: EmbeddingSpec) -> np.ndarray:
    buffer = corrector.normalizer.transform(tails)
    path = iterate_forecast(corrector.params, buffer, h, embedding)[:, h - 1]
    return corrector.normalizer.inverse(path)


def forecast_corrections(correctors: Dict[int, List[ModeCorrector]], preliminary: PreliminaryResult,
                         config: PipelineConfig, decomposer: Optional[str] = None,
                         histories: Optional[Dict[int, ModeHistory]] = None) -> Dict[int, Series]:
    """Sum of per-mode corrector forecasts, each issued from the mode history at its origin"""
    histories = histories or residual_modes(preliminary, config, decomposer)
    corrections = {}
    for h, mode_correctors in correctors.items():
        tails = histories[h].tails
        if tails.shape[1] != len(mode_correctors):
            raise ShapeMismatch(f"{tails.shape[1]} residual modes but {len(mode_correctors)} correctors at horizon {h}")

        parts = Parallel(n_jobs=config.jobs, prefer="threads")(
            delayed(_mode_correction)(corrector, tails[:, k, :], h, config.corrector_embedding)
            for k, corrector in enumerate(mode_correctors)
        )
        total = np.zeros(len(tails))
        for part in parts:
            total = total + part
        corrections[h] = preliminary.actual.with_values(total, f"correction-h{h}")
    return corrections


def combine(preliminary: Series, correction: Series, horizon: int) -> HybridForecast:
    final = preliminary.with_values(preliminary.values + correction.values, f"final-h{horizon}")
    return HybridForecast(preliminary, correction, final, horizon)


def preliminary_reports(preliminary: PreliminaryResult, name: str, dataset: str = "") -> List[EvaluationReport]:
    return [evaluate(name, h, preliminary.actual, forecast, dataset) for h, forecast in preliminary.forecasts.items()]


def run_hybrid(train_series: Series, test_series: Series, config: PipelineConfig,
               preliminary: Optional[PreliminaryResult] = None, corrector_kind: Optional[str] = None,
               decomposer: Optional[str] = None, dataset: str = "",
               histories: Optional[Dict[int, ModeHistory]] = None) -> HybridResult:
    """Preliminary forecast plus decomposed-residual correction, evaluated per horizon"""
    preliminary = preliminary or run_preliminary(train_series, test_series, config)
    corrector_kind = corrector_kind or config.corrector.kind
    decomposer = decomposer or config.error_decomposer
    histories = histories or residual_modes(preliminary, config, decomposer)

    correctors = train_corrector(preliminary.residuals, config, corrector_kind, decomposer, histories)
    corrections = forecast_corrections(correctors, preliminary, config, decomposer, histories)
    forecasts = {h: combine(preliminary.forecasts[h], corrections[h], h) for h in config.horizons}

    name = model_name(preliminary.kind, decomposer, corrector_kind, config.ssa_enabled)
    reports = [evaluate(name, h, preliminary.actual, forecasts[h].final, dataset) for h in config.horizons]
    for report in reports:
        logger.info(f"{name} h={report.horizon}: RMSE {report.rmse:.4f}, MAE {report.mae:.4f}, "
                    f"MAPE {report.mape:.2f}%, R2 {report.r2:.4f}")
    return HybridResult(name, preliminary.actual, forecasts, reports, correctors)


# Experiment suite

@dataclass(frozen=True)
class SuiteConfig:
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    test_len: int = TEST_LEN
    predictors: Tuple[str, ...] = MODEL_KINDS
    decomposers: Tuple[str, ...] = DECOMPOSER_CHOICES
    correctors: Tuple[str, ...] = MODEL_KINDS

    def __post_init__(self):
        for attr in ('predictors', 'decomposers', 'correctors'):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        problems = [f"unknown model kind '{k}'" for k in self.predictors + self.correctors if k not in MODEL_KINDS]
        problems += [f"unknown decomposer '{d}'" for d in self.decomposers if d not in DECOMPOSER_CHOICES]
        if problems:
            raise ConfigError(problems)


@dataclass
class SuiteResult:
    table: pd.DataFrame
    forecasts: Dict[Tuple[str, int], Dict[str, Series]] = field(default_factory=dict)
    failures: int = 0


def _report_rows(reports: List[EvaluationReport], experiment: str) -> List[Dict]:
    return [dict(report.as_row(), experiment=experiment, status="OK") for report in reports]


def _failed_rows(dataset: str, experiment: str, model: str, horizons) -> List[Dict]:
    return [{'dataset': dataset, 'experiment': experiment, 'model': model, 'horizon': h,
             **{metric: float('nan') for metric in METRICS}, 'status': "FAILED"} for h in horizons]


def run_experiment_suite(datasets: Sequence[Series], config: SuiteConfig) -> SuiteResult:
    """Predictor comparison, error-decomposer ablation and corrector ablation on every dataset.

    Cell failures are recorded as FAILED rows and the suite carries on.
    """
    if not datasets:
        raise ConfigError(["the experiment suite needs at least one dataset"])
    pc = config.pipeline
    base_predictor = pc.predictor.kind
    arms = [("III-IV", d, pc.corrector.kind) for d in config.decomposers]
    arms += [("V", pc.error_decomposer, c) for c in config.correctors]

    rows, plots, failures = [], {}, 0
    for dataset in datasets:
        label = dataset.name
        preliminaries, hybrids, histories = {}, {}, {}

        try:
            train_series, test_series = split(dataset, SplitSpec(config.test_len))
        except ForecastError as e:
            logger.error(f"Dataset '{label}' cannot be split: {e}")
            for kind in config.predictors:
                rows += _failed_rows(label, "I-II", model_name(kind, ssa_enabled=pc.ssa_enabled), pc.horizons)
            for experiment, d, c in arms:
                rows += _failed_rows(label, experiment, model_name(base_predictor, d, c, pc.ssa_enabled), pc.horizons)
            failures += len(config.predictors) + len(arms)
            continue

        def preliminary_for(kind):
            if kind not in preliminaries:
                try:
                    preliminaries[kind] = run_preliminary(train_series, test_series, pc, kind)
                except ForecastError as e:
                    logger.warning(f"{kind} predictor failed on '{label}': {e}")
                    preliminaries[kind] = e
            return preliminaries[kind]

        for kind in config.predictors:
            name = model_name(kind, ssa_enabled=pc.ssa_enabled)
            try:
                result = preliminary_for(kind)
                if isinstance(result, ForecastError):
                    raise result
                reports = preliminary_reports(result, name, label)
            except ForecastError as e:
                logger.warning(f"Cell {label}/{name} FAILED: {e}")
                rows += _failed_rows(label, "I-II", name, pc.horizons)
                failures += 1
                continue
            rows += _report_rows(reports, "I-II")
            for h in pc.horizons:
                plots.setdefault((label, h), {'actual': result.actual})[name] = result.forecasts[h]

        for experiment, decomposer, corrector in arms:
            name = model_name(base_predictor, decomposer, corrector, pc.ssa_enabled)
            key = (decomposer, corrector)
            try:
                if key not in hybrids:
                    result = preliminary_for(base_predictor)
                    if isinstance(result, ForecastError):
                        raise result
                    if decomposer not in histories:
                        histories[decomposer] = residual_modes(result, pc, decomposer)
                    hybrids[key] = run_hybrid(train_series, test_series, pc, result, corrector, decomposer, label,
                                              histories[decomposer])
                hybrid = hybrids[key]
            except ForecastError as e:
                logger.warning(f"Cell {label}/{name} FAILED: {e}")
                rows += _failed_rows(label, experiment, name, pc.horizons)
                failures += 1
                continue
            rows += _report_rows(hybrid.reports, experiment)
            for h in pc.horizons:
                plots.setdefault((label, h), {'actual': hybrid.actual})[name] = hybrid.forecasts[h].final

    table = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    if failures:
        logger.warning(f"Experiment suite finished with {failures} failed cell(s)")
    return SuiteResult(table, plots, failures)


def matrix_frame(table: pd.DataFrame) -> pd.DataFrame:
    """One row per (dataset, experiment, model); metric columns grouped by horizon"""
    horizons = sorted(table['horizon'].unique())
    rows = []
    for (dataset, experiment, model), group in table.groupby(['dataset', 'experiment', 'model'], sort=False):
        row = {'dataset': dataset, 'experiment': experiment, 'model': model,
               'status': "FAILED" if (group['status'] == "FAILED").any() else "OK"}
        by_horizon = group.set_index('horizon')
        for h in horizons:
            for metric in METRICS:
                row[f"h{h}_{metric}"] = by_horizon.at[h, metric] if h in by_horizon.index else float('nan')
        rows.append(row)
    return pd.DataFrame(rows)


def _as_report(row) -> EvaluationReport:
    return EvaluationReport(row['model'], int(row['horizon']), row['MAE'], row['RMSE'], row['MAPE'], row['R2'], row['dataset'])


def improvement_frame(table: pd.DataFrame, proposed: str) -> pd.DataFrame:
    """Percentage gains of the proposed model over every other model, per dataset and horizon"""
    ok = table[table['status'] == "OK"].drop_duplicates(['dataset', 'model', 'horizon'])
    rows = []
    for (dataset, horizon), group in ok.groupby(['dataset', 'horizon'], sort=False):
        target = group[group['model'] == proposed]
        if target.empty:
            continue
        proposed_report = _as_report(target.iloc[0])
        for _, row in group[group['model'] != proposed].iterrows():
            gains = improvement(_as_report(row), proposed_report)
            rows.append({'dataset': dataset, 'horizon': horizon, 'baseline': row['model'],
                         'proposed': proposed, **gains})
    return pd.DataFrame(rows, columns=['dataset', 'horizon', 'baseline', 'proposed', 'P_RMSE', 'P_MAE', 'P_MAPE', 'P_R2'])


def plot_frame(curves: Dict[str, Series]) -> pd.DataFrame:
    """Actual series plus one column per model forecast over the test span"""
    actual = curves['actual']
    frame = pd.DataFrame({'index': np.arange(len(actual)) + actual.origin_index, 'actual': actual.values})
    for name, series in curves.items():
        if name != 'actual':
            frame[name] = series.values
    return frame


def forecast_frame(actual: Series, forecast: HybridForecast) -> pd.DataFrame:
    return pd.DataFrame({
        'index': np.arange(len(actual)) + actual.origin_index,
        'actual': actual.values,
        'preliminary': forecast.preliminary.values,
        'correction': forecast.correction.values,
        'final': forecast.final.values,
    })


def run_manifest(config: PipelineConfig, datasets: Sequence[str], corrector_modes: Optional[int] = None) -> Dict:
    """Resolved configuration and every derived seed of a run"""
    pc = config
    modes = corrector_modes if corrector_modes is not None else (pc.vmd.modes if pc.error_decomposer != "None" else 1)
    kind, decomposer = pc.corrector.kind, pc.error_decomposer
    corrector_seeds = {}
    for h in pc.horizons:
        role = f"corrector-{kind}-{decomposer}-h{h}"
        corrector_seeds[f"h{h}"] = [derive_seed(pc.seed, role, 2 * i) for i in range(modes)]
    return {
        'config': asdict(pc),
        'datasets': list(datasets),
        'strategy': FORECAST_STRATEGY,
        'seeds': {
            'pipeline': pc.seed,
            'predictor': derive_seed(pc.seed, f"predictor-{pc.predictor.kind}"),
            'correctors': corrector_seeds,
        },
    }
