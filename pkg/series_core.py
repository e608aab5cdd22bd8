"""
Series data model, dataset splitting, normalization, supervised windowing
and the four evaluation metrics shared by every stage of the forecaster
"""

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config import (
    MAPE_FLOOR, SYNTH_AR_COEFFICIENT, SYNTH_DIURNAL_AMPLITUDE, SYNTH_FLOOR,
    SYNTH_LENGTH, SYNTH_MEAN, SYNTH_NOISE_STD, SYNTH_TREND,
)
from errors import (
    ConstantActual, DataError, DegenerateRange, EmptyInput, LengthMismatch,
    ParseError, SeriesTooShort, ShapeMismatch, SplitTooLarge, ZeroTarget,
)

if TYPE_CHECKING:
    from psr import EmbeddingSpec

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("timestamp", "speed_ms")

ArrayLike = Union["Series", np.ndarray, Sequence[float]]


@dataclass(frozen=True)
class Series:
    """An ordered run of finite observations, optionally timestamped.

    ``origin_index`` is the position of the first value in the series it was
    cut from, so train/test pieces can always be placed back on one axis.
    """

    values: np.ndarray
    name: str = "series"
    origin_index: int = 0
    timestamps: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ShapeMismatch(f"Series '{self.name}' must be one-dimensional, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataError(f"Series '{self.name}' contains non-finite values")
        if self.origin_index < 0:
            raise DataError(f"Series '{self.name}' has negative origin_index {self.origin_index}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

        if self.timestamps is not None:
            stamps = np.asarray(self.timestamps, dtype="datetime64[ns]")
            if len(stamps) != len(values):
                raise ShapeMismatch(f"Series '{self.name}' has {len(stamps)} timestamps for {len(values)} values")
            stamps.setflags(write=False)
            object.__setattr__(self, "timestamps", stamps)

    def __len__(self) -> int:
        return len(self.values)

    def window(self, start: int, stop: int) -> "Series":
        """Sub-series [start, stop) keeping the origin bookkeeping"""
        stamps = None if self.timestamps is None else self.timestamps[start:stop]
        return Series(self.values[start:stop], self.name, self.origin_index + start, stamps)

    def with_values(self, values: np.ndarray, name: Optional[str] = None) -> "Series":
        return Series(values, name or self.name, self.origin_index, self.timestamps)


@dataclass(frozen=True)
class SplitSpec:
    test_len: int

    def __post_init__(self):
        if self.test_len < 1:
            raise DataError(f"test_len must be positive, got {self.test_len}")


@dataclass(frozen=True)
class Normalizer:
    """Min-max scaling to [0, 1], fit on training data only"""

    min: float
    max: float

    def __post_init__(self):
        if not self.max > self.min:
            raise DegenerateRange(f"Normalizer needs max > min, got min={self.min} max={self.max}")

    @property
    def span(self) -> float:
        return self.max - self.min

    def transform(self, x):
        return (np.asarray(x, dtype=np.float64) - self.min) / self.span

    def inverse(self, y):
        return np.asarray(y, dtype=np.float64) * self.span + self.min

    def transform_series(self, series: Series) -> Series:
        return series.with_values(self.transform(series.values))

    def inverse_series(self, series: Series) -> Series:
        return series.with_values(self.inverse(series.values))


@dataclass(frozen=True)
class WindowSet:
    """Supervised form of the reconstructed phase space.

    inputs[i][j] = x[i + j*tau], targets[i] = x[i + (d-1)*tau + 1]
    """

    inputs: np.ndarray
    targets: np.ndarray
    spec: "EmbeddingSpec"

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=np.float64).reshape(-1, self.spec.dimension)
        targets = np.asarray(self.targets, dtype=np.float64).reshape(-1)
        if len(inputs) != len(targets):
            raise ShapeMismatch(f"WindowSet has {len(inputs)} inputs but {len(targets)} targets")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    def __len__(self) -> int:
        return len(self.targets)

    def subset(self, index) -> "WindowSet":
        return WindowSet(self.inputs[index], self.targets[index], self.spec)


@dataclass(frozen=True)
class EvaluationReport:
    model_name: str
    horizon: int
    mae: float
    rmse: float
    mape: float
    r2: float
    dataset: str = ""

    def as_row(self) -> Dict:
        return {
            'dataset': self.dataset,
            'model': self.model_name,
            'horizon': self.horizon,
            'RMSE': self.rmse,
            'MAE': self.mae,
            'MAPE': self.mape,
            'R2': self.r2,
        }


def _values(x: ArrayLike) -> np.ndarray:
    if isinstance(x, Series):
        return x.values
    return np.asarray(x, dtype=np.float64).reshape(-1)


def split(series: Series, spec: SplitSpec) -> Tuple[Series, Series]:
    """Partition into (train, test) with the last ``test_len`` samples held out"""
    n = len(series)
    if spec.test_len >= n:
        raise SplitTooLarge(f"test_len {spec.test_len} must be smaller than series length {n}")
    cut = n - spec.test_len
    return series.window(0, cut), series.window(cut, n)


def concatenate(first: Series, second: Series, name: Optional[str] = None) -> Series:
    """Inverse of ``split``: ``second`` must start where ``first`` ends"""
    if second.origin_index != first.origin_index + len(first):
        raise DataError(f"'{second.name}' starts at {second.origin_index}, expected {first.origin_index + len(first)}")
    stamps = None
    if first.timestamps is not None and second.timestamps is not None:
        stamps = np.concatenate([first.timestamps, second.timestamps])
    return Series(np.concatenate([first.values, second.values]), name or first.name, first.origin_index, stamps)


def fit_normalizer(train: Series) -> Normalizer:
    values = _values(train)
    if len(values) < 2:
        raise SeriesTooShort(f"Normalizer needs at least 2 training values, got {len(values)}")
    lo, hi = float(values.min()), float(values.max())
    if not hi > lo:
        raise DegenerateRange(f"All {len(values)} training values equal {lo}")
    return Normalizer(lo, hi)


def make_windows(series: ArrayLike, spec: "EmbeddingSpec") -> WindowSet:
    """Build one-step supervised windows from the delay embedding"""
    x = _values(series)
    d, tau = spec.dimension, spec.delay
    span = (d - 1) * tau
    if len(x) < span + 2:
        raise SeriesTooShort(f"Need at least {span + 2} values for d={d}, tau={tau}; got {len(x)}")
    n = len(x) - span - 1
    rows = np.arange(n)
    inputs = x[rows[:, None] + tau * np.arange(d)[None, :]]
    targets = x[rows + span + 1]
    return WindowSet(inputs, targets, spec)


# Evaluation metrics

def _paired(actual: ArrayLike, predicted: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    y, y_hat = _values(actual), _values(predicted)
    if len(y) != len(y_hat):
        raise LengthMismatch(f"actual has {len(y)} values, predicted has {len(y_hat)}")
    if len(y) == 0:
        raise EmptyInput("metrics need at least one value")
    return y, y_hat


def mae(actual: ArrayLike, predicted: ArrayLike) -> float:
    y, y_hat = _paired(actual, predicted)
    return float(np.mean(np.abs(y - y_hat)))


def rmse(actual: ArrayLike, predicted: ArrayLike) -> float:
    y, y_hat = _paired(actual, predicted)
    return float(np.sqrt(np.mean((y - y_hat) ** 2)))


def mape(actual: ArrayLike, predicted: ArrayLike) -> float:
    """Mean absolute percentage error, in percent"""
    y, y_hat = _paired(actual, predicted)
    zero = np.abs(y) <= MAPE_FLOOR
    if zero.any():
        raise ZeroTarget(f"{int(zero.sum())} actual value(s) within {MAPE_FLOOR} of zero (first at index {int(np.argmax(zero))})")
    return float(100.0 * np.mean(np.abs((y - y_hat) / y)))


def r2(actual: ArrayLike, predicted: ArrayLike) -> float:
    y, y_hat = _paired(actual, predicted)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise ConstantActual("R2 is undefined for a constant actual series")
    return 1.0 - float(np.sum((y - y_hat) ** 2)) / ss_tot


def evaluate(model_name: str, horizon: int, actual: ArrayLike, predicted: ArrayLike,
             dataset: str = "") -> EvaluationReport:
    return EvaluationReport(
        model_name=model_name,
        horizon=horizon,
        mae=mae(actual, predicted),
        rmse=rmse(actual, predicted),
        mape=mape(actual, predicted),
        r2=r2(actual, predicted),
        dataset=dataset,
    )


def improvement(baseline: EvaluationReport, proposed: EvaluationReport) -> Dict[str, float]:
    """Percentage gains of ``proposed`` over ``baseline``.

    Error metrics report the reduction, R2 reports the increase, all in percent.
    """
    def reduction(base, new):
        return float('nan') if base == 0 else 100.0 * (base - new) / base

    return {
        'P_RMSE': reduction(baseline.rmse, proposed.rmse),
        'P_MAE': reduction(baseline.mae, proposed.mae),
        'P_MAPE': reduction(baseline.mape, proposed.mape),
        'P_R2': float('nan') if baseline.r2 == 0 else 100.0 * (proposed.r2 - baseline.r2) / abs(baseline.r2),
    }


# CSV ingestion and summaries

def load_series_csv(path, name: Optional[str] = None) -> Series:
    """Read a ``timestamp,speed_ms`` CSV; rows are numbered from 1 after the header"""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise EmptyInput(f"{path} is empty")

    columns = [c.strip() for c in frame.columns]
    if tuple(columns) != CSV_COLUMNS:
        raise ParseError(f"expected header '{','.join(CSV_COLUMNS)}', got '{','.join(columns)}'")
    frame.columns = columns
    if frame.empty:
        raise EmptyInput(f"{path} has a header but no rows")

    raw_speed = frame['speed_ms'].str.strip()
    speed = pd.to_numeric(raw_speed, errors='coerce').to_numpy(dtype=np.float64)
    bad = ~np.isfinite(speed)
    if bad.any():
        row = int(np.argmax(bad))
        raise ParseError(f"speed_ms '{raw_speed.iloc[row]}' is not a finite decimal", row=row + 1)

    raw_stamps = frame['timestamp'].str.strip()
    timestamps = None
    if (raw_stamps != "").any():
        parsed = pd.to_datetime(raw_stamps.where(raw_stamps != ""), errors='coerce', format='ISO8601')
        invalid = parsed.isna() & (raw_stamps != "")
        if invalid.any():
            row = int(np.argmax(invalid.to_numpy()))
            raise ParseError(f"timestamp '{raw_stamps.iloc[row]}' is not ISO-8601", row=row + 1)
        timestamps = parsed.to_numpy(dtype="datetime64[ns]")

    series_name = name or str(path).rsplit('/', 1)[-1].rsplit('.', 1)[0]
    logger.info(f"Loaded {len(speed)} observations from {path}")
    return Series(speed, series_name, 0, timestamps)


def series_to_frame(series: Series) -> pd.DataFrame:
    if series.timestamps is None:
        stamps = [""] * len(series)
    else:
        stamps = pd.DatetimeIndex(series.timestamps).strftime('%Y-%m-%dT%H:%M:%S')
    return pd.DataFrame({'timestamp': stamps, 'speed_ms': series.values})


def summary_stats(series: ArrayLike) -> Dict[str, float]:
    """Count, mean, std, max and min"""
    values = pd.Series(_values(series))
    return {
        'count': int(values.count()),
        'mean': float(values.mean()),
        'std': float(values.std()) if len(values) > 1 else 0.0,
        'max': float(values.max()),
        'min': float(values.min()),
    }


def summary_table(series: Series, test_len: Optional[int] = None) -> pd.DataFrame:
    rows = [dict(samples='All Samples', **summary_stats(series))]
    if test_len:
        train, test = split(series, SplitSpec(test_len))
        rows.append(dict(samples='Training Set', **summary_stats(train)))
        rows.append(dict(samples='Testing Set', **summary_stats(test)))
    return pd.DataFrame(rows)


def synthetic_wind_series(length: int = SYNTH_LENGTH, seed: int = 0,
                          mean: float = SYNTH_MEAN,
                          diurnal_amplitude: float = SYNTH_DIURNAL_AMPLITUDE,
                          ar_coefficient: float = SYNTH_AR_COEFFICIENT,
                          noise_std: float = SYNTH_NOISE_STD,
                          trend: float = SYNTH_TREND,
                          name: Optional[str] = None) -> Series:
    """Seeded hourly wind-like series: diurnal sine + AR(1) noise + linear trend"""
    if length < 2:
        raise SeriesTooShort(f"synthetic series needs length >= 2, got {length}")
    rng = np.random.default_rng(seed)
    t = np.arange(length, dtype=np.float64)

    innovations = rng.normal(0.0, noise_std, size=length)
    noise = np.empty(length)
    noise[0] = innovations[0] / np.sqrt(1.0 - ar_coefficient ** 2)
    for i in range(1, length):
        noise[i] = ar_coefficient * noise[i - 1] + innovations[i]

    values = mean + diurnal_amplitude * np.sin(2.0 * np.pi * t / 24.0) + trend * t / length + noise
    values = np.maximum(values, SYNTH_FLOOR)
    stamps = pd.date_range('2020-01-01', periods=length, freq='h').to_numpy(dtype="datetime64[ns]")
    return Series(values, name or f"synthetic-{seed}", 0, stamps)
