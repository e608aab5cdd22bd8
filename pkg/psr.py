"""
Phase space reconstruction parameter selection
Delay by average mutual information, dimension by Cao's false-neighbour
statistic, plus the local-mean predictor used as a diagnostic baseline
"""

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import norm, rankdata

from config import (
    AMI_ESTIMATOR, AMI_ESTIMATORS, AMI_MAX_BINS, AMI_MIN_BINS, AMI_SNAP_DECIMALS,
    NEIGHBOR_FLOOR, PSR_TOLERANCE,
)
from errors import ConstantSeries, DataError, NotEnoughNeighbors, SeriesTooShort
from series_core import Series

logger = logging.getLogger(__name__)

NEIGHBOR_CHUNK = 512  # rows per distance block in the brute-force search


@dataclass(frozen=True)
class EmbeddingSpec:
    delay: int
    dimension: int

    def __post_init__(self):
        if self.delay < 1 or self.dimension < 1:
            raise DataError(f"EmbeddingSpec needs delay >= 1 and dimension >= 1, got tau={self.delay}, d={self.dimension}")

    @property
    def span(self) -> int:
        """Samples covered by one embedded vector"""
        return (self.dimension - 1) * self.delay + 1


@dataclass(frozen=True)
class AmiProfile:
    values: List[Tuple[int, float]]
    bins: Optional[int]  # None for the copula estimator
    estimator: str = "histogram"


@dataclass(frozen=True)
class CaoProfile:
    values: List[Tuple[int, float, float]]
    floored: int = 0  # denominators floored because no distinct neighbour was left


class DelayChoice(NamedTuple):
    tau: int
    no_minimum: bool


class DimensionChoice(NamedTuple):
    dimension: int
    saturated: bool


def default_bins(n: int) -> int:
    return int(min(max(math.ceil(n ** (1.0 / 3.0)), AMI_MIN_BINS), AMI_MAX_BINS))


def quantile_codes(x: np.ndarray, bins: int) -> np.ndarray:
    """Equal-frequency bin index of every sample; duplicate edges collapse"""
    edges = np.unique(np.quantile(x, np.linspace(0.0, 1.0, bins + 1)))
    return np.searchsorted(edges[1:-1], x, side='right')


def _entropy_bits(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-np.sum(p * np.log2(p)))


def mutual_information(s_codes: np.ndarray, q_codes: np.ndarray) -> float:
    """I = H(S) + H(Q) - H(S,Q) in bits, from paired bin codes"""
    width = int(max(s_codes.max(), q_codes.max())) + 1
    joint = np.bincount(s_codes * width + q_codes, minlength=width * width)
    return (_entropy_bits(np.bincount(s_codes, minlength=width))
            + _entropy_bits(np.bincount(q_codes, minlength=width))
            - _entropy_bits(joint))


def snap_to_unit(x: np.ndarray) -> np.ndarray:
    """Min-max rescale and round, so float noise cannot split repeated values"""
    low, width = float(np.min(x)), float(np.ptp(x))
    return np.round((x - low) / width, AMI_SNAP_DECIMALS)


def normal_scores(x: np.ndarray) -> np.ndarray:
    """Average ranks mapped through the standard normal quantile function"""
    return norm.ppf(rankdata(x) / (len(x) + 1))


def copula_information(s: np.ndarray, q: np.ndarray) -> float:
    """Gaussian-copula mutual information in bits: -1/2 log2(1 - rho^2) of the normal scores"""
    zs, zq = normal_scores(s), normal_scores(q)
    if np.ptp(zs) == 0 or np.ptp(zq) == 0:
        return 0.0
    rho = float(np.corrcoef(zs, zq)[0, 1])
    rho = min(abs(rho), 1.0 - 1e-12)
    return float(-0.5 * np.log2(1.0 - rho * rho))


def ami_profile(series: Series, tau_max: int, bins: Optional[int] = None,
                estimator: str = AMI_ESTIMATOR) -> AmiProfile:
    """Lagged mutual information I(tau) for tau = 1..tau_max.

    The copula estimator is smooth in tau, so the first minimum of a periodic
    series is not masked by bin-alignment jitter. The histogram estimator
    uses equal-frequency bins on the same snapped values.
    """
    x = series.values
    if estimator not in AMI_ESTIMATORS:
        raise DataError(f"AMI estimator must be one of {AMI_ESTIMATORS}, got {estimator!r}")
    if len(x) <= tau_max + 1:
        raise SeriesTooShort(f"AMI up to tau={tau_max} needs more than {tau_max + 1} samples, got {len(x)}")
    if np.ptp(x) == 0:
        raise ConstantSeries(f"Series '{series.name}' is constant; mutual information is undefined")
    if bins is not None and bins < 2:
        raise DataError(f"AMI needs at least 2 bins, got {bins}")

    x = snap_to_unit(x)
    taus = range(1, tau_max + 1)
    if estimator == "copula":
        return AmiProfile([(tau, copula_information(x[:-tau], x[tau:])) for tau in taus], None, estimator)

    bins = default_bins(len(x)) if bins is None else bins
    codes = quantile_codes(x, bins)
    values = [(tau, mutual_information(codes[:-tau], codes[tau:])) for tau in taus]
    return AmiProfile(values, bins, estimator)


def select_delay(profile: AmiProfile) -> DelayChoice:
    """First local minimum of I(tau); falls back to the global argmin"""
    taus = [tau for tau, _ in profile.values]
    info = [value for _, value in profile.values]
    for i in range(1, len(info) - 1):
        if info[i - 1] > info[i] < info[i + 1]:
            return DelayChoice(taus[i], False)

    fallback = taus[int(np.argmin(info))]
    logger.warning(f"AMI profile has no interior local minimum; using argmin tau={fallback}")
    return DelayChoice(fallback, True)


def nearest_neighbors(points: np.ndarray, exclude_within: float = -1.0) -> Tuple[np.ndarray, np.ndarray]:
    """Maximum-norm nearest neighbour of every row, ties to the smallest index.

    Self is never a candidate. Rows closer than ``exclude_within`` count as
    duplicates and are skipped unless nothing else is left.
    """
    n = len(points)
    index = np.empty(n, dtype=np.int64)
    distance = np.empty(n)
    for start in range(0, n, NEIGHBOR_CHUNK):
        stop = min(start + NEIGHBOR_CHUNK, n)
        rows = np.arange(stop - start)
        block = cdist(points[start:stop], points, metric='chebyshev')
        block[rows, np.arange(start, stop)] = np.inf
        fallback = np.argmin(block, axis=1)

        masked = np.where(block <= exclude_within, np.inf, block)
        nearest = np.argmin(masked, axis=1)
        isolated = ~np.isfinite(masked[rows, nearest])
        nearest[isolated] = fallback[isolated]

        index[start:stop] = nearest
        distance[start:stop] = block[rows, nearest]
    return index, distance


def _embed(x: np.ndarray, count: int, dimension: int, tau: int) -> np.ndarray:
    return x[np.arange(count)[:, None] + tau * np.arange(dimension)[None, :]]


def cao_profile(series: Series, tau: int, d_max: int) -> CaoProfile:
    x = series.values
    n = len(x)
    if n < (d_max + 1) * tau + 2:
        raise SeriesTooShort(f"Cao profile up to d={d_max} with tau={tau} needs at least {(d_max + 1) * tau + 2} samples, got {n}")
    value_range = float(np.ptp(x))
    if value_range == 0:
        raise ConstantSeries(f"Series '{series.name}' is constant; neighbour distances are all zero")
    floor = NEIGHBOR_FLOOR * value_range

    means = []
    floored = 0
    for d in range(1, d_max + 2):
        count = n - d * tau
        low = _embed(x, count, d, tau)
        high = _embed(x, count, d + 1, tau)
        neighbor, dist = nearest_neighbors(low, exclude_within=floor)
        hits = dist <= floor
        floored += int(hits.sum())
        denominator = np.where(hits, floor, dist)
        numerator = np.max(np.abs(high - high[neighbor]), axis=1)
        means.append(float(np.mean(numerator / denominator)))

    if floored:
        logger.warning(f"Cao profile of '{series.name}': {floored} zero neighbour distance(s) floored at {floor:.3g}")
    values = [(d, means[d - 1], means[d] / means[d - 1]) for d in range(1, d_max + 1)]
    return CaoProfile(values, floored)


def select_dimension(profile: CaoProfile, tol: float = PSR_TOLERANCE) -> DimensionChoice:
    """d_c + 1, where d_c is the first dimension from which dE stays within tol of 1"""
    dims = [d for d, _, _ in profile.values]
    ratios = [ratio for _, _, ratio in profile.values]
    settled = None
    for i in range(len(ratios) - 1, -1, -1):
        if abs(ratios[i] - 1.0) > tol:
            break
        settled = dims[i]

    if settled is None:
        logger.warning(f"Cao dE never settles within tol={tol}; saturating at d={dims[-1]}")
        return DimensionChoice(dims[-1], True)
    return DimensionChoice(settled + 1, False)


def default_neighbor_count(vectors: int) -> int:
    return max(1, math.ceil(math.sqrt(vectors)))


def local_mean_predict(series: Series, spec: EmbeddingSpec, k: Optional[int] = None) -> float:
    """Average successor of the k nearest embedded vectors to the final one"""
    x = series.values
    last = len(x) - spec.span
    if last < 0:
        raise SeriesTooShort(f"Series of length {len(x)} cannot be embedded with d={spec.dimension}, tau={spec.delay}")
    k = default_neighbor_count(last + 1) if k is None else k
    if k < 1 or last < k:
        raise NotEnoughNeighbors(f"{last} candidate vector(s) available, k={k} requested")

    vectors = _embed(x, last + 1, spec.dimension, spec.delay)
    distance = np.max(np.abs(vectors[:last] - vectors[last]), axis=1)
    nearest = np.argsort(distance, kind='stable')[:k]
    return float(np.mean(x[nearest + spec.span]))
