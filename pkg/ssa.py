"""
Singular spectrum analysis: embedding, eigen decomposition of the lag
covariance, diagonal averaging and first-p denoising
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from config import SSA_EIGEN_CUTOFF, SSA_KEEP_COMPONENTS, SSA_WINDOW_LEN
from errors import DataError, NumericalFailure, SeriesTooShort
from series_core import Series

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SsaConfig:
    window_len: int = SSA_WINDOW_LEN
    keep_components: int = SSA_KEEP_COMPONENTS

    def __post_init__(self):
        if self.window_len < 2:
            raise DataError(f"SSA window_len must be >= 2, got {self.window_len}")
        if not 1 <= self.keep_components <= self.window_len:
            raise DataError(f"SSA keep_components must lie in [1, {self.window_len}], got {self.keep_components}")


@dataclass(frozen=True)
class SsaDecomposition:
    components: List[Series]
    singular_values: np.ndarray
    L: int
    K: int

    def reconstruct(self, count: Optional[int] = None) -> np.ndarray:
        """Element-wise sum of the leading ``count`` components (all by default)"""
        chosen = self.components if count is None else self.components[:count]
        return np.sum([c.values for c in chosen], axis=0)


def trajectory_matrix(x: np.ndarray, window_len: int) -> np.ndarray:
    """L x K Hankel matrix with z[i, j] = x[i + j]"""
    k = len(x) - window_len + 1
    return x[np.arange(window_len)[:, None] + np.arange(k)[None, :]]


def diagonal_average(matrix: np.ndarray) -> np.ndarray:
    """Map an L x K matrix back to a length L+K-1 series by anti-diagonal means"""
    rows, cols = matrix.shape
    anti = (np.arange(rows)[:, None] + np.arange(cols)[None, :]).ravel()
    sums = np.bincount(anti, weights=matrix.ravel(), minlength=rows + cols - 1)
    counts = np.bincount(anti, minlength=rows + cols - 1)
    return sums / counts


def ssa_decompose(series: Series, config: SsaConfig) -> SsaDecomposition:
    x = series.values
    n, window = len(x), config.window_len
    if n < window:
        raise SeriesTooShort(f"SSA window_len {window} exceeds series length {n}")

    z = trajectory_matrix(x, window)
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(z @ z.T)
    except np.linalg.LinAlgError as e:
        raise NumericalFailure(f"eigen decomposition of the SSA lag covariance failed: {e}")

    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.clip(eigenvalues[order], 0.0, None)
    eigenvectors = eigenvectors[:, order]

    lam_max = eigenvalues[0] if len(eigenvalues) else 0.0
    eigenvalues[eigenvalues < SSA_EIGEN_CUTOFF * lam_max] = 0.0
    singular_values = np.sqrt(eigenvalues)

    # Every eigenvector keeps its component so the projections u u^T z sum to z exactly
    components = []
    for i in range(window):
        u = eigenvectors[:, i]
        elementary = np.outer(u, u @ z)
        components.append(series.with_values(diagonal_average(elementary), f"{series.name}-ssa{i + 1}"))

    rank = int(np.count_nonzero(singular_values))
    logger.debug(f"SSA of '{series.name}': L={window}, K={z.shape[1]}, rank {rank}")
    return SsaDecomposition(components, singular_values, window, z.shape[1])


def ssa_denoise(series: Series, config: SsaConfig) -> Series:
    decomposition = ssa_decompose(series, config)
    denoised = decomposition.reconstruct(config.keep_components)
    return series.with_values(denoised, f"{series.name}-denoised")
