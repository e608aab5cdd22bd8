"""
Variational mode decomposition
ADMM solver working on the half spectrum of a mirror-extended, zero-padded
signal; modes are updated Gauss-Seidel style (sequential, in mode order)
"""

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from config import (
    VMD_ALPHA, VMD_DC, VMD_INIT, VMD_INIT_CHOICES, VMD_MAX_ITER, VMD_MODES,
    VMD_SEED, VMD_TAU, VMD_TOL,
)
from errors import DataError, NonFinite, SeriesTooShort
from series_core import Series

logger = logging.getLogger(__name__)

MIN_LENGTH = 8


@dataclass(frozen=True)
class VmdConfig:
    modes: int = VMD_MODES
    alpha: float = VMD_ALPHA
    tau: float = VMD_TAU
    dc: bool = VMD_DC
    init: str = VMD_INIT
    tol: float = VMD_TOL
    max_iter: int = VMD_MAX_ITER
    seed: int = VMD_SEED

    def __post_init__(self):
        problems = []
        if self.modes < 1:
            problems.append(f"modes must be >= 1, got {self.modes}")
        if not self.alpha > 0:
            problems.append(f"alpha must be > 0, got {self.alpha}")
        if self.tau < 0:
            problems.append(f"tau must be >= 0, got {self.tau}")
        if not self.tol > 0:
            problems.append(f"tol must be > 0, got {self.tol}")
        if self.max_iter < 1:
            problems.append(f"max_iter must be >= 1, got {self.max_iter}")
        if self.init not in VMD_INIT_CHOICES:
            problems.append(f"init must be one of {VMD_INIT_CHOICES}, got '{self.init}'")
        if problems:
            raise DataError("invalid VMD config: " + "; ".join(problems))


@dataclass(frozen=True)
class VmdDecomposition:
    modes: List[Series]
    center_freqs: np.ndarray
    iterations: int
    converged: bool
    residual: Series
    statistics: List[float] = field(default_factory=list)  # convergence statistic per iteration


def mirror_extend(x: np.ndarray) -> np.ndarray:
    """Length-2N extension: reversed first half, signal, reversed second half"""
    half = len(x) // 2
    return np.concatenate([x[:half][::-1], x, x[half:][::-1]])


def mirror_truncate(extended: np.ndarray, n: int) -> np.ndarray:
    half = n // 2
    return extended[half:half + n]


def next_power_of_two(n: int) -> int:
    return 1 << (n - 1).bit_length()


def _initial_omegas(config: VmdConfig) -> np.ndarray:
    k = config.modes
    if config.init == "uniform":
        omega = 0.5 * np.arange(k) / k
    elif config.init == "random":
        omega = np.sort(np.random.default_rng(config.seed).uniform(0.0, 0.5, size=k))
    else:
        omega = np.zeros(k)
    if config.dc:
        omega[0] = 0.0
    return omega


def vmd_decompose(series: Series, config: VmdConfig) -> VmdDecomposition:
    x = series.values
    n, k = len(x), config.modes
    if n < MIN_LENGTH or n < 2 * k:
        raise SeriesTooShort(f"VMD with {k} modes needs at least {max(MIN_LENGTH, 2 * k)} samples, got {n}")

    extended = mirror_extend(x)
    size = next_power_of_two(len(extended))
    f_hat = np.fft.rfft(extended, n=size)
    freqs = np.fft.rfftfreq(size)

    u_hat = np.zeros((k, len(freqs)), dtype=complex)
    lam = np.zeros(len(freqs), dtype=complex)
    omega = _initial_omegas(config)
    mode_sum = np.zeros(len(freqs), dtype=complex)

    statistics = []
    converged = False
    iterations = 0
    while iterations < config.max_iter:
        iterations += 1
        previous = u_hat.copy()

        for m in range(k):
            others = mode_sum - u_hat[m]
            u_hat[m] = (f_hat - others + lam / 2) / (1.0 + 2.0 * config.alpha * (freqs - omega[m]) ** 2)
            mode_sum = others + u_hat[m]

            if config.dc and m == 0:
                continue
            power = np.abs(u_hat[m]) ** 2
            total = power.sum()
            if total > 0:
                omega[m] = float(np.dot(freqs, power) / total)

        lam = lam + config.tau * (f_hat - mode_sum)

        if not (np.all(np.isfinite(u_hat)) and np.all(np.isfinite(omega))):
            raise NonFinite(f"VMD of '{series.name}' produced non-finite values at iteration {iterations}")

        statistic = 0.0
        for m in range(k):
            change = float(np.sum(np.abs(u_hat[m] - previous[m]) ** 2))
            norm = float(np.sum(np.abs(previous[m]) ** 2))
            if norm > 0:
                statistic += change / norm
            elif change > 0:
                statistic = np.inf
        statistics.append(statistic)
        logger.debug(f"VMD iteration {iterations}: statistic {statistic:.3e}")

        if statistic < config.tol:
            converged = True
            break

    if not converged:
        logger.warning(f"VMD of '{series.name}' stopped at max_iter={config.max_iter} without converging")

    order = np.argsort(omega, kind='stable')
    modes = []
    for rank, m in enumerate(order):
        time_domain = np.fft.irfft(u_hat[m], n=size)[:len(extended)]
        modes.append(series.with_values(mirror_truncate(time_domain, n), f"{series.name}-imf{rank + 1}"))

    residual = series.with_values(x - np.sum([mode.values for mode in modes], axis=0), f"{series.name}-residual")
    logger.debug(f"VMD of '{series.name}': {k} modes, {iterations} iterations, converged={converged}")
    return VmdDecomposition(modes, omega[order].copy(), iterations, converged, residual, statistics)


def vmd_reconstruct(decomp: VmdDecomposition) -> Series:
    total = np.sum([mode.values for mode in decomp.modes], axis=0)
    return decomp.residual.with_values(total, decomp.residual.name.replace("-residual", "-reconstruction"))
