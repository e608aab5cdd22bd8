"""
Tests for variational mode decomposition
"""

import numpy as np
import pytest

from errors import DataError, SeriesTooShort
from series_core import Series
from vmd import (
    VmdConfig, mirror_extend, mirror_truncate, next_power_of_two, vmd_decompose,
    vmd_reconstruct,
)


def tones(n, *freqs):
    t = np.arange(n)
    return [np.cos(2 * np.pi * f * t) for f in freqs]


def test_zero_series_is_a_fixed_point():
    decomposition = vmd_decompose(Series(np.zeros(64)), VmdConfig(modes=3, alpha=2000.0))
    assert decomposition.converged
    assert decomposition.iterations == 1
    for mode in decomposition.modes:
        np.testing.assert_array_equal(mode.values, 0.0)
    np.testing.assert_array_equal(vmd_reconstruct(decomposition).values, 0.0)


def test_single_tone():
    (tone,) = tones(512, 0.05)
    decomposition = vmd_decompose(Series(tone), VmdConfig(modes=1, alpha=2000.0, tau=0.0))
    assert abs(decomposition.center_freqs[0] - 0.05) <= 0.005
    assert np.sqrt(np.mean((decomposition.modes[0].values - tone) ** 2)) < 0.05


@pytest.mark.parametrize("init", [None, "uniform"])
def test_two_tones_are_separated(init):
    low, high = tones(1024, 0.04, 0.20)
    x = low + high
    config = VmdConfig(modes=2, alpha=2000.0) if init is None else VmdConfig(modes=2, alpha=2000.0, init=init)
    decomposition = vmd_decompose(Series(x, "two-tone"), config)

    assert decomposition.converged and decomposition.iterations <= config.max_iter
    assert abs(decomposition.center_freqs[0] - 0.04) <= 0.01
    assert abs(decomposition.center_freqs[1] - 0.20) <= 0.01
    assert np.corrcoef(decomposition.modes[0].values, low)[0, 1] > 0.95
    assert np.corrcoef(decomposition.modes[1].values, high)[0, 1] > 0.95

    rebuilt = vmd_reconstruct(decomposition).values
    assert np.sqrt(np.mean((rebuilt - x) ** 2)) < 0.05 * np.sqrt(np.mean(x ** 2))
    assert [mode.name for mode in decomposition.modes] == ["two-tone-imf1", "two-tone-imf2"]


def test_reconstruction_plus_residual_is_input():
    x = np.cumsum(np.random.default_rng(0).normal(size=200))
    decomposition = vmd_decompose(Series(x), VmdConfig(modes=4, alpha=500.0, max_iter=60))
    np.testing.assert_allclose(vmd_reconstruct(decomposition).values + decomposition.residual.values, x,
                               rtol=0, atol=1e-12 * np.max(np.abs(x)))
    for mode in decomposition.modes:
        assert len(mode) == len(x)


def test_weak_bandwidth_penalty_reproduces_input():
    x = np.random.default_rng(1).normal(size=150)
    decomposition = vmd_decompose(Series(x), VmdConfig(modes=1, alpha=1e-4))
    assert np.sqrt(np.mean((vmd_reconstruct(decomposition).values - x) ** 2)) < 1e-3


def test_amplitude_linearity():
    rng = np.random.default_rng(2)
    x = np.sin(np.arange(300) * 0.3) + 0.2 * rng.normal(size=300)
    config = VmdConfig(modes=3, alpha=1000.0, init="uniform", max_iter=80)
    base = vmd_decompose(Series(x), config)
    scaled = vmd_decompose(Series(2.5 * x), config)
    assert base.iterations == scaled.iterations
    np.testing.assert_allclose(scaled.center_freqs, base.center_freqs, rtol=1e-8, atol=1e-12)
    for a, b in zip(base.modes, scaled.modes):
        np.testing.assert_allclose(b.values, 2.5 * a.values, rtol=0, atol=1e-8 * 2.5 * np.max(np.abs(x)))


def test_center_frequency_bounds_and_statistics():
    x = np.random.default_rng(3).normal(size=256)
    for init in ("zeros", "uniform", "random"):
        decomposition = vmd_decompose(Series(x), VmdConfig(modes=5, alpha=2000.0, init=init, max_iter=40))
        freqs = decomposition.center_freqs
        assert np.all(freqs >= 0.0) and np.all(freqs <= 0.5)
        assert np.all(np.diff(freqs) >= 0)
        assert all(s >= 0 for s in decomposition.statistics)
        assert len(decomposition.statistics) == decomposition.iterations


def test_dc_mode_stays_at_zero():
    low, high = tones(256, 0.0, 0.15)
    decomposition = vmd_decompose(Series(3.0 * low + high), VmdConfig(modes=2, alpha=2000.0, dc=True, init="uniform"))
    assert decomposition.center_freqs[0] == 0.0


def test_max_iter_stops_without_convergence():
    x = np.random.default_rng(4).normal(size=128)
    decomposition = vmd_decompose(Series(x), VmdConfig(modes=3, alpha=2000.0, max_iter=1))
    assert decomposition.iterations == 1
    assert not decomposition.converged


def test_mirror_round_trip():
    for n in (8, 9, 31, 100):
        x = np.arange(n, dtype=float)
        extended = mirror_extend(x)
        assert len(extended) == 2 * n
        np.testing.assert_array_equal(mirror_truncate(extended, n), x)
    assert [next_power_of_two(n) for n in (1, 2, 3, 1000, 1024)] == [1, 2, 4, 1024, 1024]


def test_vmd_errors():
    with pytest.raises(SeriesTooShort):
        vmd_decompose(Series(np.arange(7.0)), VmdConfig(modes=1))
    with pytest.raises(SeriesTooShort):
        vmd_decompose(Series(np.arange(10.0)), VmdConfig(modes=6))
    with pytest.raises(DataError):
        VmdConfig(modes=0)
    with pytest.raises(DataError):
        VmdConfig(alpha=0.0)
    with pytest.raises(DataError):
        VmdConfig(init="spiral")
