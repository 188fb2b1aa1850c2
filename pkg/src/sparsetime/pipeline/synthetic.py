"""Seeded synthetic series used in place of public datasets.

Generators (``t = 0..T-1``, column ``j``, ``ε ~ N(0, 1)``):

- ``trend``:    ``(1 + 0.5 j) · t / T · 10 + noise · ε``
- ``spike``:    columns ``1..d-1`` are drivers, ``noise · ε`` plus, with
  probability ``spike_prob``, a one-step jump of ``U(2, 5)`` with random sign.
  Column 0 responds one step late to how hard the drivers moved:
  ``x[t, 0] = noise · ε + RESPONSE_GAIN · mean_j |x[t-1, j] - x[t-2, j]|``.
  With ``d = 1`` the single column is a plain driver.
- ``seasonal``: ``sin(2π t / period) + 2 t / T + noise · ε``, every column in
  phase, so the current level alone cannot tell a rising half-cycle from a
  falling one.
- ``random_walk``: cumulative sum of ``N(0, 1)`` steps
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from ..exceptions import ConfigError
from ..linalg import Matrix

MIN_SYNTH_LENGTH = 20
DEFAULT_NOISE = 0.05
DEFAULT_PERIOD = 12
DEFAULT_SPIKE_PROB = 0.05
RESPONSE_GAIN = 0.8


class SynthKind(str, Enum):
    TREND_DOMINANT = "trend"
    SPIKE_DOMINANT = "spike"
    SEASONAL = "seasonal"
    RANDOM_WALK = "random_walk"


def _spike_train(rng: np.random.Generator, length: int, features: int, noise: float, spike_prob: float) -> Matrix:
    spikes = rng.random((length, features)) < spike_prob
    magnitude = rng.uniform(2.0, 5.0, size=(length, features)) * rng.choice([-1.0, 1.0], size=(length, features))
    return noise * rng.standard_normal((length, features)) + np.where(spikes, magnitude, 0.0)


def _spike_response(rng: np.random.Generator, length: int, features: int, noise: float, spike_prob: float) -> Matrix:
    series = _spike_train(rng, length, features, noise, spike_prob)
    if features == 1:
        return series
    # jump[t] = mean_j |driver[t] - driver[t-1]|, jump[0] = 0
    jump = np.zeros(length)
    jump[1:] = np.abs(np.diff(series[:, 1:], axis=0)).mean(axis=1)
    response = noise * rng.standard_normal(length)
    response[1:] += RESPONSE_GAIN * jump[:-1]
    series[:, 0] = response
    return series


def synth_series(
    kind: SynthKind | str,
    length: int,
    features: int,
    seed: int,
    *,
    noise: float = DEFAULT_NOISE,
    period: int = DEFAULT_PERIOD,
    spike_prob: float = DEFAULT_SPIKE_PROB,
) -> Matrix:
    kind = SynthKind(kind)
    if length < MIN_SYNTH_LENGTH:
        raise ConfigError(f"synthetic series needs length >= {MIN_SYNTH_LENGTH}, got {length}")
    if features < 1:
        raise ConfigError(f"synthetic series needs at least one feature, got {features}")
    rng = np.random.default_rng(seed)
    t = np.arange(length, dtype=np.float64)[:, None]
    cols = np.arange(features, dtype=np.float64)[None, :]

    if kind is SynthKind.TREND_DOMINANT:
        series = (1.0 + 0.5 * cols) * t / length * 10.0
        if noise:
            series = series + noise * rng.standard_normal((length, features))
        return series
    if kind is SynthKind.SPIKE_DOMINANT:
        return _spike_response(rng, length, features, noise, spike_prob)
    if kind is SynthKind.SEASONAL:
        wave = np.sin(2.0 * np.pi * t / period) + 2.0 * t / length
        return np.repeat(wave, features, axis=1) + noise * rng.standard_normal((length, features))
    return np.cumsum(rng.standard_normal((length, features)), axis=0)
