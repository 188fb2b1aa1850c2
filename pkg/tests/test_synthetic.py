import numpy as np
import pytest

from sparsetime.exceptions import ConfigError
from sparsetime.pipeline.synthetic import DEFAULT_PERIOD, RESPONSE_GAIN, SynthKind, synth_series


@pytest.mark.parametrize("kind", list(SynthKind))
def test_synth_series_is_deterministic_per_seed(kind):
    a = synth_series(kind, 200, 3, seed=42)
    b = synth_series(kind, 200, 3, seed=42)
    assert a.shape == (200, 3)
    assert np.array_equal(a, b)
    assert np.all(np.isfinite(a))


def test_noiseless_trend_columns_are_exactly_linear():
    x = synth_series("trend", 500, 3, seed=0, noise=0.0)
    assert np.all(np.abs(np.diff(x, n=2, axis=0)) <= 1e-12)
    assert np.all(x[0] == 0.0)


def test_spike_drivers_are_mostly_flat():
    x = synth_series("spike", 2000, 3, seed=3, noise=0.0, spike_prob=0.05)
    drivers = x[:, 1:]
    share = np.mean(drivers != 0.0)
    assert 0.02 < share < 0.08
    hits = np.abs(drivers[drivers != 0.0])
    assert np.all((hits >= 2.0) & (hits <= 5.0))


def test_spike_response_follows_previous_driver_jump():
    x = synth_series("spike", 2000, 3, seed=3, noise=0.0, spike_prob=0.05)
    jump = np.abs(np.diff(x[:, 1:], axis=0)).mean(axis=1)
    assert x[0, 0] == 0.0 and x[1, 0] == 0.0
    np.testing.assert_allclose(x[2:, 0], RESPONSE_GAIN * jump[:-1], atol=1e-12)
    assert np.any(x[:, 0] > 0.0)


def test_single_column_spike_series_is_a_plain_spike_train():
    x = synth_series("spike", 2000, 1, seed=3, noise=0.0, spike_prob=0.05)
    assert 0.02 < np.mean(x != 0.0) < 0.08
    assert np.all(np.abs(x[x != 0.0]) >= 2.0)


def test_seasonal_series_repeats_with_period_when_noiseless():
    x = synth_series("seasonal", 240, 1, seed=0, noise=0.0, period=24)
    ramp = 2.0 * np.arange(240.0) / 240
    detrended = x[:, 0] - ramp
    np.testing.assert_allclose(detrended[24:], detrended[:-24], atol=1e-9)


def test_seasonal_columns_share_one_phase():
    x = synth_series("seasonal", 120, 3, seed=0, noise=0.0)
    np.testing.assert_array_equal(x[:, 0], x[:, 1])
    np.testing.assert_array_equal(x[:, 0], x[:, 2])
    detrended = x[:, 0] - 2.0 * np.arange(120.0) / 120
    np.testing.assert_allclose(detrended[DEFAULT_PERIOD:], detrended[:-DEFAULT_PERIOD], atol=1e-9)


def test_random_walk_steps_are_standard_normal():
    x = synth_series("random_walk", 5000, 1, seed=9)
    steps = np.diff(x[:, 0])
    assert abs(steps.mean()) < 0.1
    assert abs(steps.std() - 1.0) < 0.1


def test_synth_series_rejects_bad_arguments():
    with pytest.raises(ConfigError, match="length >= 20"):
        synth_series("trend", 19, 1, seed=0)
    with pytest.raises(ConfigError, match="at least one feature"):
        synth_series("trend", 50, 0, seed=0)
    with pytest.raises(ValueError):
        synth_series("sawtooth", 50, 1, seed=0)
