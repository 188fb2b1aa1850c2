import numpy as np
import pytest

from sparsetime.evaluation.baseline import naive_baseline, persistence_forecast
from sparsetime.exceptions import ConfigError
from sparsetime.pipeline.dataset import build_split_dataset, make_windows
from sparsetime.pipeline.synthetic import synth_series


def test_persistence_on_constant_series_is_exact():
    samples = make_windows(np.full((30, 2), 1.5), 4, 0)
    metrics = naive_baseline(samples, 0)
    assert metrics.mae == 0.0
    assert metrics.r2 is None


def test_persistence_lags_a_unit_ramp_by_one_step():
    ramp = np.arange(50.0)[:, None]
    metrics = naive_baseline(make_windows(ramp, 5, 0), 0)
    assert metrics.mae == 1.0
    assert metrics.rmse == 1.0


def test_persistence_forecast_uses_last_row_of_target_feature():
    windows = np.arange(24.0).reshape(2, 3, 4)
    assert persistence_forecast(windows, 1).tolist() == [9.0, 21.0]
    with pytest.raises(ConfigError, match="out of range"):
        persistence_forecast(windows, 4)


def test_persistence_explains_random_walk():
    data = build_split_dataset(synth_series("random_walk", 2000, 1, seed=0), window=8, smooth_window=3)
    metrics = naive_baseline(data.test, data.target_feature)
    assert metrics.r2 is not None and metrics.r2 > 0.0
