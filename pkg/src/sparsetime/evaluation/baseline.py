from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from ..exceptions import ConfigError
from ..pipeline.dataset import SplitSamples, WindowedSamples
from .metrics import Metrics, compute_metrics


def persistence_forecast(windows: NDArray[np.float64], target_feature: int) -> NDArray[np.float64]:
    """ŷ = 窗口最后一行的目标特征值。"""
    if not 0 <= target_feature < windows.shape[2]:
        raise ConfigError(f"target feature index {target_feature} out of range for d={windows.shape[2]}")
    return windows[:, -1, target_feature].copy()


def naive_baseline(samples: SplitSamples | WindowedSamples, target_feature: int = 0) -> Metrics:
    return compute_metrics(samples.targets, persistence_forecast(samples.windows, target_feature))
