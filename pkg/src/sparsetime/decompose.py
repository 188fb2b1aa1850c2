"""Saliency / memory / trend component extractors.

Two formulations share this module:

- projection mode: ``S = D_w X`` with norm-based saliency weights, ``M = U_k^T X``
  (rank-k principal subspace), ``G`` a centered moving average; analysis only.
- experiment mode: element-wise ``|x_t - x_{t-1}|``, the raw window, and the
  moving average, all ``L x d``; this is what the model consumes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from numpy.typing import ArrayLike, NDArray

from .exceptions import ConfigError, ShapeError
from .linalg import Matrix, as_matrix, truncated_svd
from .logging import get_logger

logger = get_logger("sparsetime.decompose")

DEFAULT_SMOOTH_WINDOW = 5


class DecompositionMode(str, Enum):
    PROJECTION = "projection"
    EXPERIMENT = "experiment"


@dataclass(frozen=True)
class SaliencyWeights:
    w: NDArray[np.float64]

    def __len__(self) -> int:
        return int(self.w.shape[0])


@dataclass(frozen=True)
class Decomposition:
    s: Matrix
    m: Matrix
    g: Matrix
    mode: DecompositionMode = DecompositionMode.EXPERIMENT

    def components(self) -> tuple[Matrix, Matrix, Matrix]:
        return self.s, self.m, self.g


def _check_window(window: int) -> int:
    if isinstance(window, bool) or int(window) != window or window < 1 or window % 2 == 0:
        raise ConfigError(f"smooth window must be an odd integer >= 1, got {window}")
    return int(window)


def saliency_weights(x: ArrayLike) -> SaliencyWeights:
    """w_t ∝ ‖x_t − x_{t−1}‖₂，首行梯度记为 0；全零梯度时退化为均匀权重。"""
    mat = as_matrix(x, name="x")
    if mat.shape[0] == 0 or mat.shape[1] == 0:
        raise ShapeError(f"saliency needs a non-empty matrix, got shape {mat.shape}")
    norms = np.zeros(mat.shape[0], dtype=np.float64)
    norms[1:] = np.linalg.norm(np.diff(mat, axis=0), axis=1)
    total = norms.sum()
    if total == 0.0:
        logger.debug("constant series: saliency falls back to uniform weights (T=%d)", mat.shape[0])
        return SaliencyWeights(w=np.full(mat.shape[0], 1.0 / mat.shape[0]))
    return SaliencyWeights(w=norms / total)


def saliency_project(x: ArrayLike, weights: SaliencyWeights) -> Matrix:
    mat = as_matrix(x, name="x")
    if len(weights) != mat.shape[0]:
        raise ShapeError(f"saliency weights length {len(weights)} != rows {mat.shape[0]}")
    return weights.w[:, None] * mat


def memory_project(x: ArrayLike, k: int) -> Matrix:
    """U_k^T X, shape k x d."""
    mat = as_matrix(x, name="x")
    svd = truncated_svd(mat, k)
    return svd.u.T @ mat


def _centered_mean(arr: NDArray[np.float64], window: int, axis: int) -> NDArray[np.float64]:
    radius = window // 2
    moved = np.moveaxis(arr, axis, 0)
    pad = [(radius, radius)] + [(0, 0)] * (moved.ndim - 1)
    padded = np.pad(moved, pad, mode="constant", constant_values=np.nan)
    # 边界处 NaN 被忽略，即收缩窗口；以窗口中心为基准求均值，常数列保持不变
    offsets = sliding_window_view(padded, window, axis=0) - moved[..., None]
    smoothed = moved + np.nanmean(offsets, axis=-1)
    return np.moveaxis(smoothed, 0, axis)


def trend_smooth(x: ArrayLike, window: int = DEFAULT_SMOOTH_WINDOW) -> Matrix:
    """Centered moving average per column with shrinking boundary windows."""
    window = _check_window(window)
    mat = as_matrix(x, name="x")
    if window == 1:
        return mat.copy()
    return _centered_mean(mat, window, axis=0)


def split_frequencies(x: ArrayLike, window: int = DEFAULT_SMOOTH_WINDOW) -> tuple[Matrix, Matrix]:
    """low = trend_smooth(x)，high = x − low（逐元素一次减法）。

    Sterbenz 条件下（low 与 x 同号且相差不超过两倍）``low + high == x`` 逐位成立；
    否则误差在 max(|low|, |high|) 的一个 ulp 以内。
    """
    mat = as_matrix(x, name="x")
    low = trend_smooth(mat, window)
    return low, mat - low


def _abs_first_difference(arr: NDArray[np.float64], axis: int) -> NDArray[np.float64]:
    out = np.zeros_like(arr)
    diff = np.abs(np.diff(arr, axis=axis))
    index = [slice(None)] * arr.ndim
    index[axis] = slice(1, None)
    out[tuple(index)] = diff
    return out


def decompose_experiment(x_window: ArrayLike, smooth_window: int = DEFAULT_SMOOTH_WINDOW) -> Decomposition:
    mat = as_matrix(x_window, name="x_window")
    if mat.shape[0] < 2:
        raise ShapeError(f"experiment decomposition needs L >= 2 rows, got {mat.shape[0]}")
    return Decomposition(
        s=_abs_first_difference(mat, axis=0),
        m=mat.copy(),
        g=trend_smooth(mat, smooth_window),
        mode=DecompositionMode.EXPERIMENT,
    )


def decompose_windows(
    windows: NDArray[np.float64],
    smooth_window: int = DEFAULT_SMOOTH_WINDOW,
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """Batch form of :func:`decompose_experiment` over stacked ``(N, L, d)`` windows."""
    window = _check_window(smooth_window)
    arr = np.asarray(windows, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[1] < 2:
        raise ShapeError(f"windows must have shape (N, L>=2, d), got {arr.shape}")
    trend = arr.copy() if window == 1 else _centered_mean(arr, window, axis=1)
    return _abs_first_difference(arr, axis=1), arr.copy(), trend


def decompose_projection(x: ArrayLike, k: int, smooth_window: int = DEFAULT_SMOOTH_WINDOW) -> Decomposition:
    mat = as_matrix(x, name="x")
    return Decomposition(
        s=saliency_project(mat, saliency_weights(mat)),
        m=memory_project(mat, k),
        g=trend_smooth(mat, smooth_window),
        mode=DecompositionMode.PROJECTION,
    )


def weighted_reconstruction(dec: Decomposition, alpha: ArrayLike) -> Matrix:
    """α_S·S + α_M·M + α_G·G，用于与原信号对照。"""
    if dec.mode is not DecompositionMode.EXPERIMENT:
        raise ShapeError("weighted reconstruction needs aligned experiment-mode components")
    weights = np.asarray(alpha, dtype=np.float64).reshape(-1)
    if weights.shape != (3,):
        raise ShapeError(f"alpha must have 3 entries, got shape {weights.shape}")
    s, m, g = dec.components()
    return weights[0] * s + weights[1] * m + weights[2] * g
