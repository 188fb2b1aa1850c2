from __future__ import annotations

import math
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from ..decompose import DEFAULT_SMOOTH_WINDOW, decompose_experiment, decompose_projection
from ..exceptions import ConfigError
from ..logging import get_logger
from ..model import ModelParams, forward, init_params, predict_batch
from ..pipeline.dataset import SplitSamples
from ..pipeline.synthetic import SynthKind, synth_series

logger = get_logger("sparsetime.timing")

DEFAULT_REPEATS = 9
DEFAULT_WARMUP = 2
LINEARITY_RATIO_LIMIT = 2.5
# 毫秒级的单次调用受调度噪声支配；每个样本循环到至少这么长再取平均
DEFAULT_MIN_SAMPLE_SECONDS = 0.05
MAX_LOOPS = 10_000


@dataclass(frozen=True)
class TimingPoint:
    length: int
    features: int
    seconds: float


def calibrate_loops(
    fn: Callable[[], object],
    *,
    min_sample_seconds: float = DEFAULT_MIN_SAMPLE_SECONDS,
    max_loops: int = MAX_LOOPS,
) -> int:
    """Calls per timed sample so that one sample lasts at least ``min_sample_seconds``."""
    if min_sample_seconds < 0:
        raise ConfigError(f"min_sample_seconds must be >= 0, got {min_sample_seconds}")
    if min_sample_seconds == 0:
        return 1
    start = time.perf_counter()
    fn()
    single = time.perf_counter() - start
    if single <= 0.0:
        return max_loops
    return int(min(max_loops, max(1, math.ceil(min_sample_seconds / single))))


def median_seconds(
    fn: Callable[[], object],
    *,
    repeats: int = DEFAULT_REPEATS,
    warmup: int = DEFAULT_WARMUP,
    loops: int = 1,
) -> float:
    """Median over ``repeats`` samples of the per-call time; each sample runs ``fn`` ``loops`` times."""
    if repeats < 1 or warmup < 0 or loops < 1:
        raise ConfigError(f"timing needs repeats >= 1, warmup >= 0 and loops >= 1, got {repeats}/{warmup}/{loops}")
    for _ in range(warmup):
        fn()
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        for _ in range(loops):
            fn()
        samples.append((time.perf_counter() - start) / loops)
    return float(np.median(samples))


def _pipeline_once(x: np.ndarray, k: int, smooth_window: int, params: ModelParams) -> None:
    decompose_projection(x, k, smooth_window)
    forward(params, decompose_experiment(x, smooth_window))


def _check_increasing(values: Sequence[int], what: str) -> list[int]:
    items = [int(v) for v in values]
    if not items:
        raise ConfigError(f"timing sweep needs at least one {what}")
    if any(b <= a for a, b in zip(items, items[1:], strict=False)):
        raise ConfigError(f"timing sweep {what}s must be strictly increasing, got {items}")
    return items


def _time_pipeline(
    length: int,
    d: int,
    k: int,
    *,
    repeats: int,
    warmup: int,
    hidden_dim: int,
    smooth_window: int,
    seed: int,
    min_sample_seconds: float,
) -> TimingPoint:
    params = init_params(d, hidden_dim, seed)
    x = synth_series(SynthKind.RANDOM_WALK, length, d, seed)

    def run() -> None:
        _pipeline_once(x, k, smooth_window, params)

    loops = calibrate_loops(run, min_sample_seconds=min_sample_seconds)
    seconds = median_seconds(run, repeats=repeats, warmup=warmup, loops=loops)
    logger.info("timing T=%d d=%d: %.6fs (median of %d, %d loops)", length, d, seconds, repeats, loops)
    return TimingPoint(length=length, features=d, seconds=seconds)


def timing_sweep(
    t_values: Sequence[int],
    k: int,
    d: int,
    *,
    repeats: int = DEFAULT_REPEATS,
    warmup: int = DEFAULT_WARMUP,
    hidden_dim: int = 16,
    smooth_window: int = DEFAULT_SMOOTH_WINDOW,
    seed: int = 0,
    min_sample_seconds: float = DEFAULT_MIN_SAMPLE_SECONDS,
) -> list[TimingPoint]:
    """Median wall time of decomposition (both modes) plus one forward pass per series length."""
    lengths = _check_increasing(t_values, "series length")
    if not 1 <= k <= d:
        raise ConfigError(f"rank k must be in [1, d={d}], got {k}")
    return [
        _time_pipeline(
            length,
            d,
            k,
            repeats=repeats,
            warmup=warmup,
            hidden_dim=hidden_dim,
            smooth_window=smooth_window,
            seed=seed,
            min_sample_seconds=min_sample_seconds,
        )
        for length in lengths
    ]


def feature_sweep(
    length: int,
    d_values: Sequence[int],
    k: int,
    *,
    repeats: int = DEFAULT_REPEATS,
    warmup: int = DEFAULT_WARMUP,
    hidden_dim: int = 16,
    smooth_window: int = DEFAULT_SMOOTH_WINDOW,
    seed: int = 0,
    min_sample_seconds: float = DEFAULT_MIN_SAMPLE_SECONDS,
) -> list[TimingPoint]:
    """Same pipeline at a fixed series length over increasing feature counts."""
    counts = _check_increasing(d_values, "feature count")
    if not 1 <= k <= counts[0]:
        raise ConfigError(f"rank k must be in [1, d={counts[0]}], got {k}")
    return [
        _time_pipeline(
            length,
            d,
            k,
            repeats=repeats,
            warmup=warmup,
            hidden_dim=hidden_dim,
            smooth_window=smooth_window,
            seed=seed,
            min_sample_seconds=min_sample_seconds,
        )
        for d in counts
    ]


def doubling_ratios(points: Sequence[TimingPoint]) -> list[float | None]:
    """Time ratio against the previous point, ``None`` for the first."""
    ratios: list[float | None] = [None]
    for prev, cur in zip(points, points[1:], strict=False):
        ratios.append(cur.seconds / prev.seconds if prev.seconds > 0 else None)
    return ratios


def forward_seconds(params: ModelParams, samples: SplitSamples, *, repeats: int = DEFAULT_REPEATS) -> float:
    """Median per-window forward time over one split."""
    total = median_seconds(lambda: predict_batch(params, samples.s, samples.m, samples.g), repeats=repeats)
    return total / max(len(samples), 1)
