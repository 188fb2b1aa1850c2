from __future__ import annotations

import hashlib
from collections.abc import Iterator
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import polars as pl
from numpy.lib.stride_tricks import sliding_window_view
from numpy.typing import ArrayLike, NDArray

from ..decompose import DEFAULT_SMOOTH_WINDOW, Decomposition, DecompositionMode, decompose_windows
from ..exceptions import (
    ConfigError,
    DataError,
    DataFileNotFoundError,
    EmptyDataError,
    MalformedCsvError,
    MissingColumnError,
)
from ..linalg import Matrix, as_matrix
from ..logging import get_logger

logger = get_logger("sparsetime.dataset")

DEFAULT_WINDOW = 24
NORM_EPS = 1e-8
TRAIN_FRACTION = 0.70
VALIDATION_FRACTION = 0.15
MIN_SERIES_LENGTH = 10


@dataclass(frozen=True)
class RawTable:
    """CSV 解析结果：缺失值已前向 + 后向填充。"""

    columns: list[str]
    values: Matrix
    missing_mask: NDArray[np.bool_]
    target_index: int

    @property
    def n_rows(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class NormStats:
    mean: NDArray[np.float64]
    std: NDArray[np.float64]
    eps: float = NORM_EPS

    def transform(self, x: ArrayLike) -> Matrix:
        return (np.asarray(x, dtype=np.float64) - self.mean) / (self.std + self.eps)

    def inverse_transform(self, x: ArrayLike) -> Matrix:
        return np.asarray(x, dtype=np.float64) * (self.std + self.eps) + self.mean

    def to_dict(self) -> dict[str, object]:
        return {"mean": self.mean.tolist(), "std": self.std.tolist(), "eps": self.eps}

    @classmethod
    def from_dict(cls, payload: dict[str, object]) -> NormStats:
        return cls(
            mean=np.asarray(payload["mean"], dtype=np.float64),
            std=np.asarray(payload["std"], dtype=np.float64),
            eps=float(payload.get("eps", NORM_EPS)),  # type: ignore[arg-type]
        )


@dataclass(frozen=True)
class WindowedSamples:
    windows: NDArray[np.float64]
    targets: NDArray[np.float64]

    def __len__(self) -> int:
        return int(self.targets.shape[0])

    def __iter__(self) -> Iterator[tuple[Matrix, float]]:
        for window, target in zip(self.windows, self.targets, strict=True):
            yield window, float(target)


@dataclass(frozen=True)
class SplitSamples:
    """One split's windows, their experiment-mode components and targets."""

    row_range: range
    windows: NDArray[np.float64]
    s: NDArray[np.float64]
    m: NDArray[np.float64]
    g: NDArray[np.float64]
    targets: NDArray[np.float64]

    def __len__(self) -> int:
        return int(self.targets.shape[0])

    def __getitem__(self, index: int) -> tuple[Decomposition, float]:
        dec = Decomposition(s=self.s[index], m=self.m[index], g=self.g[index], mode=DecompositionMode.EXPERIMENT)
        return dec, float(self.targets[index])

    def __iter__(self) -> Iterator[tuple[Decomposition, float]]:
        for index in range(len(self)):
            yield self[index]

    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        for arr in (self.s, self.m, self.g, self.targets):
            digest.update(np.ascontiguousarray(arr).tobytes())
        return digest.hexdigest()


@dataclass(frozen=True)
class SplitDataset:
    train: SplitSamples
    validation: SplitSamples
    test: SplitSamples
    window_length: int
    target_feature: int
    smooth_window: int
    norm_stats: NormStats
    feature_names: list[str] = field(default_factory=list)

    @property
    def d(self) -> int:
        return int(self.train.windows.shape[2])

    def splits(self) -> dict[str, SplitSamples]:
        return {"train": self.train, "validation": self.validation, "test": self.test}

    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        for samples in self.splits().values():
            digest.update(samples.fingerprint().encode("ascii"))
        return digest.hexdigest()[:16]


def _parse_numeric(column: str, missing_sentinel: float | None) -> pl.Expr:
    expr = pl.col(column).str.strip_chars().cast(pl.Float64, strict=False).fill_nan(None)
    if missing_sentinel is not None:
        expr = pl.when(expr == missing_sentinel).then(None).otherwise(expr)
    return expr.alias(column)


def ingest_csv(
    path: str | Path,
    feature_columns: list[str] | None,
    target_column: str,
    *,
    delimiter: str = ",",
    missing_sentinel: float | None = None,
) -> RawTable:
    """读取带表头的 CSV，选取数值特征列并填补缺失值。

    不可解析的数值单元格与 ``missing_sentinel`` 视为缺失；缺失值先前向填充再后向填充。
    ``feature_columns`` 为空时自动选取所有含数值的列，目标列总会被包含。
    """
    csv_path = Path(path)
    if not csv_path.is_file():
        raise DataFileNotFoundError(f"csv not found: {csv_path}")
    try:
        frame = pl.read_csv(csv_path, separator=delimiter, infer_schema_length=0)
    except pl.exceptions.NoDataError as exc:
        raise EmptyDataError(f"csv has no content: {csv_path}") from exc
    except (pl.exceptions.PolarsError, UnicodeDecodeError) as exc:
        # 行字段数不一致、非 UTF-8 字节等
        raise MalformedCsvError(f"csv cannot be parsed: {csv_path}: {exc}") from exc
    if frame.height == 0:
        raise EmptyDataError(f"csv has a header but zero rows: {csv_path}")

    header = list(frame.columns)
    requested = list(feature_columns) if feature_columns else []
    missing = [name for name in [*requested, target_column] if name not in header]
    if missing:
        raise MissingColumnError(f"columns not in csv header: {', '.join(missing)} (header: {header})")

    parsed = frame.select([_parse_numeric(name, missing_sentinel) for name in header])
    if requested:
        columns = requested
    else:
        columns = [name for name in header if parsed[name].null_count() < parsed.height]
        dropped = [name for name in header if name not in columns]
        if dropped:
            logger.info("dropped non-numeric columns: %s", ", ".join(dropped))
    if target_column not in columns:
        columns.append(target_column)

    selected = parsed.select(columns)
    empty = [name for name in columns if selected[name].null_count() == selected.height]
    if empty:
        raise DataError(f"columns contain no numeric values: {', '.join(empty)}")

    mask = selected.select(pl.all().is_null()).to_numpy().astype(bool)
    if mask.any():
        logger.info("imputed %d missing cells (forward fill, then back fill)", int(mask.sum()))
    filled = selected.select(pl.all().fill_null(strategy="forward").fill_null(strategy="backward"))
    values = filled.to_numpy().astype(np.float64)
    return RawTable(columns=columns, values=values, missing_mask=mask, target_index=columns.index(target_column))


def zscore(table: RawTable | ArrayLike, train_rows: range) -> tuple[Matrix, NormStats]:
    """(x − μ)/(σ + ε)，μ 与总体标准差 σ 仅由训练行计算。"""
    values = table.values if isinstance(table, RawTable) else as_matrix(table, name="series")
    if len(train_rows) == 0:
        raise DataError("zscore needs a non-empty training range")
    train = values[train_rows.start : train_rows.stop]
    stats = NormStats(mean=train.mean(axis=0), std=train.std(axis=0))
    return stats.transform(values), stats


def make_windows(x: ArrayLike, window: int, target_feature: int) -> WindowedSamples:
    mat = as_matrix(x, name="series")
    if window < 2:
        raise ConfigError(f"window length must be >= 2, got {window}")
    if not 0 <= target_feature < mat.shape[1]:
        raise ConfigError(f"target feature index {target_feature} out of range for d={mat.shape[1]}")
    n_samples = mat.shape[0] - window
    if n_samples <= 0:
        raise DataError(f"series of {mat.shape[0]} rows is too short for window length {window}")
    # sliding_window_view 给出 (T-L+1, d, L)；最后一个窗口没有目标值
    view = sliding_window_view(mat, window, axis=0)[:n_samples]
    windows = np.ascontiguousarray(view.transpose(0, 2, 1))
    targets = mat[window:, target_feature].copy()
    return WindowedSamples(windows=windows, targets=targets)


def chrono_split(n_rows: int) -> tuple[range, range, range]:
    if n_rows < MIN_SERIES_LENGTH:
        raise DataError(f"chronological split needs at least {MIN_SERIES_LENGTH} rows, got {n_rows}")
    n_train = int(np.floor(TRAIN_FRACTION * n_rows))
    n_val = int(np.floor(VALIDATION_FRACTION * n_rows))
    return range(0, n_train), range(n_train, n_train + n_val), range(n_train + n_val, n_rows)


def build_split_samples(
    normalized: Matrix,
    rows: range,
    name: str,
    window: int,
    target_feature: int,
    smooth_window: int,
) -> SplitSamples:
    if len(rows) <= window:
        raise DataError(f"{name} split has {len(rows)} rows, needs more than window length {window}")
    samples = make_windows(normalized[rows.start : rows.stop], window, target_feature)
    s, m, g = decompose_windows(samples.windows, smooth_window)
    return SplitSamples(row_range=rows, windows=samples.windows, s=s, m=m, g=g, targets=samples.targets)


def build_split_dataset(
    raw: RawTable | ArrayLike,
    *,
    window: int = DEFAULT_WINDOW,
    target_feature: int | None = None,
    smooth_window: int = DEFAULT_SMOOTH_WINDOW,
    feature_names: list[str] | None = None,
) -> SplitDataset:
    """Split chronologically, normalize with train statistics, then window each split on its own rows."""
    if isinstance(raw, RawTable):
        values = raw.values
        target = raw.target_index if target_feature is None else target_feature
        names = feature_names or list(raw.columns)
    else:
        values = as_matrix(raw, name="series")
        target = 0 if target_feature is None else target_feature
        names = feature_names or [f"x{j}" for j in range(values.shape[1])]

    train_rows, val_rows, test_rows = chrono_split(values.shape[0])
    normalized, stats = zscore(values, train_rows)
    built = {
        name: build_split_samples(normalized, rows, name, window, target, smooth_window)
        for name, rows in (("train", train_rows), ("validation", val_rows), ("test", test_rows))
    }
    logger.info(
        "dataset: T=%d d=%d L=%d samples train/val/test=%d/%d/%d",
        values.shape[0],
        values.shape[1],
        window,
        len(built["train"]),
        len(built["validation"]),
        len(built["test"]),
    )
    return SplitDataset(
        train=built["train"],
        validation=built["validation"],
        test=built["test"],
        window_length=window,
        target_feature=target,
        smooth_window=smooth_window,
        norm_stats=stats,
        feature_names=names,
    )
