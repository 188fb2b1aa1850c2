"""Run artifact writers (CSV / JSON / JSON lines).

Artifacts carry no timestamps so that a rerun with the same seed and config
produces byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from ..exceptions import DataError, DataFileNotFoundError, ShapeError
from ..fsutils import atomic_write_text
from ..pipeline.dataset import SplitDataset
from ..pipeline.trainer import TrainLog

DATASET_CACHE_VERSION = 1


def write_rows_csv(path: Path, fieldnames: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> None:
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=list(fieldnames), extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    atomic_write_text(Path(path), out.getvalue())


def write_matrix_csv(path: Path, columns: Sequence[str], matrix: ArrayLike) -> None:
    """每行一个时间步，列名对应特征。"""
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[1] != len(columns):
        raise ShapeError(f"matrix shape {arr.shape} does not match {len(columns)} columns")
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(list(columns))
    for row in arr.tolist():
        writer.writerow(row)
    atomic_write_text(Path(path), out.getvalue())


def write_json(path: Path, payload: Mapping[str, Any]) -> None:
    atomic_write_text(Path(path), json.dumps(payload, indent=2, ensure_ascii=False) + "\n")


def read_json(path: Path) -> dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise DataFileNotFoundError(f"file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise DataError(f"expected a JSON object in {path}")
    return payload


def write_train_log(path: Path, log: TrainLog) -> None:
    atomic_write_text(Path(path), log.to_jsonl())


def dataset_cache_payload(data: SplitDataset) -> dict[str, Any]:
    return {
        "version": DATASET_CACHE_VERSION,
        "window": data.window_length,
        "smooth_window": data.smooth_window,
        "target_feature": data.target_feature,
        "feature_names": list(data.feature_names),
        "norm_stats": data.norm_stats.to_dict(),
        "splits": {
            name: {"start": samples.row_range.start, "stop": samples.row_range.stop, "samples": len(samples)}
            for name, samples in data.splits().items()
        },
        "fingerprint": data.fingerprint(),
    }


def write_dataset_cache(path: Path, data: SplitDataset) -> None:
    write_json(path, dataset_cache_payload(data))


def read_dataset_cache(path: Path) -> dict[str, Any]:
    payload = read_json(path)
    if payload.get("version") != DATASET_CACHE_VERSION:
        raise DataError(f"unsupported dataset cache version {payload.get('version')!r} in {path}")
    return payload
