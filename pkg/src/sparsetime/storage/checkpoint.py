from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..exceptions import DataError, DataFileNotFoundError, ShapeError
from ..fsutils import atomic_write_text
from ..logging import get_logger
from ..model import PARAM_NAMES, ModelParams
from ..pipeline.dataset import NormStats

logger = get_logger("sparsetime.checkpoint")

CHECKPOINT_FORMAT = "sparsetime-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class Checkpoint:
    """训练产物：参数张量 + 复现预测所需的预处理元数据。"""

    params: ModelParams
    norm_stats: NormStats
    window: int
    smooth_window: int
    target_feature: int
    feature_names: list[str] = field(default_factory=list)
    train_config: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "d": self.params.d,
            "hidden_dim": self.params.hidden_dim,
            "tensors": {name: arr.tolist() for name, arr in self.params.tensors().items()},
            "train_config": self.train_config,
            "norm_stats": self.norm_stats.to_dict(),
            "window": self.window,
            "smooth_window": self.smooth_window,
            "target_feature": self.target_feature,
            "feature_names": list(self.feature_names),
        }


def save_checkpoint(path: Path, checkpoint: Checkpoint) -> None:
    atomic_write_text(Path(path), json.dumps(checkpoint.to_dict(), indent=2) + "\n")
    logger.info("checkpoint saved: %s (params=%d)", path, checkpoint.params.param_count)


def load_checkpoint(path: Path) -> Checkpoint:
    path = Path(path)
    if not path.is_file():
        raise DataFileNotFoundError(f"checkpoint not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"checkpoint is not valid JSON: {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise DataError(f"not a sparsetime checkpoint: {path}")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise DataError(f"unsupported checkpoint version {payload.get('version')!r} in {path}")

    tensors = payload.get("tensors") or {}
    missing = [name for name in PARAM_NAMES if name not in tensors]
    if missing:
        raise DataError(f"checkpoint {path} lacks tensors: {', '.join(missing)}")
    try:
        params = ModelParams(**{name: np.asarray(tensors[name], dtype=np.float64) for name in PARAM_NAMES})
    except ShapeError as exc:
        raise DataError(f"checkpoint {path} has inconsistent tensors: {exc}") from exc
    if params.d != payload.get("d") or params.hidden_dim != payload.get("hidden_dim"):
        raise DataError(f"checkpoint {path} header disagrees with tensor shapes")

    return Checkpoint(
        params=params,
        norm_stats=NormStats.from_dict(payload["norm_stats"]),
        window=int(payload["window"]),
        smooth_window=int(payload["smooth_window"]),
        target_feature=int(payload["target_feature"]),
        feature_names=list(payload.get("feature_names") or []),
        train_config=dict(payload.get("train_config") or {}),
    )
