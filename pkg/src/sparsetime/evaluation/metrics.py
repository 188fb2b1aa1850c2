from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from ..exceptions import ShapeError
from ..logging import get_logger
from ..model import ModelParams, predict_batch
from ..pipeline.dataset import SplitSamples

logger = get_logger("sparsetime.metrics")


@dataclass(frozen=True)
class Metrics:
    """MAE / RMSE / R²；目标方差为 0 时 ``r2`` 为 None（未定义）。"""

    mae: float
    rmse: float
    r2: float | None
    n: int

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> Metrics:
        r2 = payload.get("r2")
        return cls(
            mae=float(payload["mae"]),
            rmse=float(payload["rmse"]),
            r2=None if r2 is None else float(r2),
            n=int(payload["n"]),
        )


def compute_metrics(y: ArrayLike, y_hat: ArrayLike) -> Metrics:
    truth = np.asarray(y, dtype=np.float64).reshape(-1)
    pred = np.asarray(y_hat, dtype=np.float64).reshape(-1)
    if truth.shape != pred.shape:
        raise ShapeError(f"metrics length mismatch: y has {truth.shape[0]}, y_hat has {pred.shape[0]}")
    if truth.shape[0] == 0:
        raise ShapeError("metrics need at least one sample")
    residual = truth - pred
    ss_res = float(np.sum(residual**2))
    ss_tot = float(np.sum((truth - truth.mean()) ** 2))
    if ss_tot == 0.0:
        logger.debug("zero target variance over %d samples: R2 undefined", truth.shape[0])
        r2 = None
    else:
        r2 = 1.0 - ss_res / ss_tot
    return Metrics(
        mae=float(np.mean(np.abs(residual))),
        rmse=float(np.sqrt(ss_res / truth.shape[0])),
        r2=r2,
        n=int(truth.shape[0]),
    )


def evaluate_split(params: ModelParams, samples: SplitSamples) -> Metrics:
    return compute_metrics(samples.targets, predict_batch(params, samples.s, samples.m, samples.g))
