from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..exceptions import ConfigError, DataError, NonFiniteGradientError, NumericalError, ShapeError
from ..logging import get_logger
from ..model import PARAM_NAMES, Gradients, ModelParams, backward_batch, forward_batch, predict_batch
from .dataset import SplitDataset, SplitSamples

logger = get_logger("sparsetime.trainer")

IMPROVEMENT_THRESHOLD = 1e-12
DECAY_MODES = ("decoupled", "l2")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    weight_decay: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 100
    patience: int = 10
    seed: int = 0
    smooth_window: int = 5
    hidden_dim: int = 16
    decay_mode: str = "decoupled"

    def __post_init__(self) -> None:
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        for name in ("beta1", "beta2"):
            value = getattr(self, name)
            if not 0 <= value < 1:
                raise ConfigError(f"{name} must be in [0, 1), got {value}")
        if not self.eps > 0:
            raise ConfigError(f"eps must be > 0, got {self.eps}")
        for name in ("batch_size", "max_epochs", "patience", "hidden_dim"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.decay_mode not in DECAY_MODES:
            raise ConfigError(f"decay_mode must be one of {DECAY_MODES}, got {self.decay_mode!r}")

    def to_dict(self) -> dict[str, object]:
        return asdict(self)


@dataclass(frozen=True)
class OptimizerState:
    m: dict[str, NDArray[np.float64]]
    v: dict[str, NDArray[np.float64]]
    t: int = 0

    @classmethod
    def zeros_like(cls, params: ModelParams) -> OptimizerState:
        tensors = params.tensors()
        return cls(
            m={name: np.zeros_like(arr) for name, arr in tensors.items()},
            v={name: np.zeros_like(arr) for name, arr in tensors.items()},
            t=0,
        )


class StopReason(str, Enum):
    MAX_EPOCHS = "max_epochs"
    EARLY_STOP = "early_stop"


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    alpha: list[float]


@dataclass
class TrainLog:
    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    stop_reason: StopReason = StopReason.MAX_EPOCHS

    @property
    def best_val_loss(self) -> float:
        return self.epochs[self.best_epoch - 1].val_loss

    def best_so_far(self) -> list[float]:
        return list(np.minimum.accumulate([record.val_loss for record in self.epochs]))

    def to_jsonl(self) -> str:
        lines = [json.dumps(asdict(record)) for record in self.epochs]
        lines.append(json.dumps({"best_epoch": self.best_epoch, "stop_reason": self.stop_reason.value}))
        return "\n".join(lines) + "\n"


def mse_loss(y: ArrayLike, y_hat: ArrayLike) -> float:
    truth = np.asarray(y, dtype=np.float64).reshape(-1)
    pred = np.asarray(y_hat, dtype=np.float64).reshape(-1)
    if truth.shape != pred.shape:
        raise ShapeError(f"mse_loss length mismatch: {truth.shape[0]} vs {pred.shape[0]}")
    if truth.shape[0] == 0:
        raise ShapeError("mse_loss needs at least one sample")
    return float(np.mean((truth - pred) ** 2))


def adamw_update(
    param: NDArray[np.float64],
    grad: NDArray[np.float64],
    m: NDArray[np.float64],
    v: NDArray[np.float64],
    step: int,
    cfg: TrainConfig,
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """One AdamW update of a single tensor; ``step`` counts from 1."""
    m_new = cfg.beta1 * m + (1.0 - cfg.beta1) * grad
    v_new = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad
    m_hat = m_new / (1.0 - cfg.beta1**step)
    v_hat = v_new / (1.0 - cfg.beta2**step)
    updated = param - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.eps)
    if cfg.decay_mode == "decoupled":
        updated = updated - cfg.learning_rate * cfg.weight_decay * param
    return updated, m_new, v_new


def adamw_step(
    p: ModelParams,
    g: Gradients,
    st: OptimizerState,
    cfg: TrainConfig,
) -> tuple[ModelParams, OptimizerState]:
    params = p.tensors()
    grads = g.tensors()
    for name in PARAM_NAMES:
        if not np.all(np.isfinite(grads[name])):
            raise NonFiniteGradientError(f"non-finite gradient in parameter tensor {name!r}")
    step = st.t + 1
    new_params: dict[str, NDArray[np.float64]] = {}
    new_m: dict[str, NDArray[np.float64]] = {}
    new_v: dict[str, NDArray[np.float64]] = {}
    for name in PARAM_NAMES:
        new_params[name], new_m[name], new_v[name] = adamw_update(
            params[name], grads[name], st.m[name], st.v[name], step, cfg
        )
    return ModelParams(**new_params), OptimizerState(m=new_m, v=new_v, t=step)


def _with_l2(loss: float, grads: Gradients, params: ModelParams, weight_decay: float) -> tuple[float, Gradients]:
    tensors = params.tensors()
    penalty = weight_decay * sum(float(np.sum(arr * arr)) for arr in tensors.values())
    adjusted = {name: grad + 2.0 * weight_decay * tensors[name] for name, grad in grads.tensors().items()}
    return loss + penalty, Gradients(**adjusted)


def split_loss(params: ModelParams, samples: SplitSamples) -> float:
    return mse_loss(samples.targets, predict_batch(params, samples.s, samples.m, samples.g))


def iter_batches(n_samples: int, batch_size: int, rng: np.random.Generator) -> list[NDArray[np.int64]]:
    """Shuffled partition of ``range(n_samples)``; the last short batch is kept."""
    order = rng.permutation(n_samples)
    return [order[start : start + batch_size] for start in range(0, n_samples, batch_size)]


def train(model: ModelParams, data: SplitDataset, cfg: TrainConfig) -> tuple[ModelParams, TrainLog]:
    """Mini-batch AdamW with early stopping; returns the best-validation checkpoint."""
    train_split = data.train
    if len(train_split) == 0 or len(data.validation) == 0:
        raise DataError("training needs non-empty train and validation splits")

    rng = np.random.default_rng(cfg.seed)
    params = model
    state = OptimizerState.zeros_like(params)
    log = TrainLog()
    best_params = params
    best_val = np.inf
    stale_epochs = 0

    for epoch in range(1, cfg.max_epochs + 1):
        weighted_loss = 0.0
        for idx in iter_batches(len(train_split), cfg.batch_size, rng):
            s, m, g = train_split.s[idx], train_split.m[idx], train_split.g[idx]
            trace = forward_batch(params, s, m, g)
            loss, grads = backward_batch(params, s, m, g, trace, train_split.targets[idx])
            if cfg.decay_mode == "l2":
                loss, grads = _with_l2(loss, grads, params, cfg.weight_decay)
            if not np.isfinite(loss):
                raise NumericalError(f"non-finite training loss at epoch {epoch}")
            params, state = adamw_step(params, grads, state, cfg)
            weighted_loss += loss * len(idx)

        val_loss = split_loss(params, data.validation)
        if not np.isfinite(val_loss):
            raise NumericalError(f"non-finite validation loss at epoch {epoch}")
        record = EpochRecord(
            epoch=epoch,
            train_loss=weighted_loss / len(train_split),
            val_loss=val_loss,
            alpha=[float(a) for a in params.alpha],
        )
        log.epochs.append(record)
        logger.info(
            "epoch %d train_loss=%.6f val_loss=%.6f alpha=%s",
            epoch,
            record.train_loss,
            val_loss,
            ",".join(f"{a:.3f}" for a in record.alpha),
        )

        if val_loss < best_val - IMPROVEMENT_THRESHOLD:
            best_val = val_loss
            best_params = params
            log.best_epoch = epoch
            stale_epochs = 0
        else:
            stale_epochs += 1
            if stale_epochs >= cfg.patience:
                log.stop_reason = StopReason.EARLY_STOP
                logger.info(
                    "early stop at epoch %d, best epoch %d (val_loss=%.6f)", epoch, log.best_epoch, log.best_val_loss
                )
                break

    return best_params, log
