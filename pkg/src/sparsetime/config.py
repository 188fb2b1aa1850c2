from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from .exceptions import ConfigError
from .pipeline.trainer import TrainConfig

SCHEMA_VERSION = 1


@dataclass
class SyntheticSourceConfig:
    kind: str = "seasonal"
    length: int = 2000
    features: int = 2
    seed: int = 0
    noise: float = 0.05
    period: int = 12
    spike_prob: float = 0.05


@dataclass
class CsvSourceConfig:
    path: str = ""
    feature_columns: list[str] = field(default_factory=list)
    target_column: str = ""
    delimiter: str = ","
    missing_sentinel: float | None = None


@dataclass
class DataConfig:
    source: str = "synthetic"
    target_feature: int = 0
    synthetic: SyntheticSourceConfig = field(default_factory=SyntheticSourceConfig)
    csv: CsvSourceConfig = field(default_factory=CsvSourceConfig)


@dataclass
class ModelConfig:
    window: int = 24
    smooth_window: int = 5
    hidden_dim: int = 16
    rank: int = 1


@dataclass
class TrainSection:
    learning_rate: float = 1e-3
    weight_decay: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 100
    patience: int = 10
    decay_mode: str = "decoupled"


@dataclass
class BenchConfig:
    lengths: list[int] = field(default_factory=lambda: [1000, 2000, 4000, 8000])
    features: int = 8
    rank: int = 4
    repeats: int = 9
    warmup: int = 2


@dataclass
class RunConfig:
    data: DataConfig = field(default_factory=DataConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainSection = field(default_factory=TrainSection)
    bench: BenchConfig = field(default_factory=BenchConfig)
    output_dir: str = "./runs/default"
    schema_version: int = SCHEMA_VERSION

    @property
    def output_path(self) -> Path:
        return Path(self.output_dir).resolve()

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.train.learning_rate,
            weight_decay=self.train.weight_decay,
            beta1=self.train.beta1,
            beta2=self.train.beta2,
            eps=self.train.eps,
            batch_size=self.train.batch_size,
            max_epochs=self.train.max_epochs,
            patience=self.train.patience,
            seed=seed,
            smooth_window=self.model.smooth_window,
            hidden_dim=self.model.hidden_dim,
            decay_mode=self.train.decay_mode,
        )

    def echo(self) -> dict[str, Any]:
        """Config snapshot embedded in reports; output_dir is left out so reruns elsewhere compare equal."""
        payload = asdict(self)
        payload.pop("output_dir", None)
        return payload


def _load_yaml(path: Path) -> dict[str, Any]:
    import yaml

    try:
        content = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {path}: {exc}") from exc
    if content is None:
        return {}
    if not isinstance(content, dict):
        raise ConfigError(f"config must be a mapping at the top level: {path}")
    return content


def load_config(path: str | None = None) -> RunConfig:
    data: dict[str, Any] = {}
    config_path = path or os.getenv("SPARSETIME_CONFIG")
    if config_path:
        p = Path(config_path)
        if not p.exists():
            raise ConfigError(f"config not found: {p}")
        if p.suffix.lower() not in (".yaml", ".yml"):
            raise ConfigError("config must be YAML (.yaml / .yml)")
        data = _load_yaml(p)
    from .validation.config import build_config_model, validate_config_payload

    config = build_config_model(validate_config_payload(data))
    output_override = os.getenv("SPARSETIME_OUTPUT_DIR")
    if output_override:
        config.output_dir = output_override
    return config
