from __future__ import annotations

from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..config import (
    SCHEMA_VERSION,
    BenchConfig,
    CsvSourceConfig,
    DataConfig,
    ModelConfig,
    RunConfig,
    SyntheticSourceConfig,
    TrainSection,
)
from ..exceptions import ConfigError
from ..pipeline.synthetic import MIN_SYNTH_LENGTH, SynthKind
from ..pipeline.trainer import DECAY_MODES


class ValidationConfigError(ConfigError):
    """包装配置校验错误。"""


class SyntheticSourceModel(BaseModel):
    kind: str = "seasonal"
    length: int = 2000
    features: int = 2
    seed: int = 0
    noise: float = 0.05
    period: int = 12
    spike_prob: float = 0.05

    model_config = ConfigDict(extra="forbid")

    @field_validator("kind")
    @classmethod
    def _kind(cls, value: str) -> str:
        normalized = value.strip().lower()
        allowed = [kind.value for kind in SynthKind]
        if normalized not in allowed:
            raise ValueError(f"data.synthetic.kind must be one of: {', '.join(allowed)}")
        return normalized

    @field_validator("length")
    @classmethod
    def _length(cls, value: int) -> int:
        if value < MIN_SYNTH_LENGTH:
            raise ValueError(f"data.synthetic.length must be >= {MIN_SYNTH_LENGTH}")
        return int(value)

    @field_validator("features", "period")
    @classmethod
    def _positive_int(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be >= 1")
        return int(value)

    @field_validator("noise")
    @classmethod
    def _noise(cls, value: float) -> float:
        if value < 0:
            raise ValueError("data.synthetic.noise must be >= 0")
        return float(value)

    @field_validator("spike_prob")
    @classmethod
    def _spike_prob(cls, value: float) -> float:
        if not 0 <= value <= 1:
            raise ValueError("data.synthetic.spike_prob must be in [0, 1]")
        return float(value)


class CsvSourceModel(BaseModel):
    path: str = ""
    feature_columns: list[str] = Field(default_factory=list)
    target_column: str = ""
    delimiter: str = ","
    missing_sentinel: float | None = None

    model_config = ConfigDict(extra="forbid")

    @field_validator("feature_columns", mode="before")
    @classmethod
    def _feature_columns(cls, value: Any) -> list[str]:
        if value is None:
            return []
        if isinstance(value, str):
            value = value.split(",")
        return [str(item).strip() for item in value if str(item).strip()]

    @field_validator("delimiter")
    @classmethod
    def _delimiter(cls, value: str) -> str:
        if len(value) != 1:
            raise ValueError("data.csv.delimiter must be a single character")
        return value


class DataConfigModel(BaseModel):
    source: str = "synthetic"
    target_feature: int = 0
    synthetic: SyntheticSourceModel = Field(default_factory=SyntheticSourceModel)
    csv: CsvSourceModel = Field(default_factory=CsvSourceModel)

    model_config = ConfigDict(extra="forbid")

    @field_validator("source")
    @classmethod
    def _source(cls, value: str) -> str:
        normalized = value.strip().lower()
        if normalized not in {"synthetic", "csv"}:
            raise ValueError("data.source must be one of: synthetic, csv")
        return normalized

    @field_validator("target_feature")
    @classmethod
    def _target_feature(cls, value: int) -> int:
        if value < 0:
            raise ValueError("data.target_feature must be >= 0")
        return int(value)

    @model_validator(mode="after")
    def _source_fields(self) -> DataConfigModel:
        if self.source == "csv":
            if not self.csv.path:
                raise ValueError("data.csv.path is required when data.source is csv")
            if not self.csv.target_column:
                raise ValueError("data.csv.target_column is required when data.source is csv")
        elif self.target_feature >= self.synthetic.features:
            raise ValueError("data.target_feature must be < data.synthetic.features")
        return self


class ModelConfigModel(BaseModel):
    window: int = 24
    smooth_window: int = 5
    hidden_dim: int = 16
    rank: int = 1

    model_config = ConfigDict(extra="forbid")

    @field_validator("window")
    @classmethod
    def _window(cls, value: int) -> int:
        if value < 2:
            raise ValueError("model.window must be >= 2")
        return int(value)

    @field_validator("smooth_window")
    @classmethod
    def _smooth_window(cls, value: int) -> int:
        if value < 1 or value % 2 == 0:
            raise ValueError("model.smooth_window must be an odd integer >= 1")
        return int(value)

    @field_validator("hidden_dim", "rank")
    @classmethod
    def _positive_int(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be >= 1")
        return int(value)


class TrainSectionModel(BaseModel):
    learning_rate: float = 1e-3
    weight_decay: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 100
    patience: int = 10
    decay_mode: str = "decoupled"

    model_config = ConfigDict(extra="forbid")

    @field_validator("learning_rate", "eps")
    @classmethod
    def _positive_float(cls, value: float) -> float:
        if value <= 0:
            raise ValueError("must be > 0")
        return float(value)

    @field_validator("weight_decay")
    @classmethod
    def _non_negative(cls, value: float) -> float:
        if value < 0:
            raise ValueError("train.weight_decay must be >= 0")
        return float(value)

    @field_validator("beta1", "beta2")
    @classmethod
    def _beta(cls, value: float) -> float:
        if not 0 <= value < 1:
            raise ValueError("must be in [0, 1)")
        return float(value)

    @field_validator("batch_size", "max_epochs", "patience")
    @classmethod
    def _positive_int(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be >= 1")
        return int(value)

    @field_validator("decay_mode")
    @classmethod
    def _decay_mode(cls, value: str) -> str:
        normalized = value.strip().lower()
        if normalized not in DECAY_MODES:
            raise ValueError(f"train.decay_mode must be one of: {', '.join(DECAY_MODES)}")
        return normalized


class BenchConfigModel(BaseModel):
    lengths: list[int] = Field(default_factory=lambda: [1000, 2000, 4000, 8000])
    features: int = 8
    rank: int = 4
    repeats: int = 9
    warmup: int = 2

    model_config = ConfigDict(extra="forbid")

    @field_validator("lengths")
    @classmethod
    def _lengths(cls, value: list[int]) -> list[int]:
        if not value:
            raise ValueError("bench.lengths cannot be empty")
        if any(b <= a for a, b in zip(value, value[1:], strict=False)):
            raise ValueError("bench.lengths must be strictly increasing")
        if value[0] < MIN_SYNTH_LENGTH:
            raise ValueError(f"bench.lengths must be >= {MIN_SYNTH_LENGTH}")
        return [int(item) for item in value]

    @field_validator("features", "rank", "repeats")
    @classmethod
    def _positive_int(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be >= 1")
        return int(value)

    @field_validator("warmup")
    @classmethod
    def _warmup(cls, value: int) -> int:
        if value < 0:
            raise ValueError("bench.warmup must be >= 0")
        return int(value)

    @model_validator(mode="after")
    def _rank_le_features(self) -> BenchConfigModel:
        if self.rank > self.features:
            raise ValueError("bench.rank cannot be greater than bench.features")
        return self


class RunConfigPayload(BaseModel):
    schema_version: int = SCHEMA_VERSION
    output_dir: str = "./runs/default"
    data: DataConfigModel = Field(default_factory=DataConfigModel)
    model: ModelConfigModel = Field(default_factory=ModelConfigModel)
    train: TrainSectionModel = Field(default_factory=TrainSectionModel)
    bench: BenchConfigModel = Field(default_factory=BenchConfigModel)

    model_config = ConfigDict(extra="forbid")

    @field_validator("schema_version")
    @classmethod
    def _schema_version(cls, value: int) -> int:
        if value != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {value}, expected {SCHEMA_VERSION}")
        return value

    @field_validator("output_dir")
    @classmethod
    def _output_dir(cls, value: str) -> str:
        if not str(value).strip():
            raise ValueError("output_dir is empty")
        return str(value).strip()


def validate_config_payload(data: dict[str, Any]) -> RunConfigPayload:
    try:
        return RunConfigPayload.model_validate(data)
    except ValidationError as exc:
        raise ValidationConfigError(str(exc)) from exc


def build_config_model(validated: RunConfigPayload) -> RunConfig:
    """将 Pydantic 配置模型转换为内部 dataclass 结构。"""

    return RunConfig(
        data=DataConfig(
            source=validated.data.source,
            target_feature=validated.data.target_feature,
            synthetic=SyntheticSourceConfig(**validated.data.synthetic.model_dump()),
            csv=CsvSourceConfig(**validated.data.csv.model_dump()),
        ),
        model=ModelConfig(**validated.model.model_dump()),
        train=TrainSection(**validated.train.model_dump()),
        bench=BenchConfig(**validated.bench.model_dump()),
        output_dir=validated.output_dir,
        schema_version=validated.schema_version,
    )
