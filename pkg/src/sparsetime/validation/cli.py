from __future__ import annotations

from argparse import Namespace
from typing import Any

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from ..exceptions import ConfigError

LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}
SEEDED_COMMANDS = {"train", "ablate"}
PREDICT_SPLITS = {"train", "validation", "test"}


class CliValidationError(ConfigError):
    """包装 CLI 验证错误。"""


class CliArgsModel(BaseModel):
    """命令行参数的统一解析模型（语义级校验）。"""

    command: str
    log_level: str = "INFO"
    config: str | None = None
    seed: int | None = None
    out: str | None = None
    epochs: int | None = Field(default=None, ge=1)
    window: int | None = Field(default=None, ge=2)
    hidden_dim: int | None = Field(default=None, ge=1)
    checkpoint: str | None = None
    cache_dataset: bool = False
    timing: bool = False
    split: str = "test"
    runs: list[str] = Field(default_factory=list)
    lengths: list[int] = Field(default_factory=list)
    repeats: int | None = Field(default=None, ge=1)

    model_config = {
        "extra": "ignore",
    }

    @field_validator("log_level")
    @classmethod
    def _log_level(cls, value: str) -> str:
        level = (value or "").strip().upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"unsupported log_level: {value}")
        return level

    @field_validator("out", "config", "checkpoint")
    @classmethod
    def _non_empty_path(cls, value: str | None) -> str | None:
        if value is None:
            return None
        trimmed = str(value).strip()
        return trimmed or None

    @field_validator("split")
    @classmethod
    def _split(cls, value: str) -> str:
        normalized = (value or "test").strip().lower()
        if normalized not in PREDICT_SPLITS:
            raise ValueError(f"unsupported split: {value}")
        return normalized

    @field_validator("lengths", mode="before")
    @classmethod
    def _lengths(cls, value: Any) -> list[int]:
        if value is None:
            return []
        if isinstance(value, str):
            value = [item.strip() for item in value.split(",") if item.strip()]
        return [int(item) for item in value]

    @field_validator("runs", mode="before")
    @classmethod
    def _runs(cls, value: Any) -> list[str]:
        if value is None:
            return []
        return [str(item) for item in value]

    @model_validator(mode="after")
    def _cross_checks(self) -> CliArgsModel:
        if self.command in SEEDED_COMMANDS and self.seed is None:
            raise ValueError(f"--seed is required for {self.command}")
        if self.command == "predict" and not self.checkpoint:
            raise ValueError("--checkpoint is required for predict")
        if self.command == "report" and not self.runs:
            raise ValueError("report needs at least one run directory")
        if any(b <= a for a, b in zip(self.lengths, self.lengths[1:], strict=False)):
            raise ValueError("--lengths must be strictly increasing")
        return self


def validate_cli_args(args: Namespace) -> CliArgsModel:
    """Validate argparse args and return typed model."""

    try:
        return CliArgsModel.model_validate(vars(args))
    except ValidationError as exc:
        raise CliValidationError(str(exc)) from exc


def render_cli_error(error: CliValidationError) -> str:
    return str(error)
