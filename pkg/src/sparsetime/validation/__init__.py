"""Validation helpers for CLI arguments and run configs."""

from .cli import CliArgsModel, CliValidationError, render_cli_error, validate_cli_args
from .config import ValidationConfigError, build_config_model, validate_config_payload

__all__ = [
    "CliArgsModel",
    "CliValidationError",
    "ValidationConfigError",
    "build_config_model",
    "render_cli_error",
    "validate_cli_args",
    "validate_config_payload",
]
