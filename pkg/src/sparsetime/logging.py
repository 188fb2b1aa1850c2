import logging
import sys


PACKAGE_LOGGER = "sparsetime"
DEFAULT_FORMAT = "%(levelname)s - %(name)s - %(message)s"
ALLOWED_LEVELS = {"CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG", "NOTSET"}


def configure_logging(level: str = "INFO") -> None:
    """日志只写 stderr；stdout 留给 report 表格。可重复调用（测试内多次 main）。"""
    normalized = (level or "INFO").strip().upper()
    if normalized not in ALLOWED_LEVELS:
        raise ValueError(f"unsupported log level: {level}")
    root = logging.getLogger(PACKAGE_LOGGER)
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(DEFAULT_FORMAT))
    root.addHandler(handler)
    root.setLevel(normalized)
    root.propagate = False


def get_logger(name: str) -> logging.Logger:
    if name != PACKAGE_LOGGER and not name.startswith(PACKAGE_LOGGER + "."):
        name = f"{PACKAGE_LOGGER}.{name}"
    return logging.getLogger(name)
