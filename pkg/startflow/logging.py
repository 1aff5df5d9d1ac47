from __future__ import annotations

import datetime as dt
import logging
import sys
from logging.handlers import TimedRotatingFileHandler
from pathlib import Path

from .config import LoggerConfig

_STAGE_NAMES = ["parse", "lint", "metrics", "render", "eval", "wizard", "corpus"]
_stage_loggers: dict[str, logging.Logger] = {}
_log_base_path: Path | None = None
_timestamp: str = ""

_FORMATTER = logging.Formatter(
    fmt="%(asctime)s %(threadName)s %(filename)s:%(lineno)d %(levelname)s %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
)


def _resolve_level(level_name: str) -> int:
    level = logging.getLevelName(str(level_name).upper())
    return level if isinstance(level, int) else logging.WARNING


def configure_logging(logger_cfg: LoggerConfig) -> Path | None:
    """Route log records to stderr and, when configured, to per-run/per-stage files."""
    global _timestamp, _log_base_path
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    log_file: Path | None = None
    _timestamp = dt.datetime.now().strftime("%Y-%m-%d_%H-%M-%S")
    if logger_cfg.path is not None:
        logger_cfg.path.mkdir(parents=True, exist_ok=True)
        _log_base_path = logger_cfg.path
        log_file = logger_cfg.path / f"startflow_{_timestamp}.log"
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
        for stage in _STAGE_NAMES:
            (logger_cfg.path / stage).mkdir(parents=True, exist_ok=True)
    else:
        _log_base_path = None
    logging.basicConfig(
        level=_resolve_level(logger_cfg.level),
        handlers=handlers,
        force=True,
    )
    for handler in logging.getLogger().handlers:
        handler.setFormatter(_FORMATTER)
    # 重新配置后阶段日志需要按新的目录重建
    for logger in _stage_loggers.values():
        for handler in list(logger.handlers):
            logger.removeHandler(handler)
            handler.close()
    _stage_loggers.clear()
    return log_file


def get_stage_logger(stage: str) -> logging.Logger:
    if stage in _stage_loggers:
        return _stage_loggers[stage]

    logger = logging.getLogger(f"startflow.{stage}")
    if _log_base_path is not None:
        stage_dir = _log_base_path / stage
        stage_dir.mkdir(parents=True, exist_ok=True)
        stage_path = stage_dir / f"{stage}.log"
        base_name = stage_path.name

        handler = TimedRotatingFileHandler(
            stage_path,
            when="midnight",
            interval=1,
            backupCount=7,
            encoding="utf-8",
            delay=True,
        )
        handler.suffix = "%Y-%m-%d"

        def _namer(default_name: str, *, base=base_name, prefix=stage) -> str:
            """
            Rename rotated file from 'lint.log.2025-11-23' to 'lint.2025-11-23.log'
            so the timestamp sits before the .log suffix.
            """
            path = Path(default_name)
            timestamp = path.name.removeprefix(f"{base}.")
            if not timestamp:
                return default_name
            return str(path.with_name(f"{prefix}.{timestamp}.log"))

        handler.namer = _namer
        handler.setFormatter(_FORMATTER)
        logger.addHandler(handler)

    _stage_loggers[stage] = logger
    return logger
