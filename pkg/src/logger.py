"""Логи ffbias.

Все сообщения идут в stderr: stdout отдан под JSON- и CSV-отчёты, и их
можно перенаправлять в файл, не смешивая с диагностикой. Уровень по
умолчанию берётся из ``FFBIAS_LOG_LEVEL`` (INFO, если переменная не задана);
флаги ``-v``/``-q`` меняют его через :func:`set_level`.
"""

import logging
import os
import sys
from typing import Mapping, Optional

from src.config import LOG_LEVEL_ENV
from src.errors import ConfigError

_FORMAT = "%(asctime)s %(levelname)s %(name)s – %(message)s"


def level_from_env(environ: Optional[Mapping[str, str]] = None) -> int:
    """Уровень из ``FFBIAS_LOG_LEVEL``: имя (``debug``) или число."""
    raw = (environ if environ is not None else os.environ).get(LOG_LEVEL_ENV, "").strip()
    if not raw:
        return logging.INFO
    if raw.isdigit():
        return int(raw)
    level = logging.getLevelName(raw.upper())
    if not isinstance(level, int):
        raise ConfigError(f"{LOG_LEVEL_ENV}={raw!r} is not a logging level")
    return level


def _configure_root() -> None:
    root = logging.getLogger()
    if root.handlers:
        return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(fmt=_FORMAT, datefmt="%H:%M:%S"))
    root.addHandler(handler)
    try:
        root.setLevel(level_from_env())
    except ConfigError as exc:
        root.setLevel(logging.INFO)
        root.warning("%s, using INFO", exc)


def get_logger(name: str) -> logging.Logger:
    _configure_root()
    return logging.getLogger(name)


def set_level(level: int) -> None:
    _configure_root()
    logging.getLogger().setLevel(level)
