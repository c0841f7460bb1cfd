"""
Logging configuration
"""

import logging
import logging.handlers
from typing import Optional

from pythonjsonlogger import jsonlogger

from ..config import Settings, get_settings


TEXT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
JSON_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"


def _formatter(log_format: str) -> logging.Formatter:
    if log_format == "json":
        return jsonlogger.JsonFormatter(JSON_FORMAT)
    return logging.Formatter(TEXT_FORMAT)


def configure_logging(settings: Optional[Settings] = None, level: Optional[str] = None) -> logging.Logger:
    """
    Install console and optional rotating file handlers on the root logger

    Replaces handlers from a previous call so repeated CLI invocations in one
    process do not duplicate output.
    """
    settings = settings or get_settings()
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_graphloc", False):
            root.removeHandler(handler)
            handler.close()

    formatter = _formatter(settings.log_format)
    handlers = [logging.StreamHandler()]
    if settings.log_file_path:
        settings.log_file_path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(
            logging.handlers.RotatingFileHandler(
                settings.log_file_path,
                maxBytes=settings.log_max_size,
                backupCount=settings.log_backup_count,
            )
        )

    for handler in handlers:
        handler.setFormatter(formatter)
        handler._graphloc = True
        root.addHandler(handler)

    root.setLevel((level or ("DEBUG" if settings.debug else settings.log_level)).upper())
    return root
