"""
Command error handling and logging
"""

import logging
import traceback
import uuid
from datetime import datetime
from typing import Callable, Optional, Tuple, Type

import click
from pydantic import ValidationError
from rich.console import Console

from ..config import ConfigurationError
from ..database import ContainerFormatError
from ..errors import CommandUsageError, GraphlocError
from ..models import ErrorDetail
from ..utils.datasets import DatasetFormatError


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_FORMAT = 4
EXIT_INVALID_INPUT = 5
EXIT_MISSING_FILE = 6

# first match wins
ERROR_TABLE: Tuple[Tuple[Tuple[Type[BaseException], ...], str, int], ...] = (
    ((CommandUsageError, click.UsageError), "USAGE_ERROR", EXIT_USAGE),
    ((ConfigurationError, ValidationError), "CONFIG_ERROR", EXIT_CONFIG),
    ((ContainerFormatError, DatasetFormatError), "FORMAT_ERROR", EXIT_FORMAT),
    ((FileNotFoundError,), "FILE_NOT_FOUND", EXIT_MISSING_FILE),
    ((GraphlocError, ValueError), "INVALID_INPUT", EXIT_INVALID_INPUT),
)


class CommandErrorHandler:
    """Runs a command and maps its exceptions to exit statuses"""

    def __init__(self, command: str, run_id: Optional[str] = None, console: Optional[Console] = None):
        self.command = command
        self.run_id = run_id or uuid.uuid4().hex[:8]
        self.console = console or Console(stderr=True)

    def classify(self, error: BaseException) -> Tuple[str, int]:
        """Error code and exit status of an exception"""
        for types, error_code, status in ERROR_TABLE:
            if isinstance(error, types):
                return error_code, status
        return "INTERNAL_ERROR", EXIT_UNEXPECTED

    def describe(self, error: BaseException) -> ErrorDetail:
        """Standardized error record; the traceback is kept for unexpected errors only"""
        error_code, status = self.classify(error)
        detail = ErrorDetail(
            error_code=error_code,
            error_message=str(error) if status != EXIT_UNEXPECTED else f"An unexpected error occurred: {error}",
            error_type=type(error).__name__,
            exit_status=status,
            run_id=self.run_id,
            command=self.command,
        )
        if status == EXIT_UNEXPECTED:
            detail.stack_trace = "".join(traceback.format_exception(type(error), error, error.__traceback__))
        return detail

    def run(self, func: Callable[..., Optional[int]], *args, **kwargs) -> int:
        """Call func; its return value (default 0) or the mapped error status is the exit status"""
        try:
            result = func(*args, **kwargs)
            return EXIT_OK if result is None else int(result)
        except Exception as e:
            detail = self.describe(e)
            if detail.exit_status == EXIT_UNEXPECTED:
                logger.error(f"Unexpected error [{self.run_id}]: {e}")
                logger.error(f"Traceback [{self.run_id}]:\n{detail.stack_trace}")
            else:
                logger.error(f"{detail.error_type} [{self.run_id}]: {e}")
            self.console.print(f"[bold red]{detail.error_code}[/bold red] ({self.command}): {detail.error_message}")
            return detail.exit_status


class CommandLoggingHandler:
    """Logs start, end and duration of a command"""

    def __init__(self, command: str, run_id: str):
        self.command = command
        self.run_id = run_id
        self.start_time: Optional[datetime] = None

    def __enter__(self) -> "CommandLoggingHandler":
        self.start_time = datetime.now()
        logger.info(f"Command [{self.run_id}]: {self.command} started")
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        duration = (datetime.now() - self.start_time).total_seconds()
        outcome = "failed" if exc_type else "finished"
        logger.info(f"Command [{self.run_id}]: {self.command} {outcome} in {duration:.3f}s")
        return False
