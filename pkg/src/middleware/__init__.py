"""
Middleware package for GraphLoc commands
"""

# Error handling
from .error_handler import (
    EXIT_CONFIG,
    EXIT_FORMAT,
    EXIT_INVALID_INPUT,
    EXIT_MISSING_FILE,
    EXIT_OK,
    EXIT_UNEXPECTED,
    EXIT_USAGE,
    CommandErrorHandler,
    CommandLoggingHandler,
)

__all__ = [
    "EXIT_CONFIG",
    "EXIT_FORMAT",
    "EXIT_INVALID_INPUT",
    "EXIT_MISSING_FILE",
    "EXIT_OK",
    "EXIT_UNEXPECTED",
    "EXIT_USAGE",
    "CommandErrorHandler",
    "CommandLoggingHandler",
]
