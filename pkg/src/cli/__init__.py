"""
Command-line frontend package
"""

from .commands import cli
from .runner import COMMANDS, invoke, pairs_within, run

__all__ = [
    "cli",
    "COMMANDS",
    "invoke",
    "pairs_within",
    "run",
]
