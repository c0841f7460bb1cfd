"""
Utilities package: dataset file formats, logging setup and report records
"""

from .datasets import (
    LEARNING_MAP,
    LEARNING_MAP_INV,
    DatasetFormatError,
    LabelCountMismatchError,
    PoseFormatError,
    ScanFormatError,
    labels_to_probs,
    load_sequence,
    map_labels,
    read_labels,
    read_poses,
    read_revisits,
    read_scan,
    read_times,
    unmap_labels,
    write_labels,
    write_poses,
    write_scan,
    write_times,
    write_world,
)
from .logging_setup import configure_logging
from .reports import read_jsonl, write_jsonl

__all__ = [
    "LEARNING_MAP",
    "LEARNING_MAP_INV",
    "DatasetFormatError",
    "LabelCountMismatchError",
    "PoseFormatError",
    "ScanFormatError",
    "labels_to_probs",
    "load_sequence",
    "map_labels",
    "read_labels",
    "read_poses",
    "read_revisits",
    "read_scan",
    "read_times",
    "unmap_labels",
    "write_labels",
    "write_poses",
    "write_scan",
    "write_times",
    "write_world",
    "configure_logging",
    "read_jsonl",
    "write_jsonl",
]
