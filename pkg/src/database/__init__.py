"""
Artifact persistence package: RGRC containers
"""

from .container import (
    FORMAT_VERSION,
    MAGIC,
    ContainerFormatError,
    ContainerReader,
    ContainerWriter,
    PayloadType,
    read_header,
)
from .records import (
    load_graph_records,
    load_index,
    load_submaps,
    load_weights,
    save_graph_records,
    save_index,
    save_submaps,
    save_weights,
    weights_from_arrays,
    weights_to_arrays,
)

__all__ = [
    "FORMAT_VERSION",
    "MAGIC",
    "ContainerFormatError",
    "ContainerReader",
    "ContainerWriter",
    "PayloadType",
    "read_header",
    "load_graph_records",
    "load_index",
    "load_submaps",
    "load_weights",
    "save_graph_records",
    "save_index",
    "save_submaps",
    "save_weights",
    "weights_from_arrays",
    "weights_to_arrays",
]
