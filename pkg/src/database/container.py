"""
RGRC binary container

Every binary artifact starts with one fixed header record
(magic "RGRC", format version, payload type, record count, dimension),
followed by payload-specific fixed-width records and their arrays. All values
are little-endian.
"""

import logging
from enum import IntEnum
from pathlib import Path
from typing import BinaryIO, Optional, Tuple, Union

import numpy as np
from numpy.typing import DTypeLike, NDArray

from ..errors import GraphlocError


logger = logging.getLogger(__name__)

MAGIC = b"RGRC"
FORMAT_VERSION = 1

HEADER_DTYPE = np.dtype(
    [
        ("magic", "S4"),
        ("version", "<u4"),
        ("payload", "<u4"),
        ("count", "<u8"),
        ("dim", "<u4"),
    ]
)


class ContainerFormatError(GraphlocError):
    """Malformed, truncated or unsupported RGRC file"""
    pass


class PayloadType(IntEnum):
    SUBMAPS = 1
    GRAPHS = 2
    INDEX = 3
    WEIGHTS = 4


class ContainerWriter:
    """Sequential writer; use as a context manager"""

    def __init__(self, path: Union[str, Path], payload: PayloadType, count: int, dim: int):
        self.path = Path(path)
        self.payload = payload
        self.count = count
        self.dim = dim
        self._file: Optional[BinaryIO] = None

    def __enter__(self) -> "ContainerWriter":
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = open(self.path, "wb")
        header = np.zeros(1, dtype=HEADER_DTYPE)
        header[0] = (MAGIC, FORMAT_VERSION, int(self.payload), self.count, self.dim)
        self._file.write(header.tobytes())
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None
        if exc_type is None:
            logger.debug(f"Wrote {self.payload.name.lower()} container {self.path} ({self.count} records)")

    def write(self, values, dtype: DTypeLike) -> None:
        """Append values converted to a little-endian dtype"""
        if self._file is None:
            raise RuntimeError("ContainerWriter must be used as a context manager")
        array = np.ascontiguousarray(values, dtype=np.dtype(dtype).newbyteorder("<"))
        self._file.write(array.tobytes())


class ContainerReader:
    """Reads a whole container into memory and hands out typed slices"""

    def __init__(self, path: Union[str, Path], expected: Optional[PayloadType] = None):
        self.path = Path(path)
        if not self.path.exists():
            raise FileNotFoundError(f"Container file not found: {self.path}")
        self._buffer = self.path.read_bytes()
        self._offset = 0
        self.payload, self.count, self.dim = self._read_header()
        if expected is not None and self.payload != expected:
            raise ContainerFormatError(
                f"{self.path} holds {self.payload.name.lower()}, expected {expected.name.lower()}"
            )

    def _read_header(self) -> Tuple[PayloadType, int, int]:
        header = self.read(HEADER_DTYPE, 1)[0]
        if bytes(header["magic"]) != MAGIC:
            raise ContainerFormatError(f"{self.path} is not an RGRC container")
        version = int(header["version"])
        if version != FORMAT_VERSION:
            raise ContainerFormatError(f"{self.path}: unsupported format version {version}")
        try:
            payload = PayloadType(int(header["payload"]))
        except ValueError:
            raise ContainerFormatError(f"{self.path}: unknown payload type {int(header['payload'])}")
        return payload, int(header["count"]), int(header["dim"])

    def read(self, dtype: DTypeLike, count: int, shape: Optional[Tuple[int, ...]] = None) -> NDArray:
        """Next count items of dtype, optionally reshaped"""
        dtype = np.dtype(dtype)
        size = dtype.itemsize * count
        if self._offset + size > len(self._buffer):
            raise ContainerFormatError(f"{self.path} is truncated at byte {self._offset}")
        array = np.frombuffer(self._buffer, dtype=dtype, count=count, offset=self._offset)
        self._offset += size
        array = array.astype(dtype.newbyteorder("="), copy=True) if dtype.fields is None else array.copy()
        return array.reshape(shape) if shape is not None else array

    def finish(self) -> None:
        """Reject trailing bytes"""
        if self._offset != len(self._buffer):
            raise ContainerFormatError(
                f"{self.path} has {len(self._buffer) - self._offset} unexpected trailing bytes"
            )


def read_header(path: Union[str, Path]) -> Tuple[PayloadType, int, int]:
    """(payload type, record count, dimension) of a container"""
    reader = ContainerReader(path)
    return reader.payload, reader.count, reader.dim
