"""
Place index

In-memory database of previously seen submaps with exhaustive L2 search over
global embeddings. Inserts are serialized by a lock; queries work on the
snapshot taken when they start.
"""

import logging
import threading
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from ..database import load_index, save_index
from ..errors import InvalidInputError, GraphlocError
from ..models import IndexRecord, RankedCandidate


logger = logging.getLogger(__name__)

DEFAULT_TOP_K = 20
DEFAULT_EXCLUSION_S = 30.0


class IndexConflictError(GraphlocError):
    """A record with the same id is already indexed"""
    pass


class PlaceIndex:
    """Retrieval database of IndexRecords keyed by submap id"""

    def __init__(self, records: Optional[Iterable[IndexRecord]] = None, name: str = "default"):
        self.name = name
        self.logger = logging.getLogger(f"{__name__}.{name}")
        self._lock = threading.Lock()
        self._records: Dict[int, IndexRecord] = {}
        self._order: List[int] = []
        self._snapshot: Optional[Tuple[Tuple[IndexRecord, ...], NDArray, NDArray, NDArray]] = None
        for record in records or ():
            self.insert(record)

    def __len__(self) -> int:
        return len(self._order)

    def __contains__(self, record_id: int) -> bool:
        return record_id in self._records

    @property
    def records(self) -> List[IndexRecord]:
        """Records in insertion order"""
        with self._lock:
            return [self._records[i] for i in self._order]

    def get(self, record_id: int) -> Optional[IndexRecord]:
        return self._records.get(record_id)

    def insert(self, record: IndexRecord) -> None:
        """Add a record; ids are unique and timestamps non-decreasing"""
        with self._lock:
            if record.id in self._records:
                raise IndexConflictError(f"Record {record.id} is already in index '{self.name}'")
            if self._order:
                previous = self._records[self._order[-1]]
                if record.timestamp < previous.timestamp:
                    raise InvalidInputError(
                        f"Record {record.id} at t={record.timestamp} is older than record "
                        f"{previous.id} at t={previous.timestamp}"
                    )
                if record.embedding.shape != previous.embedding.shape:
                    raise InvalidInputError(
                        f"Record {record.id} has embedding dim {record.embedding.shape[0]}, "
                        f"index holds {previous.embedding.shape[0]}"
                    )
            self._records[record.id] = record
            self._order.append(record.id)
            self._snapshot = None

    def _current(self) -> Tuple[Tuple[IndexRecord, ...], NDArray, NDArray, NDArray]:
        with self._lock:
            if self._snapshot is None:
                records = tuple(self._records[i] for i in self._order)
                embeddings = (
                    np.stack([r.embedding for r in records]) if records else np.zeros((0, 0))
                )
                timestamps = np.array([r.timestamp for r in records], dtype=np.float64)
                ids = np.array([r.id for r in records], dtype=np.int64)
                self._snapshot = (records, embeddings, timestamps, ids)
            return self._snapshot

    def query_topk(
        self,
        embedding: NDArray,
        query_time: float,
        k: int = DEFAULT_TOP_K,
        exclusion: float = DEFAULT_EXCLUSION_S,
        exclude_id: Optional[int] = None,
    ) -> List[RankedCandidate]:
        """
        Up to k records with timestamp ≤ query_time − exclusion

        Ordered by ascending L2 embedding distance, then ascending id.
        """
        if k < 1:
            raise InvalidInputError(f"k must be at least 1, got {k}")
        records, embeddings, timestamps, ids = self._current()
        if not records:
            return []

        embedding = np.asarray(embedding, dtype=np.float64).reshape(-1)
        if embedding.shape[0] != embeddings.shape[1]:
            raise InvalidInputError(
                f"Query embedding has {embedding.shape[0]} dims, index holds {embeddings.shape[1]}"
            )

        eligible = timestamps <= query_time - exclusion
        if exclude_id is not None:
            eligible &= ids != exclude_id
        positions = np.flatnonzero(eligible)
        if positions.size == 0:
            return []

        distances = np.linalg.norm(embeddings[positions] - embedding, axis=1)
        order = np.lexsort((ids[positions], distances))[:k]
        return [RankedCandidate(records[positions[i]], float(distances[i])) for i in order]

    def flush(self, path: Union[str, Path]) -> None:
        """Persist the index as an RGRC container"""
        records = self.records
        save_index(path, records)
        self.logger.info(f"Flushed {len(records)} records to {path}")

    @classmethod
    def load(cls, path: Union[str, Path], name: str = "default") -> "PlaceIndex":
        """Rebuild an index from an RGRC container"""
        records = sorted(load_index(path), key=lambda r: (r.timestamp, r.id))
        index = cls(records, name=name)
        index.logger.info(f"Loaded {len(index)} records from {path}")
        return index
