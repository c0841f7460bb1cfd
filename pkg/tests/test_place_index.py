import numpy as np
import pytest

from src.errors import InvalidInputError
from src.models import IndexRecord, Pose
from src.services import IndexConflictError, PlaceIndex, empty_graph


def _record(record_id, timestamp, embedding):
    embedding = np.asarray(embedding, dtype=np.float64)
    return IndexRecord(
        id=record_id,
        timestamp=timestamp,
        embedding=embedding,
        graph=empty_graph(20.0, embedding.shape[0]),
        world_pose=Pose(np.eye(3), np.array([float(record_id), 0.0, 0.0])),
    )


def test_empty_index_returns_nothing():
    assert PlaceIndex().query_topk(np.zeros(4), query_time=100.0) == []


def test_insert_then_get():
    index = PlaceIndex()
    index.insert(_record(7, 0.0, [1.0, 2.0]))
    assert 7 in index
    assert index.get(7).id == 7
    assert index.get(8) is None


def test_duplicate_id_conflicts():
    index = PlaceIndex([_record(1, 0.0, [0.0])])
    with pytest.raises(IndexConflictError):
        index.insert(_record(1, 5.0, [1.0]))


def test_thousand_inserts(rng):
    index = PlaceIndex()
    for i in range(1000):
        index.insert(_record(i, float(i), rng.normal(size=8)))
    assert len(index) == 1000


def test_out_of_order_timestamp_is_rejected():
    index = PlaceIndex([_record(1, 10.0, [0.0])])
    with pytest.raises(InvalidInputError):
        index.insert(_record(2, 5.0, [0.0]))


def test_exclusion_window_boundary():
    index = PlaceIndex([_record(1, 0.0, [0.0]), _record(2, 0.5, [0.0])])
    found = index.query_topk(np.zeros(1), query_time=30.0, k=20, exclusion=30.0)
    assert [c.record.id for c in found] == [1]


def test_recent_entries_are_excluded():
    index = PlaceIndex([_record(i, 100.0 + i, [float(i)]) for i in range(5)])
    assert index.query_topk(np.zeros(1), query_time=110.0, exclusion=30.0) == []


def test_ordering_matches_full_sort(rng):
    records = [_record(i, float(i), rng.normal(size=6)) for i in range(50)]
    index = PlaceIndex(records)
    query = rng.normal(size=6)
    found = index.query_topk(query, query_time=1000.0, k=20, exclusion=30.0)

    expected = sorted(records, key=lambda r: (np.linalg.norm(r.embedding - query), r.id))[:20]
    assert [c.record.id for c in found] == [r.id for r in expected]
    assert all(a.distance <= b.distance for a, b in zip(found, found[1:]))


def test_equal_distances_break_by_id():
    index = PlaceIndex([_record(i, 0.0, [1.0, 0.0]) for i in (4, 2, 9)])
    found = index.query_topk(np.zeros(2), query_time=100.0, k=2)
    assert [c.record.id for c in found] == [2, 4]


def test_exclude_id(rng):
    index = PlaceIndex([_record(i, 0.0, rng.normal(size=3)) for i in range(3)])
    found = index.query_topk(index.get(1).embedding, query_time=100.0, exclude_id=1)
    assert 1 not in [c.record.id for c in found]


def test_query_validation():
    index = PlaceIndex([_record(1, 0.0, [0.0, 1.0])])
    with pytest.raises(InvalidInputError):
        index.query_topk(np.zeros(2), query_time=100.0, k=0)
    with pytest.raises(InvalidInputError):
        index.query_topk(np.zeros(3), query_time=100.0)


def test_flush_and_load(tmp_path, rng):
    index = PlaceIndex([_record(i, 2.5 * i, rng.normal(size=4)) for i in range(6)])
    index.flush(tmp_path / "index.rgrc")
    loaded = PlaceIndex.load(tmp_path / "index.rgrc")

    assert [r.id for r in loaded.records] == list(range(6))
    for original, restored in zip(index.records, loaded.records):
        assert restored.timestamp == original.timestamp
        np.testing.assert_allclose(restored.embedding, original.embedding, atol=1e-6)
        np.testing.assert_array_equal(restored.world_pose.translation, original.world_pose.translation)
