import numpy as np
import pytest

from src.database import (
    ContainerFormatError,
    ContainerReader,
    ContainerWriter,
    PayloadType,
    load_graph_records,
    load_submaps,
    load_weights,
    read_header,
    save_graph_records,
    save_index,
    save_submaps,
    save_weights,
)
from src.models import SceneSpec
from src.services import SubmapProcessor, generate_pair


@pytest.fixture(scope="module")
def pair():
    return generate_pair(SceneSpec(seed=21, object_count=4))


def test_submaps_round_trip(tmp_path, pair):
    path = tmp_path / "submaps.rgrc"
    save_submaps(path, [pair.b, pair.a])
    loaded = load_submaps(path)

    assert [s.id for s in loaded] == [0, 1]
    for original, restored in zip([pair.a, pair.b], loaded):
        assert restored.timestamp == original.timestamp
        np.testing.assert_array_equal(restored.origin.as_matrix(), original.origin.as_matrix())
        np.testing.assert_array_equal(restored.grid.keys, original.grid.keys)
        np.testing.assert_array_equal(restored.grid.counts, original.grid.counts)
        np.testing.assert_array_equal(restored.grid.centroids, original.grid.centroids)
        np.testing.assert_array_equal(restored.grid.probs, original.grid.probs)


def test_graph_records_round_trip(tmp_path, pair, small_config):
    processor = SubmapProcessor(small_config)
    records = [processor.record(pair.a), processor.record(pair.b)]
    path = tmp_path / "graphs.rgrc"
    save_graph_records(path, records)
    loaded = load_graph_records(path)

    assert [r.id for r in loaded] == [0, 1]
    for original, restored in zip(records, loaded):
        np.testing.assert_allclose(restored.embedding, original.embedding, rtol=1e-6, atol=1e-7)
        np.testing.assert_array_equal(restored.graph.centroids, original.graph.centroids)
        np.testing.assert_array_equal(restored.graph.features, original.graph.features)
        np.testing.assert_array_equal(restored.graph.class_ids, original.graph.class_ids)
        np.testing.assert_allclose(restored.graph.edges, original.graph.edges, atol=1e-12)
        assert len(restored.graph.cells) == original.graph.num_nodes


def test_index_payload_is_distinct(tmp_path, pair, small_config):
    record = SubmapProcessor(small_config).record(pair.a)
    path = tmp_path / "index.rgrc"
    save_index(path, [record])
    assert read_header(path) == (PayloadType.INDEX, 1, 16)
    with pytest.raises(ContainerFormatError):
        load_graph_records(path)


def test_weights_round_trip(tmp_path, small_weights):
    path = tmp_path / "weights.rgrc"
    save_weights(path, small_weights)
    loaded = load_weights(path)

    assert loaded.gem_lambda == small_weights.gem_lambda
    assert len(loaded.layers) == len(small_weights.layers)
    np.testing.assert_array_equal(loaded.embed.weight, small_weights.embed.weight)
    np.testing.assert_array_equal(loaded.layers[1].coord_out.weight, small_weights.layers[1].coord_out.weight)
    np.testing.assert_array_equal(loaded.tnn_slices, small_weights.tnn_slices)


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.rgrc"
    path.write_bytes(b"NOPE" + b"\x00" * 40)
    with pytest.raises(ContainerFormatError):
        ContainerReader(path)


def test_unsupported_version(tmp_path):
    path = tmp_path / "old.rgrc"
    with ContainerWriter(path, PayloadType.SUBMAPS, 0, 0):
        pass
    data = bytearray(path.read_bytes())
    data[4] = 9
    path.write_bytes(bytes(data))
    with pytest.raises(ContainerFormatError):
        ContainerReader(path)


def test_truncated_container(tmp_path, pair):
    path = tmp_path / "submaps.rgrc"
    save_submaps(path, [pair.a])
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ContainerFormatError):
        load_submaps(path)


def test_trailing_bytes(tmp_path, pair):
    path = tmp_path / "submaps.rgrc"
    save_submaps(path, [pair.a])
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(ContainerFormatError):
        load_submaps(path)


def test_missing_container(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_submaps(tmp_path / "absent.rgrc")


def test_empty_container(tmp_path):
    path = tmp_path / "submaps.rgrc"
    save_submaps(path, [])
    assert load_submaps(path) == []
