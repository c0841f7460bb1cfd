from dataclasses import replace

import numpy as np
import pytest
from scipy.spatial.distance import pdist

from src.config import ConfigurationError
from src.errors import InvalidInputError
from src.models import LinearWeights, ObjectInstance
from src.services import (
    apply,
    build_graph,
    compute_alpha,
    egnn_forward,
    embed_graph,
    empty_graph,
    gem_pool,
    gem_pool_features,
    initialize_weights,
    tnn_score,
)
from tests.helpers import point_graph, random_pose


def _instance(cells, class_id=1):
    cells = np.asarray(cells, dtype=np.float64)
    return ObjectInstance(class_id=class_id, cells=cells, centroid=cells.mean(axis=0), sampled=cells)


def _random_graph(rng, k=8, dim=128):
    return point_graph(rng.uniform(-15, 15, size=(k, 3)), rng.normal(size=(k, dim)))


def test_edge_is_normalized_distance():
    graph = build_graph(
        [_instance([[0.0, 0.0, 0.0]]), _instance([[3.0, 4.0, 0.0]])], np.eye(2, 128), alpha=10.0
    )
    assert graph.edges[0, 1] == pytest.approx(0.5)
    assert graph.edges[1, 0] == pytest.approx(0.5)


def test_graph_is_dense_and_symmetric(rng):
    instances = [_instance(rng.normal(size=(5, 3)) + 10 * i) for i in range(3)]
    graph = build_graph(instances, rng.normal(size=(3, 128)), alpha=20.0)
    off_diagonal = ~np.eye(3, dtype=bool)
    assert np.count_nonzero(graph.edges[off_diagonal]) == 6
    np.testing.assert_array_equal(graph.edges, graph.edges.T)
    assert np.all(np.diag(graph.edges) == 0.0)


def test_graph_node_permutation(rng):
    instances = [_instance(rng.normal(size=(5, 3)) + 5 * i) for i in range(4)]
    descriptors = rng.normal(size=(4, 128))
    perm = np.array([2, 0, 3, 1])
    graph = build_graph(instances, descriptors, 20.0)
    permuted = build_graph([instances[i] for i in perm], descriptors[perm], 20.0)
    np.testing.assert_allclose(permuted.edges, graph.edges[np.ix_(perm, perm)])
    np.testing.assert_array_equal(permuted.features, graph.features[perm])


def test_build_graph_rejects_bad_input(rng):
    with pytest.raises(InvalidInputError):
        build_graph([], np.zeros((0, 128)), 20.0)
    with pytest.raises(InvalidInputError):
        build_graph([_instance(rng.normal(size=(3, 3)))], np.zeros((1, 128)), 0.0)


def test_alpha_is_diameter_quantile(rng):
    instances = [_instance(rng.normal(size=(int(rng.integers(2, 30)), 3)) * rng.uniform(0.2, 3.0)) for _ in range(40)]
    diameters = [pdist(inst.cells).max() for inst in instances]
    assert compute_alpha(instances) == pytest.approx(np.quantile(diameters, 0.95), rel=1e-12)


def test_egnn_features_invariant_and_coordinates_equivariant(rng, small_weights):
    for _ in range(20):
        graph = _random_graph(rng)
        pose = random_pose(rng)
        moved = point_graph(apply(pose, graph.centroids), graph.features)

        out = egnn_forward(graph, small_weights)
        out_moved = egnn_forward(moved, small_weights)
        np.testing.assert_allclose(out_moved.enriched_features, out.enriched_features, atol=1e-9)
        np.testing.assert_allclose(out_moved.enriched_centroids, apply(pose, out.enriched_centroids), atol=1e-9)


def test_egnn_without_coordinate_updates_keeps_centroids(rng, small_weights):
    graph = _random_graph(rng)
    out = egnn_forward(graph, small_weights.without_coordinate_updates())
    np.testing.assert_array_equal(out.enriched_centroids, graph.centroids)


def test_egnn_default_output_shape(rng):
    out = egnn_forward(_random_graph(rng, k=20), initialize_weights(seed=3))
    assert out.enriched_features.shape == (20, 512)
    assert out.enriched_centroids.shape == (20, 3)
    assert np.all(np.isfinite(out.enriched_features))


def test_egnn_rejects_feature_mismatch(rng, small_weights):
    with pytest.raises(ConfigurationError):
        egnn_forward(_random_graph(rng, dim=64), small_weights)


def test_gem_lambda_one_is_mean(rng):
    features = rng.uniform(0.1, 2.0, size=(12, 32))
    np.testing.assert_allclose(gem_pool_features(features, 1.0), features.mean(axis=0), rtol=1e-12)


def test_gem_with_identity_projection(rng, small_weights):
    weights = replace(
        small_weights, gem_lambda=1.0, projection=LinearWeights(np.eye(16, 32), np.zeros(16))
    )
    features = rng.uniform(0.1, 2.0, size=(7, 32))
    np.testing.assert_allclose(gem_pool(features, weights), features.mean(axis=0)[:16], rtol=1e-12)


def test_gem_single_node_ignores_lambda(rng):
    feature = rng.uniform(0.1, 2.0, size=(1, 32))
    for gem_lambda in (0.5, 1.0, 3.0, 10.0):
        np.testing.assert_allclose(gem_pool_features(feature, gem_lambda), feature[0], rtol=1e-10)


def test_gem_large_lambda_approaches_max(rng):
    features = rng.uniform(0.5, 1.5, size=(10, 32))
    pooled = gem_pool_features(features, 64.0)
    maximum = features.max(axis=0)
    assert np.all(np.abs(pooled - maximum) <= 0.05 * maximum)


def test_gem_clamps_negative_features():
    pooled = gem_pool_features(np.array([[-1.0, 2.0]]), 3.0)
    assert pooled[0] == pytest.approx(1e-6)


def test_tnn_zero_network_scores_half(small_weights):
    weights = replace(
        small_weights,
        tnn_slices=np.zeros_like(small_weights.tnn_slices),
        tnn_pair=np.zeros_like(small_weights.tnn_pair),
        tnn_bias=np.zeros_like(small_weights.tnn_bias),
        tnn_out=small_weights.tnn_out.zeroed(),
    )
    assert tnn_score(np.ones(16), np.ones(16), weights) == 0.5


def test_tnn_score_range_and_bilinear_sensitivity(rng, small_weights):
    differs = []
    for _ in range(10):
        g = rng.normal(size=16) * 5
        same = tnn_score(g, g, small_weights)
        flipped = tnn_score(g, -g, small_weights)
        assert 0.0 < same < 1.0 and 0.0 < flipped < 1.0
        differs.append(same != flipped)
    assert any(differs)


def test_embed_graph(rng, small_weights):
    embedded = embed_graph(_random_graph(rng), small_weights)
    assert embedded.embedding.shape == (16,)
    assert embedded.enriched_features.shape == (8, 32)

    empty = embed_graph(empty_graph(20.0, 16), small_weights)
    np.testing.assert_array_equal(empty.embedding, np.zeros(16))


def test_initialize_weights_is_seeded():
    a = initialize_weights(seed=5, hidden_dim=8, layers=1, enriched_dim=8, embedding_dim=4, slices=2)
    b = initialize_weights(seed=5, hidden_dim=8, layers=1, enriched_dim=8, embedding_dim=4, slices=2)
    np.testing.assert_array_equal(a.embed.weight, b.embed.weight)
    np.testing.assert_array_equal(a.tnn_slices, b.tnn_slices)
