import numpy as np
import pytest

from src.errors import InvalidInputError
from src.models import LabeledScan, Pose
from src.services import accumulate, apply, axis_angle_pose, build_submaps, voxelize


def _scan(points, timestamp, pose, num_classes=2):
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    probs = np.zeros((points.shape[0], num_classes))
    probs[:, 0] = 1.0
    return LabeledScan(points=points, class_probs=probs, timestamp=timestamp, pose=pose)


def _straight_line(count, spacing, rng):
    return [
        _scan(rng.normal(size=(10, 3)), float(i), Pose(np.eye(3), np.array([spacing * i, 0.0, 0.0])))
        for i in range(count)
    ]


def test_single_scan_submap():
    points = np.array([[0.05, 0.05, 0.05], [1.05, 2.05, 3.05]])
    submap = accumulate([_scan(points, 0.0, Pose.identity())])
    np.testing.assert_allclose(submap.origin.as_matrix(), np.eye(4))
    np.testing.assert_allclose(np.sort(submap.grid.centroids, axis=0), np.sort(points, axis=0))


def test_window_is_inclusive_at_max_span(rng):
    scans = _straight_line(6, 5.0, rng)
    submap = accumulate(scans, max_span=20.0)
    assert submap.grid.counts.sum() == 50
    np.testing.assert_allclose(submap.origin.translation, [10.0, 0.0, 0.0])
    assert submap.timestamp == 2.0


def test_points_land_in_middle_frame(rng):
    offset = axis_angle_pose((0, 0, 1), 30.0, (2.0, 1.0, 0.0))
    first = rng.uniform(0, 5, size=(10, 3))
    second = rng.uniform(0, 5, size=(10, 3))
    submap = accumulate(
        [_scan(first, 0.0, Pose.identity()), _scan(second, 1.0, offset)], voxel_size=1e-3
    )
    expected = np.concatenate([first, apply(offset, second)])
    assert len(submap.grid) == 20
    np.testing.assert_allclose(
        submap.grid.centroids[np.lexsort(submap.grid.centroids.T)],
        expected[np.lexsort(expected.T)],
        atol=1e-9,
    )


def test_build_submaps_splits_consecutively(rng):
    submaps = build_submaps(_straight_line(12, 5.0, rng), max_span=20.0, start_id=3)
    assert [s.id for s in submaps] == [3, 4, 5]
    assert [int(s.grid.counts.sum()) for s in submaps] == [50, 50, 20]
    assert [s.timestamp for s in submaps] == [2.0, 7.0, 10.0]


def test_accumulate_rejects_bad_sequences(rng):
    with pytest.raises(InvalidInputError):
        accumulate([])
    scans = _straight_line(2, 1.0, rng)
    with pytest.raises(InvalidInputError):
        accumulate([scans[1], scans[0]])


def test_voxelize_single_point():
    grid = voxelize(np.array([[0.01, 0.02, 0.03]]), np.array([[0.9, 0.1]]), 0.1)
    assert len(grid) == 1
    np.testing.assert_allclose(grid.probs[0], [0.9, 0.1])
    assert grid.counts[0] == 1


def test_voxelize_averages_probabilities():
    grid = voxelize(
        np.array([[0.01, 0.01, 0.01], [0.05, 0.05, 0.05]]), np.array([[0.2, 0.8], [0.8, 0.2]]), 0.1
    )
    assert len(grid) == 1
    np.testing.assert_allclose(grid.probs[0], [0.5, 0.5])
    np.testing.assert_allclose(grid.centroids[0], [0.03, 0.03, 0.03])
    assert grid.counts[0] == 2


def test_voxelize_matches_binning_oracle(rng):
    points = rng.uniform(0.0, 1.0, size=(1000, 3))
    probs = rng.dirichlet(np.ones(4), size=1000)
    grid = voxelize(points, probs, 0.1)

    keys = np.floor(points / 0.1).astype(np.int64)
    assert len(grid) == np.unique(keys, axis=0).shape[0]
    assert grid.counts.sum() == 1000
    # mass conservation
    np.testing.assert_allclose((grid.counts[:, None] * grid.probs).sum(axis=0), probs.sum(axis=0), atol=1e-6)


def test_voxelize_is_order_independent(rng):
    points = rng.uniform(0.0, 2.0, size=(500, 3))
    probs = rng.dirichlet(np.ones(3), size=500)
    order = rng.permutation(500)
    a = voxelize(points, probs, 0.25)
    b = voxelize(points[order], probs[order], 0.25)
    np.testing.assert_array_equal(a.keys, b.keys)
    np.testing.assert_allclose(a.probs, b.probs, atol=1e-12)
    np.testing.assert_allclose(a.centroids, b.centroids, atol=1e-12)


def test_voxelize_rejects_non_finite():
    with pytest.raises(InvalidInputError):
        voxelize(np.array([[np.inf, 0.0, 0.0]]), np.array([[1.0]]), 0.1)
