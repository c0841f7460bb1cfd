import numpy as np
import pytest
from scipy.spatial.distance import pdist
from scipy.spatial.transform import Rotation

from src.errors import InvalidInputError
from src.models import Pose, PointSet
from src.services import (
    apply,
    axis_angle_pose,
    fit_rigid,
    nearest_rotation,
    relative,
    rotation_error_deg,
    translation_error_m,
)
from tests.helpers import random_pose


def test_identity_apply_keeps_points(rng):
    points = rng.normal(size=(20, 3))
    np.testing.assert_array_equal(apply(Pose.identity(), points), points)


def test_quarter_turn_about_z():
    pose = axis_angle_pose((0, 0, 1), 90.0)
    np.testing.assert_allclose(apply(pose, np.array([[1.0, 0.0, 0.0]])), [[0.0, 1.0, 0.0]], atol=1e-12)


def test_apply_then_inverse_round_trip(rng):
    pose = random_pose(rng)
    points = rng.normal(size=(100, 3)) * 10
    np.testing.assert_allclose(apply(pose.inverse(), apply(pose, points)), points, atol=1e-9)


def test_apply_preserves_point_set_payload(rng):
    points = PointSet(rng.normal(size=(5, 3)), payload=np.arange(5))
    moved = apply(random_pose(rng), points)
    assert isinstance(moved, PointSet)
    np.testing.assert_array_equal(moved.payload, np.arange(5))


def test_apply_preserves_distances(rng):
    points = rng.normal(size=(50, 3))
    np.testing.assert_allclose(pdist(apply(random_pose(rng), points)), pdist(points), atol=1e-9)


def test_apply_rejects_non_finite():
    with pytest.raises(InvalidInputError):
        apply(Pose.identity(), np.array([[0.0, np.nan, 1.0]]))


def test_relative_definitions(rng):
    a, b = random_pose(rng), random_pose(rng)
    identity = relative(a, a)
    np.testing.assert_allclose(identity.rotation, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(identity.translation, 0.0, atol=1e-12)

    same = relative(Pose.identity(), b)
    np.testing.assert_allclose(same.as_matrix(), b.as_matrix(), atol=1e-12)

    np.testing.assert_allclose((a @ relative(a, b)).as_matrix(), b.as_matrix(), atol=1e-9)


def test_relative_maps_frame_b_into_frame_a(rng):
    a, b = random_pose(rng), random_pose(rng)
    local_b = rng.normal(size=(10, 3))
    world = apply(b, local_b)
    np.testing.assert_allclose(apply(relative(a, b), local_b), apply(a.inverse(), world), atol=1e-9)


def test_pose_rejects_non_rotation():
    with pytest.raises(InvalidInputError):
        Pose(np.diag([1.0, 1.0, -1.0]), np.zeros(3))
    with pytest.raises(InvalidInputError):
        Pose(np.eye(3) * 1.01, np.zeros(3))


def test_rotation_error_five_degrees(rng):
    gt = random_pose(rng)
    axis = rng.normal(size=3)
    est = gt @ axis_angle_pose(axis, 5.0)
    assert rotation_error_deg(gt, gt) == pytest.approx(0.0, abs=1e-5)
    assert rotation_error_deg(est, gt) == pytest.approx(5.0, abs=1e-6)


def test_rotation_error_matches_quaternion_angle(rng):
    for _ in range(20):
        est, gt = random_pose(rng), random_pose(rng)
        relative_rotation = Rotation.from_matrix(gt.rotation.T @ est.rotation)
        oracle = np.degrees(relative_rotation.magnitude())
        assert rotation_error_deg(est, gt) == pytest.approx(oracle, abs=1e-6)


def test_translation_error_three_four_five(rng):
    gt = random_pose(rng)
    est = gt @ Pose(np.eye(3), np.array([3.0, 4.0, 0.0]))
    assert translation_error_m(gt, gt) == pytest.approx(0.0, abs=1e-12)
    assert translation_error_m(est, gt) == pytest.approx(5.0, abs=1e-9)


def test_fit_rigid_recovers_transform(rng):
    pose = random_pose(rng)
    src = rng.normal(size=(30, 3)) * 5
    fitted = fit_rigid(src, apply(pose, src))
    np.testing.assert_allclose(fitted.as_matrix(), pose.as_matrix(), atol=1e-9)


def test_nearest_rotation_projects_onto_so3(rng):
    noisy = random_pose(rng).rotation + rng.normal(scale=1e-3, size=(3, 3))
    projected = nearest_rotation(noisy)
    np.testing.assert_allclose(projected.T @ projected, np.eye(3), atol=1e-12)
    assert np.linalg.det(projected) == pytest.approx(1.0)
