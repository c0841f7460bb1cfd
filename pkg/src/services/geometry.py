"""
SE(3) operations shared by every pipeline stage

Rigid transforms of point sets, relative poses, closed-form rigid fitting and
the rotation/translation error metrics used for registration evaluation.
"""

import logging
from typing import Tuple, Union

import numpy as np
from numpy.typing import NDArray

from ..errors import InvalidInputError
from ..models import Pose, PointSet


logger = logging.getLogger(__name__)

PointsLike = Union[PointSet, NDArray]


def _as_points(pts: PointsLike) -> NDArray[np.float64]:
    """Coerce a PointSet or array-like to a finite N×3 float64 array"""
    if isinstance(pts, PointSet):
        return pts.points
    points = np.asarray(pts, dtype=np.float64).reshape(-1, 3)
    if not np.all(np.isfinite(points)):
        raise InvalidInputError("Point coordinates must be finite")
    return points


def apply(pose: Pose, pts: PointsLike) -> PointsLike:
    """
    Transform points: each output point is R·p + t

    Returns a PointSet (payload preserved) when given a PointSet, else an array.
    """
    points = _as_points(pts)
    moved = points @ pose.rotation.T + pose.translation
    if isinstance(pts, PointSet):
        return PointSet(moved, pts.payload)
    return moved


def relative(a: Pose, b: Pose) -> Pose:
    """a⁻¹ ∘ b: maps frame-b coordinates into frame a"""
    return a.inverse().compose(b)


def rotation_angle_deg(rotation: NDArray) -> float:
    """Rotation angle of a rotation matrix in degrees, in [0, 180]"""
    cos_angle = (np.trace(rotation) - 1.0) / 2.0
    return float(np.degrees(np.arccos(np.clip(cos_angle, -1.0, 1.0))))


def rotation_error_deg(est: Pose, gt: Pose) -> float:
    """Relative rotation error (RRE): angle of R_gt⁻¹·R_est"""
    return rotation_angle_deg(gt.rotation.T @ est.rotation)


def translation_error_m(est: Pose, gt: Pose) -> float:
    """Relative translation error (RTE) in the ground-truth frame"""
    return float(np.linalg.norm(relative(gt, est).translation))


def axis_angle_pose(axis: NDArray, angle_deg: float, translation: NDArray = (0.0, 0.0, 0.0)) -> Pose:
    """Pose rotating by angle_deg about axis (Rodrigues), then translating"""
    axis = np.asarray(axis, dtype=np.float64)
    norm = np.linalg.norm(axis)
    if norm == 0.0:
        raise InvalidInputError("Rotation axis must be non-zero")
    k = axis / norm
    theta = np.radians(angle_deg)
    skew = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    rotation = np.eye(3) + np.sin(theta) * skew + (1.0 - np.cos(theta)) * (skew @ skew)
    return Pose(nearest_rotation(rotation), np.asarray(translation, dtype=np.float64))


def nearest_rotation(matrix: NDArray) -> NDArray[np.float64]:
    """Project a 3×3 matrix onto SO(3) (closest rotation in Frobenius norm)"""
    u, _, vt = np.linalg.svd(np.asarray(matrix, dtype=np.float64))
    d = np.sign(np.linalg.det(u @ vt))
    if d == 0.0:
        d = 1.0
    return u @ np.diag([1.0, 1.0, d]) @ vt


def fit_rigid(src: NDArray, dst: NDArray) -> Pose:
    """
    Least-squares rigid transform with dst ≈ R·src + t

    Centroid subtraction + SVD of the cross-covariance with reflection correction.
    """
    src = _as_points(src)
    dst = _as_points(dst)
    if src.shape != dst.shape:
        raise InvalidInputError(f"Point sets differ in shape: {src.shape} vs {dst.shape}")
    if src.shape[0] < 3:
        raise InvalidInputError("At least 3 point pairs are required for a rigid fit")

    rotations, translations = fit_rigid_batch(src[None], dst[None])
    return Pose(rotations[0], translations[0])


def fit_rigid_batch(src: NDArray, dst: NDArray) -> Tuple[NDArray, NDArray]:
    """
    Vectorized Kabsch over a stack of B correspondence sets (B×n×3 each)

    Returns rotations (B×3×3) and translations (B×3).
    """
    src_mean = src.mean(axis=1, keepdims=True)
    dst_mean = dst.mean(axis=1, keepdims=True)
    cross = np.einsum("bni,bnj->bij", src - src_mean, dst - dst_mean)

    u, _, vt = np.linalg.svd(cross)
    v = np.swapaxes(vt, 1, 2)
    ut = np.swapaxes(u, 1, 2)
    det = np.linalg.det(v @ ut)
    correction = np.tile(np.eye(3), (src.shape[0], 1, 1))
    correction[:, 2, 2] = np.where(det < 0.0, -1.0, 1.0)

    rotations = v @ correction @ ut
    translations = dst_mean[:, 0, :] - np.einsum("bij,bj->bi", rotations, src_mean[:, 0, :])
    return rotations, translations
