"""
Rigid-body data models: SE(3) poses and point sets
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from ..errors import InvalidInputError


ORTHONORMAL_TOL = 1e-9


def _frozen(array: NDArray) -> NDArray:
    """Return a read-only float64 copy of an array"""
    out = np.array(array, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Pose:
    """
    Rigid transform p' = R·p + t

    rotation is a 3×3 proper rotation matrix, translation is in meters.
    Validated on construction: orthonormal with det +1 within 1e-9.
    """

    rotation: NDArray[np.float64]
    translation: NDArray[np.float64]

    def __post_init__(self) -> None:
        rotation = _frozen(self.rotation)
        translation = _frozen(np.reshape(self.translation, -1))

        if rotation.shape != (3, 3):
            raise InvalidInputError(f"Rotation must be 3x3, got {rotation.shape}")
        if translation.shape != (3,):
            raise InvalidInputError(f"Translation must have 3 entries, got {translation.shape}")
        if not (np.all(np.isfinite(rotation)) and np.all(np.isfinite(translation))):
            raise InvalidInputError("Pose contains non-finite values")

        gram_error = np.max(np.abs(rotation.T @ rotation - np.eye(3)))
        if gram_error > ORTHONORMAL_TOL:
            raise InvalidInputError(f"Rotation is not orthonormal (error {gram_error:.3e})")
        if np.linalg.det(rotation) <= 0.0:
            raise InvalidInputError("Rotation has negative determinant")

        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    @classmethod
    def identity(cls) -> "Pose":
        """Identity transform"""
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, matrix: NDArray) -> "Pose":
        """Build a pose from a 4×4 homogeneous or 3×4 [R | t] matrix"""
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape not in ((4, 4), (3, 4)):
            raise InvalidInputError(f"Expected a 3x4 or 4x4 matrix, got {matrix.shape}")
        return cls(matrix[:3, :3], matrix[:3, 3])

    def as_matrix(self) -> NDArray[np.float64]:
        """4×4 homogeneous matrix"""
        matrix = np.eye(4)
        matrix[:3, :3] = self.rotation
        matrix[:3, 3] = self.translation
        return matrix

    def inverse(self) -> "Pose":
        """Inverse transform"""
        rotation_t = self.rotation.T
        return Pose(rotation_t, -rotation_t @ self.translation)

    def compose(self, other: "Pose") -> "Pose":
        """self ∘ other: apply other first, then self"""
        return Pose(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def __matmul__(self, other: "Pose") -> "Pose":
        return self.compose(other)


@dataclass(frozen=True)
class PointSet:
    """N×3 point coordinates in meters with an optional per-point payload index"""

    points: NDArray[np.float64]
    payload: Optional[NDArray[np.int64]] = field(default=None)

    def __post_init__(self) -> None:
        points = np.array(self.points, dtype=np.float64, copy=True).reshape(-1, 3)
        if not np.all(np.isfinite(points)):
            raise InvalidInputError("Point set contains non-finite coordinates")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

        if self.payload is not None:
            payload = np.array(self.payload, dtype=np.int64, copy=True).reshape(-1)
            if payload.shape[0] != points.shape[0]:
                raise InvalidInputError(
                    f"Payload length {payload.shape[0]} does not match {points.shape[0]} points"
                )
            payload.setflags(write=False)
            object.__setattr__(self, "payload", payload)

    def __len__(self) -> int:
        return int(self.points.shape[0])
