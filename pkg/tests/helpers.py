"""
Shared test helpers
"""

import numpy as np
from scipy.spatial.transform import Rotation

from src.models import Pose, SceneGraph


def random_pose(rng: np.random.Generator, max_translation: float = 10.0) -> Pose:
    rotation = Rotation.random(random_state=int(rng.integers(2**31))).as_matrix()
    return Pose(rotation, rng.uniform(-max_translation, max_translation, size=3))


def distinct_features(count: int, dim: int = 128) -> np.ndarray:
    """One-hot node features; every node is its own nearest neighbour"""
    features = np.zeros((count, dim))
    features[np.arange(count), np.arange(count)] = 1.0
    return features


def point_graph(centroids: np.ndarray, features: np.ndarray, alpha: float = 20.0) -> SceneGraph:
    """Scene graph over bare centroids, without cells or embedding"""
    centroids = np.asarray(centroids, dtype=np.float64)
    diff = centroids[:, None, :] - centroids[None, :, :]
    distances = np.sqrt(np.einsum("ijc,ijc->ij", diff, diff))
    return SceneGraph(
        centroids=centroids,
        features=features,
        edges=np.maximum(distances, distances.T) / alpha,
        class_ids=np.zeros(centroids.shape[0], dtype=np.int64),
        alpha=alpha,
    )
