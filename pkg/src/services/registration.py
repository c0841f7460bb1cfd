"""
Coarse-to-fine registration of two scene graphs

Mutual-best descriptor matches feed a RANSAC over object centroids; the coarse
transform is refined with point-to-point ICP restricted to the voxel centroids
of the RANSAC inlier objects. Every transform maps candidate coordinates into
the query frame.
"""

import logging
from dataclasses import replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from ..config import PipelineConfig
from ..errors import InvalidInputError, GraphlocError
from ..models import (
    MIN_INLIERS,
    Correspondence,
    Pose,
    RegistrationResult,
    RegistrationStage,
    SceneGraph,
    TransformEstimate,
)
from .geometry import apply, fit_rigid, fit_rigid_batch


logger = logging.getLogger(__name__)

HYPOTHESIS_BATCH = 64
COLLINEAR_TOL = 1e-9
MAX_REFITS = 10
FEATURE_SOURCES = ("auto", "enriched", "descriptor")


class InsufficientDataError(GraphlocError):
    """Too few correspondences or associations to estimate a transform"""
    pass


def _node_features(graph: SceneGraph, use_enriched: bool) -> NDArray:
    return graph.enriched_features if use_enriched else graph.features


def match_features(
    query_graph: SceneGraph, candidate_graph: SceneGraph, features_on: str = "auto"
) -> List[Correspondence]:
    """
    Mutual nearest neighbours in feature space

    (i, j) is kept iff candidate node j is the L2-nearest to query node i and
    query node i is the L2-nearest to j. features_on selects enriched features,
    raw descriptors, or enriched when both graphs carry them ("auto").
    """
    if features_on not in FEATURE_SOURCES:
        raise InvalidInputError(f"features_on must be one of {FEATURE_SOURCES}, got '{features_on}'")
    if query_graph.num_nodes == 0 or candidate_graph.num_nodes == 0:
        return []

    both_enriched = query_graph.enriched_features is not None and candidate_graph.enriched_features is not None
    if features_on == "enriched" and not both_enriched:
        raise InvalidInputError("Enriched features requested but a graph has not been enriched")
    use_enriched = features_on == "enriched" or (features_on == "auto" and both_enriched)

    distances = cdist(_node_features(query_graph, use_enriched), _node_features(candidate_graph, use_enriched))
    best_candidate = np.argmin(distances, axis=1)
    best_query = np.argmin(distances, axis=0)

    return [
        Correspondence(query_node=i, candidate_node=int(j), descriptor_distance=float(distances[i, j]))
        for i, j in enumerate(best_candidate)
        if best_query[j] == i
    ]


def _residuals(rotation: NDArray, translation: NDArray, src: NDArray, dst: NDArray) -> NDArray:
    return np.linalg.norm(src @ rotation.T + translation - dst, axis=1)


def _required_iterations(inlier_ratio: float, confidence: float) -> float:
    """Hypotheses needed to draw one all-inlier triple with the given confidence"""
    all_inliers = inlier_ratio ** 3
    if all_inliers >= 1.0:
        return 0.0
    if all_inliers <= 0.0:
        return np.inf
    return float(np.ceil(np.log(1.0 - confidence) / np.log(1.0 - all_inliers)))


def ransac_align(
    correspondences: Sequence[Correspondence],
    query_centroids: NDArray,
    candidate_centroids: NDArray,
    inlier_tol: float = 0.5,
    max_iters: int = 10000,
    confidence: float = 0.999,
    seed: int = 0,
) -> TransformEstimate:
    """
    RANSAC over centroid correspondences

    Hypotheses come from random triples solved in closed form; collinear
    triples are rejected and still count as drawn. The winner has the most
    inliers (residual ≤ inlier_tol), earliest hypothesis first on ties. It is
    re-fit on its inlier set until the set stops changing, so every returned
    inlier satisfies the tolerance under the returned transform. Sampling
    stops early once the confidence-derived hypothesis count is reached.
    """
    n = len(correspondences)
    if n < MIN_INLIERS:
        raise InsufficientDataError(f"RANSAC needs at least {MIN_INLIERS} correspondences, got {n}")

    query_centroids = np.asarray(query_centroids, dtype=np.float64)
    candidate_centroids = np.asarray(candidate_centroids, dtype=np.float64)
    dst = query_centroids[[c.query_node for c in correspondences]]
    src = candidate_centroids[[c.candidate_node for c in correspondences]]

    rng = np.random.default_rng(seed)
    best_count = -1
    best: Optional[Tuple[NDArray, NDArray]] = None
    drawn = 0
    required = float(max_iters)

    while drawn < min(max_iters, required):
        size = min(HYPOTHESIS_BATCH, max_iters - drawn)
        samples = np.argsort(rng.random((size, n)), axis=1)[:, :3]
        tri_src = src[samples]
        tri_dst = dst[samples]

        edges_src = np.cross(tri_src[:, 1] - tri_src[:, 0], tri_src[:, 2] - tri_src[:, 0])
        edges_dst = np.cross(tri_dst[:, 1] - tri_dst[:, 0], tri_dst[:, 2] - tri_dst[:, 0])
        valid = (np.linalg.norm(edges_src, axis=1) >= COLLINEAR_TOL) & (
            np.linalg.norm(edges_dst, axis=1) >= COLLINEAR_TOL
        )

        rotations, translations = fit_rigid_batch(tri_src, tri_dst)
        moved = np.einsum("bij,nj->bni", rotations, src) + translations[:, None, :]
        counts = (np.linalg.norm(moved - dst[None], axis=2) <= inlier_tol).sum(axis=1)
        counts = np.where(valid, counts, -1)

        winner = int(np.argmax(counts))
        if counts[winner] > best_count:
            best_count = int(counts[winner])
            best = (rotations[winner], translations[winner])

        drawn += size
        if best_count > 0:
            required = _required_iterations(best_count / n, confidence)

    if best is None:
        raise InsufficientDataError("Every sampled triple was degenerate")

    rotation, translation = best
    mask = _residuals(rotation, translation, src, dst) <= inlier_tol
    for _ in range(MAX_REFITS):
        if mask.sum() < MIN_INLIERS:
            break
        refit = fit_rigid(src[mask], dst[mask])
        refit_mask = _residuals(refit.rotation, refit.translation, src, dst) <= inlier_tol
        if refit_mask.sum() < MIN_INLIERS:
            break
        rotation, translation = refit.rotation, refit.translation
        stable = np.array_equal(refit_mask, mask)
        mask = refit_mask
        if stable:
            break

    residuals = _residuals(rotation, translation, src, dst)
    inliers = tuple(correspondences[i] for i in np.flatnonzero(mask))
    rmse = float(np.sqrt(np.mean(residuals[mask] ** 2))) if mask.any() else 0.0

    logger.debug(f"RANSAC: {drawn} hypotheses, {len(inliers)}/{n} inliers, rmse {rmse:.4f} m")
    return TransformEstimate(
        transform=Pose(rotation, translation),
        inliers=inliers,
        rmse=rmse,
        stage=RegistrationStage.COARSE,
        iterations=drawn,
    )


def icp_refine(
    coarse: TransformEstimate,
    query_points: NDArray,
    candidate_points: NDArray,
    max_distance: float = 1.0,
    tolerance: float = 1e-4,
    max_iters: int = 50,
) -> TransformEstimate:
    """
    Point-to-point ICP from a coarse transform

    Each iteration associates every moved candidate point with its nearest
    query point within max_distance and re-fits in closed form. Stops when the
    RMS displacement of the candidate points between consecutive transforms
    drops below tolerance or after max_iters. Returns the iterate with the
    lowest association rmse; with no associations at all the coarse transform
    comes back flagged as degraded.
    """
    query_points = np.asarray(query_points, dtype=np.float64).reshape(-1, 3)
    candidate_points = np.asarray(candidate_points, dtype=np.float64).reshape(-1, 3)
    degraded = replace(coarse, stage=RegistrationStage.REFINED, degraded=True)
    if query_points.shape[0] == 0 or candidate_points.shape[0] == 0:
        logger.warning("ICP skipped: no points to align")
        return degraded

    tree = cKDTree(query_points)

    def associate(pose: Pose) -> Tuple[NDArray, NDArray, NDArray]:
        moved = apply(pose, candidate_points)
        distances, indices = tree.query(moved, distance_upper_bound=max_distance)
        hit = np.isfinite(distances)
        return moved, distances, np.where(hit, indices, -1)

    pose = coarse.transform
    best_pose: Optional[Pose] = None
    best_rmse = np.inf
    iterations = 0

    for iterations in range(1, max_iters + 1):
        moved, distances, indices = associate(pose)
        hit = indices >= 0
        if hit.sum() < MIN_INLIERS:
            break
        rmse = float(np.sqrt(np.mean(distances[hit] ** 2)))
        if rmse < best_rmse:
            best_pose, best_rmse = pose, rmse

        updated = fit_rigid(candidate_points[hit], query_points[indices[hit]])
        change = np.sqrt(np.mean(np.sum((apply(updated, candidate_points) - moved) ** 2, axis=1)))
        pose = updated
        if change < tolerance:
            _, distances, indices = associate(pose)
            hit = indices >= 0
            if hit.sum() >= MIN_INLIERS:
                rmse = float(np.sqrt(np.mean(distances[hit] ** 2)))
                if rmse < best_rmse:
                    best_pose, best_rmse = pose, rmse
            break

    if best_pose is None:
        logger.warning("ICP found no associations within the distance cap; keeping the coarse transform")
        return degraded

    logger.debug(f"ICP: {iterations} iterations, rmse {best_rmse:.4f} m")
    return TransformEstimate(
        transform=best_pose,
        inliers=coarse.inliers,
        rmse=best_rmse,
        stage=RegistrationStage.REFINED,
        iterations=iterations,
    )


def _inlier_points(graph: SceneGraph, nodes: Sequence[int]) -> NDArray:
    """Voxel centroids of the given nodes, or their centroids when cells are absent"""
    if graph.cells is None:
        return graph.centroids[list(nodes)]
    return np.concatenate([graph.cells[i] for i in nodes], axis=0)


class GraphRegistrar:
    """Registration of scene-graph pairs with configured tolerances"""

    def __init__(self, config: Optional[PipelineConfig] = None, name: str = "default"):
        self.config = config or PipelineConfig()
        self.logger = logging.getLogger(f"{__name__}.{name}")

    def _align(
        self, query_graph: SceneGraph, candidate_graph: SceneGraph
    ) -> Tuple[List[Correspondence], TransformEstimate]:
        matches = match_features(query_graph, candidate_graph, self.config.match_features_on)
        coarse = ransac_align(
            matches,
            query_graph.centroids,
            candidate_graph.centroids,
            inlier_tol=self.config.ransac_inlier_tol,
            max_iters=self.config.ransac_max_iters,
            confidence=self.config.ransac_confidence,
            seed=self.config.seed,
        )
        return matches, coarse

    def coarse(self, query_graph: SceneGraph, candidate_graph: SceneGraph) -> TransformEstimate:
        """Mutual matching followed by RANSAC; raises InsufficientDataError below 3 matches"""
        return self._align(query_graph, candidate_graph)[1]

    def register(
        self,
        query_graph: SceneGraph,
        candidate_graph: SceneGraph,
        query_id: int = 0,
        candidate_id: int = 1,
    ) -> RegistrationResult:
        """Coarse RANSAC then ICP on the inlier objects"""
        matches, coarse = self._align(query_graph, candidate_graph)

        if coarse.is_valid:
            refined = icp_refine(
                coarse,
                _inlier_points(query_graph, [c.query_node for c in coarse.inliers]),
                _inlier_points(candidate_graph, [c.candidate_node for c in coarse.inliers]),
                max_distance=self.config.icp_max_distance,
                tolerance=self.config.icp_tolerance,
                max_iters=self.config.icp_max_iters,
            )
        else:
            self.logger.warning(
                f"Pair {query_id}/{candidate_id}: {len(coarse.inliers)} inliers, ICP skipped"
            )
            refined = replace(coarse, stage=RegistrationStage.REFINED, degraded=True)

        self.logger.debug(
            f"Pair {query_id}/{candidate_id}: {len(matches)} matches, "
            f"{len(coarse.inliers)} inliers, refined rmse {refined.rmse:.4f} m"
        )
        return RegistrationResult(
            query_id=query_id,
            candidate_id=candidate_id,
            coarse=coarse,
            refined=refined,
            correspondences=tuple(matches),
        )


def register_graphs(
    query_graph: SceneGraph,
    candidate_graph: SceneGraph,
    config: Optional[PipelineConfig] = None,
) -> RegistrationResult:
    """Register a candidate graph onto a query graph"""
    return GraphRegistrar(config).register(query_graph, candidate_graph)
