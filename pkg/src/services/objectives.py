"""
Training objectives

Evaluable losses with closed-form gradients and in-batch hard-triplet mining.
No optimizer lives here; these functions feed numerical checks and an
external trainer.
"""

import logging
from itertools import combinations
from typing import List, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.spatial.distance import cdist

from ..errors import InvalidInputError
from ..models import BatchObjective, BatchSample, NetWeights, TripletSpec
from .graph_network import tnn_score


logger = logging.getLogger(__name__)

SCORE_CLAMP = 1e-12
DEFAULT_POS_RADIUS = 3.0
DEFAULT_NEG_RADIUS = 20.0


def triplet_loss(spec: TripletSpec) -> float:
    """max(‖a − p‖ − ‖a − n‖ + m, 0)"""
    d_pos = np.linalg.norm(spec.anchor - spec.positive)
    d_neg = np.linalg.norm(spec.anchor - spec.negative)
    return float(max(d_pos - d_neg + spec.margin, 0.0))


def _unit(v: NDArray) -> NDArray:
    norm = np.linalg.norm(v)
    return v / norm if norm > 0.0 else np.zeros_like(v)


def triplet_loss_grad(spec: TripletSpec) -> Tuple[NDArray, NDArray, NDArray]:
    """Gradients of triplet_loss w.r.t. (anchor, positive, negative); zero on the flat side of the hinge"""
    if triplet_loss(spec) <= 0.0:
        zero = np.zeros_like(spec.anchor)
        return zero, zero.copy(), zero.copy()
    toward_pos = _unit(spec.anchor - spec.positive)
    toward_neg = _unit(spec.anchor - spec.negative)
    return toward_pos - toward_neg, -toward_pos, toward_neg


def _check_label(label: int) -> None:
    if label not in (0, 1):
        raise InvalidInputError(f"label must be 0 or 1, got {label}")


def bce_loss(score: float, label: int) -> float:
    """−[l·log s + (1 − l)·log(1 − s)] with s clamped to [1e-12, 1 − 1e-12]"""
    _check_label(label)
    s = float(np.clip(score, SCORE_CLAMP, 1.0 - SCORE_CLAMP))
    return float(-(label * np.log(s) + (1 - label) * np.log1p(-s)))


def bce_loss_grad(score: float, label: int) -> float:
    """d bce_loss / d score inside the clamp range"""
    _check_label(label)
    s = float(np.clip(score, SCORE_CLAMP, 1.0 - SCORE_CLAMP))
    return float(-label / s + (1 - label) / (1.0 - s))


def total_loss(triplet: float, score_loss: float) -> float:
    """L = L_triplet + L_score"""
    if triplet < 0 or score_loss < 0:
        raise InvalidInputError("Loss terms must be non-negative")
    return float(triplet + score_loss)


def proximity_label(position_a: NDArray, position_b: NDArray, radius: float = DEFAULT_POS_RADIUS) -> int:
    """1 when two submaps lie closer than radius, else 0"""
    distance = np.linalg.norm(np.asarray(position_a, dtype=np.float64) - np.asarray(position_b, dtype=np.float64))
    return int(distance < radius)


def mine_hard_triplets(
    batch: Sequence[BatchSample],
    pos_radius: float = DEFAULT_POS_RADIUS,
    neg_radius: float = DEFAULT_NEG_RADIUS,
    margin: float = 1.0,
) -> List[TripletSpec]:
    """
    Hardest in-batch triplet per anchor

    Positives lie within pos_radius of the anchor, negatives at least
    neg_radius away; samples in between are ignored. The chosen positive is
    the farthest in embedding space and the chosen negative the closest; ties
    go to the lowest sample index. Anchors without both are skipped.
    """
    if len(batch) < 3:
        raise InvalidInputError(f"Hard mining needs a batch of at least 3, got {len(batch)}")

    embeddings = np.stack([s.embedding for s in batch])
    positions = np.stack([s.position for s in batch])
    embed_dist = cdist(embeddings, embeddings)
    world_dist = cdist(positions, positions)

    others = ~np.eye(len(batch), dtype=bool)
    positive = (world_dist <= pos_radius) & others
    negative = world_dist >= neg_radius

    triplets = []
    for a in range(len(batch)):
        if not (positive[a].any() and negative[a].any()):
            continue
        p = int(np.argmax(np.where(positive[a], embed_dist[a], -np.inf)))
        n = int(np.argmin(np.where(negative[a], embed_dist[a], np.inf)))
        triplets.append(
            TripletSpec(
                anchor=embeddings[a],
                positive=embeddings[p],
                negative=embeddings[n],
                margin=margin,
                anchor_index=a,
                positive_index=p,
                negative_index=n,
            )
        )

    logger.debug(f"Mined {len(triplets)} triplets from a batch of {len(batch)}")
    return triplets


def batch_objective(
    batch: Sequence[BatchSample],
    weights: NetWeights,
    pos_radius: float = DEFAULT_POS_RADIUS,
    neg_radius: float = DEFAULT_NEG_RADIUS,
    margin: float = 1.0,
) -> BatchObjective:
    """
    Combined loss over one batch

    Mean loss of the mined hard triplets plus mean BCE of the score head over
    every unordered pair, labelled by proximity (closer than pos_radius).
    """
    triplets = mine_hard_triplets(batch, pos_radius, neg_radius, margin)
    triplet_term = float(np.mean([triplet_loss(t) for t in triplets])) if triplets else 0.0

    pair_losses = [
        bce_loss(
            tnn_score(a.embedding, b.embedding, weights),
            proximity_label(a.position, b.position, pos_radius),
        )
        for a, b in combinations(batch, 2)
    ]
    score_term = float(np.mean(pair_losses))

    return BatchObjective(
        triplet_loss=triplet_term,
        score_loss=score_term,
        total_loss=total_loss(triplet_term, score_term),
        triplet_count=len(triplets),
        pair_count=len(pair_losses),
    )
