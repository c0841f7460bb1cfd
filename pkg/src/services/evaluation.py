"""
Evaluation

Place-recognition metrics (Recall@1, Recall@5, F1_max over a threshold sweep)
and registration accuracy (RRE, RTE, success rate).

Sweep convention: a query is predicted positive when it has a candidate and
its score passes the threshold. A positive whose candidate lies within r_tp
of the query is a true positive, one beyond r_fp a false positive; positives
in between are not counted. A query with a true match in the database that is
not predicted positive is a false negative.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from ..errors import InvalidInputError
from ..models import (
    Pose,
    PlaceRecognitionReport,
    PrecisionRecallPoint,
    RegistrationEvaluation,
    RegistrationReport,
    RevisitDecision,
)
from .geometry import rotation_error_deg, translation_error_m


logger = logging.getLogger(__name__)

DEFAULT_R_TP = 3.0
DEFAULT_R_FP = 20.0
DEFAULT_RRE_MAX = 5.0
DEFAULT_RTE_MAX = 2.0


@dataclass(frozen=True)
class QueryOutcome:
    """Ground-truth view of one decision"""

    query_id: int
    score: float
    candidate_distance: Optional[float]
    has_match: bool
    ranked_hits: Tuple[bool, ...] = ()


def _f1(precision: float, recall: float) -> float:
    return 0.0 if precision + recall == 0 else 2.0 * precision * recall / (precision + recall)


def confusion_at(
    outcomes: Sequence[QueryOutcome],
    threshold: float,
    r_tp: float = DEFAULT_R_TP,
    r_fp: float = DEFAULT_R_FP,
) -> PrecisionRecallPoint:
    """Precision, recall and F1 when scores >= threshold are positive"""
    tp = fp = fn = 0
    for outcome in outcomes:
        positive = outcome.candidate_distance is not None and outcome.score >= threshold
        if positive and outcome.candidate_distance <= r_tp:
            tp += 1
        elif positive and outcome.candidate_distance > r_fp:
            fp += 1
        elif not positive and outcome.has_match:
            fn += 1

    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return PrecisionRecallPoint(
        threshold=threshold,
        precision=precision,
        recall=recall,
        f1=_f1(precision, recall),
        true_positives=tp,
        false_positives=fp,
        false_negatives=fn,
    )


def precision_recall_sweep(
    outcomes: Sequence[QueryOutcome],
    r_tp: float = DEFAULT_R_TP,
    r_fp: float = DEFAULT_R_FP,
) -> List[PrecisionRecallPoint]:
    """One point per distinct finite score, in descending threshold order"""
    if r_fp < r_tp:
        raise InvalidInputError(f"r_fp ({r_fp}) must not be smaller than r_tp ({r_tp})")
    scores = np.array(
        [o.score for o in outcomes if o.candidate_distance is not None and np.isfinite(o.score)],
        dtype=np.float64,
    )
    thresholds = np.unique(scores)[::-1]
    return [confusion_at(outcomes, float(t), r_tp, r_fp) for t in thresholds]


def f1_max(curve: Sequence[PrecisionRecallPoint]) -> Tuple[float, Optional[float]]:
    """Best F1 of a sweep and the threshold reaching it (highest threshold on ties)"""
    best: Optional[PrecisionRecallPoint] = None
    for point in curve:
        if best is None or point.f1 > best.f1:
            best = point
    if best is None:
        return 0.0, None
    return best.f1, best.threshold


def _position(positions: Mapping[int, NDArray], submap_id: int) -> NDArray:
    if submap_id not in positions:
        raise InvalidInputError(f"No ground-truth position for submap {submap_id}")
    return np.asarray(positions[submap_id], dtype=np.float64).reshape(3)


def label_decisions(
    decisions: Sequence[RevisitDecision],
    positions: Mapping[int, NDArray],
    timestamps: Mapping[int, float],
    exclusion: float = 30.0,
    r_tp: float = DEFAULT_R_TP,
) -> List[QueryOutcome]:
    """
    Attach ground truth to decisions

    positions and timestamps cover every submap id; the database of a query
    is every other submap at least exclusion seconds older.
    """
    ids = np.array(sorted(positions), dtype=np.int64)
    for submap_id in ids:
        if int(submap_id) not in timestamps:
            raise InvalidInputError(f"No timestamp for submap {submap_id}")
    all_positions = np.stack([_position(positions, int(i)) for i in ids]) if ids.size else np.zeros((0, 3))
    all_times = np.array([float(timestamps[int(i)]) for i in ids], dtype=np.float64)

    outcomes = []
    for decision in decisions:
        query = _position(positions, decision.query_id)
        if decision.query_id not in timestamps:
            raise InvalidInputError(f"No timestamp for submap {decision.query_id}")
        query_time = float(timestamps[decision.query_id])

        eligible = (all_times <= query_time - exclusion) & (ids != decision.query_id)
        distances = np.linalg.norm(all_positions[eligible] - query, axis=1)
        has_match = bool(np.any(distances <= r_tp))

        candidate_distance = None
        if decision.candidate_id is not None:
            candidate_distance = float(np.linalg.norm(_position(positions, decision.candidate_id) - query))

        outcomes.append(
            QueryOutcome(
                query_id=decision.query_id,
                score=decision.score,
                candidate_distance=candidate_distance,
                has_match=has_match,
                ranked_hits=tuple(
                    float(np.linalg.norm(_position(positions, i) - query)) <= r_tp for i in decision.ranked_ids
                ),
            )
        )
    return outcomes


def recall_at_k(outcomes: Sequence[QueryOutcome], k: int) -> float:
    """Fraction of queries with a true match whose top-k candidates hold one"""
    if k < 1:
        raise InvalidInputError(f"k must be at least 1, got {k}")
    with_match = [o for o in outcomes if o.has_match]
    if not with_match:
        return 0.0
    hits = sum(any(o.ranked_hits[:k]) for o in with_match)
    return hits / len(with_match)


def eval_place_recognition(
    decisions: Sequence[RevisitDecision],
    positions: Mapping[int, NDArray],
    timestamps: Mapping[int, float],
    exclusion: float = 30.0,
    r_tp: float = DEFAULT_R_TP,
    r_fp: float = DEFAULT_R_FP,
    mode: Optional[str] = None,
) -> PlaceRecognitionReport:
    """Recall@1, Recall@5 and F1_max of one classification mode"""
    outcomes = label_decisions(decisions, positions, timestamps, exclusion, r_tp)
    curve = precision_recall_sweep(outcomes, r_tp, r_fp)
    best_f1, best_threshold = f1_max(curve)
    if mode is None:
        mode = decisions[0].mode.value if decisions else "consistency"

    report = PlaceRecognitionReport(
        mode=mode,
        query_count=len(outcomes),
        revisit_count=sum(o.has_match for o in outcomes),
        recall_at_1=recall_at_k(outcomes, 1),
        recall_at_5=recall_at_k(outcomes, 5),
        f1_max=best_f1,
        f1_threshold=best_threshold,
        curve=curve,
    )
    logger.info(
        f"[{mode}] {report.query_count} queries, {report.revisit_count} revisits: "
        f"R@1={report.recall_at_1:.3f} R@5={report.recall_at_5:.3f} F1max={report.f1_max:.3f}"
    )
    return report


def eval_registration(
    estimate: Pose, gt: Pose, rre_max: float = DEFAULT_RRE_MAX, rte_max: float = DEFAULT_RTE_MAX
) -> RegistrationEvaluation:
    """RRE/RTE of an estimate; success is inclusive at both bounds"""
    rre = rotation_error_deg(estimate, gt)
    rte = translation_error_m(estimate, gt)
    return RegistrationEvaluation(rre=rre, rte=rte, success=rre <= rre_max and rte <= rte_max)


def aggregate_registration(
    evaluations: Iterable[RegistrationEvaluation],
    rre_max: float = DEFAULT_RRE_MAX,
    rte_max: float = DEFAULT_RTE_MAX,
) -> RegistrationReport:
    """Success rate, mean errors over successful pairs and median errors over all pairs"""
    evaluations = list(evaluations)
    successes = [e for e in evaluations if e.success]

    def mean(values: List[float]) -> Optional[float]:
        return float(np.mean(values)) if values else None

    def median(values: List[float]) -> Optional[float]:
        return float(np.median(values)) if values else None

    return RegistrationReport(
        pair_count=len(evaluations),
        success_count=len(successes),
        accuracy=len(successes) / len(evaluations) if evaluations else 0.0,
        mean_rre=mean([e.rre for e in successes]),
        mean_rte=mean([e.rte for e in successes]),
        median_rre=median([e.rre for e in evaluations]),
        median_rte=median([e.rte for e in evaluations]),
        rre_max=rre_max,
        rte_max=rte_max,
    )
