from itertools import product

import numpy as np
import pytest

from src.errors import InvalidInputError
from src.models import BatchSample, TripletSpec
from src.services import (
    batch_objective,
    bce_loss,
    bce_loss_grad,
    mine_hard_triplets,
    proximity_label,
    total_loss,
    triplet_loss,
    triplet_loss_grad,
)


STEP = 1e-5


def _triplet(d_pos, d_neg, margin=1.0):
    return TripletSpec(
        anchor=np.zeros(3), positive=np.array([d_pos, 0.0, 0.0]), negative=np.array([0.0, d_neg, 0.0]), margin=margin
    )


def test_triplet_loss_examples(rng):
    assert triplet_loss(_triplet(0.2, 1.5)) == 0.0
    assert triplet_loss(_triplet(1.0, 0.5)) == pytest.approx(1.5)

    anchor = rng.normal(size=4)
    negative = anchor + np.array([0.3, 0.0, 0.0, 0.4])
    spec = TripletSpec(anchor=anchor, positive=anchor.copy(), negative=negative, margin=1.0)
    assert triplet_loss(spec) == pytest.approx(0.5)


def test_triplet_loss_zero_iff_margin_satisfied(rng):
    for _ in range(50):
        a, p, n = rng.normal(size=(3, 6))
        spec = TripletSpec(anchor=a, positive=p, negative=n, margin=0.5)
        satisfied = np.linalg.norm(a - n) >= np.linalg.norm(a - p) + 0.5
        assert (triplet_loss(spec) == 0.0) == satisfied
        assert triplet_loss(spec) >= 0.0


def test_triplet_gradient_matches_finite_differences(rng):
    checked = 0
    while checked < 100:
        a, p, n = rng.normal(size=(3, 8))
        hinge = np.linalg.norm(a - p) - np.linalg.norm(a - n) + 1.0
        if abs(hinge) < 1e-2:
            continue
        analytic = triplet_loss_grad(TripletSpec(anchor=a, positive=p, negative=n))
        vectors = [a, p, n]
        for which in range(3):
            numeric = np.zeros(8)
            for d in range(8):
                plus = [v.copy() for v in vectors]
                minus = [v.copy() for v in vectors]
                plus[which][d] += STEP
                minus[which][d] -= STEP
                numeric[d] = (
                    triplet_loss(TripletSpec(*plus)) - triplet_loss(TripletSpec(*minus))
                ) / (2 * STEP)
            np.testing.assert_allclose(analytic[which], numeric, atol=1e-5)
        checked += 1


def test_bce_examples():
    assert bce_loss(0.5, 1) == pytest.approx(0.693147, abs=1e-6)
    assert bce_loss(0.9, 0) == pytest.approx(2.302585, abs=1e-6)
    assert bce_loss(1.0 - 1e-9, 1) == pytest.approx(0.0, abs=1e-8)
    assert np.isfinite(bce_loss(1.0, 0))
    assert np.isfinite(bce_loss(0.0, 1))


def test_bce_gradient_matches_finite_differences(rng):
    for _ in range(100):
        score = rng.uniform(0.05, 0.95)
        label = int(rng.integers(2))
        numeric = (bce_loss(score + STEP, label) - bce_loss(score - STEP, label)) / (2 * STEP)
        assert bce_loss_grad(score, label) == pytest.approx(numeric, abs=1e-5)


def test_bce_rejects_bad_label():
    with pytest.raises(InvalidInputError):
        bce_loss(0.5, 2)


def test_total_loss():
    assert total_loss(0.0, 0.0) == 0.0
    assert total_loss(1.5, 0.7) == pytest.approx(2.2)
    assert total_loss(0.7, 1.5) == total_loss(1.5, 0.7)
    with pytest.raises(InvalidInputError):
        total_loss(-1.0, 0.0)


def test_proximity_label():
    assert proximity_label(np.zeros(3), np.array([2.9, 0.0, 0.0])) == 1
    assert proximity_label(np.zeros(3), np.array([3.1, 0.0, 0.0])) == 0


def _sample(embedding, x):
    return BatchSample(embedding=np.asarray(embedding, dtype=np.float64), position=np.array([x, 0.0, 0.0]))


def test_mining_picks_hardest_positive():
    batch = [
        _sample([0.0, 0.0], 0.0),
        _sample([0.3, 0.0], 1.0),
        _sample([0.9, 0.0], 2.0),
        _sample([5.0, 0.0], 100.0),
    ]
    triplets = {t.anchor_index: t for t in mine_hard_triplets(batch)}
    assert triplets[0].positive_index == 2
    assert triplets[0].negative_index == 3


def test_mining_skips_anchors_without_negatives(rng):
    batch = [_sample(rng.normal(size=2), x) for x in (0.0, 1.0, 2.0, 5.0)]
    assert mine_hard_triplets(batch) == []


def test_mining_matches_exhaustive_enumeration():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        positions = rng.uniform(0.0, 40.0, size=(16, 2))
        positions[1::2] = positions[::2] + rng.uniform(-2.0, 2.0, size=(8, 2))
        batch = [
            BatchSample(embedding=rng.normal(size=8), position=np.array([x, y, 0.0])) for x, y in positions
        ]
        mined = {t.anchor_index: (t.positive_index, t.negative_index) for t in mine_hard_triplets(batch)}

        expected = {}
        for a in range(16):
            best = None
            for p, n in product(range(16), repeat=2):
                d_ap_world = np.linalg.norm(batch[a].position - batch[p].position)
                d_an_world = np.linalg.norm(batch[a].position - batch[n].position)
                if p == a or d_ap_world > 3.0 or d_an_world < 20.0:
                    continue
                key = (
                    -np.linalg.norm(batch[a].embedding - batch[p].embedding),
                    np.linalg.norm(batch[a].embedding - batch[n].embedding),
                )
                if best is None or key < best[0]:
                    best = (key, (p, n))
            if best is not None:
                expected[a] = best[1]
        assert mined == expected


def test_mining_needs_three_samples():
    with pytest.raises(InvalidInputError):
        mine_hard_triplets([_sample([0.0], 0.0), _sample([1.0], 50.0)])


def test_batch_objective(rng, small_weights):
    batch = [BatchSample(embedding=rng.normal(size=16), position=np.array([x, 0.0, 0.0])) for x in (0, 1, 2, 50, 51)]
    objective = batch_objective(batch, small_weights)
    assert objective.pair_count == 10
    assert objective.triplet_count == 5
    assert objective.total_loss == pytest.approx(objective.triplet_loss + objective.score_loss)
