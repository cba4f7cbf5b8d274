import math

import numpy as np
import pytest

from fseval import errors
from fseval.pairs import assign_pairs, bce_pair_loss, pair_label_agreement
from oracles import cosine_scalar, nearest_neighbor_scan


def test_two_rows(rng):
    a = assign_pairs(rng.standard_normal((2, 4)))
    assert list(a.pair_of) == [1, 0]
    assert a.selected.all()


def test_forced_geometry_and_tie_break():
    batch = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    a = assign_pairs(batch)
    assert a.pair_of[0] == 1
    assert a.pair_of[1] == 0
    assert a.pair_of[2] == 0  # tie between rows 0 and 1 broken to lowest index


def test_matches_brute_force(rng):
    for _ in range(10):
        batch = rng.standard_normal((int(rng.integers(3, 30)), 6))
        a = assign_pairs(batch)
        expected = nearest_neighbor_scan(batch)
        assert np.array_equal(a.pair_of, expected)
        for i in range(batch.shape[0]):
            assert a.similarity[i] == pytest.approx(
                cosine_scalar(batch[i], batch[a.pair_of[i]]), abs=1e-12
            )


def test_batch_too_small(rng):
    with pytest.raises(errors.BatchTooSmall):
        assign_pairs(rng.standard_normal((1, 3)))


def test_rho_selection_counts(rng):
    batch = rng.standard_normal((10, 4))
    for rho, expected in [(1.0, 10), (0.5, 5), (0.31, 4), (0.05, 1)]:
        a = assign_pairs(batch, rho=rho)
        assert int(a.selected.sum()) == expected


def test_identical_rows_zero_loss():
    batch = np.tile(np.array([0.3, -1.0, 2.0]), (6, 1))
    a = assign_pairs(batch)
    assert bce_pair_loss(batch, a) == pytest.approx(0.0, abs=1e-12)


def test_orthogonal_pair_clamp():
    batch = np.array([[1.0, 0.0], [0.0, 1.0]])
    a = assign_pairs(batch)
    assert bce_pair_loss(batch, a) == pytest.approx(-math.log(1e-7), abs=1e-9)


def test_loss_matches_scalar_recompute(rng):
    batch = rng.standard_normal((20, 5))
    a = assign_pairs(batch, rho=0.6)
    expected_terms = []
    for i in range(20):
        if not a.selected[i]:
            continue
        inner = cosine_scalar(batch[i], batch[a.pair_of[i]])
        expected_terms.append(-math.log(min(max(inner, 1e-7), 1.0)))
    expected = sum(expected_terms) / len(expected_terms)
    assert bce_pair_loss(batch, a) == pytest.approx(expected, abs=1e-9)


def test_loss_nonnegative(rng):
    for _ in range(20):
        batch = rng.standard_normal((12, 4))
        assert bce_pair_loss(batch, assign_pairs(batch)) >= 0.0


def test_rotation_invariance(rng):
    batch = rng.standard_normal((15, 6))
    Q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    a = assign_pairs(batch)
    b = assign_pairs(batch @ Q)
    assert np.array_equal(a.pair_of, b.pair_of)
    assert bce_pair_loss(batch, a) == pytest.approx(
        bce_pair_loss(batch @ Q, b), abs=1e-9
    )


def test_monotone_selection(rng):
    batch = rng.standard_normal((30, 5))
    losses = [
        bce_pair_loss(batch, assign_pairs(batch, rho))
        for rho in (1.0, 0.8, 0.6, 0.4, 0.2)
    ]
    for earlier, later in zip(losses, losses[1:]):
        assert later <= earlier + 1e-12


def test_pair_label_agreement():
    batch = np.array([[1.0, 0.0], [1.0, 0.01], [0.0, 1.0], [0.01, 1.0]])
    labels = np.array([0, 0, 1, 1])
    a = assign_pairs(batch)
    assert pair_label_agreement(a, labels) == 1.0
    assert pair_label_agreement(a, np.array([0, 1, 0, 1])) == 0.0
