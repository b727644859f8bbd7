# Copyright 2026 The eigencent Authors | http://www.eclipse.org/legal/epl-v20.html
import numpy as np
import pytest

from .adjacency import (
    ConnectivityScorer, build_adjacency, build_adjacency_backward, is_adjacency, raw_scores,
    raw_scores_backward
)
from .errors import ContractError, EmptySequenceError
from .numerics import column_softmax, finite_diff_grad, make_rng, relative_error


def random_scorer(rng, d, hidden_units=5):
    scorer = ConnectivityScorer.random(rng, d, hidden_units)
    scorer.b1[...] = rng.normal(size=hidden_units)
    scorer.b2[...] = rng.normal()
    return scorer


def test_raw_scores():
    rng = make_rng(0)
    h = rng.normal(size=(3, 4))
    np.testing.assert_array_equal(np.zeros((4, 4)), raw_scores(ConnectivityScorer.zeros(3), h))
    assert raw_scores(random_scorer(rng, 3), h[:, :1]).shape == (1, 1)
    same = np.repeat(rng.normal(size=(3, 1)), 5, axis=1)
    scores = raw_scores(random_scorer(rng, 3), same)
    np.testing.assert_allclose(scores, np.full((5, 5), scores[0, 0]), atol=1e-14)
    with pytest.raises(ContractError):
        raw_scores(ConnectivityScorer.zeros(2), h)


def test_raw_scores_matches_pairwise_definition():
    rng = make_rng(1)
    scorer = random_scorer(rng, 2, hidden_units=3)
    h = rng.normal(size=(2, 3))
    scores = raw_scores(scorer, h)
    for i in range(3):
        for j in range(3):
            pair = np.concatenate([h[:, i], h[:, j]])
            expected = scorer.w2 @ np.tanh(scorer.w1 @ pair + scorer.b1) + scorer.b2
            assert abs(scores[i, j] - expected) < 1e-12


def test_build_adjacency():
    h = make_rng(2).normal(size=(3, 4))
    zero = ConnectivityScorer.zeros(3)
    np.testing.assert_allclose(np.full((4, 4), 0.25), build_adjacency(zero, h))
    np.testing.assert_array_equal([[1.0]], build_adjacency(zero, h[:, :1]))
    mask = np.array([True, True, False, True])
    np.testing.assert_allclose(np.full((3, 3), 1 / 3), build_adjacency(zero, h, mask))
    with pytest.raises(EmptySequenceError):
        build_adjacency(zero, h, np.zeros(4, dtype=bool))


@pytest.mark.parametrize('draws', [500, pytest.param(10 ** 4, marks=pytest.mark.slow)])
def test_build_adjacency_is_stochastic(draws):
    rng = make_rng(3)
    for _ in range(draws):
        n = int(rng.integers(1, 65))
        d = int(rng.integers(1, 6))
        a = build_adjacency(random_scorer(rng, d, 4), rng.normal(size=(d, n)))
        assert is_adjacency(a), a


def test_build_adjacency_permutation_equivariant():
    rng = make_rng(4)
    scorer = random_scorer(rng, 4)
    h = rng.normal(size=(4, 7))
    perm = rng.permutation(7)
    a = build_adjacency(scorer, h)
    np.testing.assert_allclose(a[np.ix_(perm, perm)], build_adjacency(scorer, h[:, perm]),
                               atol=1e-14)


def test_raw_scores_backward_linear():
    rng = make_rng(5)
    scorer = random_scorer(rng, 3)
    h = rng.normal(size=(3, 4))
    grads, d_h = raw_scores_backward(scorer, h, np.zeros((4, 4)))
    for _, g in grads.items():
        assert not np.any(g)
    assert not np.any(d_h)
    cot = rng.normal(size=(4, 4))
    g1, d1 = raw_scores_backward(scorer, h, cot)
    g2, d2 = raw_scores_backward(scorer, h, 2 * cot)
    for (_, a), (_, b) in zip(g1.items(), g2.items()):
        np.testing.assert_allclose(2 * a, b, rtol=1e-12)
    np.testing.assert_allclose(2 * d1, d2, rtol=1e-12)
    with pytest.raises(ContractError):
        raw_scores_backward(scorer, h, np.zeros((3, 3)))


@pytest.mark.parametrize('n', [1, 3])
def test_raw_scores_backward_finite_diff(n):
    rng = make_rng(6 + n)
    scorer = random_scorer(rng, 3)
    h = rng.normal(size=(3, n))
    cot = rng.normal(size=(n, n))
    grads, d_h = raw_scores_backward(scorer, h, cot)

    def loss(_):
        return float(np.sum(cot * raw_scores(scorer, h)))

    for name, param in scorer.items():
        assert relative_error(getattr(grads, name), finite_diff_grad(loss, param)) < 1e-6, name
    assert relative_error(d_h, finite_diff_grad(loss, h)) < 1e-6


def test_adjacency_gradient_finite_diff():
    rng = make_rng(9)
    for n, d in [(2, 3), (4, 8), (6, 5)]:
        scorer = random_scorer(rng, d, 6)
        h = rng.normal(size=(d, n))
        cot = rng.normal(size=(n, n))
        a = build_adjacency(scorer, h)
        grads, d_h = build_adjacency_backward(scorer, h, a, cot)

        def loss(_):
            return float(np.sum(cot * column_softmax(raw_scores(scorer, h))))

        for name, param in scorer.items():
            # b2 shifts every score equally, so its true gradient is zero
            err = relative_error(getattr(grads, name), finite_diff_grad(loss, param), floor=1e-3)
            assert err < 1e-5, name
        assert relative_error(d_h, finite_diff_grad(loss, h)) < 1e-5
