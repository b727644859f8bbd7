# Copyright 2026 The eigencent Authors | http://www.eclipse.org/legal/epl-v20.html
"""Reduce a d x n matrix of hidden states to one d-vector.

Every function here sees only the valid columns of H; callers cut padding
out first (see adjacency.valid_columns). Weighted aggregators return an
AggregationWeights so the backward pass can reuse what the forward computed.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .adjacency import valid_columns
from .eigencentrality import DEFAULT_POWER, EigenPair, power_method
from .errors import ContractError, EmptySequenceError
from .numerics import DTYPE, as_matrix, as_vector, check_finite, softmax, softmax_backward
from .powergrad import DEFAULT_TRUNC_K, analytic_grad_a, unrolled_grad_a


class WeightKind(str, Enum):
    EIGEN = 'eigen'
    SELF_ATTN = 'self_attn'
    AVERAGE = 'average'


class BackwardMode(str, Enum):
    ANALYTIC = 'analytic'
    UNROLLED = 'unrolled'


@dataclass
class AggregationWeights:
    weights: np.ndarray
    kind: WeightKind
    eig: EigenPair = None

    def __post_init__(self):
        self.kind = WeightKind(self.kind)
        assert np.all(self.weights >= 0), 'negative aggregation weight'
        assert abs(self.weights.sum() - 1) <= 1e-12, \
            'aggregation weights sum to %r' % self.weights.sum()

    @property
    def n(self):
        return self.weights.shape[0]


@dataclass
class SelfAttentionParams:
    q: np.ndarray

    def __post_init__(self):
        self.q = check_finite(as_vector(self.q, 'query'), 'query')

    @classmethod
    def random(cls, rng, d):
        return cls(rng.normal(scale=np.sqrt(1 / d), size=d))


def _nonempty(h):
    h = as_matrix(h, 'hidden states')
    if h.shape[1] == 0:
        raise EmptySequenceError('cannot aggregate an empty sequence')
    return h


def aggregate(h, w):
    h = _nonempty(h)
    if w.n != h.shape[1]:
        raise ContractError('{} weights for {} columns'.format(w.n, h.shape[1]))
    return h @ w.weights


def aggregate_backward(h, w, cotangent):
    """Returns (dL/dH holding the weights fixed, dL/dweights)."""
    cotangent = as_vector(cotangent, 'cotangent')
    return np.outer(cotangent, w.weights), h.T @ cotangent


def uniform_weights(n):
    if n < 1:
        raise EmptySequenceError('cannot aggregate an empty sequence')
    return AggregationWeights(np.full(n, 1 / n, dtype=DTYPE), WeightKind.AVERAGE)


def eigen_weights(a, cfg=DEFAULT_POWER):
    """Eigenvector centrality of every word, rescaled from unit 2-norm to unit sum."""
    eig = power_method(a, cfg)
    return AggregationWeights(eig.alpha / eig.alpha.sum(), WeightKind.EIGEN, eig)


def sum_normalize_backward(alpha, d_weights):
    """Backward of w = alpha / sum(alpha)."""
    total = alpha.sum()
    w = alpha / total
    return (d_weights - d_weights @ w) / total


def eigen_aggregate_backward(h, a, eig, cotangent, trunc_k=DEFAULT_TRUNC_K,
                             mode=BackwardMode.ANALYTIC, cfg=DEFAULT_POWER):
    """Backward of h_bar = H (alpha / sum(alpha)) with alpha the Perron vector of A.

    Returns (dL/dH through the weighted sum only, dL/dA). The dL/dA part is
    the series sum or the recorded unroll, depending on mode.
    """
    h = _nonempty(h)
    cotangent = as_vector(cotangent, 'cotangent')
    w = eig.alpha / eig.alpha.sum()
    grad_h = np.outer(cotangent, w)
    gamma = sum_normalize_backward(eig.alpha, h.T @ cotangent)
    if BackwardMode(mode) is BackwardMode.UNROLLED:
        grad_a = unrolled_grad_a(a, cfg, gamma, eig).grad
    else:
        grad_a = analytic_grad_a(a, eig, gamma, trunc_k)
    return grad_h, grad_a


def self_attention_weights(params, h):
    h = _nonempty(h)
    if params.q.shape[0] != h.shape[0]:
        raise ContractError('query has length {}, states have d={}'.format(
            params.q.shape[0], h.shape[0]))
    return AggregationWeights(softmax(h.T @ params.q), WeightKind.SELF_ATTN)


def self_attention_backward(params, h, w, d_weights):
    """Backward of the query softmax; returns (dL/dq, dL/dH)."""
    d_logits = softmax_backward(w.weights, d_weights)
    return h @ d_logits, np.outer(params.q, d_logits)


def max_pool(h, mask=None):
    h = _nonempty(valid_columns(h, mask))
    return h.max(axis=1)


def max_pool_backward(h, cotangent):
    """Routes each dimension's gradient to its argmax column (lowest index on ties)."""
    h = _nonempty(h)
    grad = np.zeros_like(h)
    grad[np.arange(h.shape[0]), np.argmax(h, axis=1)] = cotangent
    return grad


def average_pool(h, mask=None):
    h = _nonempty(valid_columns(h, mask))
    return aggregate(h, uniform_weights(h.shape[1]))
