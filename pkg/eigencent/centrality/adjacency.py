# Copyright 2026 The eigencent Authors | http://www.eclipse.org/legal/epl-v20.html
"""The learned word graph.

Entry (i, j) of the raw score matrix is f(h_i, h_j), a two layer network
over the concatenated pair. A column-wise softmax turns the scores into a
strictly positive, left stochastic adjacency matrix (every column sums to 1).
Padded positions are cut out before the softmax rather than masked.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, EmptySequenceError
from .numerics import DTYPE, as_matrix, column_softmax, column_softmax_backward

CLASSIFICATION_HIDDEN_UNITS = 50
NLI_HIDDEN_UNITS = 30


@dataclass
class ConnectivityScorer:
    """Parameters of f: w2 . tanh(w1 [h_i; h_j] + b1) + b2."""
    w1: np.ndarray  # hidden_units x 2d
    b1: np.ndarray  # hidden_units
    w2: np.ndarray  # hidden_units
    b2: np.ndarray  # 0-d

    @classmethod
    def zeros(cls, d, hidden_units=CLASSIFICATION_HIDDEN_UNITS):
        if hidden_units < 1:
            raise ContractError('hidden_units must be >= 1, got {}'.format(hidden_units))
        return cls(
            np.zeros((hidden_units, 2 * d), dtype=DTYPE),
            np.zeros(hidden_units, dtype=DTYPE),
            np.zeros(hidden_units, dtype=DTYPE),
            np.zeros((), dtype=DTYPE),
        )

    @classmethod
    def random(cls, rng, d, hidden_units=CLASSIFICATION_HIDDEN_UNITS):
        scorer = cls.zeros(d, hidden_units)
        scorer.w1[...] = rng.normal(scale=1 / np.sqrt(2 * d), size=scorer.w1.shape)
        scorer.w2[...] = rng.normal(scale=1 / np.sqrt(hidden_units), size=scorer.w2.shape)
        return scorer

    @property
    def hidden_units(self):
        return self.w1.shape[0]

    @property
    def input_dim(self):
        return self.w1.shape[1] // 2

    def items(self):
        return (('w1', self.w1), ('b1', self.b1), ('w2', self.w2), ('b2', self.b2))


def _check_states(scorer, h):
    h = as_matrix(h, 'hidden states')
    if h.shape[0] != scorer.input_dim:
        raise ContractError('scorer expects {}-d states, got {}'.format(
            scorer.input_dim, h.shape[0]))
    return h


def _hidden(scorer, h):
    d = scorer.input_dim
    p = scorer.w1[:, :d] @ h
    q = scorer.w1[:, d:] @ h
    # pre[k, i, j] is unit k's pre-activation for the pair (h_i, h_j)
    return np.tanh(p[:, :, None] + q[:, None, :] + scorer.b1[:, None, None])


def raw_scores(scorer, h):
    h = _check_states(scorer, h)
    return np.einsum('k,kij->ij', scorer.w2, _hidden(scorer, h)) + scorer.b2


def raw_scores_backward(scorer, h, cotangent):
    """Gradients of sum(cotangent * raw_scores(scorer, h)).

    Returns (ConnectivityScorer holding the parameter gradients, dL/dh).
    """
    h = _check_states(scorer, h)
    n = h.shape[1]
    cotangent = as_matrix(cotangent, 'cotangent')
    if cotangent.shape != (n, n):
        raise ContractError('cotangent must be {}x{}, got {}'.format(n, n, cotangent.shape))
    d = scorer.input_dim
    t = _hidden(scorer, h)
    d_pre = scorer.w2[:, None, None] * cotangent[None, :, :] * (1 - t ** 2)
    d_p = d_pre.sum(axis=2)
    d_q = d_pre.sum(axis=1)
    grads = ConnectivityScorer(
        np.concatenate([d_p @ h.T, d_q @ h.T], axis=1),
        d_pre.sum(axis=(1, 2)),
        np.einsum('ij,kij->k', cotangent, t),
        np.asarray(cotangent.sum(), dtype=DTYPE),
    )
    d_h = scorer.w1[:, :d].T @ d_p + scorer.w1[:, d:].T @ d_q
    return grads, d_h


def valid_columns(h, mask=None):
    h = as_matrix(h, 'hidden states')
    if mask is None:
        return h
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (h.shape[1],):
        raise ContractError('mask length {} does not match {} columns'.format(
            mask.shape, h.shape[1]))
    return h[:, mask]


def build_adjacency(scorer, h, mask=None):
    """Adjacency matrix over the valid (unmasked) positions of h."""
    valid = valid_columns(h, mask)
    if valid.shape[1] == 0:
        raise EmptySequenceError('cannot build a word graph with no valid positions')
    return column_softmax(raw_scores(scorer, valid))


def build_adjacency_backward(scorer, h_valid, a, cotangent):
    """Backward of build_adjacency given dL/dA; h_valid holds only valid columns."""
    return raw_scores_backward(scorer, h_valid, column_softmax_backward(a, cotangent))


def is_adjacency(a, tol=1e-12):
    a = np.asarray(a)
    return (a.ndim == 2 and a.shape[0] == a.shape[1] and a.shape[0] > 0 and
            bool(np.all(a > 0)) and bool(np.all(np.abs(a.sum(axis=0) - 1) <= tol)))
