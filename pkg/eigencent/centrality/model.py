# Copyright 2026 The eigencent Authors | http://www.eclipse.org/legal/epl-v20.html
"""Text classification and NLI models with hand-written backward passes.

Hidden states are d x n matrices, one column per token. Every layer
registers its arrays in a shared ParamStore, exposes
forward(...) -> (output, cache) and backward(cache, d_output), and adds its
parameter gradients into the store. Padded positions are dropped right
after the embedding lookup, so nothing downstream ever sees them.
"""
from collections import OrderedDict
from dataclasses import dataclass, field
import hashlib
import logging
import warnings

import numpy as np

from .adjacency import (
    CLASSIFICATION_HIDDEN_UNITS, ConnectivityScorer, build_adjacency, build_adjacency_backward
)
from .aggregators import (
    BackwardMode, SelfAttentionParams, aggregate, aggregate_backward, average_pool,
    eigen_aggregate_backward, eigen_weights, max_pool, max_pool_backward,
    self_attention_backward, self_attention_weights, uniform_weights
)
from .eigencentrality import DEFAULT_POWER, PowerConfig
from .errors import ConfigError, ContractError, EmptySequenceError
from .numerics import DTYPE, as_vector, softmax
from .powergrad import DEFAULT_TRUNC_K

logger = logging.getLogger(__name__)

PAD_ID = 0
UNK_ID = 1
PROB_FLOOR = 1e-12

ENCODERS = ('identity_projection', 'bidirectional_elman')
AGGREGATORS = ('eigen', 'self_attn', 'max', 'avg')
TASKS = ('sentence', 'document', 'pair', 'synthetic')


class ParamStore(object):
    """Named parameters with their gradients and Adam moments, all the same shapes."""

    def __init__(self):
        self.params = OrderedDict()
        self.grads = OrderedDict()
        self.m = OrderedDict()
        self.v = OrderedDict()

    def add(self, name, value):
        assert name not in self.params, 'duplicate parameter %s' % name
        value = np.array(value, dtype=DTYPE)
        self.params[name] = value
        self.grads[name] = np.zeros_like(value)
        self.m[name] = np.zeros_like(value)
        self.v[name] = np.zeros_like(value)
        return value

    def __contains__(self, name):
        return name in self.params

    def __getitem__(self, name):
        return self.params[name]

    def names(self):
        return list(self.params)

    def zero_grad(self):
        for g in self.grads.values():
            g[...] = 0

    def grad_norm(self):
        return float(np.sqrt(sum(np.sum(g * g) for g in self.grads.values())))

    def size(self):
        return sum(p.size for p in self.params.values())

    def checksum(self):
        digest = hashlib.sha256()
        for name, p in self.params.items():
            digest.update(name.encode('utf-8'))
            digest.update(np.ascontiguousarray(p).tobytes())
        return digest.hexdigest()

    def copy_from(self, other, names=None):
        """Overwrite parameters in place with the equally named arrays of another store."""
        for name in (other.names() if names is None else names):
            if name not in self.params:
                continue
            if self.params[name].shape != other.params[name].shape:
                raise ContractError('shape mismatch for {}: {} vs {}'.format(
                    name, self.params[name].shape, other.params[name].shape))
            self.params[name][...] = other.params[name]


class Layer(object):
    def __init__(self, store, prefix):
        self.store = store
        self.prefix = prefix

    def param(self, name, value):
        return self.store.add('{}.{}'.format(self.prefix, name), value)

    def grad(self, name):
        return self.store.grads['{}.{}'.format(self.prefix, name)]


def dropout(x, rate, rng):
    """Inverted dropout; returns (output, scale mask or None when inactive)."""
    if rng is None or rate == 0:
        return x, None
    scale = (rng.random(x.shape) >= rate) / (1 - rate)
    return x * scale, scale


def dropout_backward(scale, d_out):
    return d_out if scale is None else d_out * scale


class EmbeddingTable(Layer):
    def __init__(self, store, vocab_size, dim, rng, prefix='embedding'):
        super().__init__(store, prefix)
        if vocab_size < 2:
            raise ContractError('vocabulary needs at least the pad and unk entries')
        vectors = rng.normal(scale=np.sqrt(1 / dim), size=(vocab_size, dim))
        vectors[PAD_ID] = 0
        self.vectors = self.param('vectors', vectors)

    @property
    def vocab_size(self):
        return self.vectors.shape[0]

    @property
    def dim(self):
        return self.vectors.shape[1]

    def forward(self, ids):
        """Columns of the looked-up vectors; pad columns are zero and masked out."""
        ids = self.check_ids(ids)
        mask = ids != PAD_ID
        x = self.vectors[ids].T
        x[:, ~mask] = 0
        return x, mask

    def check_ids(self, ids):
        ids = np.asarray(ids, dtype=np.int64)
        if ids.ndim != 1:
            raise ContractError('token ids must be 1-d, got shape {}'.format(ids.shape))
        if np.any(ids < 0) or np.any(ids >= self.vocab_size):
            raise ContractError('token id out of range for vocabulary of {}'.format(
                self.vocab_size))
        return ids

    def backward(self, ids, d_x):
        """Scatter-add the columns of d_x into the rows of ids; the pad row stays frozen."""
        grad = self.grad('vectors')
        np.add.at(grad, ids, d_x.T)
        grad[PAD_ID] = 0


def embed(table, token_ids):
    return table.forward(token_ids)


@dataclass
class HiddenStates:
    h: np.ndarray
    valid_mask: np.ndarray
    encoder_cache: object = None

    @property
    def valid(self):
        return self.h[:, self.valid_mask]


def encoder_output_dim(kind, hidden_unit):
    return 2 * hidden_unit if kind == 'bidirectional_elman' else hidden_unit


class FusionEncoder(Layer):
    """Contextualizes embedded tokens: a per-token projection or a bidirectional Elman RNN."""

    def __init__(self, store, kind, input_dim, hidden_unit, rng, prefix='encoder'):
        super().__init__(store, prefix)
        if kind not in ENCODERS:
            raise ConfigError('unknown encoder {!r}, expected one of {}'.format(kind, ENCODERS))
        self.kind = kind
        self.input_dim = input_dim
        self.hidden_unit = hidden_unit
        if kind == 'identity_projection':
            self.w = self.param('W', np.eye(hidden_unit, input_dim))
        else:
            self.cells = {}
            for direction in ('f', 'b'):
                self.cells[direction] = (
                    self.param('W_' + direction, rng.normal(
                        scale=np.sqrt(1 / input_dim), size=(hidden_unit, input_dim))),
                    self.param('U_' + direction, rng.normal(
                        scale=np.sqrt(0.5 / hidden_unit), size=(hidden_unit, hidden_unit))),
                    self.param('b_' + direction, np.zeros(hidden_unit)),
                )

    @property
    def output_dim(self):
        return encoder_output_dim(self.kind, self.hidden_unit)

    def _scan(self, direction, x):
        w, u, b = self.cells[direction]
        n = x.shape[1]
        states = np.zeros((self.hidden_unit, n))
        prev = np.zeros(self.hidden_unit)
        order = range(n) if direction == 'f' else range(n - 1, -1, -1)
        for t in order:
            prev = np.tanh(w @ x[:, t] + u @ prev + b)
            states[:, t] = prev
        return states

    def _scan_backward(self, direction, x, states, d_states):
        w, u, _ = self.cells[direction]
        d_w, d_u, d_b = (self.grad(name + '_' + direction) for name in ('W', 'U', 'b'))
        n = x.shape[1]
        d_x = np.zeros_like(x)
        carry = np.zeros(self.hidden_unit)
        if direction == 'f':
            order, step = range(n - 1, -1, -1), -1
        else:
            order, step = range(n), 1
        for t in order:
            dz = (d_states[:, t] + carry) * (1 - states[:, t] ** 2)
            prev_t = t + step
            if 0 <= prev_t < n:
                d_u += np.outer(dz, states[:, prev_t])
            d_w += np.outer(dz, x[:, t])
            d_b += dz
            d_x[:, t] = w.T @ dz
            carry = u.T @ dz
        return d_x

    def forward(self, x):
        """x holds only valid columns; returns the (output_dim x n) states."""
        if x.shape[0] != self.input_dim:
            raise ContractError('encoder expects {}-d inputs, got {}'.format(
                self.input_dim, x.shape[0]))
        if self.kind == 'identity_projection':
            return self.w @ x, x
        fwd, bwd = self._scan('f', x), self._scan('b', x)
        return np.vstack([fwd, bwd]), (x, fwd, bwd)

    def backward(self, cache, d_h):
        if self.kind == 'identity_projection':
            x = cache
            self.grad('W')[...] += d_h @ x.T
            return self.w.T @ d_h
        x, fwd, bwd = cache
        k = self.hidden_unit
        return (self._scan_backward('f', x, fwd, d_h[:k]) +
                self._scan_backward('b', x, bwd, d_h[k:]))


def fuse(encoder, x, mask):
    """Encode the valid columns of x; masked columns of the result are zero."""
    mask = np.asarray(mask, dtype=bool)
    h = np.zeros((encoder.output_dim, x.shape[1]))
    cache = None
    if mask.any():
        h[:, mask], cache = encoder.forward(x[:, mask])
    return HiddenStates(h, mask, cache)


class EigenAggregator(Layer):
    name = 'eigen'

    def __init__(self, store, input_dim, rng, prefix='aggregator',
                 hidden_units=CLASSIFICATION_HIDDEN_UNITS, power=DEFAULT_POWER,
                 trunc_k=DEFAULT_TRUNC_K, backward=BackwardMode.ANALYTIC):
        super().__init__(store, prefix)
        scorer = ConnectivityScorer.random(rng, input_dim, hidden_units)
        self.scorer = ConnectivityScorer(*(self.param(name, value)
                                           for name, value in scorer.items()))
        self.power = power
        self.trunc_k = trunc_k
        self.mode = BackwardMode(backward)

    def graph(self, h):
        a = build_adjacency(self.scorer, h)
        return a, eigen_weights(a, self.power)

    def forward(self, h):
        a, w = self.graph(h)
        return aggregate(h, w), (h, a, w)

    def backward(self, cache, d_out):
        h, a, w = cache
        grad_h, grad_a = eigen_aggregate_backward(h, a, w.eig, d_out, self.trunc_k, self.mode,
                                                  self.power)
        grads, d_h = build_adjacency_backward(self.scorer, h, a, grad_a)
        for name, g in grads.items():
            self.grad(name)[...] += g
        return grad_h + d_h

    @staticmethod
    def power_steps(cache):
        return cache[2].eig.steps_taken


class SelfAttentionAggregator(Layer):
    name = 'self_attn'

    def __init__(self, store, input_dim, rng, prefix='aggregator'):
        super().__init__(store, prefix)
        self.params = SelfAttentionParams(self.param(
            'q', SelfAttentionParams.random(rng, input_dim).q))

    def forward(self, h):
        w = self_attention_weights(self.params, h)
        return aggregate(h, w), (h, w)

    def backward(self, cache, d_out):
        h, w = cache
        d_h, d_w = aggregate_backward(h, w, d_out)
        d_q, d_h_attn = self_attention_backward(self.params, h, w, d_w)
        self.grad('q')[...] += d_q
        return d_h + d_h_attn

    @staticmethod
    def power_steps(cache):
        return None


class MaxAggregator(object):
    name = 'max'

    def forward(self, h):
        return max_pool(h), h

    def backward(self, h, d_out):
        return max_pool_backward(h, d_out)

    @staticmethod
    def power_steps(cache):
        return None


class AverageAggregator(object):
    name = 'avg'

    def forward(self, h):
        return average_pool(h), h

    def backward(self, h, d_out):
        d_h, _ = aggregate_backward(h, uniform_weights(h.shape[1]), d_out)
        return d_h

    @staticmethod
    def power_steps(cache):
        return None


def make_aggregator(kind, store, input_dim, rng, prefix='aggregator', **eigen_options):
    if kind == 'eigen':
        return EigenAggregator(store, input_dim, rng, prefix, **eigen_options)
    if kind == 'self_attn':
        return SelfAttentionAggregator(store, input_dim, rng, prefix)
    if kind == 'max':
        return MaxAggregator()
    if kind == 'avg':
        return AverageAggregator()
    raise ConfigError('unknown aggregator {!r}, expected one of {}'.format(kind, AGGREGATORS))


class ClassifierHead(Layer):
    """tanh hidden layer, dropout, then class logits."""

    def __init__(self, store, input_dim, hidden_units, n_classes, rng, dropout_rate=0.0,
                 prefix='head'):
        super().__init__(store, prefix)
        if n_classes < 2:
            raise ContractError('need at least 2 classes, got {}'.format(n_classes))
        self.w1 = self.param('W1', rng.normal(scale=np.sqrt(1 / input_dim),
                                              size=(hidden_units, input_dim)))
        self.b1 = self.param('b1', np.zeros(hidden_units))
        self.w2 = self.param('W2', rng.normal(scale=np.sqrt(1 / hidden_units),
                                              size=(n_classes, hidden_units)))
        self.b2 = self.param('b2', np.zeros(n_classes))
        self.dropout_rate = dropout_rate

    @property
    def n_classes(self):
        return self.w2.shape[0]

    def forward(self, r, rng=None):
        hidden = np.tanh(self.w1 @ r + self.b1)
        dropped, scale = dropout(hidden, self.dropout_rate, rng)
        return self.w2 @ dropped + self.b2, (r, hidden, dropped, scale)

    def backward(self, cache, d_logits):
        r, hidden, dropped, scale = cache
        self.grad('W2')[...] += np.outer(d_logits, dropped)
        self.grad('b2')[...] += d_logits
        d_hidden = dropout_backward(scale, self.w2.T @ d_logits)
        dz = d_hidden * (1 - hidden ** 2)
        self.grad('W1')[...] += np.outer(dz, r)
        self.grad('b1')[...] += dz
        return self.w1.T @ dz


@dataclass(frozen=True)
class ModelShape:
    """Everything needed to rebuild a model's parameter layout."""
    vocab_size: int
    n_classes: int
    embedding_size: int = 300
    encoder: str = 'bidirectional_elman'
    encoder_hidden_unit: int = 150
    aggregator: str = 'eigen'
    connectivity_hidden_units: int = CLASSIFICATION_HIDDEN_UNITS
    classifier_hidden_units: int = 100
    dropout_rate: float = 0.0
    power: PowerConfig = DEFAULT_POWER
    trunc_k: int = DEFAULT_TRUNC_K
    backward: str = 'analytic'

    def eigen_options(self):
        return dict(hidden_units=self.connectivity_hidden_units, power=self.power,
                    trunc_k=self.trunc_k, backward=self.backward)


@dataclass
class SentenceCache:
    valid_ids: np.ndarray
    embed_scale: np.ndarray
    encoder_cache: object
    aggregator_cache: object
    power_steps: list = field(default_factory=list)


class SentenceEncoder(object):
    """Embedding, dropout, fusion and aggregation of one token sequence."""

    def __init__(self, store, shape, rng):
        self.embedding = EmbeddingTable(store, shape.vocab_size, shape.embedding_size, rng)
        self.encoder = FusionEncoder(store, shape.encoder, shape.embedding_size,
                                     shape.encoder_hidden_unit, rng)
        self.aggregator = make_aggregator(shape.aggregator, store, self.encoder.output_dim, rng,
                                          **_eigen_options(shape))
        self.dropout_rate = shape.dropout_rate

    @property
    def output_dim(self):
        return self.encoder.output_dim

    def hidden_states(self, ids, rng=None):
        ids = self.embedding.check_ids(ids)
        x, mask = embed(self.embedding, ids)
        if not mask.any():
            raise EmptySequenceError('sequence has no tokens after removing padding')
        x[:, mask], scale = dropout(x[:, mask], self.dropout_rate, rng)
        states = fuse(self.encoder, x, mask)
        return states.valid, ids[mask], scale, states.encoder_cache

    def forward(self, ids, rng=None):
        h, valid_ids, scale, encoder_cache = self.hidden_states(ids, rng)
        r, aggregator_cache = self.aggregator.forward(h)
        steps = self.aggregator.power_steps(aggregator_cache)
        return r, SentenceCache(valid_ids, scale, encoder_cache, aggregator_cache,
                                [] if steps is None else [steps])

    def backward(self, cache, d_r):
        d_h = self.aggregator.backward(cache.aggregator_cache, d_r)
        d_x = dropout_backward(cache.embed_scale, self.encoder.backward(cache.encoder_cache, d_h))
        self.embedding.backward(cache.valid_ids, d_x)

    def graph(self, ids):
        """(valid ids, adjacency, eigen weights) of the word graph for one sequence."""
        if not isinstance(self.aggregator, EigenAggregator):
            raise ConfigError('only the eigen aggregator builds a word graph, model uses {}'
                              .format(self.aggregator.name))
        h, valid_ids, _, _ = self.hidden_states(ids)
        a, w = self.aggregator.graph(h)
        return valid_ids, a, w


def _eigen_options(shape):
    return shape.eigen_options() if shape.aggregator == 'eigen' else {}


@dataclass
class ForwardCache:
    head_cache: object
    parts: list
    power_steps: list
    extra: object = None


class Model(object):
    """Shared plumbing: loss, gradient accumulation and prediction."""
    task = None

    def __init__(self, shape, rng):
        self.shape = shape
        self.store = ParamStore()

    @property
    def n_classes(self):
        return self.head.n_classes

    def logits(self, example, rng=None):
        raise NotImplementedError

    def backward(self, cache, d_logits):
        raise NotImplementedError

    def predict_proba(self, example):
        logits, _ = self.logits(example)
        return softmax(logits)

    def loss_and_backward(self, example, label, rng=None, scale=1.0):
        """Cross-entropy of one example; adds scale * gradient into the store."""
        logits, cache = self.logits(example, rng)
        probs = softmax(logits)
        loss = cross_entropy(probs, label)
        self.backward(cache, scale * cross_entropy_backward(probs, label))
        return loss, probs, cache


class FlatModel(Model):
    task = 'sentence'

    def __init__(self, shape, rng):
        super().__init__(shape, rng)
        self.sentence = SentenceEncoder(self.store, shape, rng)
        self.head = ClassifierHead(self.store, self.sentence.output_dim,
                                   shape.classifier_hidden_units, shape.n_classes, rng,
                                   shape.dropout_rate)

    def logits(self, example, rng=None):
        r, cache = self.sentence.forward(example, rng)
        logits, head_cache = self.head.forward(r, rng)
        return logits, ForwardCache(head_cache, [cache], cache.power_steps)

    def backward(self, cache, d_logits):
        self.sentence.backward(cache.parts[0], self.head.backward(cache.head_cache, d_logits))


class HierarchicalModel(Model):
    """Words to sentence vectors, then sentence vectors to a document vector."""
    task = 'document'

    def __init__(self, shape, rng):
        super().__init__(shape, rng)
        self.sentence = SentenceEncoder(self.store, shape, rng)
        d = self.sentence.output_dim
        self.doc_encoder = FusionEncoder(self.store, shape.encoder, d, shape.encoder_hidden_unit,
                                         rng, prefix='doc_encoder')
        self.doc_aggregator = make_aggregator(shape.aggregator, self.store,
                                              self.doc_encoder.output_dim, rng,
                                              prefix='doc_aggregator', **_eigen_options(shape))
        self.head = ClassifierHead(self.store, self.doc_encoder.output_dim,
                                   shape.classifier_hidden_units, shape.n_classes, rng,
                                   shape.dropout_rate)

    def logits(self, example, rng=None):
        sentences = [np.asarray(s, dtype=np.int64) for s in example]
        sentences = [s for s in sentences if np.any(s != PAD_ID)]
        if not sentences:
            raise EmptySequenceError('document has no non-empty sentence')
        vectors, parts, steps = [], [], []
        for ids in sentences:
            r, cache = self.sentence.forward(ids, rng)
            vectors.append(r)
            parts.append(cache)
            steps.extend(cache.power_steps)
        s = np.stack(vectors, axis=1)
        h, encoder_cache = self.doc_encoder.forward(s)
        doc, aggregator_cache = self.doc_aggregator.forward(h)
        doc_steps = self.doc_aggregator.power_steps(aggregator_cache)
        if doc_steps is not None:
            steps.append(doc_steps)
        logits, head_cache = self.head.forward(doc, rng)
        return logits, ForwardCache(head_cache, parts, steps, (encoder_cache, aggregator_cache))

    def backward(self, cache, d_logits):
        encoder_cache, aggregator_cache = cache.extra
        d_doc = self.head.backward(cache.head_cache, d_logits)
        d_h = self.doc_aggregator.backward(aggregator_cache, d_doc)
        d_s = self.doc_encoder.backward(encoder_cache, d_h)
        for i, part in enumerate(cache.parts):
            self.sentence.backward(part, d_s[:, i])


def nli_combine(r_p, r_h):
    """[r_p; r_h; |r_p - r_h|; r_p * r_h]."""
    r_p, r_h = as_vector(r_p, 'premise'), as_vector(r_h, 'hypothesis')
    if r_p.shape != r_h.shape:
        raise ContractError('premise length {} != hypothesis length {}'.format(
            r_p.shape[0], r_h.shape[0]))
    return np.concatenate([r_p, r_h, np.abs(r_p - r_h), r_p * r_h])


def nli_combine_backward(r_p, r_h, d_r):
    """Returns (dL/dr_p, dL/dr_h); the |.| block has subgradient 0 at 0."""
    d_p, d_h, d_abs, d_mul = np.split(as_vector(d_r, 'cotangent'), 4)
    sign = np.sign(r_p - r_h)
    return d_p + sign * d_abs + r_h * d_mul, d_h - sign * d_abs + r_p * d_mul


class PairModel(Model):
    """Premise and hypothesis go through one shared sentence encoder."""
    task = 'pair'

    def __init__(self, shape, rng):
        super().__init__(shape, rng)
        self.sentence = SentenceEncoder(self.store, shape, rng)
        self.head = ClassifierHead(self.store, 4 * self.sentence.output_dim,
                                   shape.classifier_hidden_units, shape.n_classes, rng,
                                   shape.dropout_rate)

    def logits(self, example, rng=None):
        premise, hypothesis = example
        r_p, cache_p = self.sentence.forward(premise, rng)
        r_h, cache_h = self.sentence.forward(hypothesis, rng)
        logits, head_cache = self.head.forward(nli_combine(r_p, r_h), rng)
        return logits, ForwardCache(head_cache, [cache_p, cache_h],
                                    cache_p.power_steps + cache_h.power_steps, (r_p, r_h))

    def backward(self, cache, d_logits):
        r_p, r_h = cache.extra
        d_p, d_h = nli_combine_backward(r_p, r_h, self.head.backward(cache.head_cache, d_logits))
        self.sentence.backward(cache.parts[0], d_p)
        self.sentence.backward(cache.parts[1], d_h)


MODELS = {
    'sentence': FlatModel,
    'synthetic': FlatModel,
    'document': HierarchicalModel,
    'pair': PairModel,
}


def build_model(task, shape, rng):
    if task not in MODELS:
        raise ConfigError('unknown task {!r}, expected one of {}'.format(task, TASKS))
    return MODELS[task](shape, rng)


def classify_flat(sentence, model):
    return model.predict_proba(sentence)


def classify_hierarchical(document, model):
    return model.predict_proba(document)


def classify_pair(premise, hypothesis, model):
    return model.predict_proba((premise, hypothesis))


def _as_batch(probabilities, labels):
    probs = np.atleast_2d(np.asarray(probabilities, dtype=DTYPE))
    labels = np.atleast_1d(np.asarray(labels, dtype=np.int64))
    if labels.shape != (probs.shape[0],):
        raise ContractError('{} labels for {} distributions'.format(labels.shape[0],
                                                                    probs.shape[0]))
    if np.any(labels < 0) or np.any(labels >= probs.shape[1]):
        raise ContractError('label out of range for {} classes'.format(probs.shape[1]))
    return probs, labels


def cross_entropy(probabilities, labels):
    """Mean negative log-probability of the gold labels."""
    probs, labels = _as_batch(probabilities, labels)
    gold = probs[np.arange(labels.shape[0]), labels]
    if np.any(gold < PROB_FLOOR):
        msg = 'gold label probability below {}, clamping'.format(PROB_FLOOR)
        logger.warning(msg)
        warnings.warn(msg)
        gold = np.maximum(gold, PROB_FLOOR)
    return float(-np.mean(np.log(gold)))


def cross_entropy_backward(probabilities, labels):
    """Gradient of cross_entropy(softmax(logits)) with respect to the logits."""
    probs, labels = _as_batch(probabilities, labels)
    grad = probs.copy()
    grad[np.arange(labels.shape[0]), labels] -= 1
    grad /= labels.shape[0]
    return grad[0] if np.ndim(probabilities) == 1 else grad


def load_embeddings(path, token_ids, table, encoding='utf-8'):
    """Fill table rows from a `token v1 ... vd` text file; returns the number of rows set.

    Tokens missing from the file keep their seeded random vectors.
    """
    loaded = 0
    with open(path, encoding=encoding) as f:
        for line_no, line in enumerate(f, 1):
            parts = line.split()
            if len(parts) < 2:
                continue
            token, values = parts[0], parts[1:]
            if len(values) != table.dim:
                raise ConfigError('{}:{}: expected {} values, got {}'.format(
                    path, line_no, table.dim, len(values)))
            idx = token_ids.get(token)
            if idx is None or idx == PAD_ID:
                continue
            table.vectors[idx] = np.array(values, dtype=DTYPE)
            loaded += 1
    logger.info('loaded %d of %d embedding rows from %s', loaded, table.vocab_size, path)
    return loaded
