# Copyright 2026 The eigencent Authors | http://www.eclipse.org/legal/epl-v20.html
"""Configuration, data ingestion, optimization, checkpoints and evaluation."""
from collections import Counter, OrderedDict
from dataclasses import asdict, dataclass, field
import json
import logging
import os
import struct

import numpy as np

from . import constants
from .aggregators import BackwardMode
from .eigencentrality import PowerConfig
from .errors import (
    CheckpointError, ConfigError, ContractError, DivergenceError, EmptySequenceError
)
from .model import (
    AGGREGATORS, ENCODERS, PAD_ID, TASKS, UNK_ID, ModelShape, build_model, cross_entropy,
    load_embeddings
)
from .numerics import make_rng

logger = logging.getLogger(__name__)

ADAM_BETAS = (0.9, 0.999)
ADAM_EPSILON = 1e-8

SENTENCE_SEPARATOR = ' ||| '

CHECKPOINT_MAGIC = b'EIGCKPT\x00'
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct('<IQ')

# independent RNG streams derived from one seed
_TRAIN_STREAM = 1
_SPLIT_STREAM = 2

# best-dev arrays carried inside a later checkpoint
_BEST_PREFIX = 'best.'


@dataclass
class TrainConfig:
    embedding_size: int = 300
    encoder_hidden_unit: int = 300
    connectivity_hidden_units: int = 50
    regularization_rate: float = 1e-6
    initial_learning_rate: float = 1e-4
    learning_rate_decay: float = 0.9
    learning_rate_decay_steps: int = 2000
    initial_batch_size: int = 64
    batch_size_low_bound: int = 32
    dropout_rate: float = 0.6
    epochs: int = 10
    seed: int = 0
    aggregator: str = 'eigen'
    task: str = 'sentence'
    encoder: str = 'bidirectional_elman'
    classifier_hidden_units: int = 100
    gradient_clip_norm: float = 5.0
    max_batch_tokens: int = 4096
    vocab_min_count: int = 1
    dev_fraction: float = 0.1
    embeddings_path: str = None
    trunc_k: int = 20
    backward: str = 'analytic'
    power: PowerConfig = field(default_factory=PowerConfig)

    def __post_init__(self):
        if isinstance(self.power, dict):
            self.power = PowerConfig.from_dict(self.power)
        checks = [
            (self.embedding_size >= 1, 'embedding_size must be >= 1'),
            (self.encoder_hidden_unit >= 1, 'encoder_hidden_unit must be >= 1'),
            (self.connectivity_hidden_units >= 1, 'connectivity_hidden_units must be >= 1'),
            (self.classifier_hidden_units >= 1, 'classifier_hidden_units must be >= 1'),
            (self.regularization_rate >= 0, 'regularization_rate must be >= 0'),
            (self.initial_learning_rate > 0, 'initial_learning_rate must be positive'),
            (0 < self.learning_rate_decay <= 1, 'learning_rate_decay must be in (0, 1]'),
            (self.learning_rate_decay_steps >= 1, 'learning_rate_decay_steps must be >= 1'),
            (self.initial_batch_size >= 1, 'initial_batch_size must be >= 1'),
            (1 <= self.batch_size_low_bound <= self.initial_batch_size,
             'batch_size_low_bound must be in [1, initial_batch_size]'),
            (0 <= self.dropout_rate < 1, 'dropout_rate must be in [0, 1)'),
            (self.epochs >= 0, 'epochs must be >= 0'),
            (self.gradient_clip_norm is None or self.gradient_clip_norm >= 0,
             'gradient_clip_norm must be >= 0 (0 disables clipping)'),
            (self.max_batch_tokens >= 1, 'max_batch_tokens must be >= 1'),
            (self.vocab_min_count >= 1, 'vocab_min_count must be >= 1'),
            (0 <= self.dev_fraction < 1, 'dev_fraction must be in [0, 1)'),
            (self.trunc_k >= 0, 'trunc_k must be >= 0'),
            (self.aggregator in AGGREGATORS,
             'aggregator must be one of {}'.format(', '.join(AGGREGATORS))),
            (self.task in TASKS, 'task must be one of {}'.format(', '.join(TASKS))),
            (self.encoder in ENCODERS, 'encoder must be one of {}'.format(', '.join(ENCODERS))),
            (self.backward in [m.value for m in BackwardMode],
             'backward must be analytic or unrolled'),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        preset = d.pop('preset', None)
        if preset is not None:
            if preset not in constants.HYPER_PARAMS:
                raise ConfigError('unknown preset {!r}, expected one of {}'.format(
                    preset, ', '.join(constants.HYPER_PARAMS)))
            d = dict(constants.HYPER_PARAMS[preset], **d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError('unknown config keys: {}'.format(', '.join(sorted(unknown))))
        try:
            return cls(**d)
        except TypeError as e:
            raise ConfigError(str(e))

    @classmethod
    def from_json(cls, path):
        with open(path) as f:
            try:
                return cls.from_dict(json.load(f))
            except json.JSONDecodeError as e:
                raise ConfigError('{} is not valid JSON: {}'.format(path, e))

    def to_dict(self):
        d = asdict(self)
        d['power'] = self.power.to_dict()
        return d

    def model_shape(self, vocab_size, n_classes):
        return ModelShape(
            vocab_size=vocab_size,
            n_classes=n_classes,
            embedding_size=self.embedding_size,
            encoder=self.encoder,
            encoder_hidden_unit=self.encoder_hidden_unit,
            aggregator=self.aggregator,
            connectivity_hidden_units=self.connectivity_hidden_units,
            classifier_hidden_units=self.classifier_hidden_units,
            dropout_rate=self.dropout_rate,
            power=self.power,
            trunc_k=self.trunc_k,
            backward=self.backward,
        )


class Vocabulary(object):
    PAD = '<pad>'
    UNK = '<unk>'

    def __init__(self, tokens=()):
        self.tokens = [self.PAD, self.UNK] + [t for t in tokens if t not in (self.PAD, self.UNK)]
        self.index = {t: i for i, t in enumerate(self.tokens)}
        assert self.index[self.PAD] == PAD_ID and self.index[self.UNK] == UNK_ID

    @classmethod
    def build(cls, token_lists, min_count=1):
        """Tokens seen at least min_count times, most frequent first (ties alphabetical)."""
        counts = Counter(t for tokens in token_lists for t in tokens)
        kept = sorted((t for t, c in counts.items() if c >= min_count),
                      key=lambda t: (-counts[t], t))
        return cls(kept)

    def __len__(self):
        return len(self.tokens)

    def encode(self, tokens):
        return np.array([self.index.get(t, UNK_ID) for t in tokens], dtype=np.int64)


def _flat_tokens(task, example):
    if task == 'document':
        return [t for sentence in example for t in sentence]
    if task == 'pair':
        return list(example[0]) + list(example[1])
    return list(example)


@dataclass
class Dataset:
    task: str
    examples: list
    labels: np.ndarray
    vocab: Vocabulary
    n_classes: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.examples) != self.labels.shape[0]:
            raise ContractError('{} examples but {} labels'.format(len(self.examples),
                                                                  self.labels.shape[0]))
        if np.any(self.labels < 0) or np.any(self.labels >= self.n_classes):
            raise ContractError('labels must lie in [0, {})'.format(self.n_classes))

    def __len__(self):
        return len(self.examples)

    def length(self, i):
        """Token count of example i, used to size batches."""
        return len(_flat_tokens(self.task, self.examples[i]))

    def subset(self, indices):
        return Dataset(self.task, [self.examples[i] for i in indices], self.labels[indices],
                       self.vocab, self.n_classes)

    def split(self, dev_fraction, seed):
        """Seeded (train, dev) split; dev gets round(dev_fraction * len) examples.

        A positive fraction of a dataset with at least two examples holds out
        at least one.
        """
        order = make_rng([seed, _SPLIT_STREAM]).permutation(len(self))
        n_dev = int(round(dev_fraction * len(self)))
        if dev_fraction > 0 and len(self) > 1:
            n_dev = max(1, n_dev)
        return self.subset(np.sort(order[n_dev:])), self.subset(np.sort(order[:n_dev]))


def _encode_example(task, vocab, example):
    if task == 'document':
        return [vocab.encode(sentence) for sentence in example]
    if task == 'pair':
        return vocab.encode(example[0]), vocab.encode(example[1])
    return vocab.encode(example)


def read_tsv(path, task):
    """Token-level examples and integer labels from a corpus file."""
    examples, labels = [], []
    skipped = 0
    with open(path, encoding='utf-8') as f:
        for line_no, line in enumerate(f, 1):
            line = line.rstrip('\n')
            if not line.strip():
                continue
            fields = line.split('\t')
            expected = 3 if task == 'pair' else 2
            if len(fields) != expected:
                raise ContractError('{}:{}: expected {} tab-separated fields, got {}'.format(
                    path, line_no, expected, len(fields)))
            try:
                label = int(fields[0])
            except ValueError:
                raise ContractError('{}:{}: label {!r} is not an integer'.format(
                    path, line_no, fields[0]))
            if task == 'document':
                example = [s.split() for s in fields[1].split(SENTENCE_SEPARATOR)]
                example = [s for s in example if s]
                empty = not example
            elif task == 'pair':
                example = (fields[1].split(), fields[2].split())
                empty = not example[0] or not example[1]
            else:
                example = fields[1].split()
                empty = not example
            if empty:
                skipped += 1
                continue
            examples.append(example)
            labels.append(label)
    if skipped:
        logger.info('skipped %d empty examples in %s', skipped, path)
    return examples, labels


def load_corpus(path, task, vocab=None, min_count=1, n_classes=None):
    """Read a TSV corpus; the vocabulary is built from it unless one is given."""
    examples, labels = read_tsv(path, task)
    if not examples:
        raise EmptySequenceError('{} holds no usable examples'.format(path))
    if vocab is None:
        vocab = Vocabulary.build((_flat_tokens(task, e) for e in examples), min_count)
    if n_classes is None:
        n_classes = max(labels) + 1
    encoded = [_encode_example(task, vocab, e) for e in examples]
    return Dataset(task, encoded, labels, vocab, max(n_classes, 2))


def make_synthetic_task(seed, n_classes=4, vocab=200, distractor_rate=0.9, length=(10, 30),
                        n_examples=2000):
    """Keyword classification: the label is which keyword appears among distractors.

    Tokens kw0..kw{n_classes-1} are the keywords; the rest of the vocabulary
    are distractors. Each position holds the example's keyword with
    probability 1 - distractor_rate, and every example holds it at least once.
    """
    min_len, max_len = length
    if not 1 <= min_len <= max_len:
        raise ContractError('invalid length range {}'.format(length))
    if not 0 <= distractor_rate <= 1:
        raise ContractError('distractor_rate must be in [0, 1]')
    n_distractors = vocab - n_classes
    if n_classes < 2 or (n_distractors < 1 and distractor_rate > 0):
        raise ContractError('need >= 2 classes and room for distractors in the vocabulary')
    keywords = ['kw{}'.format(c) for c in range(n_classes)]
    distractors = ['tok{}'.format(i) for i in range(max(n_distractors, 0))]
    vocabulary = Vocabulary(keywords + distractors)
    rng = make_rng(seed)
    labels = rng.permutation(np.arange(n_examples) % n_classes)
    examples = []
    for label in labels:
        n = int(rng.integers(min_len, max_len + 1))
        is_keyword = rng.random(n) >= distractor_rate
        if not is_keyword.any():
            is_keyword[rng.integers(n)] = True
        filler = rng.integers(len(distractors), size=n) if distractors else np.zeros(n, int)
        tokens = [keywords[label] if k else distractors[j] for k, j in zip(is_keyword, filler)]
        examples.append(vocabulary.encode(tokens))
    return Dataset('synthetic', examples, labels, vocabulary, n_classes)


def learning_rate(cfg, step):
    return cfg.initial_learning_rate * cfg.learning_rate_decay ** (
        step / cfg.learning_rate_decay_steps)


def clip_gradients(store, max_norm):
    """Scale all gradients so their global norm is at most max_norm; returns the old norm."""
    norm = store.grad_norm()
    if max_norm and norm > max_norm:
        for g in store.grads.values():
            g *= max_norm / norm
    return norm


def adam_step(store, cfg, step):
    """One bias-corrected Adam update in place; step counts from 1."""
    lr = learning_rate(cfg, step)
    b1, b2 = ADAM_BETAS
    for name, p in store.params.items():
        g = store.grads[name] + cfg.regularization_rate * p
        m, v = store.m[name], store.v[name]
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * g * g
        m_hat = m / (1 - b1 ** step)
        v_hat = v / (1 - b2 ** step)
        p -= lr * m_hat / (np.sqrt(v_hat) + ADAM_EPSILON)
    return store


def split_batch(batch, lengths, max_tokens, low_bound):
    """Halve a batch while padded size exceeds max_tokens and halves stay >= low_bound."""
    if len(batch) < 2 * low_bound or max(lengths[i] for i in batch) * len(batch) <= max_tokens:
        return [batch]
    half = len(batch) // 2
    return (split_batch(batch[:half], lengths, max_tokens, low_bound) +
            split_batch(batch[half:], lengths, max_tokens, low_bound))


def make_batches(order, lengths, cfg):
    batches = []
    for start in range(0, len(order), cfg.initial_batch_size):
        batch = list(order[start:start + cfg.initial_batch_size])
        batches.extend(split_batch(batch, lengths, cfg.max_batch_tokens, cfg.batch_size_low_bound))
    return batches


@dataclass
class Checkpoint:
    arrays: OrderedDict
    config: dict
    rng_state: dict
    step: int
    epoch: int
    vocabulary: list
    meta: dict = field(default_factory=dict)
    version: int = CHECKPOINT_VERSION

    @classmethod
    def capture(cls, model, cfg, rng, step, epoch, vocab, meta=None, best=None):
        """Snapshot model, optimizer and RNG; best is an earlier checkpoint to carry along."""
        store = model.store
        arrays = OrderedDict()
        for name in store.names():
            arrays[name] = store.params[name].copy()
            arrays['adam.m.' + name] = store.m[name].copy()
            arrays['adam.v.' + name] = store.v[name].copy()
        if best is not None and best.epoch != epoch:
            for key, arr in best.arrays.items():
                if not key.startswith(_BEST_PREFIX):
                    arrays[_BEST_PREFIX + key] = arr
        meta = dict(meta or {})
        meta.setdefault('task', cfg.task)
        meta.setdefault('n_classes', model.n_classes)
        return cls(arrays, cfg.to_dict(), rng.bit_generator.state, step, epoch,
                   list(vocab.tokens), meta)

    def best(self):
        """The best-dev checkpoint this one carries, or itself."""
        keys = [key for key in self.arrays if key.startswith(_BEST_PREFIX)]
        if not keys:
            return self
        arrays = OrderedDict((key[len(_BEST_PREFIX):], self.arrays[key]) for key in keys)
        return Checkpoint(arrays, self.config, self.rng_state,
                          self.meta.get('best_step', self.step), self.meta['best_epoch'],
                          self.vocabulary, dict(self.meta), self.version)

    @property
    def train_config(self):
        return TrainConfig.from_dict(self.config)

    def restore(self, model):
        store = model.store
        for name in store.names():
            for target, key in ((store.params, name), (store.m, 'adam.m.' + name),
                                (store.v, 'adam.v.' + name)):
                if key not in self.arrays:
                    raise CheckpointError('checkpoint has no array {}'.format(key))
                if self.arrays[key].shape != target[name].shape:
                    raise CheckpointError('array {} has shape {}, model expects {}'.format(
                        key, self.arrays[key].shape, target[name].shape))
                target[name][...] = self.arrays[key]
        return model

    def make_rng(self):
        rng = make_rng(0)
        rng.bit_generator.state = self.rng_state
        return rng

    def save(self, path):
        index = {'arrays': [], 'config': self.config, 'rng_state': self.rng_state,
                 'step': self.step, 'epoch': self.epoch, 'vocabulary': self.vocabulary,
                 'meta': self.meta}
        blobs = []
        offset = 0
        for name, arr in self.arrays.items():
            data = np.ascontiguousarray(arr, dtype='<f8').tobytes()
            index['arrays'].append({'name': name, 'shape': list(arr.shape), 'offset': offset})
            blobs.append(data)
            offset += len(data)
        index_bytes = json.dumps(index).encode('utf-8')
        tmp = path + '.tmp'
        with open(tmp, 'wb') as f:
            f.write(CHECKPOINT_MAGIC)
            f.write(_HEADER.pack(self.version, len(index_bytes)))
            f.write(index_bytes)
            for data in blobs:
                f.write(data)
        os.replace(tmp, path)
        logger.info('wrote checkpoint %s (epoch %d, step %d)', path, self.epoch, self.step)

    @classmethod
    def load(cls, path):
        with open(path, 'rb') as f:
            raw = f.read()
        if not raw.startswith(CHECKPOINT_MAGIC):
            raise CheckpointError('{} is not an eigencent checkpoint'.format(path))
        start = len(CHECKPOINT_MAGIC)
        if len(raw) < start + _HEADER.size:
            raise CheckpointError('{} is truncated'.format(path))
        version, index_len = _HEADER.unpack_from(raw, start)
        if version != CHECKPOINT_VERSION:
            raise CheckpointError('{} has format version {}, expected {}'.format(
                path, version, CHECKPOINT_VERSION))
        start += _HEADER.size
        try:
            index = json.loads(raw[start:start + index_len].decode('utf-8'))
        except (UnicodeDecodeError, json.JSONDecodeError):
            raise CheckpointError('{} has a corrupt index'.format(path))
        blob = memoryview(raw)[start + index_len:]
        arrays = OrderedDict()
        for entry in index['arrays']:
            count = int(np.prod(entry['shape'], dtype=np.int64))
            end = entry['offset'] + 8 * count
            if end > len(blob):
                raise CheckpointError('{} is truncated'.format(path))
            arrays[entry['name']] = np.frombuffer(
                blob[entry['offset']:end], dtype='<f8').reshape(entry['shape']).astype(np.float64)
        return cls(arrays, index['config'], index['rng_state'], index['step'], index['epoch'],
                   index['vocabulary'], index.get('meta', {}), version)


def prepare_model(cfg, vocab, n_classes):
    """Fresh model for cfg, seeded from cfg.seed, with pretrained vectors if configured."""
    model = build_model(cfg.task, cfg.model_shape(len(vocab), n_classes), make_rng(cfg.seed))
    if cfg.embeddings_path:
        load_embeddings(cfg.embeddings_path, vocab.index, model.sentence.embedding)
    return model


def model_from_checkpoint(ckpt):
    """Rebuild the model and vocabulary a checkpoint was written from."""
    cfg = ckpt.train_config
    vocab = Vocabulary(ckpt.vocabulary[2:])
    model = build_model(cfg.task, cfg.model_shape(len(vocab), ckpt.meta['n_classes']),
                        make_rng(cfg.seed))
    return ckpt.restore(model), vocab, cfg


@dataclass
class EvalResult:
    accuracy: float
    per_class: list
    loss: float
    total: int

    def to_dict(self):
        return asdict(self)


def evaluate(dataset, model):
    """Accuracy and per-class counts with dropout off; the model is not modified."""
    if len(dataset) == 0:
        raise EmptySequenceError('cannot evaluate an empty dataset')
    correct = np.zeros(dataset.n_classes, dtype=np.int64)
    total = np.zeros(dataset.n_classes, dtype=np.int64)
    losses = []
    for example, label in zip(dataset.examples, dataset.labels):
        probs = model.predict_proba(example)
        total[label] += 1
        correct[label] += int(np.argmax(probs) == label)
        losses.append(cross_entropy(probs, label))
    per_class = [{'label': c, 'correct': int(correct[c]), 'total': int(total[c])}
                 for c in range(dataset.n_classes)]
    return EvalResult(float(correct.sum() / total.sum()), per_class, float(np.mean(losses)),
                      int(total.sum()))


@dataclass
class TrainResult:
    log: list
    best: Checkpoint
    last: Checkpoint


def _better(acc, loss, best_acc, best_loss):
    return best_acc is None or acc > best_acc or (acc == best_acc and loss < best_loss)


def train_loop(dataset, model, cfg, dev=None, out_dir=None, resume=None):
    """Train with Adam; returns the per-epoch log and the best-dev and last checkpoints.

    Without an explicit dev set, cfg.dev_fraction of the dataset is held out
    by a seeded split. With out_dir, the JSON-lines log and both checkpoints
    are written there after every epoch. resume continues from a last
    checkpoint of the same run; the best-dev parameters it carries stay the
    returned best until a later epoch improves on them.
    """
    if dev is None:
        if cfg.dev_fraction > 0:
            dataset, dev = dataset.split(cfg.dev_fraction, cfg.seed)
        if dev is None or len(dev) == 0:
            dev = dataset
    if len(dataset) == 0:
        raise EmptySequenceError('training set is empty')
    lengths = [dataset.length(i) for i in range(len(dataset))]

    if resume is not None:
        resume.restore(model)
        rng = resume.make_rng()
        step, start_epoch = resume.step, resume.epoch
        meta = dict(resume.meta)
    else:
        rng = make_rng([cfg.seed, _TRAIN_STREAM])
        step, start_epoch = 0, 0
        meta = {'best_dev_acc': None, 'best_dev_loss': None, 'best_epoch': 0, 'best_step': 0}

    log_path = best_path = last_path = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        log_path = os.path.join(out_dir, 'train_log.jsonl')
        best_path = os.path.join(out_dir, 'best.ckpt')
        last_path = os.path.join(out_dir, 'last.ckpt')
        if resume is None and os.path.exists(log_path):
            os.remove(log_path)

    best = resume.best() if resume is not None else None
    last = Checkpoint.capture(model, cfg, rng, step, start_epoch, dataset.vocab, meta, best)
    if best is None:
        best = last
    if out_dir is not None and resume is None:
        last.save(best_path)
        last.save(last_path)

    log = []
    for epoch in range(start_epoch + 1, cfg.epochs + 1):
        order = rng.permutation(len(dataset))
        losses, hits, steps = [], 0, []
        for batch in make_batches(order, lengths, cfg):
            model.store.zero_grad()
            for i in batch:
                label = int(dataset.labels[i])
                loss, probs, cache = model.loss_and_backward(
                    dataset.examples[i], label, rng, scale=1 / len(batch))
                if not np.isfinite(loss):
                    raise DivergenceError('non-finite loss at epoch {}, step {}'.format(
                        epoch, step + 1))
                losses.append(loss)
                hits += int(np.argmax(probs) == label)
                steps.extend(cache.power_steps)
            grad_norm = clip_gradients(model.store, cfg.gradient_clip_norm)
            if not np.isfinite(grad_norm):
                raise DivergenceError('non-finite gradient at epoch {}, step {}'.format(
                    epoch, step + 1))
            step += 1
            adam_step(model.store, cfg, step)
            logger.debug('epoch %d step %d batch %d loss %.6f grad norm %.4f', epoch, step,
                         len(batch), np.mean(losses[-len(batch):]), grad_norm)

        result = evaluate(dev, model)
        record = OrderedDict([
            ('epoch', epoch),
            ('train_loss', float(np.mean(losses))),
            ('train_acc', hits / len(dataset)),
            ('dev_acc', result.accuracy),
            ('lr', learning_rate(cfg, step)),
            ('mean_power_steps', float(np.mean(steps)) if steps else None),
        ])
        log.append(record)
        logger.info('epoch %d: train loss %.4f acc %.4f, dev acc %.4f', epoch,
                    record['train_loss'], record['train_acc'], record['dev_acc'])
        if log_path is not None:
            with open(log_path, 'a') as f:
                f.write(json.dumps(record) + '\n')

        improved = _better(result.accuracy, result.loss, meta['best_dev_acc'],
                           meta['best_dev_loss'])
        if improved:
            meta.update(best_dev_acc=result.accuracy, best_dev_loss=result.loss,
                        best_epoch=epoch, best_step=step)
        last = Checkpoint.capture(model, cfg, rng, step, epoch, dataset.vocab, meta,
                                  None if improved else best)
        if improved:
            best = last
        if out_dir is not None:
            last.save(last_path)
            if improved:
                last.save(best_path)

    return TrainResult(log, best, last)
