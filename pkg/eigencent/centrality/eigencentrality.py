# Copyright 2026 The eigencent Authors | http://www.eclipse.org/legal/epl-v20.html
"""Dominant eigenpair of a strictly positive matrix by the power method.

Iteration order per step is: normalize, multiply, Rayleigh quotient, then the
stopping test ||y - theta * alpha|| <= epsilon * |theta|. No per-step state
is kept; gradients are computed afterwards from the converged pair (see
powergrad).
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
import logging
import os
import warnings

import numpy as np

from .errors import ConfigError, ContractError, EmptySequenceError, PreconditionError
from .numerics import DTYPE, as_matrix, make_rng

logger = logging.getLogger(__name__)

THREADS_ENV = 'EIGENCENT_THREADS'


class PowerInit(str, Enum):
    ALL_ONES = 'all_ones'
    SEEDED_POSITIVE_UNIFORM = 'seeded_positive_uniform'


@dataclass(frozen=True)
class PowerConfig:
    epsilon: float = 1e-10
    max_converge_steps: int = 200
    grad_steps: int = 20
    init: PowerInit = PowerInit.ALL_ONES
    seed: int = 0

    def __post_init__(self):
        try:
            object.__setattr__(self, 'init', PowerInit(self.init))
        except ValueError:
            raise ConfigError('unknown power method init {!r}'.format(self.init))
        if not self.epsilon > 0:
            raise ConfigError('epsilon must be positive, got {}'.format(self.epsilon))
        if self.max_converge_steps < 1:
            raise ConfigError('max_converge_steps must be >= 1')
        if self.grad_steps < 0:
            raise ConfigError('grad_steps must be >= 0')

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError('unknown power config keys: {}'.format(', '.join(sorted(unknown))))
        return cls(**d)

    def to_dict(self):
        d = asdict(self)
        d['init'] = self.init.value
        return d


DEFAULT_POWER = PowerConfig()


@dataclass
class EigenPair:
    alpha: np.ndarray
    eigenvalue: float
    steps_taken: int
    converged: bool

    @property
    def n(self):
        return self.alpha.shape[0]


def check_positive_square(a):
    a = as_matrix(a, 'adjacency')
    if a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ContractError('expected a non-empty square matrix, got {}'.format(a.shape))
    if not np.all(a > 0):
        raise PreconditionError('power method needs a strictly positive matrix')
    return a


def initial_vector(n, cfg=DEFAULT_POWER):
    if cfg.init is PowerInit.ALL_ONES:
        return np.ones(n, dtype=DTYPE)
    # 1 - U[0, 1) lies in (0, 1], so every component is positive
    return 1.0 - make_rng(cfg.seed).random(n)


def power_method(a, cfg=DEFAULT_POWER, z=None):
    a = check_positive_square(a)
    y = initial_vector(a.shape[0], cfg) if z is None else np.array(z, dtype=DTYPE)
    if y.shape != (a.shape[0],) or not np.all(y > 0):
        raise PreconditionError('initial vector must be positive with length {}'.format(
            a.shape[0]))
    for step in range(1, cfg.max_converge_steps + 1):
        alpha = y / np.linalg.norm(y)
        y = a @ alpha
        theta = float(alpha @ y)
        if np.linalg.norm(y - theta * alpha) <= cfg.epsilon * abs(theta):
            return EigenPair(alpha, theta, step, True)
    msg = 'power method did not converge in {} steps'.format(cfg.max_converge_steps)
    logger.warning(msg)
    warnings.warn(msg)
    return EigenPair(alpha, theta, cfg.max_converge_steps, False)


def worker_count():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, 1)))
    except ValueError:
        raise ConfigError('{} must be an integer'.format(THREADS_ENV))


@dataclass
class ConvergeHistogram:
    edges: list
    counts: list
    steps: list = field(repr=False)
    unconverged: int
    max_converge_steps: int

    @property
    def total(self):
        return sum(self.counts)

    @property
    def median(self):
        return float(np.median(self.steps))

    @property
    def p95(self):
        return float(np.percentile(self.steps, 95))

    @property
    def unconverged_fraction(self):
        return self.unconverged / len(self.steps)

    def to_dict(self):
        return {
            'edges': self.edges,
            'counts': self.counts,
            'total': self.total,
            'median': self.median,
            'p95': self.p95,
            'unconverged': self.unconverged,
            'unconverged_fraction': self.unconverged_fraction,
            'max_converge_steps': self.max_converge_steps,
        }


def converge_stats(batch, cfg=DEFAULT_POWER, bin_width=1):
    """Histogram of power method step counts over a batch of matrices."""
    batch = list(batch)
    if not batch:
        raise EmptySequenceError('converge_stats needs at least one matrix')
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        threads = worker_count()
        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                pairs = list(pool.map(lambda a: power_method(a, cfg), batch))
        else:
            pairs = [power_method(a, cfg) for a in batch]
    steps = [p.steps_taken for p in pairs]
    edges = np.arange(1, cfg.max_converge_steps + bin_width + 1, bin_width)
    counts, _ = np.histogram(steps, bins=edges)
    return ConvergeHistogram(
        edges=[int(e) for e in edges],
        counts=[int(c) for c in counts],
        steps=steps,
        unconverged=sum(1 for p in pairs if not p.converged),
        max_converge_steps=cfg.max_converge_steps,
    )
