# Copyright 2026 The eigencent Authors | http://www.eclipse.org/legal/epl-v20.html
"""Gradients of the power method with respect to its input matrix.

At the converged pair (alpha, lambda) one normalized step v -> Av / ||Av||
has the Jacobians

    J_alpha = (A - alpha alpha^T A) / lambda
    d alpha_p / d A_qr = (1[p == q] alpha_r - alpha_p alpha_q alpha_r) / lambda

and the loss gradient is the series sum_k gamma^T J_alpha^k J_A. The series
is accumulated with a single running cotangent, so memory stays O(n^2)
however many terms are summed. J_A is only ever applied to a cotangent.
"""
from dataclasses import dataclass
import logging
import warnings

import numpy as np

from .eigencentrality import (
    DEFAULT_POWER, PowerConfig, check_positive_square, initial_vector, power_method
)
from .errors import ContractError
from .numerics import DTYPE, as_vector, check_finite, make_rng

logger = logging.getLogger(__name__)

DEFAULT_TRUNC_K = 20
SERIES_TOL = 1e-12
DIAGNOSTIC_MAX_N = 16

# forward settings for diagnostics that need a tightly converged pair
_REFERENCE_POWER = PowerConfig(epsilon=1e-13, max_converge_steps=10000)


@dataclass
class BackwardState:
    gamma: np.ndarray
    jac_alpha: np.ndarray
    trunc_k: int = DEFAULT_TRUNC_K
    running_cotangent: np.ndarray = None

    def __post_init__(self):
        self.gamma = check_finite(as_vector(self.gamma, 'gamma'), 'gamma')
        if self.trunc_k < 0:
            raise ContractError('trunc_k must be >= 0, got {}'.format(self.trunc_k))
        if self.running_cotangent is None:
            self.running_cotangent = self.gamma.copy()

    def advance(self):
        self.running_cotangent = self.jac_alpha.T @ self.running_cotangent
        return self.running_cotangent


@dataclass
class SpectralDiagnostics:
    lambda2_over_lambda1: float
    left_eigvec_w: np.ndarray
    coefficients: np.ndarray
    alpha: np.ndarray
    eigenvalue: float

    def eigenvalue_grad(self):
        """d lambda / d A = w alpha^T with w^T alpha = 1."""
        return np.outer(self.left_eigvec_w, self.alpha)


@dataclass
class UnrolledGradient:
    grad: np.ndarray
    converged: bool


def _check_pair(eig):
    assert eig.eigenvalue > 0, 'dominant eigenvalue must be positive, got %s' % eig.eigenvalue


def jac_wrt_alpha(a, eig):
    _check_pair(eig)
    alpha = eig.alpha
    return (a - np.outer(alpha, alpha @ a)) / eig.eigenvalue


def jac_wrt_a_apply(cotangent, eig):
    """Contract J_A with a cotangent: G_qr = (c_q a_r - (c . a) a_q a_r) / lambda."""
    _check_pair(eig)
    c = as_vector(cotangent, 'cotangent')
    if c.shape != eig.alpha.shape:
        raise ContractError('cotangent length {} != {}'.format(c.shape[0], eig.n))
    alpha = eig.alpha
    return np.outer(c - (c @ alpha) * alpha, alpha) / eig.eigenvalue


def series_terms(a, eig, gamma, trunc_k=DEFAULT_TRUNC_K):
    """Yield the trunc_k + 1 terms gamma^T J_alpha^k J_A, k = 0..trunc_k."""
    state = BackwardState(gamma, jac_wrt_alpha(a, eig), trunc_k)
    yield jac_wrt_a_apply(state.running_cotangent, eig)
    for _ in range(state.trunc_k):
        yield jac_wrt_a_apply(state.advance(), eig)


def analytic_grad_a(a, eig, gamma, trunc_k=DEFAULT_TRUNC_K, tol=SERIES_TOL):
    """dL/dA from the converged pair; stops early once a term's norm drops below tol."""
    a = check_positive_square(a)
    grad = np.zeros_like(a)
    for term in series_terms(a, eig, gamma, trunc_k):
        grad += term
        if np.linalg.norm(term) < tol:
            break
    return grad


def _normalized_step(a, v):
    y = a @ v
    s = np.linalg.norm(y)
    return y / s, s


def _step_backward(a, v, out, s, g):
    """Backward of out = Av / ||Av||; returns (dL/dA contribution, dL/dv)."""
    dy = (g - out * (out @ g)) / s
    return np.outer(dy, v), a.T @ dy


def unrolled_grad_a(a, cfg=DEFAULT_POWER, gamma=None, eig=None):
    """dL/dA by backpropagating through grad_steps + 1 recorded extra iterations.

    The convergence phase keeps nothing; only the window started from the
    converged vector is recorded.
    """
    a = check_positive_square(a)
    gamma = check_finite(as_vector(gamma, 'gamma'), 'gamma')
    if eig is None:
        eig = power_method(a, cfg)
    if not eig.converged:
        msg = 'unrolled gradient taken from an unconverged power method'
        logger.warning(msg)
        warnings.warn(msg)
    window = []
    v = eig.alpha
    for _ in range(cfg.grad_steps + 1):
        out, s = _normalized_step(a, v)
        window.append((v, out, s))
        v = out
    grad = np.zeros_like(a)
    g = gamma
    for v, out, s in reversed(window):
        d_a, g = _step_backward(a, v, out, s, g)
        grad += d_a
    return UnrolledGradient(grad, eig.converged)


def grad_wrt_init_z(a, cfg=DEFAULT_POWER, gamma=None, n_steps=None):
    """dL/dz for the power method started at z, and the cotangent norm per step.

    With n_steps unset, N is the step count the power method itself takes.
    decay[k] is the norm of the cotangent after backpropagating k steps.
    """
    a = check_positive_square(a)
    gamma = check_finite(as_vector(gamma, 'gamma'), 'gamma')
    z = initial_vector(a.shape[0], cfg)
    if n_steps is None:
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            n_steps = power_method(a, cfg, z).steps_taken
    z_norm = np.linalg.norm(z)
    v = z / z_norm
    window = []
    for _ in range(n_steps):
        out, s = _normalized_step(a, v)
        window.append((v, out, s))
        v = out
    g = gamma
    decay = [np.linalg.norm(g)]
    for v, out, s in reversed(window):
        _, g = _step_backward(a, v, out, s, g)
        decay.append(np.linalg.norm(g))
    z_hat = z / z_norm
    return (g - z_hat * (z_hat @ g)) / z_norm, np.array(decay)


def decay_fit(curve, skip=1, floor=1e-290):
    """Least-squares fit log(curve[k]) ~ c + k log(ratio); returns (ratio, r_squared).

    Points below floor are dropped (the curve has reached zero).
    """
    curve = np.asarray(curve, dtype=DTYPE)
    k = np.arange(curve.shape[0])
    keep = (k >= skip) & (curve > floor)
    if keep.sum() < 2:
        return 0.0, 1.0
    x, y = k[keep], np.log(curve[keep])
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    total = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 if total == 0 else 1 - np.sum(residual ** 2) / total
    return float(np.exp(slope)), float(r2)


def spectral_radius(m, steps=500, seed=0):
    """Power-iteration estimate of the spectral radius of m (geometric mean growth)."""
    v = make_rng(seed).normal(size=m.shape[0])
    v /= np.linalg.norm(v)
    growth = []
    for _ in range(steps):
        y = m @ v
        s = np.linalg.norm(y)
        if s == 0:
            return 0.0
        growth.append(np.log(s))
        v = y / s
    return float(np.exp(np.mean(growth[steps // 2:])))


def spectral_diag(a, z=None, steps=500):
    a = check_positive_square(a)
    n = a.shape[0]
    if n > DIAGNOSTIC_MAX_N:
        raise ContractError('spectral diagnostics are limited to n <= {}, got {}'.format(
            DIAGNOSTIC_MAX_N, n))
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        eig = power_method(a, _REFERENCE_POWER)
        left = power_method(a.T, _REFERENCE_POWER)
    ratio = spectral_radius(jac_wrt_alpha(a, eig), steps) if n > 1 else 0.0
    w = left.alpha / (left.alpha @ eig.alpha)

    z = initial_vector(n) if z is None else as_vector(z, 'z')
    vals, vecs = np.linalg.eig(a)
    order = np.argsort(-np.abs(vals), kind='stable')
    vecs = vecs[:, order]
    # orient u_1 so that it is the positive Perron vector
    vecs[:, 0] *= np.sign(vecs[:, 0].real.sum())
    coefficients = np.linalg.lstsq(vecs, z.astype(complex), rcond=None)[0]
    return SpectralDiagnostics(ratio, w, coefficients, eig.alpha, eig.eigenvalue)
