# Copyright 2026 The eigencent Authors | http://www.eclipse.org/legal/epl-v20.html
"""Dense vector/matrix helpers shared by every other module.

Matrices and vectors are plain float64 numpy arrays. Matrices are stored
row-major (numpy's default C order); column operations use axis=0.
"""
import numpy as np

from .errors import ContractError

DTYPE = np.float64


def as_matrix(m, name='matrix'):
    m = np.asarray(m, dtype=DTYPE)
    if m.ndim != 2:
        raise ContractError('{} must be 2-d, got shape {}'.format(name, m.shape))
    return m


def as_vector(v, name='vector'):
    v = np.asarray(v, dtype=DTYPE)
    if v.ndim != 1:
        raise ContractError('{} must be 1-d, got shape {}'.format(name, v.shape))
    return v


def check_finite(x, name='array'):
    if not np.all(np.isfinite(x)):
        raise ContractError('{} contains NaN or Inf'.format(name))
    return x


def make_rng(seed):
    """Seeded PCG64 generator; the same seed gives the same stream everywhere."""
    return np.random.default_rng(seed)


def matvec(m, v):
    m = as_matrix(m)
    v = as_vector(v)
    if m.shape[1] != v.shape[0]:
        raise ContractError(
            'matvec dimension mismatch: {} x {}'.format(m.shape, v.shape))
    return m @ v


def l2_norm(v):
    return float(np.linalg.norm(as_vector(v)))


def softmax(v):
    v = as_vector(v)
    e = np.exp(v - np.max(v))
    return e / e.sum()


def column_softmax(m):
    """Softmax down each column; every column of the result sums to 1."""
    m = as_matrix(m)
    e = np.exp(m - m.max(axis=0, keepdims=True))
    return e / e.sum(axis=0, keepdims=True)


def column_softmax_backward(a, cotangent):
    """Given a = column_softmax(s) and dL/da, return dL/ds."""
    return a * (cotangent - (a * cotangent).sum(axis=0, keepdims=True))


def softmax_backward(p, cotangent):
    return p * (cotangent - np.dot(p, cotangent))


def finite_diff_grad(f, m, h=1e-6):
    """Central-difference gradient of the scalar function f at m.

    Entries of m are perturbed in place and restored, so f may also be a
    closure reading m (e.g. a parameter array owned by a model).
    """
    if h <= 0:
        raise ContractError('step must be positive, got {}'.format(h))
    grad = np.zeros(np.shape(m), dtype=DTYPE)
    for idx in np.ndindex(*np.shape(m)):
        orig = m[idx]
        m[idx] = orig + h
        f_plus = f(m)
        m[idx] = orig - h
        f_minus = f(m)
        m[idx] = orig
        grad[idx] = (f_plus - f_minus) / (2 * h)
    return grad


def finite_diff_jacobian(f, x, h=1e-6):
    """Central-difference Jacobian of a vector function, shape out x in."""
    x = np.array(x, dtype=DTYPE)
    cols = []
    for idx in np.ndindex(*x.shape):
        orig = x[idx]
        x[idx] = orig + h
        f_plus = np.asarray(f(x), dtype=DTYPE).ravel()
        x[idx] = orig - h
        f_minus = np.asarray(f(x), dtype=DTYPE).ravel()
        x[idx] = orig
        cols.append((f_plus - f_minus) / (2 * h))
    return np.stack(cols, axis=1)


def relative_error(actual, expected, floor=1e-12):
    """Frobenius-norm relative error between two arrays of equal shape."""
    actual = np.asarray(actual, dtype=DTYPE)
    expected = np.asarray(expected, dtype=DTYPE)
    if actual.shape != expected.shape:
        raise ContractError('shape mismatch {} vs {}'.format(actual.shape, expected.shape))
    scale = max(np.linalg.norm(actual), np.linalg.norm(expected), floor)
    return float(np.linalg.norm(actual - expected) / scale)
