# Copyright 2026 The eigencent Authors | http://www.eclipse.org/legal/epl-v20.html
import time

import numpy as np
import pytest

from .eigencentrality import (
    ConvergeHistogram, PowerConfig, PowerInit, converge_stats, initial_vector, power_method
)
from .errors import ConfigError, EmptySequenceError, PreconditionError
from .numerics import column_softmax, make_rng


def random_adjacency(rng, n, scale=1.0):
    return column_softmax(rng.normal(scale=scale, size=(n, n)))


def gap_adjacency(rng, n, ratio):
    """Positive column stochastic matrix whose other eigenvalues all equal ratio."""
    pi = rng.uniform(0.5, 1.5, size=n)
    pi /= pi.sum()
    return (1 - ratio) * np.outer(pi, np.ones(n)) + ratio * np.eye(n), pi / np.linalg.norm(pi)


def test_power_method_examples():
    eig = power_method([[0.5, 0.5], [0.5, 0.5]])
    np.testing.assert_allclose([0.70710678, 0.70710678], eig.alpha, atol=1e-8)
    assert abs(eig.eigenvalue - 1) < 1e-12
    assert eig.converged and eig.steps_taken == 1

    eig = power_method([[0.9, 0.2], [0.1, 0.8]])
    np.testing.assert_allclose([0.89442719, 0.44721360], eig.alpha, atol=1e-8)
    assert abs(eig.eigenvalue - 1) < 1e-8

    eig = power_method([[1.0]])
    np.testing.assert_array_equal([1.0], eig.alpha)
    assert eig.eigenvalue == 1.0


def test_power_method_rejects_non_positive():
    with pytest.raises(PreconditionError):
        power_method([[0.5, 0.0], [0.5, 1.0]])
    with pytest.raises(PreconditionError):
        power_method([[0.5, 0.5], [0.5, 0.5]], z=[1.0, -1.0])


def test_power_config_validation():
    with pytest.raises(ConfigError):
        PowerConfig(epsilon=0)
    with pytest.raises(ConfigError):
        PowerConfig(max_converge_steps=0)
    with pytest.raises(ConfigError):
        PowerConfig(grad_steps=-1)
    with pytest.raises(ConfigError):
        PowerConfig(init='gaussian')
    assert PowerConfig(init='seeded_positive_uniform').init is PowerInit.SEEDED_POSITIVE_UNIFORM
    assert PowerConfig.from_dict(PowerConfig(grad_steps=3).to_dict()) == PowerConfig(grad_steps=3)


def test_initial_vector_positive():
    cfg = PowerConfig(init=PowerInit.SEEDED_POSITIVE_UNIFORM, seed=5)
    z = initial_vector(50, cfg)
    assert np.all(z > 0)
    np.testing.assert_array_equal(z, initial_vector(50, cfg))
    np.testing.assert_array_equal(np.ones(3), initial_vector(3))


def test_power_method_eigenpair_invariants():
    rng = make_rng(0)
    started = time.time()
    for _ in range(1000):
        n = int(rng.integers(2, 65))
        a = random_adjacency(rng, n)
        eig = power_method(a)
        assert eig.converged
        assert abs(np.linalg.norm(eig.alpha) - 1) < 1e-12
        assert np.all(eig.alpha > 0)
        assert np.linalg.norm(a @ eig.alpha - eig.eigenvalue * eig.alpha) <= \
            1e-10 * abs(eig.eigenvalue)
        assert abs(eig.eigenvalue - 1) <= 1e-8
    assert time.time() - started < 10


def test_power_method_matches_numpy():
    rng = make_rng(1)
    for n in range(2, 10):
        a = rng.uniform(0.1, 2.0, size=(n, n))
        eig = power_method(a, PowerConfig(epsilon=1e-13, max_converge_steps=5000))
        vals, vecs = np.linalg.eig(a)
        top = np.argmax(vals.real)
        ref = np.abs(vecs[:, top].real)
        np.testing.assert_allclose(ref / np.linalg.norm(ref), eig.alpha, atol=1e-10)
        assert abs(vals[top].real - eig.eigenvalue) < 1e-10


@pytest.mark.parametrize('c', [0.5, 2.0])
def test_power_method_scale_covariance(c):
    rng = make_rng(2)
    a = random_adjacency(rng, 6)
    eig = power_method(a)
    scaled = power_method(c * a)
    np.testing.assert_allclose(eig.alpha, scaled.alpha, atol=1e-12)
    assert abs(c * eig.eigenvalue - scaled.eigenvalue) < 1e-12


def test_power_method_deterministic():
    a = random_adjacency(make_rng(3), 12)
    first, second = power_method(a), power_method(a)
    assert first.alpha.tobytes() == second.alpha.tobytes()
    assert first.eigenvalue == second.eigenvalue
    assert first.steps_taken == second.steps_taken


def test_power_method_error_decays_geometrically():
    ratio = 0.6
    a, reference = gap_adjacency(make_rng(4), 5, ratio)
    errors = []
    for steps in range(8, 22):
        with pytest.warns(UserWarning):
            eig = power_method(a, PowerConfig(epsilon=1e-300, max_converge_steps=steps))
        assert not eig.converged
        errors.append(np.linalg.norm(eig.alpha - reference))
    ratios = np.array(errors[1:]) / np.array(errors[:-1])
    np.testing.assert_allclose(ratios, ratio, rtol=0.05)


def test_power_method_unconverged_flag():
    a = random_adjacency(make_rng(5), 8)
    with pytest.warns(UserWarning):
        eig = power_method(a, PowerConfig(epsilon=1e-300, max_converge_steps=3))
    assert not eig.converged and eig.steps_taken == 3


def test_converge_stats():
    hist = converge_stats([np.full((2, 2), 0.5)])
    assert isinstance(hist, ConvergeHistogram)
    assert hist.counts[0] == 1 and hist.total == 1
    assert hist.median == 1

    rng = make_rng(6)
    batch = [random_adjacency(rng, 10) for _ in range(1000)]
    hist = converge_stats(batch)
    assert hist.total == 1000
    assert sum(c for e, c in zip(hist.edges, hist.counts) if e < 200) > 500
    assert hist.to_dict()['total'] == 1000

    with pytest.raises(EmptySequenceError):
        converge_stats([])


def test_converge_stats_threads(monkeypatch):
    rng = make_rng(7)
    batch = [random_adjacency(rng, 6) for _ in range(20)]
    serial = converge_stats(batch)
    monkeypatch.setenv('EIGENCENT_THREADS', '3')
    assert converge_stats(batch).steps == serial.steps
