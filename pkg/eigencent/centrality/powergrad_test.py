# Copyright 2026 The eigencent Authors | http://www.eclipse.org/legal/epl-v20.html
import numpy as np
import pytest

from .eigencentrality import PowerConfig, power_method
from .eigencentrality_test import gap_adjacency, random_adjacency
from .errors import ContractError
from .numerics import finite_diff_grad, finite_diff_jacobian, make_rng, relative_error
from .powergrad import (
    BackwardState, analytic_grad_a, decay_fit, grad_wrt_init_z, jac_wrt_a_apply, jac_wrt_alpha,
    series_terms, spectral_diag, unrolled_grad_a
)


def perron_reference(a):
    """Unit, positive Perron vector from a dense eigensolve."""
    vals, vecs = np.linalg.eig(a)
    v = np.abs(vecs[:, np.argmax(vals.real)].real)
    return v / np.linalg.norm(v)


def perron_value(a):
    return float(np.max(np.linalg.eigvals(a).real))


def second_ratio(a):
    mags = np.sort(np.abs(np.linalg.eigvals(a)))[::-1]
    return mags[1] / mags[0]


def symmetric_adjacency(rng, ratio, minor=0.2):
    """8x8 symmetric positive doubly stochastic matrix with spectrum {1, ratio, minor, 0}."""
    h = np.array([[1.0]])
    for _ in range(3):
        h = np.block([[h, h], [h, -h]])
    h /= np.sqrt(8)
    a = np.full((8, 8), 1 / 8) + ratio * np.outer(h[1], h[1]) + minor * np.outer(h[2], h[2])
    perm = rng.permutation(8)
    return a[np.ix_(perm, perm)]


def test_backward_state():
    with pytest.raises(ContractError):
        BackwardState(np.ones(2), np.eye(2), trunc_k=-1)
    state = BackwardState(np.array([1.0, 2.0]), 0.5 * np.eye(2))
    np.testing.assert_array_equal([1.0, 2.0], state.running_cotangent)
    np.testing.assert_array_equal([0.5, 1.0], state.advance())
    np.testing.assert_array_equal([1.0, 2.0], state.gamma)


def test_jac_wrt_alpha_uniform():
    a = np.full((3, 3), 1 / 3)
    np.testing.assert_allclose(np.zeros((3, 3)), jac_wrt_alpha(a, power_method(a)), atol=1e-15)


def test_jac_wrt_alpha_matches_normalized_step():
    a = np.array([[0.9, 0.2], [0.1, 0.8]])
    eig = power_method(a, PowerConfig(epsilon=1e-14, max_converge_steps=1000))

    def step(v):
        y = a @ v
        return y / np.linalg.norm(y)

    expected = finite_diff_jacobian(step, eig.alpha)
    assert relative_error(jac_wrt_alpha(a, eig), expected) < 1e-6


@pytest.mark.parametrize('build', ['gap', 'symmetric', 'closed_form'])
def test_jac_wrt_alpha_spectral_radius(build):
    rng = make_rng(1)
    if build == 'gap':
        a, _ = gap_adjacency(rng, 6, 0.45)
    elif build == 'symmetric':
        a = symmetric_adjacency(rng, 0.6)
    else:
        a = np.array([[0.9, 0.2], [0.1, 0.8]])
    j = jac_wrt_alpha(a, power_method(a))
    radius = np.max(np.abs(np.linalg.eigvals(j)))
    assert abs(radius - spectral_diag(a).lambda2_over_lambda1) < 1e-4
    assert abs(radius - second_ratio(a)) < 1e-4


def test_jac_wrt_a_apply():
    a = np.array([[0.9, 0.2], [0.1, 0.8]])
    eig = power_method(a)
    np.testing.assert_allclose(np.zeros((2, 2)), jac_wrt_a_apply(eig.alpha, eig), atol=1e-15)
    ortho = np.array([-eig.alpha[1], eig.alpha[0]])
    np.testing.assert_allclose(np.outer(ortho, eig.alpha) / eig.eigenvalue,
                               jac_wrt_a_apply(ortho, eig), atol=1e-15)
    with pytest.raises(ContractError):
        jac_wrt_a_apply(np.ones(3), eig)


def test_jac_wrt_a_apply_finite_diff():
    rng = make_rng(2)
    a = random_adjacency(rng, 3)
    eig = power_method(a, PowerConfig(epsilon=1e-14, max_converge_steps=1000))
    cot = rng.normal(size=3)

    def last_step(m):
        y = m @ eig.alpha
        return float(cot @ y / np.linalg.norm(y))

    expected = finite_diff_grad(last_step, a.copy())
    assert relative_error(jac_wrt_a_apply(cot, eig), expected) < 1e-6
    np.testing.assert_allclose(jac_wrt_a_apply(cot, eig), next(series_terms(a, eig, cot)),
                               atol=1e-15)


def test_analytic_grad_a_trivial():
    a = random_adjacency(make_rng(3), 4)
    eig = power_method(a)
    assert not np.any(analytic_grad_a(a, eig, np.zeros(4)))
    uniform = np.full((4, 4), 0.25)
    eig = power_method(uniform)
    gamma = make_rng(4).normal(size=4)
    np.testing.assert_allclose(jac_wrt_a_apply(gamma, eig), analytic_grad_a(uniform, eig, gamma),
                               atol=1e-15)


def test_analytic_grad_a_truncation_depth():
    rng = make_rng(5)
    a = random_adjacency(rng, 4, scale=0.5)
    gamma = rng.normal(size=4)
    eig = power_method(a, PowerConfig(epsilon=1e-13, max_converge_steps=1000))
    shallow = analytic_grad_a(a, eig, gamma, trunc_k=20)
    deep = analytic_grad_a(a, eig, gamma, trunc_k=200, tol=0)
    assert np.max(np.abs(shallow - deep)) <= 1e-9
    expected = finite_diff_grad(lambda m: float(perron_reference(m).sum()), a.copy())
    assert relative_error(analytic_grad_a(a, eig, np.ones(4)), expected) < 1e-5
    expected = finite_diff_grad(lambda m: float(gamma @ perron_reference(m)), a.copy())
    assert relative_error(shallow, expected) < 1e-5
    assert relative_error(deep, expected) < 1e-5


def test_analytic_grad_a_finite_diff_sweep():
    rng = make_rng(6)
    cfg = PowerConfig(epsilon=1e-12, max_converge_steps=5000)
    checked = 0
    while checked < 100:
        n = int(rng.integers(2, 9))
        if checked % 2:
            a = random_adjacency(rng, n)
        else:
            a = rng.uniform(0.05, 1.0, size=(n, n))
        if second_ratio(a) > 0.95:
            continue
        gamma = rng.normal(size=n)
        got = analytic_grad_a(a, power_method(a, cfg), gamma, trunc_k=500)
        expected = finite_diff_grad(lambda m: float(gamma @ perron_reference(m)), a.copy())
        assert relative_error(got, expected) < 1e-5, (checked, n)
        checked += 1


def test_series_partial_sums_are_cauchy():
    rng = make_rng(7)
    for a in [gap_adjacency(rng, 6, 0.5)[0], symmetric_adjacency(rng, 0.7)]:
        ratio = second_ratio(a)
        terms = list(series_terms(a, power_method(a), rng.normal(size=a.shape[0]), trunc_k=40))
        norms = [np.linalg.norm(t) for t in terms]
        for k in range(2, len(norms) - 1):
            assert norms[k + 1] <= norms[k] * (ratio + 0.05) + 1e-300


def test_unrolled_grad_a():
    rng = make_rng(8)
    cfg = PowerConfig(grad_steps=20)
    for _ in range(10):
        a = random_adjacency(rng, 5)
        gamma = rng.normal(size=5)
        unrolled = unrolled_grad_a(a, cfg, gamma)
        assert unrolled.converged
        analytic = analytic_grad_a(a, power_method(a), gamma, trunc_k=20)
        assert np.max(np.abs(unrolled.grad - analytic)) <= 1e-8

    a = random_adjacency(rng, 5)
    assert not np.any(unrolled_grad_a(a, cfg, np.zeros(5)).grad)
    gamma = rng.normal(size=5)
    single = unrolled_grad_a(a, PowerConfig(grad_steps=0), gamma)
    np.testing.assert_allclose(jac_wrt_a_apply(gamma, power_method(a)), single.grad, atol=1e-8)


def test_unrolled_grad_a_unconverged_flag():
    a = random_adjacency(make_rng(9), 5)
    cfg = PowerConfig(epsilon=1e-300, max_converge_steps=2)
    with pytest.warns(UserWarning):
        result = unrolled_grad_a(a, cfg, np.ones(5))
    assert not result.converged


def test_grad_wrt_init_z_vanishes():
    rng = make_rng(10)
    checked = 0
    while checked < 5:
        a = rng.uniform(0.05, 1.0, size=(6, 6))
        if 1 - second_ratio(a) < 0.1:
            continue
        grad_z, decay = grad_wrt_init_z(a, PowerConfig(), rng.normal(size=6), n_steps=200)
        assert np.linalg.norm(grad_z) <= 1e-8
        assert decay.shape == (201,)
        checked += 1


def test_grad_wrt_init_z_uniform():
    uniform = np.full((4, 4), 0.25)
    grad_z, decay = grad_wrt_init_z(uniform, PowerConfig(), np.array([1.0, -2.0, 0.5, 3.0]))
    assert decay[1] < 1e-14
    assert np.linalg.norm(grad_z) < 1e-14


@pytest.mark.parametrize('build', ['gap', 'symmetric'])
def test_grad_wrt_init_z_decay_rate(build):
    rng = make_rng(11)
    if build == 'gap':
        a, _ = gap_adjacency(rng, 6, 0.7)
    else:
        a = symmetric_adjacency(rng, 0.8)
    _, decay = grad_wrt_init_z(a, PowerConfig(), rng.normal(size=a.shape[0]), n_steps=60)
    assert np.all(np.diff(decay[1:]) <= 1e-12)
    ratio, r2 = decay_fit(decay)
    expected = spectral_diag(a).lambda2_over_lambda1
    assert abs(ratio - expected) <= 0.1 * expected
    assert r2 >= 0.99


def reversible_adjacency(rng, n):
    """Column stochastic B D^-1 with B symmetric positive, so the spectrum is real."""
    b = rng.uniform(0.05, 1.0, size=(n, n))
    b = b + b.T
    return b / b.sum(axis=0)


def test_grad_wrt_init_z_decay_rate_sweep():
    rng = make_rng(13)
    for trial in range(30):
        kind = trial % 3
        if kind == 0:
            a, _ = gap_adjacency(rng, int(rng.integers(2, 9)), rng.uniform(0.2, 0.9))
        elif kind == 1:
            ratio = rng.uniform(0.3, 0.9)
            minor = rng.uniform(0.0, 0.8) * min(ratio, 1 - ratio)
            a = symmetric_adjacency(rng, ratio, minor=minor)
        else:
            a = reversible_adjacency(rng, int(rng.integers(3, 9)))
        _, decay = grad_wrt_init_z(a, PowerConfig(), rng.normal(size=a.shape[0]), n_steps=60)
        ratio, r2 = decay_fit(decay)
        expected = spectral_diag(a).lambda2_over_lambda1
        assert abs(ratio - expected) <= 0.1 * expected, (trial, ratio, expected)
        assert r2 >= 0.99, (trial, r2)


def test_decay_fit():
    ratio, r2 = decay_fit(3.0 * 0.5 ** np.arange(30), skip=0)
    assert abs(ratio - 0.5) < 1e-12 and abs(r2 - 1) < 1e-12
    assert decay_fit([1.0, 0.0, 0.0]) == (0.0, 1.0)


def test_spectral_diag():
    rng = make_rng(12)
    a = random_adjacency(rng, 5)
    diag = spectral_diag(a)
    np.testing.assert_allclose(np.ones(5) / diag.alpha.sum(), diag.left_eigvec_w, atol=1e-10)
    assert abs(diag.left_eigvec_w @ diag.alpha - 1) < 1e-12
    assert 0 <= diag.lambda2_over_lambda1 < 1
    # an all-positive start has a positive component along the Perron vector
    assert diag.coefficients[0].real > 0
    z = rng.uniform(0.1, 1.0, size=5)
    assert spectral_diag(a, z).coefficients[0].real > 0

    closed = spectral_diag(np.array([[0.9, 0.2], [0.1, 0.8]]))
    assert abs(closed.lambda2_over_lambda1 - 0.7) < 1e-8
    assert spectral_diag(np.full((3, 3), 1 / 3)).lambda2_over_lambda1 < 1e-12
    with pytest.raises(ContractError):
        spectral_diag(random_adjacency(rng, 17))


def test_eigenvalue_grad_finite_diff():
    m = make_rng(13).uniform(0.1, 1.0, size=(3, 3))
    expected = finite_diff_grad(perron_value, m.copy())
    assert relative_error(spectral_diag(m).eigenvalue_grad(), expected) < 1e-6
