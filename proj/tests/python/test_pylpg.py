import numpy as np
import pytest

import pylpg


def test_triangle_spectrum():
    a = np.ones((3, 3)) - np.eye(3)
    values, vectors, residuals = pylpg.spectrum(a, 3)
    np.testing.assert_allclose(values, [2, -1, -1], atol=1e-12)
    np.testing.assert_allclose(vectors.T @ vectors, np.eye(3), atol=1e-12)
    assert np.all(residuals < 1e-10)


def test_simulation_is_reproducible():
    x = pylpg.sample_latents("sphere", 100, dim=3, seed=4)
    np.testing.assert_allclose(np.linalg.norm(x, axis=1), 1.0, atol=1e-12)
    p = pylpg.edge_probabilities(x, "laplace", 1.0, 0.5)
    assert p.shape == (100, 100)
    np.testing.assert_allclose(p, p.T)
    np.testing.assert_allclose(np.diag(p), 0.5)
    a1 = pylpg.sample_adjacency(x, rho=0.5, seed=9)
    a2 = pylpg.sample_adjacency(x, rho=0.5, seed=9)
    np.testing.assert_array_equal(a1, a2)
    assert set(np.unique(a1)) <= {0.0, 1.0}


def test_constants_and_norms():
    assert pylpg.vartheta(2.0, 3, 100) == pytest.approx(2 * np.log(100) + 3 * np.log(9))
    assert pylpg.varsigma(1.0, 1000, 0.4) > 0
    x = np.array([[3.0, 4.0], [1.0, 0.0]])
    assert pylpg.two_to_inf(x) == pytest.approx(5.0)
    q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(20, 3)))
    rot = np.linalg.qr(np.random.default_rng(1).normal(size=(3, 3)))[0]
    np.testing.assert_allclose(pylpg.procrustes(q, q @ rot), rot, atol=1e-10)


def test_rank_rule_and_null():
    report = pylpg.select_rank_test([500.0, 100.0, 95.0], 50.0, 1000)
    assert report["rhat"] == 1
    assert report["admissible"] == [1]
    c = pylpg.null_critical_value(np.array([1.0]), 1.0, 0.05, 200000, 3)
    assert abs(c - 2.841459) < 0.06


def test_pair_test_and_estimate():
    x = pylpg.sample_latents("sphere", 200, seed=1)
    a = pylpg.sample_adjacency(x, rho=0.5, seed=2)
    rep = pylpg.test_pair(a, 0, 199, rank=2, draws=20000, seed=5)
    assert rep["rhat"] == 2
    assert 0 < rep["pvalue"] <= 1
    assert rep["reject"] == (rep["T"] > rep["cstar"])
    p_hat = pylpg.estimate_p(a, 200)
    np.testing.assert_allclose(p_hat, a, atol=1e-8)
    with pytest.raises(ValueError):
        pylpg.test_pair(np.ones((3, 2)), 0, 1)
