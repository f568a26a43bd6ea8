from __future__ import annotations

import itertools

import numpy as np
import pytest

from scipy import sparse

from traderisk import graph


def _random_layer(seed: int, n: int = 7, density: float = 0.35) -> np.ndarray:
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.1, 2.0, size=(n, n)) * (rng.random((n, n)) < density)
    np.fill_diagonal(w, 0.0)
    return w


def _brute_force_scc_fraction(w: np.ndarray) -> float:
    n = len(w)
    reach = (w > 0) | np.eye(n, dtype=bool)
    for _ in range(n):
        reach = reach | ((reach.astype(int) @ reach.astype(int)) > 0)
    mutual = reach & reach.T
    return mutual.sum(axis=1).max() / n


def _dense_pagerank(w: np.ndarray, alpha: float) -> np.ndarray:
    n = len(w)
    k_out = (w > 0).sum(axis=1).astype(float)
    inv = np.divide(1.0, k_out, out=np.zeros(n), where=k_out > 0)
    kernel = w * inv[np.newaxis, :]
    return np.linalg.solve(np.eye(n) - alpha * kernel, (1 - alpha) * np.ones(n))


def test_degrees_and_strengths():
    w = np.array([[0.0, 2.0, 1.0], [0.0, 0.0, 3.0], [0.0, 0.0, 0.0]])
    metrics = graph.degrees_and_strengths(sparse.csr_matrix(w))
    assert metrics.avg_degree == 1.0
    assert list(metrics.in_degree) == [0, 1, 2]
    assert list(metrics.out_degree) == [2, 1, 0]
    assert list(metrics.in_strength) == [0.0, 2.0, 4.0]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_largest_scc_fraction_all_small_graphs(n):
    slots = [(i, j) for i in range(n) for j in range(n) if i != j]
    for links in itertools.product([0.0, 1.0], repeat=len(slots)):
        w = np.zeros((n, n))
        for (i, j), link in zip(slots, links):
            w[i, j] = link
        assert graph.largest_scc_fraction(w) == pytest.approx(
            _brute_force_scc_fraction(w)
        ), w


def test_largest_scc_fraction_sampled_graphs():
    rng = np.random.default_rng(2012)
    for _ in range(10000):
        n = int(rng.integers(1, 6))
        w = (rng.random((n, n)) < rng.uniform(0.1, 0.9)).astype(float)
        assert graph.largest_scc_fraction(w) == pytest.approx(
            _brute_force_scc_fraction(w)
        ), w


def test_largest_scc_fraction_dag():
    w = np.triu(np.ones((4, 4)), k=1)
    assert graph.largest_scc_fraction(w) == 0.25


def test_largest_scc_fraction_no_nodes():
    with pytest.raises(ValueError):
        graph.largest_scc_fraction(np.zeros((0, 0)))


@pytest.mark.parametrize(
    "w,expected",
    [
        (np.array([[0.0, 2.0], [3.0, 0.0]]), np.sqrt(6.0)),
        (np.triu(np.ones((4, 4)), k=1), 0.0),
        (np.zeros((3, 3)), 0.0),
        (np.array([[0.5, 1.0], [0.0, 0.0]]), 0.5),
        # directed 3-cycle, periodic
        (np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]), 1.0),
    ],
)
def test_leading_eigenvalue_examples(w, expected):
    assert graph.leading_eigenvalue(w) == pytest.approx(expected, abs=1e-8)


def _random_nonnegative(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.random((n, n)) * (rng.random((n, n)) < rng.uniform(0.3, 1.0))


def test_leading_eigenvalue_dense_example():
    w = np.array(
        [
            [0.7509, 0.0928, 0.0255, 0.7165],
            [0.5832, 0.9380, 0.9239, 0.2840],
            [0.9527, 0.1096, 0.9026, 0.0783],
            [0.4969, 0.7253, 0.6908, 0.4900],
        ]
    )
    assert graph.leading_eigenvalue(w) == pytest.approx(2.081841881589613, abs=1e-8)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_leading_eigenvalue_matches_spectral_radius(n):
    rng = np.random.default_rng(n)
    for _ in range(200):
        w = _random_nonnegative(rng, n)
        expected = float(np.abs(np.linalg.eigvals(w)).max())
        assert graph.leading_eigenvalue(sparse.csr_matrix(w)) == pytest.approx(
            expected, rel=1e-8, abs=1e-8
        ), w


@pytest.mark.parametrize("n", [2, 3, 4])
def test_leading_eigenvalue_is_homogeneous(n):
    rng = np.random.default_rng(100 + n)
    for _ in range(200):
        w = _random_nonnegative(rng, n)
        c = 10.0 ** rng.uniform(-3, 3)
        lam = graph.leading_eigenvalue(w)
        assert graph.leading_eigenvalue(c * w) == pytest.approx(
            c * lam, rel=1e-10, abs=1e-300
        ), (w, c)


@pytest.mark.parametrize("seed", range(10))
def test_leading_eigenvalue_power_iteration(seed):
    w = _random_layer(seed, n=12, density=0.4)
    expected = float(np.abs(np.linalg.eigvals(w)).max())
    assert graph.leading_eigenvalue(w, dense_limit=0) == pytest.approx(
        expected, rel=1e-8, abs=1e-9
    )


def test_leading_eigenvalue_rejects_negative():
    with pytest.raises(ValueError):
        graph.leading_eigenvalue(np.array([[0.0, -1.0], [1.0, 0.0]]))


def test_leading_eigenvalue_convergence_error():
    with pytest.raises(graph.ConvergenceError) as e:
        graph.leading_eigenvalue(
            np.array([[0.0, 2.0], [3.0, 0.0]]), max_iter=1, dense_limit=0
        )
    assert e.value.iterations == 1
    assert isinstance(e.value, ArithmeticError)


@pytest.mark.parametrize("seed", range(200))
def test_pagerank_solves_linear_system(seed):
    n = 2 + seed % 19
    rng = np.random.default_rng(seed)
    w = rng.uniform(1.0, 5.0, size=(n, n)) * (rng.random((n, n)) < 0.3)
    np.fill_diagonal(w, 0.0)
    result = graph.pagerank(w, alpha_factor=0.85)
    lam = float(np.abs(np.linalg.eigvals(w)).max())
    if lam < 1e-9:
        assert result.degenerate
        assert result.scores.tolist() == [1.0] * n
        return

    alpha = 0.85 / lam
    assert not result.degenerate
    assert result.alpha == pytest.approx(alpha, rel=1e-10)
    np.testing.assert_allclose(
        result.scores, _dense_pagerank(w, alpha), rtol=1e-8, atol=1e-8
    )
    # every cycle has weight >= 1, so alpha < 1 and scores stay above 1 - alpha
    assert result.scores.min() >= 1 - result.alpha - 1e-12
    k_out = (w > 0).sum(axis=1)
    inflow = w @ np.divide(result.scores, k_out, out=np.zeros(n), where=k_out > 0)
    np.testing.assert_allclose(
        result.alpha * inflow + 1 - result.alpha, result.scores, rtol=0, atol=1e-8
    )


def test_pagerank_is_scale_invariant():
    w = _random_layer(3, n=8, density=0.4)
    base = graph.pagerank(w)
    scaled = graph.pagerank(w * 1000.0)
    np.testing.assert_allclose(base.scores, scaled.scores, rtol=1e-6, atol=1e-8)


def test_pagerank_explicit_out_degree():
    w = np.array([[0.0, 1.0], [1.0, 0.0]])
    result = graph.pagerank(w, out_degree=np.array([2.0, 2.0]))
    # PR = 0.85 * PR / 2 + 0.15
    np.testing.assert_allclose(result.scores, [0.15 / 0.575] * 2, rtol=1e-9)


def test_pagerank_degenerate_layer():
    result = graph.pagerank(np.triu(np.ones((3, 3)), k=1))
    assert result.degenerate
    assert list(result.scores) == [1.0, 1.0, 1.0]
    assert list(result.normalized) == [1.0, 1.0, 1.0]


def test_pagerank_normalized_sums_to_node_count():
    result = graph.pagerank(_random_layer(1, n=8, density=0.4))
    assert result.normalized.sum() == pytest.approx(8.0)


@pytest.mark.parametrize("alpha_factor", [0.0, 1.0, 1.5])
def test_pagerank_alpha_factor_range(alpha_factor):
    with pytest.raises(ValueError):
        graph.pagerank(np.array([[0.0, 1.0], [1.0, 0.0]]), alpha_factor=alpha_factor)
