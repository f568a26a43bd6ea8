"""
Structural and spectral computations on a single directed weighted layer.

All functions take a square nonnegative matrix (dense or scipy sparse) whose
entry ``[i, j]`` is the link weight from ``i`` to ``j``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import csgraph

Layer = Union[np.ndarray, sparse.spmatrix]

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_ITERATIONS = 100000
DENSE_BLOCK_LIMIT = 400


class ConvergenceError(ArithmeticError):
    estimate: float
    residual: float
    iterations: int

    def __init__(self, what: str, estimate: float, residual: float, iterations: int):
        super().__init__(
            f"{what} did not converge after {iterations} iterations "
            + f"(last estimate {estimate:.6g}, residual {residual:.3g})"
        )
        self.estimate = estimate
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class LayerMetrics:
    avg_degree: float
    in_degree: np.ndarray
    out_degree: np.ndarray
    in_strength: np.ndarray


@dataclass(frozen=True)
class PageRankResult:
    scores: np.ndarray
    alpha: float
    eigenvalue: float
    iterations: int
    degenerate: bool = False

    @property
    def normalized(self) -> np.ndarray:
        """Scores rescaled to sum to the node count."""
        total = self.scores.sum()
        if total == 0:
            return np.ones_like(self.scores)
        return self.scores * (len(self.scores) / total)


def _csr(layer: Layer) -> sparse.csr_matrix:
    m = sparse.csr_matrix(layer, dtype=float)
    m.eliminate_zeros()
    return m


def degrees_and_strengths(layer: Layer) -> LayerMetrics:
    m = _csr(layer)
    n = m.shape[0]
    b = m.copy()
    b.data[:] = 1.0
    in_degree = np.asarray(b.sum(axis=0)).ravel()
    out_degree = np.asarray(b.sum(axis=1)).ravel()
    in_strength = np.asarray(m.sum(axis=0)).ravel()
    avg_degree = m.nnz / n if n else 0.0
    return LayerMetrics(avg_degree, in_degree, out_degree, in_strength)


def largest_scc_fraction(layer: Layer) -> float:
    m = _csr(layer)
    n = m.shape[0]
    if n == 0:
        raise ValueError("largest SCC of a layer without nodes is undefined")
    _, labels = csgraph.connected_components(m, directed=True, connection="strong")
    return float(np.bincount(labels).max() / n)


def _power_iteration(block: sparse.csr_matrix, tol: float, max_iter: int) -> float:
    """Perron root of an irreducible nonnegative block by shifted power iteration."""
    row_norm = float(np.abs(block).sum(axis=1).max())
    col_norm = float(np.abs(block).sum(axis=0).max())
    shift = max(tol, min(row_norm, col_norm))
    shifted = (block + shift * sparse.identity(block.shape[0], format="csr")).tocsr()

    x = np.full(block.shape[0], 1.0 / np.sqrt(block.shape[0]))
    y = shifted @ x
    estimate = float(x @ y)
    residual = np.inf
    for _ in range(max_iter):
        x = y / np.linalg.norm(y)
        y = shifted @ x
        # Rayleigh quotient, x has unit length
        estimate = float(x @ y)
        residual = float(np.linalg.norm(y - estimate * x))
        if residual <= tol * estimate:
            return max(estimate - shift, 0.0)
    raise ConvergenceError(
        "leading eigenvalue", estimate - shift, residual / estimate, max_iter
    )


def _block_eigenvalue(
    block: sparse.csr_matrix, tol: float, max_iter: int, dense_limit: int
) -> float:
    if block.shape[0] <= dense_limit:
        return float(np.abs(linalg.eigvals(block.toarray())).max())
    return _power_iteration(block, tol, max_iter)


def leading_eigenvalue(
    layer: Layer,
    tol: float = DEFAULT_TOLERANCE,
    max_iter: int = DEFAULT_MAX_ITERATIONS,
    dense_limit: int = DENSE_BLOCK_LIMIT,
) -> float:
    """
    Spectral radius of a nonnegative matrix.

    The spectral radius is the largest Perron root among the strongly connected
    blocks of the matrix. Blocks with at most `dense_limit` nodes are solved
    with a dense eigenvalue routine. Larger blocks are irreducible, so power
    iteration on ``block + shift * I`` converges; it stops once the residual
    ``|Bx - mu x|`` drops below ``tol * mu``. Layers without cycles have
    spectral radius 0.
    """
    m = _csr(layer)
    n = m.shape[0]
    if n == 0 or m.nnz == 0:
        return 0.0
    if m.data.min() < 0:
        raise ValueError("leading eigenvalue requires a nonnegative matrix")
    ncomp, labels = csgraph.connected_components(m, directed=True, connection="strong")
    diagonal = m.diagonal()
    sizes = np.bincount(labels, minlength=ncomp)
    lam = 0.0
    for comp in range(ncomp):
        members = np.flatnonzero(labels == comp)
        if sizes[comp] == 1:
            lam = max(lam, float(diagonal[members[0]]))
            continue
        block = m[members][:, members]
        lam = max(lam, _block_eigenvalue(block, tol, max_iter, dense_limit))
    return lam


def pagerank(
    weights: Layer,
    alpha_factor: float = 0.85,
    tol: float = DEFAULT_TOLERANCE,
    max_iter: int = DEFAULT_MAX_ITERATIONS,
    out_degree: Optional[np.ndarray] = None,
) -> PageRankResult:
    """
    Fixed point of ``PR_i = alpha * sum_j W_ij PR_j / k_out_j + (1 - alpha)``.

    `alpha` is ``alpha_factor / lambda`` with lambda the leading eigenvalue of
    `weights`. `k_out_j` is the number of nonzero entries in row `j` of `weights`
    unless `out_degree` is given. Terms with ``k_out_j == 0`` contribute
    nothing. The iteration starts from ``PR = 1`` and stops once the max-norm
    change drops below `tol`.

    Layers with ``lambda < tol`` are degenerate: every score is 1 and the
    result is flagged.
    """
    if not 0 < alpha_factor < 1:
        raise ValueError(f"alpha factor {alpha_factor} outside (0, 1)")
    w = _csr(weights)
    n = w.shape[0]
    lam = leading_eigenvalue(w, tol=tol, max_iter=max_iter)
    if lam < tol:
        return PageRankResult(np.ones(n), 0.0, lam, 0, degenerate=True)

    if out_degree is None:
        out_degree = np.diff(w.indptr)
    k_out = np.asarray(out_degree, dtype=float)
    inv_k = np.divide(1.0, k_out, out=np.zeros(n), where=k_out > 0)
    kernel = (w @ sparse.diags(inv_k)).tocsr()

    alpha = alpha_factor / lam
    pr = np.ones(n)
    change = np.inf
    for iteration in range(1, max_iter + 1):
        updated = alpha * (kernel @ pr) + (1.0 - alpha)
        change = float(np.abs(updated - pr).max()) if n else 0.0
        pr = updated
        if change < tol:
            return PageRankResult(pr, alpha, lam, iteration)
    raise ConvergenceError("PageRank", float(pr.max()) if n else 0.0, change, max_iter)
