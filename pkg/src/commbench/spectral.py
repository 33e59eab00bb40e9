"""Spectral community-count selectors and embeddings.

Two selectors are provided: the deformed-Laplacian (Bethe Hessian) rule that
counts strictly negative eigenvalues of H(r) = (r^2 - 1) I - r A + D with
r = sqrt(mean excess degree), and the non-backtracking rule that counts real
eigenvalues of the 2n x 2n companion matrix [[A, I - D], [I, 0]] lying outside
the bulk radius sqrt(lambda_1).
"""
from __future__ import annotations

import numpy as np
from scipy.sparse import identity as sp_identity
from scipy.sparse import bmat, diags
from scipy.sparse.linalg import ArpackNoConvergence, eigs, eigsh

from .graph import Graph

__all__ = [
    "EigensolverError",
    "bethe_hessian_select",
    "nonbacktracking_select",
    "adjacency_factors",
    "DENSE_LIMIT",
    "REAL_EIG_EPS",
]

# dense solvers below this node count, restarted iterative solvers above
DENSE_LIMIT = 500
# tolerance for classifying companion-matrix eigenvalues as real
REAL_EIG_EPS = 1e-6
# iterative-solver convergence tolerance
ITER_TOL = 1e-8


class EigensolverError(RuntimeError):
    """Eigenvalue computation failed to converge."""


def _mean_excess_degree(graph: Graph) -> float:
    d = graph.degrees.astype(np.float64)
    total = d.sum()
    if total <= 0:
        return 0.0
    return float((d**2).sum() / total - 1.0)


def bethe_hessian_select(graph: Graph) -> tuple[int, np.ndarray]:
    """Community count and embedding from the Bethe Hessian spectrum.

    k = max(1, number of strictly negative eigenvalues); the embedding columns
    are the eigenvectors of the k most negative eigenvalues.  Degenerate mean
    excess degree (<= 0) falls back to k = 1 with a constant embedding.
    """
    if graph.n < 2:
        return 1, np.ones((graph.n, 1))
    c_bar = _mean_excess_degree(graph)
    if c_bar <= 0:
        return 1, np.ones((graph.n, 1)) / np.sqrt(graph.n)
    r = np.sqrt(c_bar)
    d = graph.degrees.astype(np.float64)
    if graph.n <= DENSE_LIMIT:
        h = (r**2 - 1.0) * np.eye(graph.n) - r * graph.dense_adjacency() + np.diag(d)
        vals, vecs = np.linalg.eigh(h)
    else:
        a = graph.sparse_adjacency()
        h = (r**2 - 1.0) * sp_identity(graph.n, format="csr") - r * a + diags(d)
        want = min(graph.n - 1, _spectral_cap(graph) + 1)
        try:
            vals, vecs = eigsh(h, k=want, which="SA", tol=ITER_TOL)
        except ArpackNoConvergence as exc:
            raise EigensolverError("Bethe Hessian eigensolver did not converge") from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    tol = 1e-8 * max(1.0, float(np.abs(vals).max()))
    n_neg = int(np.sum(vals < -tol))
    k = max(1, n_neg)
    k = min(k, graph.n)
    embedding = vecs[:, :k]
    return k, embedding


def _companion_matrix_dense(graph: Graph) -> np.ndarray:
    n = graph.n
    a = graph.dense_adjacency()
    top = np.hstack([a, np.eye(n) - np.diag(graph.degrees.astype(np.float64))])
    bottom = np.hstack([np.eye(n), np.zeros((n, n))])
    return np.vstack([top, bottom])


def nonbacktracking_select(graph: Graph) -> tuple[int, np.ndarray]:
    """Community count and embedding from the non-backtracking spectrum.

    Real eigenvalues of the companion matrix above the bulk radius
    sqrt(lambda_1) indicate structure; k = max(1, their count).  The embedding
    takes the first-n coordinates of the matching eigenvectors.
    """
    if graph.n < 2:
        return 1, np.ones((graph.n, 1))
    n = graph.n
    if n <= DENSE_LIMIT:
        vals, vecs = np.linalg.eig(_companion_matrix_dense(graph))
    else:
        a = graph.sparse_adjacency()
        d = diags(graph.degrees.astype(np.float64))
        eye = sp_identity(n, format="csr")
        comp = bmat([[a, eye - d], [eye, None]], format="csr")
        want = min(2 * n - 2, _spectral_cap(graph) + 2)
        try:
            vals, vecs = eigs(comp, k=want, which="LR", tol=ITER_TOL)
        except ArpackNoConvergence as exc:
            raise EigensolverError("non-backtracking eigensolver did not converge") from exc
    real_mask = np.abs(vals.imag) <= REAL_EIG_EPS
    real_vals = vals.real[real_mask]
    if real_vals.size == 0:
        return 1, np.ones((n, 1)) / np.sqrt(n)
    lam1 = float(real_vals.max())
    threshold = np.sqrt(max(lam1, 0.0)) + REAL_EIG_EPS
    outside = real_mask & (vals.real > threshold)
    k = max(1, int(outside.sum()))
    k = min(k, n)
    if outside.sum() == 0:
        # fall back to the leading real eigenvector
        idx = [int(np.argmax(np.where(real_mask, vals.real, -np.inf)))]
    else:
        cand = np.flatnonzero(outside)
        idx = list(cand[np.argsort(-vals.real[cand])][:k])
    embedding = np.real(vecs[:n, idx])
    return k, embedding


def _spectral_cap(graph: Graph) -> int:
    """Guard cap on the inferred community count: 4 * ceil(sqrt(M))."""
    return int(4 * np.ceil(np.sqrt(max(graph.m, 1))))


def adjacency_factors(graph: Graph, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-k eigenpairs (by algebraic value) of the adjacency matrix.

    Returns (values, vectors) with values descending; used by the low-rank
    edge scorer.
    """
    if k < 1 or k > graph.n:
        raise ValueError(f"rank k={k} outside 1..{graph.n}")
    if graph.n <= DENSE_LIMIT or k >= graph.n - 1:
        vals, vecs = np.linalg.eigh(graph.dense_adjacency())
        order = np.argsort(vals)[::-1][:k]
        return vals[order], vecs[:, order]
    try:
        vals, vecs = eigsh(graph.sparse_adjacency(), k=k, which="LA", tol=ITER_TOL)
    except ArpackNoConvergence as exc:
        raise EigensolverError("adjacency eigensolver did not converge") from exc
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]
