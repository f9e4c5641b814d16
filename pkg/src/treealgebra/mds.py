"""Classical (Torgerson) multidimensional scaling.

Double-centers the squared distance matrix and eigendecomposes the
resulting Gram matrix with cyclic Jacobi rotations; coordinates come from
the top eigenpairs, with negative eigenvalues truncated to zero. Meant for
the small matrices produced by pairwise tree distances, not large-scale
embedding work.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

__all__ = ["jacobi_eigh", "classical_mds", "mds_stress", "pairwise_distances"]


def jacobi_eigh(
    a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm falls below ``tol`` times
    the matrix norm. Returns (eigenvalues, eigenvectors as columns), both in
    descending eigenvalue order.
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    scale = float(np.linalg.norm(a))
    if scale == 0.0 or n == 1:
        evals = np.diag(a).copy()
        return evals, v
    skip = tol * scale / (n * n)
    for _ in range(max_sweeps):
        off = float(np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    evals = np.diag(a).copy()
    order = np.argsort(evals)[::-1]
    return evals[order], v[:, order]


def _check_distance_matrix(dist: np.ndarray) -> np.ndarray:
    d = np.asarray(dist, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise DomainError("distance matrix must be square")
    if np.any(d < -1e-12):
        raise DomainError("distance matrix has negative entries")
    if np.max(np.abs(d - d.T)) > 1e-9:
        raise DomainError("distance matrix is not symmetric")
    if np.max(np.abs(np.diag(d))) > 1e-9:
        raise DomainError("distance matrix has a nonzero diagonal")
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    return d


def classical_mds(dist: np.ndarray, dims: int) -> np.ndarray:
    """Coordinates whose Euclidean distances best approximate ``dist``.

    Returns an (n, dims) matrix. When fewer than ``dims`` eigenvalues are
    positive the trailing columns are zero (the effective dimension is the
    number of nonzero columns); the embedding is unique only up to an
    orthogonal transform, so compare recovered distances rather than raw
    coordinates.
    """
    d = _check_distance_matrix(dist)
    n = d.shape[0]
    if not 1 <= dims <= n:
        raise DomainError(f"dims must be in [1, {n}]")
    j = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * j @ (d * d) @ j
    evals, evecs = jacobi_eigh(b)
    coords = np.zeros((n, dims))
    k = min(dims, int(np.sum(evals > 0.0)))
    if k:
        coords[:, :k] = evecs[:, :k] * np.sqrt(evals[:k])
    return coords


def pairwise_distances(coords: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix of a coordinate configuration."""
    c = np.asarray(coords, dtype=float)
    diff = c[:, None, :] - c[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def mds_stress(dist: np.ndarray, coords: np.ndarray) -> float:
    """Sum of squared distance residuals over the sum of squared distances."""
    d = np.asarray(dist, dtype=float)
    rec = pairwise_distances(coords)
    iu = np.triu_indices(d.shape[0], k=1)
    denom = float((d[iu] ** 2).sum())
    if denom == 0.0:
        return 0.0
    return float(((d[iu] - rec[iu]) ** 2).sum() / denom)
