"""Dense linear algebra helpers shared by the solvers and instance builders.

Vectors are 1-D float64 arrays. A "matrix of vectors" is a 2-D array whose
*columns* are the vectors (``d x n``), matching how iterate and gradient
histories are stacked elsewhere in the package.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DimensionError",
    "ConvergenceError",
    "as_vector",
    "as_columns",
    "gram",
    "orthonormal_basis",
    "orthonormal_complement",
    "span_residual",
]

RANK_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when array shapes do not agree."""


class ConvergenceError(RuntimeError):
    """Raised when an inner solver fails to reach its stated accuracy."""


def as_vector(x, dim=None) -> np.ndarray:
    v = np.array(x, dtype=float).reshape(-1)
    if dim is not None and v.shape[0] != dim:
        raise DimensionError(f"expected a vector of length {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def as_columns(A, dim=None) -> np.ndarray:
    """Coerce ``A`` to a ``d x n`` float array (a sequence of vectors becomes columns)."""
    if isinstance(A, np.ndarray) and A.ndim == 2:
        M = A.astype(float, copy=False)
    else:
        cols = [np.asarray(a, dtype=float).reshape(-1) for a in A]
        if not cols:
            M = np.zeros((0 if dim is None else dim, 0))
        else:
            lengths = {c.shape[0] for c in cols}
            if len(lengths) != 1:
                raise DimensionError("column dimensions disagree")
            M = np.stack(cols, axis=1)
    if dim is not None and M.shape[0] != dim:
        raise DimensionError(f"expected columns of length {dim}, got {M.shape[0]}")
    return M


def gram(A, B=None) -> np.ndarray:
    """Matrix of pairwise inner products ``G[i, j] = <A[:, i], B[:, j]>``."""
    A = as_columns(A)
    B = A if B is None else as_columns(B)
    if A.shape[0] != B.shape[0]:
        raise DimensionError(
            f"columns live in different dimensions ({A.shape[0]} vs {B.shape[0]})"
        )
    return A.T @ B


def orthonormal_basis(G, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the span of the columns of ``G``.

    Modified Gram-Schmidt with one reorthogonalisation pass; a column is
    dropped when its residual falls below ``tol * (1 + ||column||)``.
    """
    G = as_columns(G)
    d = G.shape[0]
    basis: list[np.ndarray] = []
    for k in range(G.shape[1]):
        v = G[:, k].copy()
        nrm0 = np.linalg.norm(v)
        for _ in range(2):
            for q in basis:
                v -= (q @ v) * q
        nrm = np.linalg.norm(v)
        if nrm >= tol * (1.0 + nrm0):
            basis.append(v / nrm)
    if not basis:
        return np.zeros((d, 0))
    return np.stack(basis, axis=1)


def orthonormal_complement(G, k: int, d_ambient: int | None = None, tol: float = RANK_TOL) -> np.ndarray:
    """Return ``k`` orthonormal columns orthogonal to every column of ``G``.

    Candidates are the standard basis vectors taken in index order; each is
    orthogonalised against the span of ``G`` and the vectors already accepted,
    and skipped if the residual norm is below ``tol``. The result is therefore
    a deterministic function of ``G``.
    """
    G = as_columns(G, d_ambient)
    d = G.shape[0] if d_ambient is None else d_ambient
    if k < 0:
        raise ValueError("k must be nonnegative")
    Q = orthonormal_basis(G, tol)
    basis = [Q[:, i] for i in range(Q.shape[1])]
    if d < len(basis) + k:
        raise DimensionError(
            f"ambient dimension {d} too small for rank {len(basis)} plus {k} new directions"
        )
    out: list[np.ndarray] = []
    for i in range(d):
        if len(out) == k:
            break
        v = np.zeros(d)
        v[i] = 1.0
        for _ in range(2):
            for q in basis:
                v -= (q @ v) * q
        nrm = np.linalg.norm(v)
        if nrm < tol * 2.0:
            continue
        v /= nrm
        basis.append(v)
        out.append(v)
    if len(out) < k:
        raise DimensionError("could not complete the orthonormal complement")
    if k == 0:
        return np.zeros((d, 0))
    return np.stack(out, axis=1)


def span_residual(v, G) -> float:
    """Norm of the component of ``v`` orthogonal to the span of the columns of ``G``."""
    v = as_vector(v)
    Q = orthonormal_basis(as_columns(G, v.shape[0]))
    r = v - Q @ (Q.T @ v)
    r = r - Q @ (Q.T @ r)
    return float(np.linalg.norm(r))
