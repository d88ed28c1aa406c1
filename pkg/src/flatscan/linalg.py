"""Small dense linear algebra: one-sided Jacobi SVD and Gram-Schmidt.

The matrices handled here are tiny (basis products of flats, at most a few
dozen entries), so clarity wins over blocking or vectorised sweeps.
"""

import numpy as np

__all__ = ["jacobi_svd", "singular_values", "spectral_norm", "gram_schmidt", "orthonormal_complement"]

_JACOBI_TOL = 1e-15
_MAX_SWEEPS = 100


def jacobi_svd(M, tol=_JACOBI_TOL, max_sweeps=_MAX_SWEEPS):
    """One-sided (Hestenes) Jacobi singular value decomposition.

    Columns of a working copy of ``M`` are rotated pairwise until every pair
    is orthogonal to relative tolerance ``tol``. The column norms are then the
    singular values.

    Parameters
    ----------
    M : array_like, shape (r, c)
    tol : float
        Convergence threshold on ``|a_i . a_j| / (|a_i| |a_j|)``.
    max_sweeps : int

    Returns
    -------
    U : ndarray, shape (r, k)
    s : ndarray, shape (k,)
        Singular values in non-increasing order, ``k = min(r, c)``.
    Vt : ndarray, shape (k, c)
    """
    M = np.array(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("jacobi_svd expects a 2-D matrix")
    r, c = M.shape
    if r < c:
        U, s, Vt = jacobi_svd(M.T, tol=tol, max_sweeps=max_sweeps)
        return Vt.T, s, U.T
    if c == 0:
        return np.zeros((r, 0)), np.zeros(0), np.zeros((0, 0))
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")

    A = M.copy()
    V = np.eye(c)
    for _ in range(max_sweeps):
        rotated = False
        for i in range(c - 1):
            for j in range(i + 1, c):
                alpha = A[:, i] @ A[:, i]
                beta = A[:, j] @ A[:, j]
                gamma = A[:, i] @ A[:, j]
                if gamma == 0.0 or abs(gamma) <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                if abs(zeta) > 1e150:
                    t = 0.5 / zeta
                else:
                    t = np.copysign(1.0, zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                cs = 1.0 / np.sqrt(1.0 + t * t)
                sn = cs * t
                ai = A[:, i].copy()
                A[:, i] = cs * ai - sn * A[:, j]
                A[:, j] = sn * ai + cs * A[:, j]
                vi = V[:, i].copy()
                V[:, i] = cs * vi - sn * V[:, j]
                V[:, j] = sn * vi + cs * V[:, j]
        if not rotated:
            break

    s = np.sqrt(np.einsum("ij,ij->j", A, A))
    order = np.argsort(-s, kind="stable")
    s = s[order]
    A = A[:, order]
    V = V[:, order]
    U = np.zeros_like(A)
    for k in range(c):
        if s[k] > 0.0:
            U[:, k] = A[:, k] / s[k]
    # Complete U on the null directions so callers always get orthonormal columns.
    null = [k for k in range(c) if s[k] == 0.0]
    if null:
        keep = [U[:, k] for k in range(c) if s[k] > 0.0]
        extra = orthonormal_complement(np.array(keep).reshape(len(keep), r), r)
        for k, vec in zip(null, extra):
            U[:, k] = vec
    return U, s, V.T


def singular_values(M):
    """Singular values of ``M`` in non-increasing order."""
    return jacobi_svd(M)[1]


def spectral_norm(M):
    s = singular_values(M)
    return float(s[0]) if s.size else 0.0


def gram_schmidt(vectors, tol=1e-12):
    """Orthonormalise rows of ``vectors`` with one round of re-orthogonalisation.

    Raises ``ValueError("degenerate basis")`` when a residual norm drops below
    ``tol``.
    """
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    out = []
    for v in vectors:
        w = v.copy()
        for _ in range(2):
            for q in out:
                w -= (q @ w) * q
        norm = np.linalg.norm(w)
        if norm < tol:
            raise ValueError("degenerate basis")
        out.append(w / norm)
    return np.array(out).reshape(len(out), vectors.shape[1])


def orthonormal_complement(Q, n):
    """Rows spanning the orthogonal complement of the orthonormal rows of ``Q`` in R^n."""
    Q = np.asarray(Q, dtype=float).reshape(-1, n)
    basis = list(Q)
    out = []
    while len(basis) < n:
        # greedy: the coordinate axis with the largest residual is best conditioned
        best, best_norm = None, 0.0
        for e in np.eye(n):
            w = e.copy()
            for _ in range(2):
                for q in basis:
                    w -= (q @ w) * q
            norm = np.linalg.norm(w)
            if norm > best_norm:
                best, best_norm = w, norm
        w = best / best_norm
        basis.append(w)
        out.append(w)
    return np.array(out).reshape(len(out), n)
