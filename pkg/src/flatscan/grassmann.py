"""Affine flats, principal angles and the affine Grassmannian metric."""

from dataclasses import dataclass
import math

import numpy as np

from .linalg import gram_schmidt, jacobi_svd, orthonormal_complement, singular_values, spectral_norm

__all__ = [
    "Flat",
    "canonicalize",
    "deaffine",
    "embed",
    "principal_angles",
    "principal_vectors",
    "principal_angles_recursive",
    "grassmann_distance",
    "affine_distance",
    "distance_to_flat",
    "weyl_gap",
    "appendix_bound",
    "sample_flats",
    "move_flat",
]

INVARIANT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Flat:
    """An m-flat of R^n in normal form.

    ``basis`` holds m orthonormal rows spanning the direction space and
    ``displacement`` is the point of the flat closest to the origin, so it is
    orthogonal to every basis row. Use :func:`canonicalize` to build one from
    arbitrary input.
    """

    basis: np.ndarray
    displacement: np.ndarray

    def __post_init__(self):
        displacement = np.array(self.displacement, dtype=float).reshape(-1)
        n = displacement.shape[0]
        basis = np.array(self.basis, dtype=float).reshape(-1, n)
        if n < 1:
            raise ValueError("ambient dimension must be at least 1")
        if basis.shape[0] >= n:
            raise ValueError(f"flat dimension {basis.shape[0]} must be below ambient dimension {n}")
        if not (np.all(np.isfinite(basis)) and np.all(np.isfinite(displacement))):
            raise ValueError("flat coordinates must be finite")
        gram = basis @ basis.T
        if np.abs(gram - np.eye(basis.shape[0])).max(initial=0.0) > INVARIANT_TOL:
            raise ValueError("basis is not orthonormal")
        if np.abs(basis @ displacement).max(initial=0.0) > INVARIANT_TOL * max(1.0, np.linalg.norm(displacement)):
            raise ValueError("displacement is not orthogonal to the basis")
        basis.setflags(write=False)
        displacement.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "displacement", displacement)

    @property
    def ambient_dim(self):
        return self.displacement.shape[0]

    @property
    def flat_dim(self):
        return self.basis.shape[0]

    @property
    def is_linear(self):
        return bool(np.linalg.norm(self.displacement) <= INVARIANT_TOL)

    def __repr__(self):
        return f"Flat(m={self.flat_dim}, n={self.ambient_dim}, basis={self.basis.tolist()}, displacement={self.displacement.tolist()})"


def canonicalize(raw_basis, raw_point):
    """Normal form of the flat through ``raw_point`` spanned by ``raw_basis``.

    >>> P = canonicalize([[2.0, 0.0]], [3.0, 5.0])
    >>> P.basis.tolist(), P.displacement.tolist()
    ([[1.0, 0.0]], [0.0, 5.0])
    """
    point = np.asarray(raw_point, dtype=float).reshape(-1)
    n = point.shape[0]
    raw_basis = np.asarray(raw_basis, dtype=float).reshape(-1, n)
    if raw_basis.shape[0] == 0:
        return Flat(np.zeros((0, n)), point)
    basis = gram_schmidt(raw_basis)
    displacement = point - basis.T @ (basis @ point)
    # second pass removes the rounding left over by the first projection
    displacement = displacement - basis.T @ (basis @ displacement)
    return Flat(basis, displacement)


def deaffine(P):
    """The m-plane through the origin parallel to ``P``."""
    return Flat(P.basis, np.zeros(P.ambient_dim))


def embed(P):
    """Embed ``P`` in AG(m, n) as an (m+1)-plane of R^(n+1).

    The plane is spanned by the basis of ``P`` padded with a zero and the unit
    vector along ``(b, 1)`` where ``b`` is the displacement.
    """
    n = P.ambient_dim
    lifted = np.zeros((P.flat_dim + 1, n + 1))
    lifted[: P.flat_dim, :n] = P.basis
    lifted[P.flat_dim, :n] = P.displacement
    lifted[P.flat_dim, n] = 1.0
    lifted[P.flat_dim] /= math.sqrt(1.0 + float(P.displacement @ P.displacement))
    return Flat(lifted, np.zeros(n + 1))


def _check_linear_pair(A, B):
    if A.ambient_dim != B.ambient_dim:
        raise ValueError(f"ambient dimensions differ: {A.ambient_dim} vs {B.ambient_dim}")
    if not (A.is_linear and B.is_linear):
        raise ValueError("principal angles need linear subspaces (zero displacement)")


def principal_angles(A, B):
    """Principal angles between two linear subspaces, ascending.

    Cosines come from the singular values of ``M_A^T M_B``; the small angles
    are taken from the sines (singular values of the residual of ``M_B``
    after projecting onto ``A``) since ``arccos`` loses half the digits near 1.
    """
    _check_linear_pair(A, B)
    # fixed argument order makes the result bitwise symmetric
    if (A.flat_dim, A.basis.tobytes()) < (B.flat_dim, B.basis.tobytes()):
        A, B = B, A
    k = B.flat_dim
    if k == 0:
        return np.zeros(0)
    MA, MB = A.basis.T, B.basis.T
    G = MA.T @ MB
    cos = np.clip(singular_values(G)[:k], 0.0, 1.0)
    R = MB - MA @ G
    sin = np.clip(singular_values(R)[:k][::-1], 0.0, 1.0)
    angles = np.where(cos * cos < 0.5, np.arccos(cos), np.arcsin(sin))
    return np.sort(angles)


def principal_vectors(A, B):
    """Paired orthonormal bases ``(U, V)`` of ``A`` and ``B`` realising the principal angles.

    Row ``i`` of ``U`` and of ``V`` satisfy ``U[i] . V[i] = cos(theta_i)``.
    Both flats must have the same dimension.
    """
    _check_linear_pair(A, B)
    if A.flat_dim != B.flat_dim:
        raise ValueError("principal vectors need flats of equal dimension")
    if A.flat_dim == 0:
        n = A.ambient_dim
        return np.zeros((0, n)), np.zeros((0, n))
    Uc, _, Vt = jacobi_svd(A.basis @ B.basis.T)
    return Uc.T @ A.basis, Vt @ B.basis


def _top_singular_pair(G, max_iter=200_000):
    """Leading right singular vector of ``G`` by power iteration on ``G^T G``."""
    H = G.T @ G
    col_norms = np.linalg.norm(H, axis=0)
    if col_norms.max(initial=0.0) == 0.0:
        v = np.zeros(G.shape[1])
        v[0] = 1.0
        return v
    v = H[:, int(np.argmax(col_norms))].copy()
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        w = H @ v
        lam = float(v @ w)
        residual = np.linalg.norm(w - lam * v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            break
        v = w / norm
        if residual <= 1e-15:
            break
    return v


def principal_angles_recursive(A, B):
    """Principal angles by successive constrained maximisation.

    At each step the pair of unit vectors ``a`` in A, ``b`` in B, orthogonal to
    all previously chosen pairs, maximising ``a . b`` is found by power
    iteration; the angle is read off as ``atan2(|b - (a.b) a|, a.b)``.
    Kept independent of :func:`principal_angles` so it can serve as a
    cross-check.
    """
    _check_linear_pair(A, B)
    CA, CB = A.basis.copy(), B.basis.copy()
    angles = []
    for _ in range(min(A.flat_dim, B.flat_dim)):
        G = CA @ CB.T
        v = _top_singular_pair(G)
        Gv = G @ v
        c = np.linalg.norm(Gv)
        if c > 0.0:
            u = Gv / c
        else:
            u = np.zeros(CA.shape[0])
            u[0] = 1.0
        a, b = u @ CA, v @ CB
        ab = float(a @ b)
        if ab < 0.0:
            b, ab = -b, -ab
        angles.append(math.atan2(np.linalg.norm(b - ab * a), ab))
        CA = orthonormal_complement(u[None, :], CA.shape[0]) @ CA
        CB = orthonormal_complement(v[None, :], CB.shape[0]) @ CB
    return np.sort(np.array(angles))


def grassmann_distance(A, B):
    """Geodesic distance ``sqrt(sum theta_i^2)`` between two m-planes."""
    if A.flat_dim != B.flat_dim:
        raise ValueError(f"flat dimensions differ: {A.flat_dim} vs {B.flat_dim}")
    theta = principal_angles(A, B)
    return float(math.sqrt(float(theta @ theta)))


def affine_distance(P, Q):
    """Distance on AG(m, n) pulled back from Gr(m+1, n+1) through :func:`embed`."""
    if P.flat_dim != Q.flat_dim:
        raise ValueError(f"flat dimensions differ: {P.flat_dim} vs {Q.flat_dim}")
    if P.ambient_dim != Q.ambient_dim:
        raise ValueError(f"ambient dimensions differ: {P.ambient_dim} vs {Q.ambient_dim}")
    return grassmann_distance(embed(P), embed(Q))


def distance_to_flat(P, x):
    """Euclidean distance from point(s) ``x`` to the flat ``P``.

    ``x`` may be a single point of shape ``(n,)`` or an array ``(N, n)``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != P.ambient_dim:
        raise ValueError(f"point dimension {x.shape[-1]} does not match flat ambient dimension {P.ambient_dim}")
    residual = x - P.displacement - (x @ P.basis.T) @ P.basis
    return np.linalg.norm(residual, axis=-1)


def weyl_gap(A, B):
    """Return ``(max_i |sigma_i(A) - sigma_i(B)|, ||A - B||_2)`` for square matrices."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch: {A.shape} vs {B.shape}")
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("weyl_gap expects square matrices")
    gap = np.abs(singular_values(A) - singular_values(B)).max(initial=0.0)
    return float(gap), spectral_norm(A - B)


def appendix_bound(p, delta):
    """Uniform bound ``B < 1`` on ``|(1 + p.x) / sqrt((1+|p|^2)(1+|x|^2))|`` over ``|x - p| >= delta``.

    For ``p = 0`` this is ``1/sqrt(1 + delta^2)``. Otherwise ``delta`` is
    first shrunk below ``|p|`` (a smaller exclusion radius only loosens the
    bound) and the result is the largest of the far-field limit
    ``|p|/sqrt(1+|p|^2)`` and the values on the two extreme shells
    ``|x| = |p| +- delta`` with ``x`` parallel to ``p``.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    p = np.asarray(p, dtype=float).reshape(-1)
    norm_p = float(np.linalg.norm(p))
    if norm_p == 0.0:
        return 1.0 / math.sqrt(1.0 + delta * delta)
    delta = min(delta, norm_p * (1.0 - 1e-12))
    far = norm_p / math.sqrt(1.0 + norm_p * norm_p)
    outer = 1.0 + delta * norm_p + norm_p * norm_p
    inner = 1.0 - delta * norm_p + norm_p * norm_p
    return max(
        far,
        outer / math.sqrt(outer * outer + delta * delta),
        inner / math.sqrt(inner * inner + delta * delta),
    )


def sample_flats(m, n, count, radius, seed):
    """Draw ``count`` random m-flats meeting the ball of the given radius.

    Directions are Gaussian frames orthonormalised (rotation invariant on
    Gr(m, n)); displacements are uniform in the ball, then projected
    orthogonally to the direction space.
    """
    if not (0 <= m < n):
        raise ValueError(f"need 0 <= m < n, got m={m}, n={n}")
    if count < 1:
        raise ValueError("count must be at least 1")
    if radius <= 0:
        raise ValueError("radius must be positive")
    rng = np.random.default_rng(seed)
    flats = []
    for _ in range(count):
        while True:
            frame = rng.standard_normal((m, n))
            try:
                basis = gram_schmidt(frame) if m else np.zeros((0, n))
                break
            except ValueError:
                continue
        direction = rng.standard_normal(n)
        direction /= np.linalg.norm(direction)
        point = direction * radius * rng.uniform() ** (1.0 / n)
        flats.append(canonicalize(basis, point))
    return flats


def move_flat(P, rotation=None, translation=None, pivot=None):
    """Image of ``P`` under ``x -> R (x - pivot) + pivot + t``."""
    n = P.ambient_dim
    R = np.eye(n) if rotation is None else np.asarray(rotation, dtype=float)
    t = np.zeros(n) if translation is None else np.asarray(translation, dtype=float)
    c = np.zeros(n) if pivot is None else np.asarray(pivot, dtype=float)
    point = R @ (P.displacement - c) + c + t
    return canonicalize(P.basis @ R.T, point)
