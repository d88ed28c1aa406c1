"""Distance-from-flat persistent homology transform, Euler statistics of slices and probes."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
import math
import os
import warnings

import numpy as np

from .complex import (
    betti,
    cubical_from_occupancy,
    default_epsilon,
    euler_characteristic,
    flat_filtration,
    lower_star,
    slice_shape,
)
from .grassmann import Flat, affine_distance, canonicalize, distance_to_flat, move_flat
from .linalg import orthonormal_complement
from .persistence import bottleneck, pd0_union_find, pd_reduction

__all__ = [
    "ChiPair",
    "DphtResult",
    "InjectivityReport",
    "ContinuityReport",
    "InstabilityReport",
    "HeightTubularReport",
    "chi_grassmannian",
    "chi_grassmannian_recursive",
    "chi_pair",
    "chi_table",
    "unit_direction",
    "height_filtration",
    "tangent_flat",
    "dpht_scan",
    "euler_curve",
    "radon_chi",
    "radon_chi_many",
    "betti_slice_euler",
    "pixel_center_lines",
    "injectivity_probe",
    "rotation_schedule",
    "translation_schedule",
    "continuity_probe",
    "instability_demo",
    "hpht_vs_cpht_demo",
    "thread_count",
]

THREADS_ENV = "FLATSCAN_THREADS"


# ---------------------------------------------------------------------------
# Euler characteristics of Grassmannians


def chi_grassmannian(k, n):
    """Euler characteristic of Gr(k, n) from the closed form.

    Zero when ``n`` is even and ``k`` odd, otherwise ``C(n // 2, k // 2)``.
    """
    if not (0 <= k <= n):
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    if n % 2 == 0 and k % 2 == 1:
        return 0
    return math.comb(n // 2, k // 2)


@lru_cache(maxsize=None)
def chi_grassmannian_recursive(k, n):
    """Same quantity from ``chi(k, n) = chi(k-1, n-1) + (-1)^k chi(k, n-1)``."""
    if not (0 <= k <= n):
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    if k == 0 or k == n:
        return 1
    return chi_grassmannian_recursive(k - 1, n - 1) + (-1) ** k * chi_grassmannian_recursive(k, n - 1)


@dataclass(frozen=True)
class ChiPair:
    """Euler characteristics separating the two Schubert-type kernels for AG(m, n).

    ``chi1`` is chi(Gr(m, n)); ``chi2`` is chi(Gr(m-1, n-1)), or 0 for points.
    ``case_tag`` names the parity case: ``"2.1"`` (n even, m odd), ``"2.2"``
    (n odd, m even), ``"2.3"`` (both even), ``"2.4"`` (both odd) or ``"m0"``.
    """

    m: int
    n: int
    chi1: int
    chi2: int
    case_tag: str

    @property
    def distinct(self):
        return self.chi1 != self.chi2


def chi_pair(m, n):
    if not (0 <= m < n):
        raise ValueError(f"need 0 <= m < n, got m={m}, n={n}")
    chi1 = chi_grassmannian(m, n)
    if m == 0:
        return ChiPair(m, n, chi1, 0, "m0")
    chi2 = chi_grassmannian(m - 1, n - 1)
    if n % 2 == 0 and m % 2 == 1:
        tag = "2.1"
    elif n % 2 == 1 and m % 2 == 0:
        tag = "2.2"
    elif n % 2 == 0:
        tag = "2.3"
        # chi1 = (n/2) / (m/2) * chi2, kept in integers
        if chi1 * (m // 2) != (n // 2) * chi2:
            raise AssertionError(f"ratio identity fails for m={m}, n={n}")
    else:
        tag = "2.4"
    return ChiPair(m, n, chi1, chi2, tag)


def chi_table(max_n=12):
    """All :class:`ChiPair` values for ``0 <= m < n <= max_n``, ordered by (n, m)."""
    return [chi_pair(m, n) for n in range(1, max_n + 1) for m in range(n)]


# ---------------------------------------------------------------------------
# Filtrations used by the transform


def unit_direction(angle):
    """``(cos a, sin a)`` with roundoff-level components snapped to zero.

    ``cos(pi/2)`` is 6e-17 in floating point; left alone it breaks the exact
    ties of an axis-aligned raster and adds noise pairs to diagrams.
    """
    v = np.array([math.cos(angle), math.sin(angle)])
    v[np.abs(v) < 1e-15] = 0.0
    return v


def height_filtration(shape, v):
    """Lower-star filtration of the height ``x . v``."""
    v = np.asarray(v, dtype=float)
    if v.shape != (shape.ambient_dim,):
        raise ValueError(f"direction must have {shape.ambient_dim} components")
    return lower_star(shape, shape.vertices @ v)


def tangent_flat(v, offset):
    """Hyperplane ``{x : x . v = -offset}`` orthogonal to the unit vector ``v``.

    With ``offset`` at least the bounding radius the whole shape lies on the
    ``+v`` side, so distance to it equals height plus ``offset``.
    """
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    basis = orthonormal_complement(v[None, :], len(v))
    return canonicalize(basis, -offset * v)


# ---------------------------------------------------------------------------
# The scan


@dataclass(frozen=True, eq=False)
class DphtResult:
    """Truncated diagrams of a shape over a list of flats.

    ``diagrams[i][k]`` is the degree-``k`` diagram for ``flats[i]``.
    ``euler_curves[i]`` lists ``(r, chi)`` breakpoints; ``slice_chi[i]`` is the
    Euler characteristic of the thin slice. Both are None when not requested.
    """

    shape_id: str
    m: int
    flats: list
    diagrams: list
    max_degree: int
    euler_curves: list = None
    slice_chi: list = None
    epsilon: float = None

    def __len__(self):
        return len(self.flats)

    def degree(self, k):
        return [d[k] for d in self.diagrams]


def thread_count(n_jobs=None):
    """Worker count: ``n_jobs`` (default CPU count) capped by ``FLATSCAN_THREADS``."""
    count = n_jobs if n_jobs is not None else (os.cpu_count() or 1)
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            count = min(count, int(cap))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {cap!r}") from None
    return max(1, count)


def _default_degree(m):
    if m == 0:
        warnings.warn("m = 0 has no degree below zero; computing degree 0", stacklevel=3)
        return 0
    return m - 1


def _sublevel_chi(shape, filt, r):
    return int(sum((-1) ** d * int(np.count_nonzero(filt.by_dim(d) <= r)) for d in range(len(shape.cells))))


def dpht_scan(
    shape,
    m,
    flats,
    max_degree=None,
    *,
    shape_id="shape",
    euler=False,
    slice_chi=False,
    epsilon=None,
    n_jobs=None,
):
    """Diagrams of the distance-to-flat filtration for every flat in ``flats``.

    Parameters
    ----------
    shape : Shape
    m : int
        Dimension of the scanning flats.
    flats : list of Flat
        All in AG(m, shape.ambient_dim).
    max_degree : int, optional
        Highest degree kept. Defaults to ``m - 1`` (0 for points, with a warning).
    euler, slice_chi : bool
        Also record Euler curves and slice Euler characteristics.
    epsilon : float, optional
        Slice thickness; defaults to half the largest cell diameter.
    n_jobs : int, optional
        Thread count, further capped by the ``FLATSCAN_THREADS`` variable.

    Returns
    -------
    DphtResult
        Entries follow the input flat order.
    """
    flats = list(flats)
    n = shape.ambient_dim
    if not (0 <= m < n):
        raise ValueError(f"need 0 <= m < {n}, got m={m}")
    for i, P in enumerate(flats):
        if not isinstance(P, Flat):
            raise TypeError(f"flat {i} is not a Flat")
        if P.ambient_dim != n or P.flat_dim != m:
            raise ValueError(f"flat {i} is in AG({P.flat_dim},{P.ambient_dim}), expected AG({m},{n})")
    K = _default_degree(m) if max_degree is None else int(max_degree)
    if not (0 <= K < n):
        raise ValueError(f"max_degree must be in [0, {n - 1}], got {K}")
    eps = default_epsilon(shape) if epsilon is None else float(epsilon)

    def one(P):
        filt = flat_filtration(shape, P)
        diagrams = [pd0_union_find(shape, filt)] if K == 0 else pd_reduction(shape, filt, K)
        curve = euler_curve(shape, filt) if euler else None
        chi = _sublevel_chi(shape, filt, eps) if slice_chi else None
        return diagrams, curve, chi

    workers = min(thread_count(n_jobs), max(1, len(flats)))
    if workers == 1:
        out = [one(P) for P in flats]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(one, flats))
    return DphtResult(
        shape_id=shape_id,
        m=m,
        flats=flats,
        diagrams=[o[0] for o in out],
        max_degree=K,
        euler_curves=[o[1] for o in out] if euler else None,
        slice_chi=[o[2] for o in out] if slice_chi else None,
        epsilon=eps if slice_chi else None,
    )


def euler_curve(shape, filt):
    """Right-continuous Euler curve: ``(r, chi(sublevel at r))`` at every distinct value."""
    if not len(filt.values):
        return []
    order = np.argsort(filt.values, kind="stable")
    vals = filt.values[order]
    signs = np.where(filt.dims[order] % 2 == 0, 1, -1)
    running = np.cumsum(signs)
    last = np.r_[np.nonzero(np.diff(vals))[0], len(vals) - 1]
    return [(float(r), int(c)) for r, c in zip(vals[last], running[last])]


# ---------------------------------------------------------------------------
# Slices


def radon_chi(shape, P, epsilon=None):
    """Euler characteristic of the ``epsilon``-slice of ``shape`` by ``P``."""
    eps = default_epsilon(shape) if epsilon is None else epsilon
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    return _sublevel_chi(shape, flat_filtration(shape, P), eps)


def betti_slice_euler(shape, P, m, epsilon=None):
    """Alternating sum of the slice Betti numbers in degrees ``0..m-1`` only."""
    if P.flat_dim != m:
        raise ValueError(f"flat has dimension {P.flat_dim}, expected {m}")
    if m == 0:
        return 0
    b = betti(slice_shape(shape, P, epsilon), m - 1)
    return int(sum((-1) ** k * x for k, x in enumerate(b)))


def _raster_incidence(full):
    """Boolean ``(cells, pixels)`` matrix: cell lies in the closed pixel, for a fully occupied raster."""
    occ = full.occupancy
    centers = _pixel_centers_flat(occ.shape)
    blocks = []
    for cells in full.cells:
        mid = full.vertices[cells].mean(axis=1)
        gap = np.abs(mid[:, None, :] - centers[None, :, :]).max(axis=2)
        blocks.append(gap <= 0.5 + 1e-9)
    return np.concatenate(blocks)


def _pixel_centers_flat(shape):
    from .shapes import pixel_centers

    return pixel_centers(shape).reshape(-1, len(shape))


def radon_chi_many(occupancies, flats, epsilon=None):
    """Slice Euler characteristics for many same-size rasters at once.

    Every raster is a subcomplex of the fully occupied raster, so the slice
    counts reduce to one matrix product.

    Parameters
    ----------
    occupancies : array_like, shape (G, H, W) or (G, D, H, W)
    flats : list of Flat
    epsilon : float, optional

    Returns
    -------
    ndarray of int, shape (G, len(flats))
    """
    occ = np.asarray(occupancies, dtype=bool)
    grid = occ.shape[1:]
    full = cubical_from_occupancy(np.ones(grid, dtype=bool))
    eps = default_epsilon(full) if epsilon is None else epsilon
    inc = _raster_incidence(full)
    sign = np.concatenate([np.full(c, (-1) ** d) for d, c in enumerate(full.counts)])
    vmax = []
    for P in flats:
        f = distance_to_flat(P, full.vertices)
        vmax.append(np.concatenate([f[cells].max(axis=1) for cells in full.cells]) <= eps)
    inside = np.array(vmax, dtype=np.int64).reshape(len(flats), -1)
    present = (occ.reshape(len(occ), -1).astype(np.int64) @ inc.T.astype(np.int64)) > 0
    return (present * sign) @ inside.T


# ---------------------------------------------------------------------------
# Probes


def pixel_center_lines(grid_size):
    """Distinct lines through pairs of pixel centres of a square raster."""
    centers = _pixel_centers_flat((grid_size, grid_size))
    seen = set()
    lines = []
    for i, j in combinations(range(len(centers)), 2):
        a, b = centers[i], centers[j]
        d = (b - a) / np.linalg.norm(b - a)
        if d[0] < 0 or (d[0] == 0 and d[1] < 0):
            d = -d
        P = canonicalize(d[None, :], a)
        # half-pixel coordinates keep the key exact up to roundoff
        key = (round(float(d[0]), 9), round(float(d[1]), 9), *np.round(P.displacement, 9).tolist())
        if key in seen:
            continue
        seen.add(key)
        lines.append(P)
    return lines


@dataclass(frozen=True)
class InjectivityReport:
    grid_size: int
    pair_count: int
    line_count: int
    distinguished: int
    undistinguished_pairs: list = field(default_factory=list)

    @property
    def fraction(self):
        return self.distinguished / self.pair_count if self.pair_count else 1.0


def injectivity_probe(grid_size, pair_count, seed, epsilon=None):
    """Fraction of random distinct raster pairs told apart by slice Euler characteristics.

    Slices are taken along every line through two pixel centres. The default
    thickness is half the pixel diagonal nudged up by one part in 1e9, so
    corners lying exactly at that distance are consistently included.
    """
    if grid_size < 1 or grid_size > 6:
        raise ValueError("grid_size must be between 1 and 6")
    if pair_count < 1:
        raise ValueError("pair_count must be at least 1")
    rng = np.random.default_rng(seed)
    lines = pixel_center_lines(grid_size)
    eps = 0.5 * math.sqrt(2.0) * (1.0 + 1e-9) if epsilon is None else epsilon
    first = np.empty((pair_count, grid_size, grid_size), dtype=bool)
    second = np.empty_like(first)
    for i in range(pair_count):
        a = rng.integers(0, 2, (grid_size, grid_size)).astype(bool)
        b = rng.integers(0, 2, (grid_size, grid_size)).astype(bool)
        while np.array_equal(a, b):
            b = rng.integers(0, 2, (grid_size, grid_size)).astype(bool)
        first[i], second[i] = a, b
    chi = radon_chi_many(np.concatenate([first, second]), lines, eps)
    same = np.all(chi[:pair_count] == chi[pair_count:], axis=1)
    return InjectivityReport(
        grid_size=grid_size,
        pair_count=pair_count,
        line_count=len(lines),
        distinguished=int(np.count_nonzero(~same)),
        undistinguished_pairs=np.nonzero(same)[0].tolist(),
    )


def rotation_schedule(P, steps=8, pivot=None):
    """Rotations of a planar flat by ``pi/2 * 2**-k`` about ``pivot``, ``k = 1..steps``."""
    if P.ambient_dim != 2:
        raise ValueError("rotation_schedule handles flats in the plane")
    out = []
    for k in range(1, steps + 1):
        t = math.pi / 2 * 2.0**-k
        R = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
        out.append(move_flat(P, rotation=R, pivot=pivot))
    return out


def translation_schedule(P, steps=8, direction=None):
    """Translations of ``P`` by ``2**-k`` along ``direction``, ``k = 1..steps``.

    The default direction is the first coordinate axis orthogonal to the flat.
    """
    if direction is None:
        normal = orthonormal_complement(P.basis, P.ambient_dim)
        direction = normal[0]
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    return [move_flat(P, translation=2.0**-k * direction) for k in range(1, steps + 1)]


@dataclass(frozen=True)
class ContinuityReport:
    affine_distances: np.ndarray
    sup_gaps: np.ndarray
    bottlenecks: np.ndarray
    tolerance: float

    @property
    def stable(self):
        """Bottleneck never exceeds the vertex-wise sup gap (plus 1e-9)."""
        return bool(np.all(self.bottlenecks <= self.sup_gaps + 1e-9))

    @property
    def monotone(self):
        return bool(np.all(np.diff(self.bottlenecks) <= 1e-12))

    @property
    def converged(self):
        return bool(len(self.bottlenecks) == 0 or self.bottlenecks[-1] < self.tolerance)

    @property
    def passed(self):
        return self.stable and self.monotone and self.converged


def continuity_probe(shape, P, schedule, tolerance=0.05, degree=0):
    """Track metric gap, sup gap and bottleneck distance of ``degree`` diagrams along ``schedule``."""
    f_P = distance_to_flat(P, shape.vertices)
    base = _diagram(shape, flat_filtration(shape, P), degree)
    dist, gaps, bn = [], [], []
    for Q in schedule:
        f_Q = distance_to_flat(Q, shape.vertices)
        dist.append(affine_distance(Q, P))
        gaps.append(float(np.abs(f_Q - f_P).max(initial=0.0)))
        bn.append(bottleneck(base, _diagram(shape, lower_star(shape, f_Q), degree)).value)
    return ContinuityReport(np.array(dist), np.array(gaps), np.array(bn), tolerance)


def _diagram(shape, filt, degree):
    if degree == 0:
        return pd0_union_find(shape, filt)
    return pd_reduction(shape, filt, degree)[degree]


@dataclass(frozen=True)
class InstabilityReport:
    """Per-degree bottleneck distances between two shapes scanned by one flat."""

    distances: list
    counts_a: list
    counts_b: list

    @property
    def unbounded_degrees(self):
        return [k for k, d in enumerate(self.distances) if math.isinf(d)]


def instability_demo(shape_a, shape_b, P, max_degree=None):
    if shape_a.ambient_dim != shape_b.ambient_dim:
        raise ValueError("shapes live in different dimensions")
    K = shape_a.ambient_dim - 1 if max_degree is None else max_degree
    da = pd_reduction(shape_a, flat_filtration(shape_a, P), K)
    db = pd_reduction(shape_b, flat_filtration(shape_b, P), K)
    return InstabilityReport(
        distances=[bottleneck(a, b).value for a, b in zip(da, db)],
        counts_a=[len(a) for a in da],
        counts_b=[len(b) for b in db],
    )


@dataclass(frozen=True)
class HeightTubularReport:
    """Height diagram versus tangent-hyperplane and through-centre diagrams.

    ``shift_gap`` is the bottleneck distance between the height diagram
    shifted by ``offset`` and the tangent-hyperplane diagram.
    """

    offset: float
    shift_gap: float
    height_count: int
    tangent_count: int
    through_count: int

    def shift_matches(self, atol=1e-9):
        return self.shift_gap <= atol


def hpht_vs_cpht_demo(shape, v, offset=None):
    """Compare degree-0 diagrams of the height ``x . v`` with two distance-to-hyperplane scans.

    The tangent hyperplane sits at ``offset`` (default: bounding radius)
    below the shape along ``v``; the second hyperplane is orthogonal to ``v``
    through the origin.
    """
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    M = shape.bounding_radius if offset is None else float(offset)
    height = pd0_union_find(shape, height_filtration(shape, v))
    tangent = pd0_union_find(shape, flat_filtration(shape, tangent_flat(v, M)))
    through = pd0_union_find(shape, flat_filtration(shape, tangent_flat(v, 0.0)))
    return HeightTubularReport(
        offset=M,
        shift_gap=bottleneck(height.shifted(M), tangent).value,
        height_count=len(height),
        tangent_count=len(tangent),
        through_count=len(through),
    )
