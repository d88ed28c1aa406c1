"""Persistence diagrams of lower-star filtrations and distances between them."""

from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = [
    "PersistenceDiagram",
    "DiagramDistanceReport",
    "pd0_union_find",
    "pd_reduction",
    "bottleneck",
    "wasserstein",
]


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Multiset of ``(birth, death)`` pairs in one homological degree.

    Points are stored as an ``(k, 2)`` float array sorted by (birth, death);
    essential classes have ``death == inf``. Zero-persistence pairs are never
    stored.
    """

    degree: int
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if np.any(~(pts[:, 1] > pts[:, 0])):
            raise ValueError("every point needs death > birth")
        pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @property
    def essential(self):
        return self.points[np.isinf(self.points[:, 1])]

    @property
    def finite(self):
        return self.points[np.isfinite(self.points[:, 1])]

    def shifted(self, amount):
        """Translate every point by ``(amount, amount)``."""
        return PersistenceDiagram(self.degree, self.points + amount)

    def same_as(self, other, atol=0.0):
        if self.degree != other.degree or self.points.shape != other.points.shape:
            return False
        a, b = self.points, other.points
        inf_a, inf_b = np.isinf(a), np.isinf(b)
        if not np.array_equal(inf_a, inf_b):
            return False
        return bool(np.all(np.abs(a[~inf_a] - b[~inf_b]) <= atol))

    def __repr__(self):
        return f"PersistenceDiagram(degree={self.degree}, points={self.points.tolist()})"


@dataclass(frozen=True)
class DiagramDistanceReport:
    """Distance value and an optimal matching.

    ``matching`` lists ``(i, j)`` index pairs into the two diagrams' point
    arrays; ``None`` on one side means the point is matched to the diagonal.
    """

    value: float
    matching: list = None


def _make_diagram(degree, pairs):
    pts = np.array(pairs, dtype=float).reshape(-1, 2)
    return PersistenceDiagram(degree, pts[pts[:, 1] > pts[:, 0]])


def pd0_union_find(shape, filt):
    """Degree-0 diagram by union-find over edges in filtration order.

    On a merge the younger component (later in the (value, id) vertex order)
    dies; each surviving root yields an essential point.
    """
    fv = filt.by_dim(0)
    V = len(fv)
    if V == 0:
        return PersistenceDiagram(0, np.zeros((0, 2)))
    rank = np.empty(V, dtype=np.int64)
    rank[np.lexsort((np.arange(V), fv))] = np.arange(V)
    edges = shape.cells[1] if len(shape.cells) > 1 else np.zeros((0, 2), dtype=np.int64)
    ev = filt.by_dim(1) if len(shape.cells) > 1 else np.zeros(0)
    edge_order = np.lexsort((np.arange(len(ev)), ev))

    parent = list(range(V))
    rank_l = rank.tolist()
    fv_l = fv.tolist()
    pairs = []
    edges_l = edges.tolist()
    ev_l = ev.tolist()
    for e in edge_order.tolist():
        u, v = edges_l[e]
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        if u == v:
            continue
        if rank_l[u] > rank_l[v]:
            u, v = v, u
        # u is the elder root; v's component dies here
        w = ev_l[e]
        if w > fv_l[v]:
            pairs.append((fv_l[v], w))
        parent[v] = u
    for x in range(V):
        if parent[x] == x:
            pairs.append((fv_l[x], math.inf))
    return _make_diagram(0, pairs)


def _dim_ranks(filt, d):
    vals = filt.by_dim(d)
    order = np.lexsort((np.arange(len(vals)), vals))
    rank = np.empty(len(vals), dtype=np.int64)
    rank[order] = np.arange(len(vals))
    return order, rank


def pd_reduction(shape, filt, max_degree):
    """Diagrams for degrees ``0..max_degree`` by boundary matrix reduction over GF(2).

    Columns of each dimension are reduced in filtration order, highest
    dimension first, skipping columns already known to reduce to zero
    (clearing). Columns are Python integers used as bitsets.
    """
    if max_degree < 0:
        raise ValueError("max_degree must be non-negative")
    if max_degree >= shape.ambient_dim:
        raise ValueError(f"max_degree must be below the ambient dimension {shape.ambient_dim}")
    top = min(max_degree + 1, len(shape.cells) - 1)
    ranks = {}
    for d in range(top + 1):
        ranks[d] = _dim_ranks(filt, d)

    # lows[d]: rank of (d-1)-cell -> rank of the d-cell whose reduced column ends there
    lows = {d: {} for d in range(top + 2)}
    zero_columns = {d: [] for d in range(top + 1)}
    zero_columns[0] = list(range(shape.count(0)))
    for d in range(top, 0, -1):
        order, _ = ranks[d]
        _, face_rank = ranks[d - 1]
        cleared = lows[d + 1]
        faces = shape.faces[d]
        pivots = {}
        ranked_faces = face_rank[faces].tolist() if len(faces) else []
        for r, cell in enumerate(order.tolist()):
            if r in cleared:
                continue
            col = 0
            for f in ranked_faces[cell]:
                col ^= 1 << f
            while col:
                low = col.bit_length() - 1
                other = pivots.get(low)
                if other is None:
                    pivots[low] = col
                    lows[d][low] = r
                    break
                col ^= other
            if not col:
                zero_columns[d].append(r)

    diagrams = []
    for k in range(max_degree + 1):
        if k > top:
            diagrams.append(PersistenceDiagram(k, np.zeros((0, 2))))
            continue
        order_k, _ = ranks[k]
        vals_k = filt.by_dim(k)
        pairs = []
        if k + 1 <= top:
            order_k1, _ = ranks[k + 1]
            vals_k1 = filt.by_dim(k + 1)
            for low, r in lows[k + 1].items():
                pairs.append((vals_k[order_k[low]], vals_k1[order_k1[r]]))
        killed = lows[k + 1]
        for r in zero_columns[k]:
            if r not in killed:
                pairs.append((vals_k[order_k[r]], math.inf))
        diagrams.append(_make_diagram(k, pairs))
    return diagrams


def _check_pair(D1, D2):
    if D1.degree != D2.degree:
        raise ValueError(f"diagram degrees differ: {D1.degree} vs {D2.degree}")


def _split(D):
    pts = D.points
    ess = np.nonzero(np.isinf(pts[:, 1]))[0]
    fin = np.nonzero(np.isfinite(pts[:, 1]))[0]
    return fin, ess


def _essential_match(D1, D2, ess1, ess2):
    """Sorted-birth matching of essential points; None when the counts differ."""
    if len(ess1) != len(ess2):
        return None
    o1 = ess1[np.argsort(D1.points[ess1, 0], kind="stable")]
    o2 = ess2[np.argsort(D2.points[ess2, 0], kind="stable")]
    gaps = np.abs(D1.points[o1, 0] - D2.points[o2, 0])
    return list(zip(o1.tolist(), o2.tolist())), gaps


def _perfect_matching(adj, n_left, n_right):
    """Maximum bipartite matching by augmenting paths; returns match_left or None if imperfect."""
    match_right = [-1] * n_right
    match_left = [-1] * n_left

    # greedy start; augmenting paths then only fix the leftovers
    for u in range(n_left):
        for v in adj[u]:
            if match_right[v] == -1:
                match_left[u] = v
                match_right[v] = u
                break

    def augment(root):
        seen = [False] * n_right
        stack = [(root, iter(adj[root]))]
        via = []  # via[i] is the right vertex leading from stack[i] to stack[i + 1]
        while stack:
            u, it = stack[-1]
            for v in it:
                if seen[v]:
                    continue
                seen[v] = True
                if match_right[v] == -1:
                    for (left, _), right in zip(stack, via + [v]):
                        match_left[left] = right
                        match_right[right] = left
                    return True
                via.append(v)
                stack.append((match_right[v], iter(adj[match_right[v]])))
                break
            else:
                stack.pop()
                if via:
                    via.pop()
        return False

    for u in range(n_left):
        if match_left[u] == -1 and not augment(u):
            return None
    return match_left


def _finite_costs(A, B):
    cost = np.abs(A[:, None, :] - B[None, :, :]).max(axis=2) if len(A) and len(B) else np.zeros((len(A), len(B)))
    return cost, (A[:, 1] - A[:, 0]) / 2.0, (B[:, 1] - B[:, 0]) / 2.0


def _bottleneck_finite(A, B):
    a, b = len(A), len(B)
    if a == 0 and b == 0:
        return 0.0, []
    cost, diag_a, diag_b = _finite_costs(A, B)
    candidates = np.unique(np.concatenate([cost.ravel(), diag_a, diag_b, [0.0]]))

    def matching_at(t):
        # left: A_0..A_{a-1}, then diagonal images of B; right: B_0..B_{b-1}, then diagonal images of A
        adj = []
        for i in range(a):
            nbrs = [j for j in np.nonzero(cost[i] <= t)[0].tolist()]
            if diag_a[i] <= t:
                nbrs.append(b + i)
            adj.append(nbrs)
        for j in range(b):
            nbrs = [j] if diag_b[j] <= t else []
            nbrs.extend(b + i for i in range(a))
            adj.append(nbrs)
        return _perfect_matching(adj, a + b, a + b)

    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if matching_at(candidates[mid]) is not None:
            hi = mid
        else:
            lo = mid + 1
    t = float(candidates[lo])
    match_left = matching_at(t)
    pairs = []
    for i in range(a):
        j = match_left[i]
        pairs.append((i, j if j < b else None))
    for j in range(b):
        if match_left[a + j] == j:
            pairs.append((None, j))
    return t, pairs


def bottleneck(D1, D2):
    """Exact bottleneck distance with sup-norm ground metric.

    Essential points match only essential points (cost = birth gap); differing
    essential counts give ``inf``.
    """
    _check_pair(D1, D2)
    fin1, ess1 = _split(D1)
    fin2, ess2 = _split(D2)
    ess = _essential_match(D1, D2, ess1, ess2)
    if ess is None:
        return DiagramDistanceReport(math.inf, None)
    ess_pairs, gaps = ess
    value, fin_pairs = _bottleneck_finite(D1.points[fin1], D2.points[fin2])
    matching = ess_pairs + [
        (None if i is None else int(fin1[i]), None if j is None else int(fin2[j])) for i, j in fin_pairs
    ]
    value = max(value, float(gaps.max(initial=0.0)))
    return DiagramDistanceReport(value, matching)


def wasserstein(D1, D2, p=1.0):
    """p-Wasserstein distance with sup-norm ground metric via optimal assignment."""
    _check_pair(D1, D2)
    if p < 1:
        raise ValueError("p must be at least 1")
    fin1, ess1 = _split(D1)
    fin2, ess2 = _split(D2)
    ess = _essential_match(D1, D2, ess1, ess2)
    if ess is None:
        return DiagramDistanceReport(math.inf, None)
    ess_pairs, gaps = ess
    total = float(np.sum(gaps**p))
    A, B = D1.points[fin1], D2.points[fin2]
    a, b = len(A), len(B)
    matching = list(ess_pairs)
    if a + b:
        cost, diag_a, diag_b = _finite_costs(A, B)
        C = np.full((a + b, a + b), np.inf)
        C[:a, :b] = cost**p
        C[np.arange(a), b + np.arange(a)] = diag_a**p
        C[a + np.arange(b), np.arange(b)] = diag_b**p
        C[a:, b:] = 0.0
        rows, cols = linear_sum_assignment(C)
        total += float(C[rows, cols].sum())
        for r, c in zip(rows.tolist(), cols.tolist()):
            if r < a and c < b:
                matching.append((int(fin1[r]), int(fin2[c])))
            elif r < a:
                matching.append((int(fin1[r]), None))
            elif c < b:
                matching.append((None, int(fin2[c])))
    return DiagramDistanceReport(total ** (1.0 / p), matching)
