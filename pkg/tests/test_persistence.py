import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flatscan.complex import betti, cubical_from_occupancy, flat_filtration, load_grid, lower_star, subcomplex
from flatscan.grassmann import canonicalize, sample_flats
from flatscan.persistence import PersistenceDiagram, bottleneck, pd0_union_find, pd_reduction, wasserstein
from flatscan.shapes import annulus, shell

INF = math.inf


def dg(points, degree=0):
    return PersistenceDiagram(degree, np.array(points, dtype=float).reshape(-1, 2))


def brute_force(D1, D2, p=None):
    """Optimal matching cost by enumerating every bijection of the diagonal-augmented sets."""
    A, B = D1.finite, D2.finite
    ea, eb = np.sort(D1.essential[:, 0]), np.sort(D2.essential[:, 0])
    if len(ea) != len(eb):
        return INF
    # left: points of A then diagonal slots for B; right: points of B then diagonal slots for A
    a, b = len(A), len(B)

    def cost(i, j):
        if i < a and j < b:
            return np.abs(A[i] - B[j]).max()
        if i < a:
            return (A[i, 1] - A[i, 0]) / 2 if j - b == i else INF
        if j < b:
            return (B[j, 1] - B[j, 0]) / 2 if i - a == j else INF
        return 0.0

    ess = np.abs(ea - eb)
    best = INF
    for perm in itertools.permutations(range(a + b)):
        costs = [cost(i, j) for i, j in enumerate(perm)]
        if p is None:
            v = max(costs + list(ess) + [0.0])
        else:
            v = (sum(c**p for c in costs) + sum(e**p for e in ess)) ** (1 / p)
        best = min(best, v)
    return best


finite_diagrams = st.lists(
    st.tuples(st.integers(0, 20), st.integers(1, 10)).map(lambda t: (t[0] / 2, t[0] / 2 + t[1] / 2)),
    max_size=4,
).map(lambda pts: dg(pts))


# --- diagram type ---------------------------------------------------------------------


def test_diagram_rejects_zero_persistence():
    with pytest.raises(ValueError):
        dg([(1.0, 1.0)])


def test_diagram_sorted_and_split():
    D = dg([(2.0, 3.0), (0.0, INF), (1.0, 5.0)])
    np.testing.assert_array_equal(D.points[:, 0], [0.0, 1.0, 2.0])
    assert len(D.essential) == 1 and len(D.finite) == 2
    assert D.shifted(1.0).same_as(dg([(3.0, 4.0), (1.0, INF), (2.0, 6.0)]))


# --- degree 0 --------------------------------------------------------------------------


def test_single_vertex():
    S = cubical_from_occupancy(np.ones((1, 1), bool))
    sub = subcomplex(S, [np.array([True, False, False, False]), np.zeros(4, bool), np.zeros(1, bool)])
    D = pd0_union_find(sub, lower_star(sub, [0.0]))
    assert D.same_as(dg([(0.0, INF)]))


def test_edge_kills_young_vertex_at_birth():
    S = load_grid("grid 1 1\n1\n")
    keep = [np.array([True, True, False, False]), np.zeros(4, bool), np.zeros(1, bool)]
    e = [i for i, c in enumerate(S.cells[1]) if set(c) == {0, 1}]
    keep[1][e] = True
    sub = subcomplex(S, keep)
    D = pd0_union_find(sub, lower_star(sub, [0.0, 1.0]))
    assert D.same_as(dg([(0.0, INF)]))


def test_annulus_line_through_hole():
    S = cubical_from_occupancy(annulus(64, 24, 10))
    P = canonicalize([[1.0, 0.0]], [0.0, 0.0])
    D = pd0_union_find(S, flat_filtration(S, P))
    assert D.same_as(dg([(0.0, 10.0), (0.0, INF)]))


def test_pd0_has_one_essential_point_per_component():
    S = load_grid("grid 3 5\n1 0 1 0 1\n1 0 0 0 1\n1 0 1 0 1\n")
    D = pd0_union_find(S, lower_star(S, np.random.default_rng(0).random(S.count(0))))
    assert len(D.essential) == betti(S, 0)[0] == 4


# --- reduction ----------------------------------------------------------------------------


def _alive(D, r):
    return int(np.count_nonzero((D.points[:, 0] <= r) & (r < D.points[:, 1])))


def _check_against_sublevel_betti(S, f, max_degree):
    diagrams = pd_reduction(S, f, max_degree)
    for r in np.unique(f.values):
        sub = subcomplex(S, [f.by_dim(d) <= r for d in range(len(S.cells))])
        b = betti(sub, max_degree)
        assert [_alive(D, r) for D in diagrams] == b, r
    return diagrams


def test_annulus_height_pd1_against_sublevel_homology():
    S = cubical_from_occupancy(annulus(32, 12, 5))
    f = lower_star(S, S.vertices[:, 1])
    D0, D1 = _check_against_sublevel_betti(S, f, 1)
    assert len(D1) == 1 and len(D1.essential) == 1
    hole_top = max(y for y in np.unique(S.vertices[:, 1]) if y < 6)
    assert D1.points[0, 0] == pytest.approx(hole_top)


def test_random_filtrations_against_sublevel_homology():
    rng = np.random.default_rng(12)
    for _ in range(10):
        occ = rng.random((rng.integers(2, 6), rng.integers(2, 6))) < 0.6
        S = cubical_from_occupancy(occ)
        f = lower_star(S, rng.integers(0, 5, S.count(0)).astype(float))
        _check_against_sublevel_betti(S, f, 1)


def test_shell_tubular_pd0_has_two_points():
    S = cubical_from_occupancy(shell(20, 9, 5))
    P = canonicalize([[0.0, 0.0, 1.0]], [0.0, 0.0, 0.0])
    D0, D1 = pd_reduction(S, flat_filtration(S, P), 1)
    assert len(D0) == 2


def test_reduction_matches_union_find_on_random_grids():
    rng = np.random.default_rng(99)
    for _ in range(60):
        occ = rng.random((rng.integers(1, 9), rng.integers(1, 9))) < 0.6
        S = cubical_from_occupancy(occ)
        f = lower_star(S, rng.integers(0, 6, S.count(0)).astype(float))
        assert pd_reduction(S, f, 0)[0].same_as(pd0_union_find(S, f))


def test_reduction_3d_against_betti():
    occ = np.random.default_rng(4).random((4, 4, 4)) < 0.55
    S = cubical_from_occupancy(occ)
    f = lower_star(S, np.random.default_rng(5).random(S.count(0)))
    diagrams = pd_reduction(S, f, 2)
    assert [len(D.essential) for D in diagrams] == betti(S, 2)


def test_reduction_degree_bound():
    S = load_grid("grid 1 1\n1\n")
    with pytest.raises(ValueError):
        pd_reduction(S, lower_star(S, np.zeros(4)), 2)


def test_points_are_filtration_values():
    S = cubical_from_occupancy(annulus(32, 12, 5))
    P = sample_flats(1, 2, 1, S.bounding_radius, 3)[0]
    f = flat_filtration(S, P)
    vals = set(f.values.tolist()) | {INF}
    for D in pd_reduction(S, f, 1):
        assert set(D.points.ravel().tolist()) <= vals


# --- distances -----------------------------------------------------------------------


def test_bottleneck_examples():
    D = dg([(0.0, 2.0), (1.0, 4.0), (0.0, INF)])
    assert bottleneck(D, D).value == 0.0
    assert bottleneck(dg([(0.0, 2.0)]), dg([])).value == 1.0
    assert bottleneck(dg([(0.0, INF)]), dg([(0.0, INF), (1.0, INF)])).value == INF


def test_wasserstein_examples():
    D = dg([(0.0, 2.0), (1.0, 4.0)])
    assert wasserstein(D, D).value == 0.0
    assert wasserstein(dg([(0.0, 2.0)]), dg([])).value == 1.0
    # (0,4) to the diagonal costs 2, the (0,2) pair matches exactly
    assert wasserstein(dg([(0.0, 2.0), (0.0, 4.0)]), dg([(0.0, 2.0)]), p=2).value == pytest.approx(2.0)
    assert wasserstein(dg([(0.0, 2.0), (0.0, 4.0)]), dg([(0.0, 2.0)]), p=2).value == pytest.approx(
        brute_force(dg([(0.0, 2.0), (0.0, 4.0)]), dg([(0.0, 2.0)]), p=2)
    )


def test_distance_errors():
    with pytest.raises(ValueError):
        bottleneck(dg([], 0), dg([], 1))
    with pytest.raises(ValueError):
        wasserstein(dg([], 0), dg([], 1))
    with pytest.raises(ValueError):
        wasserstein(dg([]), dg([]), p=0.5)


def test_essential_gap_counts():
    assert bottleneck(dg([(0.0, INF)]), dg([(0.5, INF)])).value == 0.5
    assert wasserstein(dg([(0.0, INF), (1.0, 3.0)]), dg([(0.5, INF)]), p=1).value == pytest.approx(1.5)
    assert wasserstein(dg([(0.0, INF)]), dg([])).value == INF


def _matching_value(D1, D2, matching, p=None):
    used1 = [i for i, _ in matching if i is not None]
    used2 = [j for _, j in matching if j is not None]
    assert sorted(used1) == list(range(len(D1)))
    assert sorted(used2) == list(range(len(D2)))
    costs = []
    for i, j in matching:
        if i is not None and j is not None:
            a, b = D1.points[i], D2.points[j]
            costs.append(abs(a[0] - b[0]) if math.isinf(a[1]) else np.abs(a - b).max())
        else:
            q = D1.points[i] if i is not None else D2.points[j]
            costs.append((q[1] - q[0]) / 2)
    if p is None:
        return max(costs, default=0.0)
    return sum(c**p for c in costs) ** (1 / p)


@settings(max_examples=60, deadline=None)
@given(finite_diagrams, finite_diagrams)
def test_against_brute_force(D1, D2):
    b = bottleneck(D1, D2)
    assert b.value == pytest.approx(brute_force(D1, D2), abs=1e-12)
    assert _matching_value(D1, D2, b.matching) == pytest.approx(b.value, abs=1e-12)
    for p in (1.0, 2.0):
        w = wasserstein(D1, D2, p)
        assert w.value == pytest.approx(brute_force(D1, D2, p), abs=1e-9)
        assert _matching_value(D1, D2, w.matching, p) == pytest.approx(w.value, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(finite_diagrams, finite_diagrams, finite_diagrams)
def test_metric_axioms(A, B, C):
    for dist in (lambda x, y: bottleneck(x, y).value, lambda x, y: wasserstein(x, y, 1.0).value,
                 lambda x, y: wasserstein(x, y, 2.0).value):
        assert dist(A, A) == pytest.approx(0.0, abs=1e-12)
        assert dist(A, B) == pytest.approx(dist(B, A), abs=1e-12)
        assert dist(A, C) <= dist(A, B) + dist(B, C) + 1e-9


def test_wasserstein_approaches_bottleneck():
    D1 = dg([(0.0, 3.0), (1.0, 2.5), (2.0, 6.0)])
    D2 = dg([(0.5, 3.0), (2.0, 5.0)])
    target = bottleneck(D1, D2).value
    values = [wasserstein(D1, D2, p).value for p in (1, 2, 8, 32)]
    assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))
    assert all(v >= target - 1e-12 for v in values)
    assert values[-1] - target < 0.05


def test_bottleneck_stability_on_annulus():
    S = cubical_from_occupancy(annulus(32, 12, 5))
    flats = sample_flats(1, 2, 20, S.bounding_radius, 2)
    for P, Q in zip(flats[::2], flats[1::2]):
        fP, fQ = flat_filtration(S, P), flat_filtration(S, Q)
        gap = np.abs(fP.vertex_values - fQ.vertex_values).max()
        for DP, DQ in zip(pd_reduction(S, fP, 1), pd_reduction(S, fQ, 1)):
            assert bottleneck(DP, DQ).value <= gap + 1e-9


def test_bottleneck_larger_diagrams_against_assignment_bound():
    rng = np.random.default_rng(0)
    for _ in range(10):
        pts1 = rng.uniform(0, 5, (12, 2))
        pts2 = rng.uniform(0, 5, (9, 2))
        pts1[:, 1] = pts1[:, 0] + rng.uniform(0.1, 2, 12)
        pts2[:, 1] = pts2[:, 0] + rng.uniform(0.1, 2, 9)
        D1, D2 = dg(pts1), dg(pts2)
        b = bottleneck(D1, D2)
        assert _matching_value(D1, D2, b.matching) == pytest.approx(b.value)
        # any p-Wasserstein matching is a feasible matching, so bottleneck is below its max cost
        assert b.value <= wasserstein(D1, D2, 64).value + 1e-9
