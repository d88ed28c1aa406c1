import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from flatscan.grassmann import (
    Flat,
    affine_distance,
    appendix_bound,
    canonicalize,
    deaffine,
    distance_to_flat,
    embed,
    grassmann_distance,
    move_flat,
    principal_angles,
    principal_angles_recursive,
    sample_flats,
    weyl_gap,
)
from flatscan.linalg import gram_schmidt, jacobi_svd, orthonormal_complement


def linear(*rows):
    rows = np.array(rows, dtype=float)
    return canonicalize(rows, np.zeros(rows.shape[1]))


def random_rotation(rng, n):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


# --- linalg ----------------------------------------------------------------


@pytest.mark.parametrize("shape", [(3, 3), (5, 2), (2, 5), (1, 4), (6, 6)])
def test_jacobi_svd_matches_lapack(shape):
    rng = np.random.default_rng(sum(shape))
    M = rng.standard_normal(shape)
    U, s, Vt = jacobi_svd(M)
    np.testing.assert_allclose(s, np.linalg.svd(M, compute_uv=False), atol=1e-13)
    np.testing.assert_allclose(U @ np.diag(s) @ Vt, M, atol=1e-13)
    np.testing.assert_allclose(U.T @ U, np.eye(len(s)), atol=1e-13)


def test_jacobi_svd_rank_deficient_completes_u():
    M = np.outer([1.0, 2.0, 2.0], [1.0, 0.0, 0.0])
    U, s, Vt = jacobi_svd(M)
    np.testing.assert_allclose(s, [3.0, 0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(U.T @ U, np.eye(3), atol=1e-14)


def test_gram_schmidt_degenerate():
    with pytest.raises(ValueError, match="degenerate basis"):
        gram_schmidt([[1.0, 2.0], [2.0, 4.0]])


def test_orthonormal_complement_spans_rest():
    rng = np.random.default_rng(0)
    Q = gram_schmidt(rng.standard_normal((2, 5)))
    C = orthonormal_complement(Q, 5)
    full = np.vstack([Q, C])
    np.testing.assert_allclose(full @ full.T, np.eye(5), atol=1e-13)


# --- canonical form ----------------------------------------------------------


def test_canonicalize_projects_point():
    P = canonicalize([[2.0, 0.0]], [3.0, 5.0])
    np.testing.assert_allclose(P.basis, [[1.0, 0.0]])
    np.testing.assert_allclose(P.displacement, [0.0, 5.0])


def test_canonicalize_point_flat():
    P = canonicalize(np.zeros((0, 2)), [1.0, 2.0])
    assert P.flat_dim == 0 and P.ambient_dim == 2
    np.testing.assert_allclose(P.displacement, [1.0, 2.0])


def test_canonicalize_against_qr_oracle():
    raw = np.array([[1.0, 0.0, 0.0], [1.0, 1.0, 0.0]])
    P = canonicalize(raw, [0.0, 0.0, 3.0])
    np.testing.assert_allclose(P.basis, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], atol=1e-15)
    np.testing.assert_allclose(P.displacement, [0.0, 0.0, 3.0])
    rng = np.random.default_rng(5)
    for _ in range(20):
        raw = rng.standard_normal((2, 4))
        point = rng.standard_normal(4)
        P = canonicalize(raw, point)
        Q, _ = np.linalg.qr(raw.T)
        np.testing.assert_allclose(P.basis.T @ P.basis, Q @ Q.T, atol=1e-12)
        np.testing.assert_allclose(P.displacement, point - Q @ (Q.T @ point), atol=1e-12)


def test_canonicalize_degenerate():
    with pytest.raises(ValueError, match="degenerate basis"):
        canonicalize([[1.0, 1.0], [2.0, 2.0]], [0.0, 0.0])


def test_flat_rejects_non_normal_form():
    with pytest.raises(ValueError):
        Flat(np.array([[1.0, 1.0]]), np.zeros(2))
    with pytest.raises(ValueError):
        Flat(np.array([[1.0, 0.0]]), np.array([1.0, 0.0]))


@pytest.mark.parametrize(
    "basis, point, expected",
    [([[1.0, 0.0]], [0.0, 1.0], [0.0, 0.0]), ([], [1.0, 2.0], [0.0, 0.0]), ([[1, 0, 0], [0, 1, 0]], [0, 0, 3], [0, 0, 0])],
)
def test_deaffine(basis, point, expected):
    n = len(point)
    P = canonicalize(np.array(basis, dtype=float).reshape(-1, n), point)
    L = deaffine(P)
    np.testing.assert_array_equal(L.displacement, expected)
    np.testing.assert_array_equal(L.basis, P.basis)


def test_embed_point():
    E = embed(canonicalize(np.zeros((0, 2)), [3.0, 4.0]))
    np.testing.assert_allclose(np.abs(E.basis), [np.array([3.0, 4.0, 1.0]) / math.sqrt(26)])
    assert E.is_linear


def test_embed_line():
    r = 2.0
    E = embed(canonicalize([[1.0, 0.0]], [0.0, r]))
    np.testing.assert_allclose(E.basis[0], [1.0, 0.0, 0.0])
    np.testing.assert_allclose(E.basis[1], np.array([0.0, r, 1.0]) / math.sqrt(1 + r * r))


def test_embed_origin():
    E = embed(canonicalize(np.zeros((0, 3)), np.zeros(3)))
    np.testing.assert_allclose(E.basis, [[0.0, 0.0, 0.0, 1.0]])


# --- principal angles and distances ------------------------------------------


@pytest.mark.parametrize("theta", [0.0, 0.1, 0.7, math.pi / 3, math.pi / 2])
def test_principal_angle_of_lines(theta):
    A = linear([1.0, 0.0])
    B = canonicalize([[math.cos(theta), math.sin(theta)]], [0.0, 0.0])
    np.testing.assert_allclose(principal_angles(A, B), [theta], atol=1e-12)


def test_principal_angles_two_planes():
    A = linear([1, 0, 0, 0], [0, 1, 0, 0])
    B = linear([1, 0, 0, 0], [0, 0, 1, 0])
    np.testing.assert_allclose(principal_angles(A, B), [0.0, math.pi / 2], atol=1e-12)
    np.testing.assert_allclose(principal_angles_recursive(A, B), [0.0, math.pi / 2], atol=1e-12)
    assert grassmann_distance(A, B) == pytest.approx(math.pi / 2, abs=1e-12)


def test_principal_angles_mixed_dimensions_and_points():
    A = linear([1, 0, 0])
    B = linear([1, 0, 0], [0, 1, 0])
    np.testing.assert_allclose(principal_angles(A, B), [0.0], atol=1e-12)
    assert len(principal_angles(canonicalize(np.zeros((0, 3)), np.zeros(3)), B)) == 0


def test_principal_angles_small_angle_precision():
    t = 1e-9
    A = linear([1.0, 0.0])
    B = canonicalize([[math.cos(t), math.sin(t)]], [0.0, 0.0])
    assert principal_angles(A, B)[0] == pytest.approx(t, rel=1e-6)


def test_principal_angles_against_scipy():
    rng = np.random.default_rng(11)
    for _ in range(30):
        A = linear(*rng.standard_normal((2, 5)))
        B = linear(*rng.standard_normal((3, 5)))
        want = np.sort(scipy.linalg.subspace_angles(A.basis.T, B.basis.T))
        np.testing.assert_allclose(principal_angles(A, B), want, atol=1e-10)


def test_recursive_matches_svd_path():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        A = linear(*rng.standard_normal((2, 5)))
        B = linear(*rng.standard_normal((2, 5)))
        np.testing.assert_allclose(principal_angles_recursive(A, B), principal_angles(A, B), atol=1e-8)


def test_grassmann_distance_requires_equal_dims():
    with pytest.raises(ValueError):
        grassmann_distance(linear([1, 0, 0]), linear([1, 0, 0], [0, 1, 0]))


def test_principal_angles_require_linear():
    with pytest.raises(ValueError):
        principal_angles(canonicalize([[1.0, 0.0]], [0.0, 1.0]), linear([1.0, 0.0]))


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0, 10.0])
def test_affine_distance_horizontal_lines(r):
    P = canonicalize([[1.0, 0.0]], [0.0, 0.0])
    Q = canonicalize([[1.0, 0.0]], [0.0, r])
    assert affine_distance(P, Q) == pytest.approx(math.acos((1 + r * r) ** -0.5), abs=1e-12)


def test_affine_distance_y1_is_quarter_pi():
    P = canonicalize([[1.0, 0.0]], [0.0, 0.0])
    Q = canonicalize([[1.0, 0.0]], [0.0, 1.0])
    assert affine_distance(P, Q) == pytest.approx(math.pi / 4, abs=1e-12)


def test_affine_distance_dimension_mismatch():
    with pytest.raises(ValueError):
        affine_distance(canonicalize([[1.0, 0.0]], [0.0, 0.0]), canonicalize(np.zeros((0, 2)), [0.0, 0.0]))


def test_affine_metric_axioms():
    rng = np.random.default_rng(3)
    for m in (0, 1, 2):
        for _ in range(30):
            P, Q, R = sample_flats(m, 3, 3, 5.0, int(rng.integers(1 << 30)))
            assert affine_distance(P, P) == pytest.approx(0.0, abs=1e-9)
            assert affine_distance(P, Q) == affine_distance(Q, P)
            assert affine_distance(P, R) <= affine_distance(P, Q) + affine_distance(Q, R) + 1e-9


def test_rotation_invariance():
    rng = np.random.default_rng(8)
    for _ in range(30):
        A = linear(*rng.standard_normal((2, 4)))
        B = linear(*rng.standard_normal((2, 4)))
        R = random_rotation(rng, 4)
        RA, RB = linear(*(A.basis @ R.T)), linear(*(B.basis @ R.T))
        assert grassmann_distance(RA, RB) == pytest.approx(grassmann_distance(A, B), abs=1e-9)


def test_convergence_transfer_both_ways():
    P = canonicalize([[1.0, 0.0, 0.0]], [0.0, 1.0, 2.0])
    prev = math.inf
    for k in range(1, 12):
        e = 2.0**-k
        R = scipy.linalg.expm(e * np.array([[0, -1, 0], [1, 0, 0], [0, 0, 0.0]]))
        Q = move_flat(P, rotation=R, translation=[0.0, e, 0.0])
        d = affine_distance(P, Q)
        assert d < prev
        prev = d
    assert prev < 1e-3
    # a sequence with vanishing affine distance has vanishing Euclidean parameter gaps
    for k in range(1, 12):
        Q = canonicalize([[1.0, 2.0**-k, 0.0]], [0.0, 1.0, 2.0 + 2.0**-k])
        d = affine_distance(P, Q)
        proj_gap = np.abs(P.basis.T @ P.basis - Q.basis.T @ Q.basis).max()
        disp_gap = np.linalg.norm(P.displacement - Q.displacement)
        assert proj_gap <= 4 * d + 1e-12
        assert disp_gap <= 50 * d + 1e-12


# --- distance to a flat -------------------------------------------------------


@pytest.mark.parametrize(
    "basis, point, x, expected",
    [
        ([[1.0, 0.0]], [0.0, 0.0], [3.0, 4.0], 4.0),
        ([[1.0, 0.0]], [0.0, 1.0], [3.0, 4.0], 3.0),
        ([[1, 0, 0], [0, 1, 0]], [0, 0, 0], [1.0, 2.0, -5.0], 5.0),
    ],
)
def test_distance_to_flat(basis, point, x, expected):
    P = canonicalize(np.array(basis, dtype=float), point)
    assert distance_to_flat(P, x) == pytest.approx(expected, abs=1e-12)


def test_distance_to_flat_vectorised_matches_lstsq():
    rng = np.random.default_rng(1)
    P = sample_flats(2, 4, 1, 3.0, 9)[0]
    X = rng.standard_normal((50, 4)) * 5
    got = distance_to_flat(P, X)
    for x, g in zip(X, got):
        coef, *_ = np.linalg.lstsq(P.basis.T, x - P.displacement, rcond=None)
        assert g == pytest.approx(np.linalg.norm(x - P.displacement - P.basis.T @ coef), abs=1e-12)


def test_lipschitz_bound():
    rng = np.random.default_rng(4)
    for m in (0, 1, 2):
        flats = sample_flats(m, 3, 200, 5.0, m)
        for P in flats:
            x, y = rng.uniform(-10, 10, (2, 3))
            assert abs(distance_to_flat(P, x) - distance_to_flat(P, y)) <= (m + 1) * np.linalg.norm(x - y) + 1e-9


# --- Weyl and the bound -------------------------------------------------------


def test_weyl_gap_examples():
    assert weyl_gap(np.eye(2), np.zeros((2, 2))) == pytest.approx((1.0, 1.0))
    A = np.arange(9.0).reshape(3, 3)
    assert weyl_gap(A, A) == (0.0, 0.0)
    with pytest.raises(ValueError):
        weyl_gap(np.eye(2), np.eye(3))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_weyl_property(seed):
    rng = np.random.default_rng(seed)
    A, B = rng.standard_normal((2, 3, 3))
    gap, norm = weyl_gap(A, B)
    assert gap <= norm + 1e-10


def test_appendix_bound_origin():
    assert appendix_bound([0.0, 0.0], 1.0) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert appendix_bound([0.0, 0.0], 3.0) == pytest.approx(1 / math.sqrt(10), abs=1e-12)


def test_appendix_bound_frozen_value():
    # 2.5 / sqrt(2.5^2 + 0.5^2): the outer shell wins for p = (1, 0), delta = 0.5
    assert appendix_bound([1.0, 0.0], 0.5) == pytest.approx(0.9805806756909202, abs=1e-12)


def test_appendix_bound_rejects_nonpositive_delta():
    with pytest.raises(ValueError):
        appendix_bound([1.0, 0.0], 0.0)


def _grid_sup(p, delta):
    """Dense polar-grid supremum of |(1 + p.x)| / sqrt((1+|p|^2)(1+|x|^2)) over |x - p| >= delta, |x| <= 1e3."""
    ang = np.linspace(0, 2 * np.pi, 1441)
    radii = np.concatenate([np.linspace(0, 10, 801), np.geomspace(10, 1e3, 400)])
    around = delta + np.concatenate([[0.0], np.geomspace(1e-9, 5.0, 200)])
    pts = [np.stack([np.outer(radii, np.cos(ang)), np.outer(radii, np.sin(ang))], -1).reshape(-1, 2)]
    pts.append(p + np.stack([np.outer(around, np.cos(ang)), np.outer(around, np.sin(ang))], -1).reshape(-1, 2))
    x = np.concatenate(pts)
    x = x[(np.linalg.norm(x - p, axis=1) >= delta) & (np.linalg.norm(x, axis=1) <= 1e3)]
    f = np.abs(1 + x @ p) / np.sqrt((1 + p @ p) * (1 + np.einsum("ij,ij->i", x, x)))
    return f.max()


def test_appendix_bound_dominates_grid_search():
    rng = np.random.default_rng(17)
    for _ in range(10):
        p = rng.uniform(-3, 3, 2)
        delta = rng.uniform(0.05, 3.0)
        B = appendix_bound(p, delta)
        assert B < 1
        assert _grid_sup(p, delta) <= B + 1e-12


# --- sampling -------------------------------------------------------------------


def test_sample_flats_deterministic_and_canonical():
    a = sample_flats(0, 2, 3, 5.0, 7)
    b = sample_flats(0, 2, 3, 5.0, 7)
    assert len(a) == 3
    for P, Q in zip(a, b):
        np.testing.assert_array_equal(P.displacement, Q.displacement)
        assert np.linalg.norm(P.displacement) <= 5.0
    lines = sample_flats(1, 2, 64, 10.0, 1)
    assert len(lines) == 64
    for P in lines:
        assert abs(np.linalg.norm(P.basis) - 1) < 1e-10
        assert abs(P.basis[0] @ P.displacement) < 1e-10
        assert np.linalg.norm(P.displacement) <= 10.0 + 1e-12


@pytest.mark.parametrize("args", [(2, 2, 1, 1.0, 0), (0, 2, 0, 1.0, 0), (0, 2, 1, 0.0, 0), (-1, 2, 1, 1.0, 0)])
def test_sample_flats_invalid(args):
    with pytest.raises(ValueError):
        sample_flats(*args)


def test_sample_flats_directions_rotation_invariant_in_mean():
    flats = sample_flats(1, 3, 4000, 1.0, 123)
    second_moment = np.mean([np.outer(P.basis[0], P.basis[0]) for P in flats], axis=0)
    np.testing.assert_allclose(second_moment, np.eye(3) / 3, atol=0.03)
