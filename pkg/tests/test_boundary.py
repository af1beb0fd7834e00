import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from halfturn import boundary as bd
from halfturn.errors import NonPositiveScale, NotOrthogonal
from halfturn.isometries import inversion_swap, reference_parabolic
from halfturn.lorentz import DIM, J, lorentz_inner

coords = arrays(np.float64, 3, elements=st.floats(-5, 5, allow_nan=False))


def _rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    return q if np.linalg.det(q) > 0 else -q


@given(coords)
def test_ideal_vectors_are_light_like_and_invert(u):
    w = bd.ideal_vector(u)
    assert abs(lorentz_inner(w, w)) < 1e-9 * max(1.0, w @ w)
    np.testing.assert_allclose(bd.boundary_point(w), u, atol=1e-9 * max(1.0, u @ u))


def test_infinity_round_trip():
    np.testing.assert_array_equal(bd.ideal_vector("inf"), bd.INFINITY)
    assert bd.boundary_point(3.0 * bd.INFINITY) == bd.INF
    np.testing.assert_array_equal(bd.ideal_vector(np.zeros(3)), [0, 0, 0, -1, 1])


@given(coords, st.floats(0.1, 10))
def test_upper_half_space_round_trip(u, h):
    x = bd.hyperboloid_point(u, h)
    assert lorentz_inner(x, x) == pytest.approx(-1.0, rel=1e-9)
    u2, h2 = bd.upper_half_space(x)
    np.testing.assert_allclose(u2, u, atol=1e-7 * max(1.0, u @ u))
    assert h2 == pytest.approx(h, rel=1e-7)


@pytest.mark.parametrize("seed", range(5))
def test_similarity_matches_direct_formula(seed):
    rng = np.random.default_rng(seed)
    A, b, lam = _rotation(rng), rng.normal(size=3), float(rng.uniform(0.3, 3))
    M = bd.similarity_matrix(A, b, lam)
    np.testing.assert_allclose(M.T @ J @ M, J, atol=1e-10 * max(1.0, np.linalg.norm(M)) ** 2)
    for _ in range(5):
        u = rng.normal(size=3)
        np.testing.assert_allclose(bd.apply_to_boundary(M, u), lam * A @ u + b, atol=1e-9)
    assert bd.apply_to_boundary(M, "inf") == bd.INF
    A2, b2, lam2 = bd.similarity_parts(M)
    np.testing.assert_allclose(A2, A, atol=1e-9)
    np.testing.assert_allclose(b2, b, atol=1e-9)
    assert lam2 == pytest.approx(lam)


def test_translation_is_the_reference_parabolic():
    P4, _, _ = reference_parabolic(4, [1.0, 2.0, 2.0])
    np.testing.assert_allclose(bd.translation_matrix([1.0, 2.0, 2.0]), P4)


def test_similarity_argument_checks():
    with pytest.raises(NotOrthogonal):
        bd.similarity_matrix(np.diag([1.0, 1.0, -1.0]), np.zeros(3))
    with pytest.raises(NotOrthogonal):
        bd.similarity_matrix(2 * np.eye(3), np.zeros(3))
    with pytest.raises(NonPositiveScale):
        bd.dilation_matrix(0.0)


def test_sphere_and_plane_normals_contain_their_points():
    rng = np.random.default_rng(3)
    c, r = rng.normal(size=3), 1.7
    n = bd.sphere_normal(c, r)
    assert lorentz_inner(n, n) == pytest.approx(1.0)
    for _ in range(5):
        d = rng.normal(size=3)
        u = c + r * d / np.linalg.norm(d)
        assert abs(lorentz_inner(n, bd.ideal_vector(u))) < 1e-9
    a, off = np.array([1.0, 2.0, -1.0]), 0.5
    m = bd.euclidean_plane_normal(a, off)
    assert abs(lorentz_inner(m, bd.INFINITY)) < 1e-12
    u = off * a / (a @ a) + np.cross(a, [0.0, 0.0, 1.0])
    assert abs(lorentz_inner(m, bd.ideal_vector(u))) < 1e-9


def test_ideal_conjugator_sends_point_to_infinity():
    w = bd.ideal_vector([0.3, -1.0, 2.0])
    g = bd.ideal_conjugator(w)
    assert bd.boundary_point(g @ w) == bd.INF
    np.testing.assert_allclose(g.T @ J @ g, J, atol=1e-12)
    assert np.linalg.det(g) == pytest.approx(1.0)


def test_inversion_swap_formula():
    M = inversion_swap(np.zeros(3))
    for u in ([1.0, 2.0, 0.5], [-0.3, 0.1, 2.0]):
        u = np.array(u)
        expected = np.array([u[0], -u[1], u[2]]) / (u @ u)
        np.testing.assert_allclose(bd.apply_to_boundary(M, u), expected, atol=1e-12)
    assert np.linalg.det(M) == pytest.approx(1.0)


@given(st.floats(-math.pi, math.pi))
def test_rotation_about_axis(theta):
    R = bd.rotation_about([0.0, 0.0, 2.0], theta)
    np.testing.assert_allclose(R @ [0, 0, 1.0], [0, 0, 1.0], atol=1e-12)
    np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-12)
    assert R[0, 0] == pytest.approx(math.cos(theta), abs=1e-12)


def test_lorentz_inverse():
    M = bd.similarity_matrix(bd.rotation_about([1, 1, 0], 0.7), [1.0, 0.0, 2.0], 1.5)
    np.testing.assert_allclose(bd.lorentz_inverse(M) @ M, np.eye(DIM), atol=1e-10)
