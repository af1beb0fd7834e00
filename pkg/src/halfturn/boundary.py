"""Upper half-space and boundary conversions.

Boundary points ``u`` of R^3 ∪ {∞} correspond to light-like rays

    φ(u) = (2u, |u|² − 1, |u|² + 1),    φ(∞) = (0, 0, 0, 1, 1),

so the origin maps to (0,0,0,−1,1) and the vertical geodesic over the
origin has carrier span{e4, e0}.
"""

from __future__ import annotations

import math
from typing import Sequence, Union

import numpy as np

from .errors import NonPositiveScale, NotOrthogonal, ZeroVector
from .lorentz import DIM, J, as_vector, get_tol

INF = "inf"
BoundaryPoint = Union[Sequence[float], str, None]

INFINITY = np.array([0.0, 0.0, 0.0, 1.0, 1.0])


def is_infinity(u: BoundaryPoint) -> bool:
    return u is None or (isinstance(u, str) and u.strip().lower() in {"inf", "infinity", "∞"})


def ideal_vector(u: BoundaryPoint) -> np.ndarray:
    """Light-like vector of a boundary point (``"inf"`` allowed)."""
    if is_infinity(u):
        return INFINITY.copy()
    u = np.asarray(u, dtype=float).reshape(3)
    r = float(u @ u)
    return np.concatenate([2.0 * u, [r - 1.0, r + 1.0]])


def boundary_point(w, tol: float | None = None):
    """Inverse of :func:`ideal_vector`; returns ``"inf"`` for the ray at ∞."""
    w = as_vector(w)
    tol = get_tol() if tol is None else tol
    scale = float(np.linalg.norm(w))
    if scale == 0:
        raise ZeroVector("zero vector has no boundary point")
    denom = w[4] - w[3]
    if abs(denom) <= tol * scale:
        return INF
    return w[:3] / denom


def hyperboloid_point(u: Sequence[float], height: float) -> np.ndarray:
    """Point of the upper half-space model as a unit time-like vector."""
    if not height > 0:
        raise ValueError("height must be positive")
    u = np.asarray(u, dtype=float).reshape(3)
    r = float(u @ u) + height * height
    return np.concatenate([2.0 * u, [r - 1.0, r + 1.0]]) / (2.0 * height)


def upper_half_space(x) -> tuple[np.ndarray, float]:
    """Inverse of :func:`hyperboloid_point` for a unit time-like vector."""
    x = as_vector(x)
    denom = x[4] - x[3]
    return x[:3] / denom, 1.0 / denom


def sphere_normal(center: Sequence[float], radius: float) -> np.ndarray:
    """Unit space-like normal of the hyperplane bounded by a Euclidean sphere."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    c = np.asarray(center, dtype=float).reshape(3)
    c2 = float(c @ c)
    rho2 = radius * radius
    return np.concatenate([-c, [(1.0 + rho2 - c2) / 2.0, (rho2 - c2 - 1.0) / 2.0]]) / radius


def euclidean_plane_normal(normal: Sequence[float], offset: float) -> np.ndarray:
    """Unit normal of the hyperplane bounded by ``{u : u·a = d} ∪ {∞}``."""
    a = np.asarray(normal, dtype=float).reshape(3)
    na = float(np.linalg.norm(a))
    if na == 0:
        raise ZeroVector("plane normal must be nonzero")
    a = a / na
    d = offset / na
    return np.concatenate([a, [d, d]])


def rotation_embedding(A) -> np.ndarray:
    m = np.eye(DIM)
    m[:3, :3] = A
    return m


def translation_matrix(b: Sequence[float]) -> np.ndarray:
    """Lorentz matrix of ``u ↦ u + b``."""
    x, y, z = (float(t) for t in np.asarray(b, dtype=float).reshape(3))
    s = x * x + y * y + z * z
    return np.array(
        [
            [1.0, 0.0, 0.0, -x, x],
            [0.0, 1.0, 0.0, -y, y],
            [0.0, 0.0, 1.0, -z, z],
            [x, y, z, 1.0 - s / 2.0, s / 2.0],
            [x, y, z, -s / 2.0, 1.0 + s / 2.0],
        ]
    )


def dilation_matrix(lam: float) -> np.ndarray:
    """Lorentz matrix of ``u ↦ λu``: a boost in the (e4, e0) plane."""
    if not lam > 0:
        raise NonPositiveScale("dilation factor must be positive")
    c = (lam + 1.0 / lam) / 2.0
    s = (lam - 1.0 / lam) / 2.0
    m = np.eye(DIM)
    m[3, 3] = c
    m[3, 4] = s
    m[4, 3] = s
    m[4, 4] = c
    return m


def similarity_matrix(A, b, lam: float = 1.0, tol: float | None = None) -> np.ndarray:
    """Poincaré extension of ``u ↦ λAu + b`` with ``A`` in SO(3)."""
    tol = get_tol() if tol is None else tol
    A = np.asarray(A, dtype=float).reshape(3, 3)
    if np.linalg.norm(A.T @ A - np.eye(3)) > max(tol, 1e-12) * 10:
        raise NotOrthogonal("A is not orthogonal")
    if np.linalg.det(A) < 0:
        raise NotOrthogonal("A must be a rotation (det +1)")
    if not lam > 0:
        raise NonPositiveScale("dilation factor must be positive")
    return translation_matrix(b) @ dilation_matrix(lam) @ rotation_embedding(A)


def apply_to_boundary(M, u: BoundaryPoint):
    """Image of a boundary point under the Lorentz matrix ``M``."""
    return boundary_point(np.asarray(M, dtype=float) @ ideal_vector(u))


def rotation_to(v: Sequence[float], target_axis: int = 3) -> np.ndarray:
    """A rotation of R^4 (det +1) taking the unit vector ``v`` to ``e_target``."""
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    n = v.shape[0]
    e = np.zeros(n)
    e[target_axis] = 1.0
    # Householder pair: reflect v to e, then a fixed reflection keeps det +1
    w = v - e
    if np.linalg.norm(w) < 1e-14:
        return np.eye(n)
    h = np.eye(n) - 2.0 * np.outer(w, w) / float(w @ w)
    flip = np.eye(n)
    other = (target_axis + 1) % n
    flip[other, other] = -1.0
    return flip @ h


def ideal_conjugator(w) -> np.ndarray:
    """Lorentz rotation ``g`` (fixing e0) with ``g w`` on the ray of ∞."""
    w = as_vector(w)
    if w[4] < 0:
        w = -w
    g = np.eye(DIM)
    g[:4, :4] = rotation_to(w[:4], 3)
    return g


def lorentz_inverse(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    return J @ M.T @ J


def similarity_parts(M, tol: float | None = None) -> tuple[np.ndarray, np.ndarray, float]:
    """Recover ``(A, b, λ)`` from a Lorentz matrix fixing ∞.

    The map is read off its action on the boundary points 0 and e_i.
    """
    M = np.asarray(M, dtype=float)
    b = apply_to_boundary(M, np.zeros(3))
    if isinstance(b, str):
        raise ValueError("matrix sends 0 to infinity")
    images = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1.0
        img = apply_to_boundary(M, e)
        if isinstance(img, str):
            raise ValueError("matrix does not fix infinity")
        images.append(img - b)
    lam_a = np.array(images).T
    lam = float(np.cbrt(np.linalg.det(lam_a)))
    return lam_a / lam, b, lam


def rotation_about(axis: Sequence[float], angle: float) -> np.ndarray:
    """3×3 rotation by ``angle`` about ``axis`` (Rodrigues)."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle) * kx + (1 - math.cos(angle)) * (kx @ kx)
