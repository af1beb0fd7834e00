"""Random objects for tests, built without going through the library's own samplers."""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm

from halfturn.boundary import rotation_about, similarity_matrix, translation_matrix
from halfturn.geometry import GeoObject, Kind
from halfturn.lorentz import DIM, J, Subspace

E = np.eye(DIM)


def random_lorentz(rng: np.random.Generator, scale: float = 0.6) -> np.ndarray:
    """exp of a random element of so(4,1): X = J S with S antisymmetric."""
    S = rng.normal(scale=scale, size=(DIM, DIM))
    return expm(J @ (S - S.T) / 2.0)


def hyperboloid_point(rng: np.random.Generator, spread: float = 1.0) -> np.ndarray:
    x = rng.normal(scale=spread, size=4)
    return np.append(x, math.sqrt(1.0 + x @ x))


def plane_through(x: np.ndarray, u: np.ndarray, v: np.ndarray) -> GeoObject:
    return GeoObject(Kind.PLANE, Subspace([x, u, v]))


def random_plane(rng: np.random.Generator, spread: float = 1.0) -> GeoObject:
    """Plane through a random point spanned by two random tangent directions."""
    x = hyperboloid_point(rng, spread)
    tangent = [w + (w @ J @ x) * x for w in rng.normal(size=(2, DIM))]
    return plane_through(x, *tangent)


def moved(P: GeoObject, g: np.ndarray) -> GeoObject:
    return GeoObject(Kind.PLANE, Subspace(P.basis @ g.T))


def rot(i: int, j: int, theta: float) -> np.ndarray:
    m = np.eye(DIM)
    c, s = math.cos(theta), math.sin(theta)
    m[[i, i, j, j], [i, j, i, j]] = [c, -s, s, c]
    return m


def boost(length: float) -> np.ndarray:
    m = np.eye(DIM)
    c, s = math.cosh(length), math.sinh(length)
    m[3:, 3:] = [[c, s], [s, c]]
    return m


# -- one representative per class, before conjugation ------------------------------


def canonical(cls: str, rng: np.random.Generator) -> np.ndarray:
    t1 = rng.uniform(0.3, 2.8)
    t2 = rng.uniform(0.3, 2.8)
    ell = rng.uniform(0.2, 1.5)
    if cls == "EllipticI":
        return rot(0, 1, t1)
    if cls == "EllipticII":
        if abs(t1 - t2) < 0.1:
            t2 = t1 + 0.2
        return rot(0, 1, t1) @ rot(2, 3, t2)
    if cls == "Isoclinic":
        return rot(0, 1, t1) @ rot(2, 3, t1)
    if cls == "Involution":
        return rot(0, 1, math.pi) @ rot(2, 3, math.pi)
    if cls == "PureHyperbolic":
        return boost(ell)
    if cls == "PureLoxodromic":
        return boost(ell) @ rot(0, 1, t1)
    if cls == "PureParabolic":
        return translation_matrix(rng.normal(size=3))
    if cls == "ScrewParabolic":
        b = rng.normal(size=3)
        return similarity_matrix(rotation_about(b, t1), b)
    if cls == "Identity":
        return np.eye(DIM)
    raise ValueError(cls)


CLASS_OF = {
    "Isoclinic": "EllipticII",
    "Involution": "EllipticII",
}
CASES = [
    "EllipticI",
    "PureHyperbolic",
    "PureParabolic",
    "PureLoxodromic",
    "ScrewParabolic",
    "EllipticII",
    "Isoclinic",
    "Involution",
    "Identity",
]


def sample_isometry(cls: str, rng: np.random.Generator) -> np.ndarray:
    g = random_lorentz(rng, 0.4)
    return g @ canonical(cls, rng) @ np.linalg.inv(g)


# -- plane pairs in each relative position -------------------------------------------


def _unit(v):
    return v / np.linalg.norm(v)


def configured_pair(kind: str, rng: np.random.Generator) -> tuple[GeoObject, GeoObject]:
    """Two planes in the named relative position, moved by a random isometry."""
    e = E
    if kind == "random":
        return random_plane(rng), random_plane(rng)
    if kind in ("point", "orthogonal-point", "isoclinic-point"):
        q = np.linalg.qr(rng.normal(size=(4, 4)))[0]
        u = np.zeros((4, DIM))
        u[:, :4] = q.T
        if kind == "orthogonal-point":
            P, Q = plane_through(e[4], u[0], u[1]), plane_through(e[4], u[2], u[3])
        elif kind == "isoclinic-point":
            a = rng.uniform(0.2, 1.3)
            c, s = math.cos(a), math.sin(a)
            P = plane_through(e[4], u[0], u[1])
            Q = plane_through(e[4], c * u[0] + s * u[2], c * u[1] + s * u[3])
        else:
            w = np.zeros((2, DIM))
            w[:, :4] = rng.normal(size=(2, 4))
            P, Q = plane_through(e[4], u[0], u[1]), plane_through(e[4], *w)
    elif kind == "line":
        d = np.zeros(DIM)
        d[:4] = rng.normal(size=4)
        v1, v2 = np.zeros(DIM), np.zeros(DIM)
        v1[:4], v2[:4] = rng.normal(size=4), rng.normal(size=4)
        P, Q = plane_through(e[4], d, v1), plane_through(e[4], d, v2)
    elif kind in ("ultra-hyperbolic", "ultra-loxodromic"):
        P = plane_through(e[4], e[0], e[1])
        g = boost(rng.uniform(0.3, 2.0))
        if kind == "ultra-loxodromic":
            g = g @ rot(1, 2, rng.uniform(0.3, 1.4))
        Q = moved(P, g)
    elif kind in ("tangent-parabolic", "tangent-screw"):
        # vertical planes over boundary lines: parallel lines share a direction
        p1, p2 = rng.normal(size=3), rng.normal(size=3)
        d1 = _unit(rng.normal(size=3))
        d2 = d1 if kind == "tangent-parabolic" else _unit(rng.normal(size=3))
        P, Q = _vertical(p1, d1), _vertical(p2, d2)
    else:
        raise ValueError(kind)
    g = random_lorentz(rng, 0.4)
    return moved(P, g), moved(Q, g)


def _vertical(p, d) -> GeoObject:
    """Plane over the boundary line p + s d."""
    phi = np.concatenate([2 * p, [p @ p - 1.0, p @ p + 1.0]])
    dirn = np.concatenate([d, [0.0, 0.0]])
    return GeoObject(Kind.PLANE, Subspace([phi, dirn, [0, 0, 0, 1.0, 1.0]]))


PAIR_KINDS = [
    "random",
    "point",
    "orthogonal-point",
    "line",
    "ultra-hyperbolic",
    "ultra-loxodromic",
    "tangent-parabolic",
    "tangent-screw",
    "isoclinic-point",
]


# -- independent numerical oracles ----------------------------------------------------


def lorentz_orthonormal(B: np.ndarray) -> np.ndarray:
    """Rows spanning the same space, orthonormal for J (time-like rows last)."""
    G = B @ J @ B.T
    w, V = np.linalg.eigh(G)
    rows = (V / np.sqrt(np.abs(w))).T @ B
    return rows[np.argsort(-w)]


def half_turn_oracle(P: GeoObject) -> np.ndarray:
    """−I on the complement of the carrier, +I on it, built from a J-orthonormal basis."""
    rows = lorentz_orthonormal(P.basis)
    Pi = sum(np.outer(r, r) @ J * (r @ J @ r) for r in rows)
    return 2.0 * Pi - np.eye(DIM)


def is_half_turn(X: np.ndarray, tol: float = 1e-8) -> bool:
    """Involution whose −1 eigenspace is 2-dimensional (trace 1)."""
    n = max(1.0, np.linalg.norm(X))
    return np.linalg.norm(X @ X - np.eye(DIM)) <= tol * n * n and abs(np.trace(X) - 1.0) <= 1e-6 * n


def in_bank_oracle(M: np.ndarray, P: GeoObject) -> bool:
    """Definition of the bank: M = H_k H_P for some plane k iff M H_P is a half-turn."""
    return is_half_turn(M @ half_turn_oracle(P))
