"""Totally geodesic subplanes of H⁴, reflections, half-turns and plane pairs."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import boundary
from .errors import (
    EqualPlanes,
    NotSinglePoint,
    NotUltraParallel,
    OrthogonalPlanes,
    WrongKind,
)
from .lorentz import (
    DIM,
    J,
    Subspace,
    get_tol,
    lorentz_complement,
    lorentz_gram,
    lorentz_inner,
    lorentz_projector,
    normalize,
    null_rays,
    orthonormal_basis,
    radical,
    same_subspace,
    span,
    subspace_intersection,
    subspace_signature,
    subspace_sum,
)


class Kind(enum.Enum):
    POINT = "Point"
    IDEAL_POINT = "IdealPoint"
    LINE = "Line"
    PLANE = "Plane"
    HYPERPLANE = "Hyperplane"


_TIME_LIKE_KIND = {1: Kind.POINT, 2: Kind.LINE, 3: Kind.PLANE, 4: Kind.HYPERPLANE}


def kind_of(S: Subspace, tol: float | None = None) -> Kind:
    """Kind of the geometric object carried by ``S`` (``WrongKind`` if none)."""
    sig = subspace_signature(S, tol)
    if sig[1] == 1 and S.dim in _TIME_LIKE_KIND:
        return _TIME_LIKE_KIND[S.dim]
    if S.dim == 1 and sig == (0, 0, 1):
        return Kind.IDEAL_POINT
    raise WrongKind(f"subspace of dim {S.dim} and signature {sig} is not a hyperbolic object")


@dataclass(frozen=True, eq=False)
class GeoObject:
    """A point, ideal point, line, plane or hyperplane of H⁴."""

    kind: Kind
    carrier: Subspace

    def __post_init__(self):
        actual = kind_of(self.carrier)
        if actual is not self.kind:
            raise WrongKind(f"carrier is a {actual.value}, not a {self.kind.value}")

    @classmethod
    def from_subspace(cls, S: Subspace) -> "GeoObject":
        return cls(kind_of(S), S)

    @property
    def basis(self) -> np.ndarray:
        return self.carrier.basis

    def __eq__(self, other) -> bool:
        if not isinstance(other, GeoObject):
            return NotImplemented
        return self.kind is other.kind and same_subspace(self.carrier, other.carrier)

    __hash__ = None

    def __repr__(self) -> str:
        return f"GeoObject({self.kind.value})"

    def contains(self, v) -> bool:
        return self.carrier.contains(v)

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "basis": self.carrier.basis.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "GeoObject":
        if "ideal_points" in data:
            pts = data["ideal_points"]
            obj = from_ideal_points(pts)
        else:
            obj = cls.from_subspace(Subspace(data["basis"]))
        if "kind" in data and Kind(data["kind"]) is not obj.kind:
            raise WrongKind(f"declared kind {data['kind']} but carrier is {obj.kind.value}")
        return obj


def _object(vectors, kind: Kind) -> GeoObject:
    return GeoObject(kind, Subspace(vectors))


def point(v) -> GeoObject:
    return _object([v], Kind.POINT)


def ideal_point(v) -> GeoObject:
    return _object([v], Kind.IDEAL_POINT)


def line(*vectors) -> GeoObject:
    return _object(vectors, Kind.LINE)


def plane(*vectors) -> GeoObject:
    return _object(vectors, Kind.PLANE)


def hyperplane(*vectors) -> GeoObject:
    return _object(vectors, Kind.HYPERPLANE)


def hyperplane_from_normal(n) -> GeoObject:
    return GeoObject(Kind.HYPERPLANE, lorentz_complement(Subspace([n])))


def plane_from_normals(n1, n2) -> GeoObject:
    return GeoObject(Kind.PLANE, lorentz_complement(span([n1, n2])))


def from_ideal_points(points: Sequence) -> GeoObject:
    """Object spanned by boundary points (two give a line, three a plane, four a hyperplane)."""
    S = span([boundary.ideal_vector(p) for p in points])
    if S.dim != len(points):
        raise WrongKind("boundary points are not in general position")
    return GeoObject.from_subspace(S)


def hyperplane_from_sphere(center, radius) -> GeoObject:
    return hyperplane_from_normal(boundary.sphere_normal(center, radius))


def hyperplane_from_euclidean_plane(normal, offset) -> GeoObject:
    return hyperplane_from_normal(boundary.euclidean_plane_normal(normal, offset))


def _require(obj: GeoObject, kind: Kind) -> None:
    if not isinstance(obj, GeoObject) or obj.kind is not kind:
        got = obj.kind.value if isinstance(obj, GeoObject) else type(obj).__name__
        raise WrongKind(f"expected a {kind.value}, got {got}")


def normals(obj: GeoObject) -> list[np.ndarray]:
    """Lorentz-orthonormal space-like basis of the complement of the carrier."""
    return orthonormal_basis(lorentz_complement(obj.carrier))


def unit_normal(h: GeoObject) -> np.ndarray:
    _require(h, Kind.HYPERPLANE)
    return normals(h)[0]


def reflection_from_normal(n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    return np.eye(DIM) - 2.0 * np.outer(n, n) @ J / lorentz_inner(n, n)


def reflection_matrix(h: GeoObject) -> np.ndarray:
    """Reflection across a hyperplane: ``x ↦ x − 2⟨x,n⟩n``."""
    _require(h, Kind.HYPERPLANE)
    return reflection_from_normal(unit_normal(h))


def half_turn_from_normals(n1, n2) -> np.ndarray:
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    return np.eye(DIM) - 2.0 * (np.outer(n1, n1) + np.outer(n2, n2)) @ J


def half_turn_matrix(P: GeoObject) -> np.ndarray:
    """Half-turn about a plane, ``I − 2Π`` with Π the projector onto the normal plane."""
    _require(P, Kind.PLANE)
    n1, n2 = normals(P)
    return half_turn_from_normals(n1, n2)


# -- plane pairs -------------------------------------------------------------


class PairTag(enum.Enum):
    ULTRA_PARALLEL = "UltraParallel"
    TANGENT = "Tangent"
    MEET_IN_LINE = "MeetInLine"
    MEET_IN_POINT = "MeetInPoint"
    EQUAL = "Equal"


@dataclass(frozen=True)
class PlanePairClass:
    tag: PairTag
    orthogonal: bool | None = None

    def to_json(self) -> dict:
        out = {"tag": self.tag.value}
        if self.orthogonal is not None:
            out["orthogonal"] = self.orthogonal
        return out


def tangent_space(S: Subspace, p) -> Subspace:
    """Directions of ``S`` Lorentz-orthogonal to the point ``p``."""
    return subspace_intersection(S, lorentz_complement(Subspace([p])))


def cross_gram(S: Subspace, T: Subspace) -> np.ndarray:
    """Lorentz pairings between orthonormal bases of two non-degenerate subspaces."""
    a = np.array(orthonormal_basis(S))
    b = np.array(orthonormal_basis(T))
    return lorentz_gram(a, b)


def _meeting_point(W: Subspace) -> np.ndarray:
    return normalize(W.basis[0])


def classify_plane_pair(P: GeoObject, Q: GeoObject, tol: float | None = None) -> PlanePairClass:
    _require(P, Kind.PLANE)
    _require(Q, Kind.PLANE)
    tol = get_tol() if tol is None else tol
    W = subspace_intersection(P.carrier, Q.carrier, tol)
    if W.dim >= 3:
        return PlanePairClass(PairTag.EQUAL)
    n_plus, n_minus, n_zero = subspace_signature(W, tol)
    if n_minus == 1:
        if W.dim == 2:
            return PlanePairClass(PairTag.MEET_IN_LINE)
        p = _meeting_point(W)
        C = cross_gram(tangent_space(P.carrier, p), tangent_space(Q.carrier, p))
        return PlanePairClass(PairTag.MEET_IN_POINT, bool(np.max(np.abs(C)) <= tol))
    if n_zero > 0:
        return PlanePairClass(PairTag.TANGENT)
    return PlanePairClass(PairTag.ULTRA_PARALLEL)


def planes_orthogonal_along_line(P: Subspace, Q: Subspace, tol: float | None = None) -> bool:
    """Whether two time-like 3-dim carriers meet in a line at a right angle."""
    tol = get_tol() if tol is None else tol
    W = subspace_intersection(P, Q, tol)
    if W.dim != 2 or subspace_signature(W, tol)[1] != 1:
        return False
    WL = lorentz_complement(W)
    p = subspace_intersection(P, WL, tol)
    q = subspace_intersection(Q, WL, tol)
    if p.dim != 1 or q.dim != 1:
        return False
    a, b = normalize(p.basis[0]), normalize(q.basis[0])
    return abs(lorentz_inner(a, b)) <= tol * 10


# -- common perpendicular ----------------------------------------------------


def _line_involution(S: Subspace) -> np.ndarray:
    return 2.0 * lorentz_projector(S) - np.eye(DIM)


def perpendicular_of_lines(L1: Subspace, L2: Subspace) -> Subspace:
    """Carrier of the common perpendicular of two ultra-parallel lines.

    σ_i = 2Π_i − I fixes line i and negates its complement; the product
    σ₁σ₂ translates along the common perpendicular by twice the distance,
    so the eigenvectors of its extreme real eigenvalues span that line.
    """
    prod = _line_involution(L1) @ _line_involution(L2)
    w, v = np.linalg.eig(prod)
    order = np.argsort(np.abs(w))
    lo, hi = order[0], order[-1]
    if abs(w[hi]) <= 1.0 + 1e-12:
        raise NotUltraParallel("lines are not ultra-parallel")
    vecs = np.real(np.array([v[:, lo], v[:, hi]]))
    return span(vecs)


class Perpendicular(NamedTuple):
    line: GeoObject
    foot_p: np.ndarray
    foot_q: np.ndarray
    distance: float


def common_perpendicular_data(P: GeoObject, Q: GeoObject, tol: float | None = None) -> Perpendicular:
    tol = get_tol() if tol is None else tol
    pair = classify_plane_pair(P, Q, tol)
    if pair.tag is not PairTag.ULTRA_PARALLEL:
        raise NotUltraParallel(f"planes are {pair.tag.value}")
    W = subspace_intersection(P.carrier, Q.carrier, tol)
    if W.dim == 2:
        S = subspace_sum(P.carrier, Q.carrier)
        nP = subspace_intersection(lorentz_complement(P.carrier), S, tol)
        nQ = subspace_intersection(lorentz_complement(Q.carrier), S, tol)
        M = span(np.vstack([nP.basis, nQ.basis]))
    else:
        N = lorentz_complement(W)
        M = perpendicular_of_lines(
            subspace_intersection(N, P.carrier, tol), subspace_intersection(N, Q.carrier, tol)
        )
    foot_p = normalize(subspace_intersection(M, P.carrier, tol).basis[0])
    foot_q = normalize(subspace_intersection(M, Q.carrier, tol).basis[0])
    dist = math.acosh(max(1.0, -lorentz_inner(foot_p, foot_q)))
    return Perpendicular(GeoObject(Kind.LINE, M), foot_p, foot_q, dist)


def common_perpendicular(P: GeoObject, Q: GeoObject, tol: float | None = None) -> GeoObject:
    """The unique line orthogonal to two ultra-parallel planes."""
    return common_perpendicular_data(P, Q, tol).line


def orthogonality_defect(M: GeoObject, P: GeoObject) -> float:
    """How far a line is from meeting a plane orthogonally (0 when it does).

    At the meeting point the line's tangent must pair to zero with every
    tangent direction of the plane; the maximum pairing of unit vectors is
    returned, or ``inf`` when they do not meet in a single point.
    """
    W = subspace_intersection(M.carrier, P.carrier)
    if W.dim != 1 or subspace_signature(W)[1] != 1:
        return float("inf")
    p = normalize(W.basis[0])
    t = orthonormal_basis(tangent_space(M.carrier, p))
    T = orthonormal_basis(tangent_space(P.carrier, p))
    return float(max(abs(lorentz_inner(t[0], u)) for u in T))


# -- half-turn composition ---------------------------------------------------


@dataclass(frozen=True)
class PredictedClass:
    """Class of H_P H_Q read from the configuration of P and Q."""

    cls: str
    pair: PlanePairClass
    length: float | None = None
    angle: float | None = None
    angles: tuple[float, float] | None = None
    involution: bool | None = None
    axis: Subspace | None = None
    twisting_plane: Subspace | None = None
    fixed_point: np.ndarray | None = None
    fixed_ideal: np.ndarray | None = None
    invariant_planes: tuple | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"class": self.cls, "pair": self.pair.to_json()}
        for name in ("length", "angle", "involution"):
            val = getattr(self, name)
            if val is not None:
                out[name] = val
        if self.angles is not None:
            out["angles"] = list(self.angles)
        return out


def compose_half_turns(P: GeoObject, Q: GeoObject, tol: float | None = None) -> tuple[np.ndarray, PredictedClass]:
    """``H_P H_Q`` with the class predicted from how ``P`` and ``Q`` meet."""
    tol = get_tol() if tol is None else tol
    pair = classify_plane_pair(P, Q, tol)
    if pair.tag is PairTag.EQUAL:
        raise EqualPlanes("H_P H_P is the identity")
    M = half_turn_matrix(P) @ half_turn_matrix(Q)
    W = subspace_intersection(P.carrier, Q.carrier, tol)
    if pair.tag is PairTag.ULTRA_PARALLEL:
        perp = common_perpendicular_data(P, Q, tol)
        axis = perp.line.carrier
        normal_space = lorentz_complement(axis)
        TP = subspace_intersection(P.carrier, normal_space, tol)
        TQ = subspace_intersection(Q.carrier, normal_space, tol)
        length = 2.0 * perp.distance
        common = subspace_intersection(TP, TQ, tol)
        if common.dim == 2:
            pred = PredictedClass("PureHyperbolic", pair, length=length, axis=axis)
        else:
            cosv = float(np.clip(np.linalg.svd(cross_gram(TP, TQ), compute_uv=False)[-1], -1, 1))
            angle = 2.0 * math.acos(abs(cosv))
            twisting = subspace_sum(axis, common)
            pred = PredictedClass(
                "PureLoxodromic", pair, length=length, angle=angle, axis=axis, twisting_plane=twisting
            )
        return M, pred
    if pair.tag is PairTag.TANGENT:
        ideal = normalize(radical(W, tol).basis[0])
        if W.dim == 2:
            return M, PredictedClass("PureParabolic", pair, fixed_ideal=ideal)
        return M, PredictedClass("ScrewParabolic", pair, fixed_ideal=ideal)
    if pair.tag is PairTag.MEET_IN_LINE:
        h = subspace_sum(P.carrier, Q.carrier)
        twisting = subspace_sum(W, lorentz_complement(h))
        WL = lorentz_complement(W)
        p = normalize(subspace_intersection(P.carrier, WL, tol).basis[0])
        q = normalize(subspace_intersection(Q.carrier, WL, tol).basis[0])
        angle = 2.0 * math.acos(min(1.0, abs(lorentz_inner(p, q))))
        return M, PredictedClass("EllipticI", pair, angle=angle, twisting_plane=twisting)
    # meet in a point
    p = _meeting_point(W)
    if p[4] < 0:
        p = -p
    if pair.orthogonal:
        return M, PredictedClass("EllipticII", pair, involution=True, angles=(math.pi, math.pi), fixed_point=p)
    pp = principal_plane_pair(P, Q, tol)
    angles = tuple(sorted((2.0 * math.acos(min(1.0, c)) for c in pp.cosines), reverse=True))
    return M, PredictedClass(
        "EllipticII",
        pair,
        involution=False,
        angles=angles,
        fixed_point=p,
        invariant_planes=(pp.tau1.carrier, pp.tau2.carrier),
    )


class PrincipalPair(NamedTuple):
    tau1: GeoObject
    tau2: GeoObject
    cosines: tuple[float, float]
    near_degenerate: bool


def principal_plane_pair(P: GeoObject, Q: GeoObject, tol: float | None = None) -> PrincipalPair:
    """Invariant plane pair of H_P H_Q for planes meeting non-orthogonally in a point.

    The maximising pair (v_P, v_Q) of the pairing on unit tangent circles is
    the top singular pair of the 2×2 cross-Gram matrix; the second singular
    pair gives (w_P, w_Q).
    """
    tol = get_tol() if tol is None else tol
    pair = classify_plane_pair(P, Q, tol)
    if pair.tag is not PairTag.MEET_IN_POINT:
        raise NotSinglePoint(f"planes are {pair.tag.value}")
    if pair.orthogonal:
        raise OrthogonalPlanes("orthogonal planes have no distinguished invariant pair")
    W = subspace_intersection(P.carrier, Q.carrier, tol)
    p = _meeting_point(W)
    a = np.array(orthonormal_basis(tangent_space(P.carrier, p)))
    b = np.array(orthonormal_basis(tangent_space(Q.carrier, p)))
    C = lorentz_gram(a, b)
    u, s, vt = np.linalg.svd(C)
    vP, wP = u[:, 0] @ a, u[:, 1] @ a
    vQ, wQ = vt[0] @ b, vt[1] @ b
    tau1 = GeoObject(Kind.PLANE, span([p, vP, vQ]))
    tau2 = GeoObject(Kind.PLANE, span([p, wP, wQ]))
    gap = math.sqrt(tol)
    near = bool(1.0 - s[0] < gap or s[0] - s[1] < gap)
    return PrincipalPair(tau1, tau2, (float(min(1.0, s[0])), float(min(1.0, s[1]))), near)


def distance(x, y) -> float:
    """Hyperbolic distance between two points given as time-like vectors."""
    x, y = normalize(x), normalize(y)
    return math.acosh(max(1.0, -lorentz_inner(x, y)))
