"""Pencils of hyperplanes and planes, half-turn banks and two-half-turn factorizations.

Every nontrivial isometry ``M`` outside the type-II elliptic class is
described here by two subspaces of R^{4,1}:

* ``U`` -- normals of its permuted pencil (``range(τ − I)`` for the
  translational or atomic part ``τ``);
* ``V`` -- normals of the second family (invariant pencil for atomic
  maps, twisting pencil for loxodromic and screw maps).

``V`` always lies in ``U^L`` and a plane ``P`` is in the bank exactly when
``P'^L = span{a, b}`` with ``a ∈ U`` and ``b ∈ V``; the hyperplanes ``a^L``
and ``b^L`` are then the witness pair ``(s, t)`` with ``P = s ∩ t``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import KindMismatch, NotInBank, NotUnique, PencilUndefined
from .geometry import (
    GeoObject,
    Kind,
    half_turn_matrix,
    hyperplane_from_normal,
    normals,
    plane_from_normals,
    planes_orthogonal_along_line,
)
from .isometries import IsometryClass, IsometryClassSummary, as_isometry, classify
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
    orthonormal_basis,
    radical,
    span,
    subspace_intersection,
    subspace_signature,
    subspace_sum,
    unit_spacelike,
)


class PencilKind(str, enum.Enum):
    PERMUTED = "Permuted"
    INVARIANT = "Invariant"
    DUAL = "Dual"
    TWISTING = "Twisting"


def _carrier(obj) -> Subspace:
    return obj.carrier if isinstance(obj, GeoObject) else obj


def _summary(M, tol: float | None = None) -> tuple[np.ndarray, IsometryClassSummary]:
    if isinstance(M, IsometryClassSummary):
        raise TypeError("pass the isometry itself, not its summary")
    m = as_isometry(M).matrix
    return m, classify(m, tol)


def _translation_normals(m: np.ndarray, info: IsometryClassSummary) -> Subspace:
    """``range(τ − I)`` for the atomic or translational part ``τ``."""
    cls = info.cls
    if cls is IsometryClass.ELLIPTIC_I:
        return lorentz_complement(info.twisting_plane)
    if cls.is_hyperbolic:
        return info.axis
    # parabolic: U = span{w, n} with n the fixed ray and w the translation direction
    return info.translation_space


@dataclass(frozen=True, eq=False)
class BankSpaces:
    """Normal spaces of the two hyperplane families whose intersections form the bank."""

    U: Subspace
    V: Subspace


def bank_spaces(M, tol: float | None = None) -> BankSpaces:
    """``(U, V)`` for atomic, loxodromic and screw maps."""
    m, info = _summary(M, tol)
    cls = info.cls
    if cls in (IsometryClass.IDENTITY, IsometryClass.ELLIPTIC_II):
        raise PencilUndefined(f"{cls.value} has no permuted pencil")
    U = _translation_normals(m, info)
    if cls.has_rotational_part:
        V = lorentz_complement(info.twisting_plane)
    else:
        V = lorentz_complement(U)
    return BankSpaces(U, V)


# -- pencils ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Pencil:
    """A pencil given intensionally.

    Hyperplane pencils store the space of admissible normals; the dual
    pencil stores the subspace every element's carrier must contain.
    """

    kind: PencilKind
    owner: IsometryClassSummary
    space: Subspace

    @property
    def element_kind(self) -> Kind:
        return Kind.PLANE if self.kind is PencilKind.DUAL else Kind.HYPERPLANE

    def to_json(self) -> dict:
        key = "contains" if self.kind is PencilKind.DUAL else "normals"
        return {"kind": self.kind.value, "owner": self.owner.cls.value, key: self.space.to_json()}


def pencil(M, kind: PencilKind | str, tol: float | None = None) -> Pencil:
    kind = PencilKind(kind)
    m, info = _summary(M, tol)
    if info.cls in (IsometryClass.IDENTITY, IsometryClass.ELLIPTIC_II):
        raise PencilUndefined(f"{info.cls.value} has no {kind.value.lower()} pencil")
    U = _translation_normals(m, info)
    if kind is PencilKind.PERMUTED:
        space = U
    elif kind is PencilKind.INVARIANT:
        space = lorentz_complement(U)
    elif kind is PencilKind.DUAL:
        space = U
    else:
        if not info.cls.has_rotational_part:
            raise PencilUndefined(f"{info.cls.value} has no rotational part")
        space = lorentz_complement(info.twisting_plane)
    return Pencil(kind, info, space)


def pencil_contains(p: Pencil, candidate: GeoObject, tol: float | None = None) -> bool:
    tol = get_tol() if tol is None else tol
    if not isinstance(candidate, GeoObject) or candidate.kind is not p.element_kind:
        got = candidate.kind.value if isinstance(candidate, GeoObject) else type(candidate).__name__
        raise KindMismatch(f"{p.kind.value} pencil holds {p.element_kind.value}s, got {got}")
    if p.kind is PencilKind.DUAL:
        return candidate.carrier.contains_subspace(p.space, tol * 10)
    n = normals(candidate)[0]
    return p.space.contains(n, tol * 10)


class PencilElement(NamedTuple):
    element: GeoObject
    unique: bool


def _sign_fix(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v) > 1e-12))
    return -v if v[k] < 0 else v


def pencil_element_through(p: Pencil, x, tol: float | None = None) -> PencilElement:
    """Element of ``p`` through a point or ideal point.

    Permuted and twisting pencils have exactly one element through ``x``
    off their degeneracy locus; elsewhere :class:`NotUnique` is raised.
    In the invariant pencil the element is canonical: the normal of
    largest Lorentz norm among unit Euclidean vectors, sign-fixed.
    """
    tol = get_tol() if tol is None else tol
    if isinstance(x, GeoObject):
        if x.kind not in (Kind.POINT, Kind.IDEAL_POINT):
            raise KindMismatch("pencil_element_through needs a point or ideal point")
        x = x.carrier.basis[0]
    x = np.asarray(x, dtype=float)
    xL = lorentz_complement(span([x]))
    if p.kind is PencilKind.DUAL:
        S = subspace_sum(p.space, span([x]))
        if S.dim != 3:
            raise NotUnique("point lies in the span of the dual pencil's base")
        return PencilElement(GeoObject.from_subspace(S), True)
    N = subspace_intersection(p.space, xL, tol)
    if N.dim == 0 or subspace_signature(N, tol)[0] == 0:
        raise NotUnique("no hyperplane of the pencil passes through this point")
    if p.kind is PencilKind.INVARIANT:
        n = _sign_fix(unit_spacelike(N, tol))
        return PencilElement(hyperplane_from_normal(n), N.dim == 1)
    if N.dim != 1:
        raise NotUnique("point lies on the degeneracy locus of the pencil")
    return PencilElement(hyperplane_from_normal(normalize(N.basis[0])), True)


def pencil_sample(p: Pencil, n: int, seed: int = 0) -> list[GeoObject]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        if p.kind is PencilKind.DUAL:
            while True:
                x = _random_time_like(rng)
                S = subspace_sum(p.space, span([x]))
                if S.dim == 3:
                    out.append(GeoObject.from_subspace(S))
                    break
        else:
            out.append(hyperplane_from_normal(_chart_sample(p.space, rng)))
    return out


# -- parameter charts --------------------------------------------------------------


def _random_time_like(rng: np.random.Generator, spread: float = 1.5) -> np.ndarray:
    u = rng.normal(size=4)
    u *= spread * rng.random() / max(np.linalg.norm(u), 1e-12)
    return np.concatenate([u, [math.sqrt(1.0 + float(u @ u))]])


def _split_signature(S: Subspace, tol: float | None = None):
    """Orthogonal pieces of ``S``: Lorentz-orthonormal space-like rows, the time-like row, null rows."""
    tol = get_tol() if tol is None else tol
    rad = radical(S, tol)
    if rad.dim:
        # a complement of the radical inside S is non-degenerate
        rest = subspace_intersection(S, rad.orthogonal_complement(), tol)
        ob = orthonormal_basis(rest, tol) if rest.dim else []
    else:
        ob = orthonormal_basis(S, tol)
    space = [v for v in ob if lorentz_inner(v, v) > 0]
    time = [v for v in ob if lorentz_inner(v, v) < 0]
    return space, time, list(rad.basis)


def _chart_sample(S: Subspace, rng: np.random.Generator, r_max: float = 2.5) -> np.ndarray:
    """Random unit space-like vector of ``S`` spread over its natural chart."""
    space, time, null = _split_signature(S)
    if not space:
        raise PencilUndefined("subspace has no space-like directions")
    c = rng.normal(size=len(space))
    u = np.array(space).T @ (c / np.linalg.norm(c))
    if time:
        r = rng.uniform(-r_max, r_max)
        u = math.cosh(r) * u + math.sinh(r) * time[0]
    for nv in null:
        u = u + math.tan(rng.uniform(-1.3, 1.3)) * nv
    return normalize(u)


# -- bank membership -----------------------------------------------------------------


def _point_on(P: Subspace, L: Subspace, tol: float) -> np.ndarray | None:
    W = subspace_intersection(P, L, tol)
    if W.dim != 1 or subspace_signature(W, tol) != (0, 1, 0):
        return None
    return normalize(W.basis[0])


def _orthogonal_to_line(P: Subspace, L: Subspace, tol: float) -> bool:
    """P meets the line L in a point and contains no direction of L there."""
    x = _point_on(P, L, tol)
    if x is None:
        return False
    tangent = subspace_intersection(L, lorentz_complement(span([x])), tol)
    if tangent.dim != 1:
        return False
    t = normalize(tangent.basis[0])
    return float(np.max(np.abs(lorentz_gram(P.basis, t[None, :])))) <= 10 * tol


def _contains_fixed_ideal(P: Subspace, v: np.ndarray, tol: float) -> bool:
    return P.contains(v, 10 * tol)


def _isoclinic_K(m: np.ndarray, info: IsometryClassSummary) -> np.ndarray:
    """Unit complex structure of an isoclinic rotation, as a 5×5 map on ``p^L``."""
    alpha = info.angles[0]
    p = info.fixed_point
    # on p^L: M = cos α I + sin α K
    Pi = np.eye(DIM) + np.outer(p, p) @ J
    return (m @ Pi - math.cos(alpha) * Pi) / math.sin(alpha)


def _type2_split(m: np.ndarray, info: IsometryClassSummary, P: Subspace, tol: float):
    """Rotation planes ``(U1, U2)`` of the type-II factorization adapted to ``P``.

    For isoclinic maps any complex line may serve as ``U1``; it is chosen
    through a normal of ``P`` so membership and factorization agree.
    """
    if not info.non_unique:
        return info.rotation_planes
    NL = lorentz_complement(P)
    K = _isoclinic_K(m, info)
    a = normalize(NL.basis[0]) if subspace_signature(NL, tol)[0] else None
    if a is None:
        return info.rotation_planes
    U1 = span([a, K @ a])
    U2 = subspace_intersection(lorentz_complement(U1), lorentz_complement(span([info.fixed_point])), tol)
    return U1, U2


def bank_contains(M, P, tol: float | None = None) -> bool:
    """Geometric bank criterion for the class of ``M``."""
    tol = get_tol() if tol is None else tol
    m, info = _summary(M, tol)
    Pc = _carrier(P)
    cls = info.cls
    if cls is IsometryClass.IDENTITY:
        return True
    if cls is IsometryClass.ELLIPTIC_I:
        return planes_orthogonal_along_line(Pc, info.twisting_plane, tol)
    if cls is IsometryClass.PURE_HYPERBOLIC:
        return _orthogonal_to_line(Pc, info.axis, tol)
    if cls is IsometryClass.PURE_PARABOLIC:
        if not _contains_fixed_ideal(Pc, info.fixed_ideal, tol):
            return False
        N = subspace_intersection(lorentz_complement(Pc), info.translation_space, tol)
        return N.dim >= 1 and subspace_signature(N, tol)[0] >= 1
    if cls is IsometryClass.PURE_LOXODROMIC:
        return planes_orthogonal_along_line(Pc, info.twisting_plane, tol) and _orthogonal_to_line(Pc, info.axis, tol)
    if cls is IsometryClass.SCREW_PARABOLIC:
        if not planes_orthogonal_along_line(Pc, info.twisting_plane, tol):
            return False
        W = subspace_intersection(Pc, info.twisting_plane, tol)
        return W.contains(info.fixed_ideal, 10 * tol)
    # type-II elliptic
    if not Pc.contains(info.fixed_point, 10 * tol):
        return False
    if info.involution:
        return True
    if info.non_unique:
        NL = lorentz_complement(Pc)
        e1, e2 = orthonormal_basis(NL, tol)
        K = _isoclinic_K(m, info)
        return abs(lorentz_inner(e2, K @ e1)) <= 10 * tol
    tau1, tau2 = info.invariant_planes
    return all(subspace_intersection(Pc, t, tol).dim == 2 for t in (tau1, tau2))


class BankWitness(NamedTuple):
    s: GeoObject
    t: GeoObject


def bank_witness(M, P, tol: float | None = None) -> BankWitness | None:
    """Hyperplanes ``s`` (permuted family) and ``t`` (second family) with ``P = s ∩ t``.

    Returns ``None`` when ``P`` is not in the bank or when the class has no
    pencil pair (identity, type-II involution).
    """
    tol = get_tol() if tol is None else tol
    m, info = _summary(M, tol)
    Pc = _carrier(P)
    if info.cls is IsometryClass.IDENTITY or (info.cls is IsometryClass.ELLIPTIC_II and info.involution):
        return None
    try:
        a, b = _bank_normals(m, info, Pc, tol)
    except NotInBank:
        return None
    return BankWitness(hyperplane_from_normal(a), hyperplane_from_normal(b))


def _bank_normals(m: np.ndarray, info: IsometryClassSummary, Pc: Subspace, tol: float):
    """Unit normals ``a ∈ U``, ``b ∈ V`` spanning ``P'^L``, or :class:`NotInBank`."""
    NL = lorentz_complement(Pc)
    if subspace_signature(NL, tol) != (2, 0, 0):
        raise NotInBank("not a plane")
    if info.cls is IsometryClass.ELLIPTIC_II:
        if not Pc.contains(info.fixed_point, 10 * tol):
            raise NotInBank("plane misses the fixed point")
        U, V = _type2_split(m, info, Pc, tol)
    else:
        bs = bank_spaces(m, tol)
        U, V = bs.U, bs.V
    loose = 100 * tol
    A = subspace_intersection(NL, U, loose)
    if A.dim == 0 or subspace_signature(A, tol)[0] == 0:
        raise NotInBank("no permuted-pencil hyperplane contains the plane")
    a = _sign_fix(unit_spacelike(A, tol))
    B = subspace_intersection(NL, lorentz_complement(span([a])), tol)
    if B.dim != 1:
        raise NotInBank("degenerate normal plane")
    b = _sign_fix(normalize(B.basis[0]))
    if not V.contains(b, loose):
        raise NotInBank("second normal is not in the companion pencil")
    return a, b


# -- factorization ---------------------------------------------------------------------


class Factorization(NamedTuple):
    k1: GeoObject
    k2: GeoObject
    residual: float


def _reflection(n: np.ndarray) -> np.ndarray:
    return np.eye(DIM) - 2.0 * np.outer(n, n) @ J / lorentz_inner(n, n)


def _reflection_normal(R: np.ndarray) -> np.ndarray:
    """Normal of a reflection given as a matrix (``R − I = −2 n nᵀJ``)."""
    D = np.eye(DIM) - R
    k = int(np.argmax(np.linalg.norm(D, axis=0)))
    return normalize(D[:, k])


def _split_pair(rot: np.ndarray, a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Normals ``a1, a2`` with ``rot = R_{a1} R_a = R_a R_{a2}``."""
    Ra = _reflection(a)
    return _reflection_normal(rot @ Ra), _reflection_normal(Ra @ rot)


def _parts(m: np.ndarray, info: IsometryClassSummary, U: Subspace, V: Subspace):
    """Commuting factors of ``m`` moving only ``U`` and only ``V`` respectively."""
    I = np.eye(DIM)
    if info.cls is IsometryClass.SCREW_PARABOLIC:
        # U is degenerate here; V (the rotation plane) is not
        PiV = lorentz_projector(V)
        return m @ (I - PiV) + PiV, m @ PiV + (I - PiV)
    PiU = lorentz_projector(U)
    return m @ PiU + (I - PiU), m @ (I - PiU) + PiU


def factor_about(M, k, tol: float | None = None) -> Factorization:
    """Planes ``k1, k2`` of the bank with ``M = H_{k1} H_k = H_k H_{k2}``."""
    tol = get_tol() if tol is None else tol
    m, info = _summary(M, tol)
    kobj = k if isinstance(k, GeoObject) else GeoObject.from_subspace(k)
    if kobj.kind is not Kind.PLANE:
        raise KindMismatch("factor_about needs a plane")
    Pc = kobj.carrier
    Hk = half_turn_matrix(kobj)
    if info.cls is IsometryClass.IDENTITY:
        return Factorization(kobj, kobj, float(np.linalg.norm(Hk @ Hk - m)))
    if info.cls is IsometryClass.ELLIPTIC_II and info.involution:
        if not Pc.contains(info.fixed_point, 10 * tol):
            raise NotInBank("plane misses the fixed point of the involution")
        k1 = GeoObject.from_subspace(span(np.vstack([info.fixed_point, lorentz_complement(Pc).basis])))
        return _finish(m, k1, kobj, k1, Hk)

    a, b = _bank_normals(m, info, Pc, tol)
    if info.cls.is_atomic:
        a1, a2 = _split_pair(m, a)
        k1 = plane_from_normals(a1, b)
        k2 = plane_from_normals(a2, b)
    else:
        if info.cls is IsometryClass.ELLIPTIC_II:
            U, V = _type2_split(m, info, Pc, tol)
        else:
            bs = bank_spaces(m, tol)
            U, V = bs.U, bs.V
        first, second = _parts(m, info, U, V)
        a1, a2 = _split_pair(first, a)
        b1, b2 = _split_pair(second, b)
        k1 = plane_from_normals(a1, b1)
        k2 = plane_from_normals(a2, b2)
    return _finish(m, k1, kobj, k2, Hk)


def _finish(m, k1, k, k2, Hk) -> Factorization:
    r1 = np.linalg.norm(half_turn_matrix(k1) @ Hk - m)
    r2 = np.linalg.norm(Hk @ half_turn_matrix(k2) - m)
    return Factorization(k1, k2, float(max(r1, r2) / max(1.0, np.linalg.norm(m))))


# -- sampling ----------------------------------------------------------------------------


def _random_plane(rng: np.random.Generator, through=None) -> GeoObject:
    x = _random_time_like(rng) if through is None else np.asarray(through, dtype=float)
    E = np.array(orthonormal_basis(lorentz_complement(span([x]))))
    c = rng.normal(size=(2, E.shape[0]))
    q, _ = np.linalg.qr(c.T)
    n1, n2 = q.T @ E
    return plane_from_normals(n1, n2)


def bank_sample(M, n: int, seed: int = 0, tol: float | None = None) -> list[GeoObject]:
    """``n`` pairwise distinct planes of the bank, deterministic in ``seed``."""
    tol = get_tol() if tol is None else tol
    m, info = _summary(M, tol)
    rng = np.random.default_rng(seed)
    out: list[GeoObject] = []
    attempts = 0
    while len(out) < n and attempts < 50 * max(n, 1):
        attempts += 1
        P = _bank_draw(m, info, rng, tol)
        if all(P != Q for Q in out):
            out.append(P)
    return out


def _bank_draw(m, info: IsometryClassSummary, rng, tol) -> GeoObject:
    cls = info.cls
    if cls is IsometryClass.IDENTITY:
        return _random_plane(rng)
    if cls is IsometryClass.ELLIPTIC_II:
        if info.involution:
            return _random_plane(rng, through=info.fixed_point)
        if info.non_unique:
            E = np.array(orthonormal_basis(lorentz_complement(span([info.fixed_point]))))
            a = normalize(rng.normal(size=4) @ E)
            K = _isoclinic_K(m, info)
            U1 = span([a, K @ a])
            U2 = subspace_intersection(lorentz_complement(U1), lorentz_complement(span([info.fixed_point])), tol)
            return plane_from_normals(a, _chart_sample(U2, rng))
        U1, U2 = info.rotation_planes
        return plane_from_normals(_chart_sample(U1, rng), _chart_sample(U2, rng))
    bs = bank_spaces(m, tol)
    return plane_from_normals(_chart_sample(bs.U, rng), _chart_sample(bs.V, rng))
