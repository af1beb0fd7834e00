"""Positive Lorentz matrices and their six-way classification."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import boundary
from .errors import (
    BadAngle,
    BadParams,
    ClassificationError,
    IsInvolution,
    NotInGroup,
    NotTimeLike,
    WrongClass,
)
from .lorentz import (
    DIM,
    J,
    Subspace,
    VectorType,
    classify_vector,
    get_tol,
    lorentz_complement,
    lorentz_projector,
    normalize,
    orthonormal_basis,
    radical,
    span,
    subspace_signature,
)

NEWTON_LIMIT = 1e-6


def lorentz_residual(M) -> float:
    """Relative defect ``‖MᵀJM − J‖_F / max(1, ‖M‖_F²)``."""
    M = np.asarray(M, dtype=float)
    return float(np.linalg.norm(M.T @ J @ M - J) / max(1.0, np.linalg.norm(M) ** 2))


def project_to_group(M, tol: float | None = None) -> np.ndarray:
    """Accept, repair (two Newton steps) or reject a candidate Lorentz matrix."""
    tol = get_tol() if tol is None else tol
    M = np.array(M, dtype=float)
    if M.shape != (DIM, DIM) or not np.all(np.isfinite(M)):
        raise NotInGroup(f"expected a finite 5x5 matrix, got shape {M.shape}")
    res = lorentz_residual(M)
    if res > NEWTON_LIMIT:
        raise NotInGroup(f"Lorentz residual {res:.3e} exceeds {NEWTON_LIMIT:g}")
    if res > tol:
        for _ in range(2):
            E = M.T @ J @ M - J
            M = M @ (np.eye(DIM) - 0.5 * J @ E)
    if M[4, 4] < 1.0 - 1e-9:
        raise NotInGroup("matrix does not preserve the upper sheet")
    if np.linalg.det(M) < 0:
        raise NotInGroup("matrix reverses orientation")
    return M


@dataclass(frozen=True, eq=False)
class Isometry:
    """Orientation-preserving isometry of H⁴ as a 5×5 Lorentz matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = project_to_group(self.matrix)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry(self.matrix @ as_isometry(other).matrix)

    def inverse(self) -> "Isometry":
        return Isometry(J @ self.matrix.T @ J)

    def is_identity(self, tol: float | None = None) -> bool:
        tol = get_tol() if tol is None else tol
        return float(np.linalg.norm(self.matrix - np.eye(DIM))) <= tol * max(1.0, np.linalg.norm(self.matrix))

    def to_json(self) -> dict:
        return {"matrix": self.matrix.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "Isometry":
        if "matrix" in data:
            return cls(np.asarray(data["matrix"], dtype=float))
        if "A" in data or "b" in data or "lambda" in data:
            A = data.get("A", np.eye(3).tolist())
            b = data.get("b", [0.0, 0.0, 0.0])
            lam = data.get("lambda", 1.0)
            return from_boundary_similarity(A, b, lam)
        raise ValueError("isometry JSON needs 'matrix' or 'A'/'b'/'lambda'")


def as_isometry(M) -> Isometry:
    return M if isinstance(M, Isometry) else Isometry(np.asarray(M, dtype=float))


def identity() -> Isometry:
    return Isometry(np.eye(DIM))


# -- classification ------------------------------------------------------------


class IsometryClass(str, enum.Enum):
    IDENTITY = "Identity"
    ELLIPTIC_I = "EllipticI"
    ELLIPTIC_II = "EllipticII"
    PURE_HYPERBOLIC = "PureHyperbolic"
    PURE_LOXODROMIC = "PureLoxodromic"
    PURE_PARABOLIC = "PureParabolic"
    SCREW_PARABOLIC = "ScrewParabolic"

    @property
    def is_hyperbolic(self) -> bool:
        return self in (IsometryClass.PURE_HYPERBOLIC, IsometryClass.PURE_LOXODROMIC)

    @property
    def is_parabolic(self) -> bool:
        return self in (IsometryClass.PURE_PARABOLIC, IsometryClass.SCREW_PARABOLIC)

    @property
    def is_atomic(self) -> bool:
        return self in (IsometryClass.ELLIPTIC_I, IsometryClass.PURE_HYPERBOLIC, IsometryClass.PURE_PARABOLIC)

    @property
    def has_rotational_part(self) -> bool:
        return self in (IsometryClass.PURE_LOXODROMIC, IsometryClass.SCREW_PARABOLIC)


@dataclass(frozen=True, eq=False)
class IsometryClassSummary:
    """Class tag plus the fixed data that goes with it.

    Only the fields meaningful for ``cls`` are populated. Angles are reported
    in (0, π]; for type-II elliptics the larger angle comes first and
    ``invariant_planes[i]`` is the plane rotated by ``angles[i]``.
    """

    cls: IsometryClass
    length: float | None = None
    angle: float | None = None
    angles: tuple[float, float] | None = None
    involution: bool | None = None
    non_unique: bool = False
    axis: Subspace | None = None
    twisting_plane: Subspace | None = None
    twisting_hyperplane: Subspace | None = None
    fixed_point: np.ndarray | None = None
    fixed_ideal: np.ndarray | None = None
    fixed_ideals: tuple | None = None
    invariant_planes: tuple | None = None
    rotation_planes: tuple | None = None
    translation_space: Subspace | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out: dict = {"class": self.cls.value}
        for name in ("length", "angle", "involution"):
            val = getattr(self, name)
            if val is not None:
                out[name] = val
        if self.angles is not None:
            out["angles"] = list(self.angles)
        if self.non_unique:
            out["non_unique"] = True
        fixed: dict = {}
        for name in ("axis", "twisting_plane", "twisting_hyperplane"):
            val = getattr(self, name)
            if val is not None:
                fixed[name] = val.to_json()
        if self.fixed_point is not None:
            fixed["fixed_point"] = self.fixed_point.tolist()
        if self.fixed_ideal is not None:
            fixed["fixed_ideal"] = self.fixed_ideal.tolist()
        if self.fixed_ideals is not None:
            fixed["fixed_ideals"] = [v.tolist() for v in self.fixed_ideals]
        if self.invariant_planes is not None:
            fixed["invariant_planes"] = [p.to_json() for p in self.invariant_planes]
        if fixed:
            out["fixed_data"] = fixed
        return out


def _real_vector(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    v = v / v[k]
    return np.real(v)


def _restriction(M: np.ndarray, S: Subspace) -> tuple[np.ndarray, np.ndarray]:
    """Matrix of ``M`` on an invariant space-like subspace, in a Lorentz-orthonormal basis."""
    E = np.array(orthonormal_basis(S))
    return E, E @ J @ M @ E.T


def _planar_angle(R: np.ndarray) -> float:
    return math.atan2(abs(R[1, 0] - R[0, 1]) / 2.0, (R[0, 0] + R[1, 1]) / 2.0)


def _null_rows(mat: np.ndarray, thr: float) -> np.ndarray:
    _, s, vt = np.linalg.svd(mat)
    return vt[int(np.sum(s > thr)):]


def _trace_band(m: np.ndarray, tol: float) -> tuple[float, float]:
    """Largest ``λ + 1/λ`` over eigenvalue pairs, with its uncertainty band."""
    s = float(np.trace(m)) - 1.0
    q = float(np.trace(m @ m)) + 3.0
    disc = max(0.0, 2.0 * q - s * s)
    a_max = (s + math.sqrt(disc)) / 2.0
    eps = np.finfo(float).eps
    delta = 16.0 * eps * max(1.0, float(np.linalg.norm(m))) ** 2
    a_err = delta + (math.sqrt(delta) if disc <= 100.0 * delta else delta / math.sqrt(disc))
    return a_max, max(tol, 10.0 * a_err)


def classify(M, tol: float | None = None) -> IsometryClassSummary:
    """Identity, type-I/II elliptic, pure hyperbolic/loxodromic or pure/screw parabolic."""
    tol = get_tol() if tol is None else tol
    m = as_isometry(M).matrix
    scale = max(1.0, float(np.linalg.norm(m)))
    a_max, band = _trace_band(m, tol)
    if a_max > 2.0 + band:
        return _classify_hyperbolic(m, tol, scale)

    thr = tol * scale
    K = Subspace._from_orthonormal(_null_rows(m - np.eye(DIM), thr))
    if K.dim == DIM:
        return IsometryClassSummary(IsometryClass.IDENTITY)
    sig = subspace_signature(K, tol)
    if sig[1] == 1 and K.dim == 3:
        _, R = _restriction(m, lorentz_complement(K))
        return IsometryClassSummary(IsometryClass.ELLIPTIC_I, angle=_planar_angle(R), twisting_plane=K)
    if sig[1] == 1 and K.dim == 1:
        return _classify_type2(m, K, tol)
    if sig[1] == 0 and sig[2] >= 1 and K.dim == 3:
        ideal = normalize(radical(K, tol).basis[0])
        U = span(_range_rows(m - np.eye(DIM), thr))
        return IsometryClassSummary(IsometryClass.PURE_PARABOLIC, fixed_ideal=ideal, translation_space=U)
    if sig == (0, 0, 1):
        return _classify_screw(m, K, tol, thr)
    raise ClassificationError(f"fixed space of dim {K.dim} with signature {sig} fits no class")


def _range_rows(mat: np.ndarray, thr: float) -> np.ndarray:
    u, s, _ = np.linalg.svd(mat)
    return u[:, : int(np.sum(s > thr))].T


def _classify_hyperbolic(m: np.ndarray, tol: float, scale: float) -> IsometryClassSummary:
    w, v = np.linalg.eig(m)
    mods = np.abs(w)
    hi, lo = int(np.argmax(mods)), int(np.argmin(mods))
    length = math.log(float(mods[hi]))
    attract = normalize(_real_vector(v[:, hi]))
    repel = normalize(_real_vector(v[:, lo]))
    axis = span([attract, repel])
    E, R = _restriction(m, lorentz_complement(axis))
    theta = math.atan2(np.linalg.norm(R - R.T) / (2.0 * math.sqrt(2.0)), (np.trace(R) - 1.0) / 2.0)
    ideals = (attract, repel)
    if theta <= tol * scale:
        return IsometryClassSummary(IsometryClass.PURE_HYPERBOLIC, length=length, axis=axis, fixed_ideals=ideals)
    _, _, vt = np.linalg.svd(R - np.eye(3))
    rot_axis = vt[-1] @ E
    rot_plane = vt[:2] @ E
    twisting = span(np.vstack([axis.basis, rot_axis]))
    hyper = span(np.vstack([axis.basis, rot_plane]))
    return IsometryClassSummary(
        IsometryClass.PURE_LOXODROMIC,
        length=length,
        angle=theta,
        axis=axis,
        twisting_plane=twisting,
        twisting_hyperplane=hyper,
        fixed_ideals=ideals,
    )


def _classify_type2(m: np.ndarray, K: Subspace, tol: float) -> IsometryClassSummary:
    p = normalize(K.basis[0])
    E, R = _restriction(m, lorentz_complement(K))
    sym = (R + R.T) / 2.0
    w, v = np.linalg.eigh(sym)
    c1 = float(np.clip((w[0] + w[1]) / 2.0, -1.0, 1.0))
    c2 = float(np.clip((w[2] + w[3]) / 2.0, -1.0, 1.0))
    alpha, beta = math.acos(c1), math.acos(c2)
    involution = bool(np.linalg.norm(m @ m - np.eye(DIM)) <= tol * max(1.0, np.linalg.norm(m)) ** 2 * 10)
    if involution:
        return IsometryClassSummary(
            IsometryClass.ELLIPTIC_II, angles=(math.pi, math.pi), involution=True, non_unique=True, fixed_point=p
        )
    isoclinic = c2 - c1 <= math.sqrt(tol)
    if isoclinic:
        u = np.zeros(4)
        u[0] = 1.0
        ru = R @ u
        ru = ru - (ru @ u) * u
        ru /= np.linalg.norm(ru)
        q, _ = np.linalg.qr(np.column_stack([u, ru, np.eye(4)[:, 1:]]))
        B1, B2 = q[:, :2].T, q[:, 2:4].T
    else:
        B1, B2 = v[:, :2].T, v[:, 2:].T
    U1, U2 = span(B1 @ E), span(B2 @ E)
    tau1 = span(np.vstack([p, U1.basis]))
    tau2 = span(np.vstack([p, U2.basis]))
    return IsometryClassSummary(
        IsometryClass.ELLIPTIC_II,
        angles=(alpha, beta),
        involution=False,
        non_unique=bool(isoclinic),
        fixed_point=p,
        invariant_planes=(tau1, tau2),
        rotation_planes=(U1, U2),
        diagnostics={"isoclinic": bool(isoclinic)},
    )


def _classify_screw(m: np.ndarray, K: Subspace, tol: float, thr: float) -> IsometryClassSummary:
    ideal = normalize(K.basis[0])
    D = np.linalg.matrix_power(m - np.eye(DIM), 3)
    u, _, _ = np.linalg.svd(D)
    W = span(u[:, :2].T)
    twisting = lorentz_complement(W)
    _, R = _restriction(m, W)
    # the translation part acts on the twisting plane only
    Pi = lorentz_projector(W)
    T = m @ (np.eye(DIM) - Pi) + Pi
    U = span(_range_rows(T - np.eye(DIM), thr))
    return IsometryClassSummary(
        IsometryClass.SCREW_PARABOLIC,
        angle=_planar_angle(R),
        twisting_plane=twisting,
        fixed_ideal=ideal,
        translation_space=U,
    )


# -- decompositions -------------------------------------------------------------


def decompose(M, tol: float | None = None) -> tuple[Isometry, Isometry]:
    """Commuting (translation part, rotational part) of a loxodromic or screw map."""
    m = as_isometry(M).matrix
    info = classify(m, tol)
    I = np.eye(DIM)
    if info.cls is IsometryClass.PURE_LOXODROMIC:
        Pi = lorentz_projector(info.axis)
        return Isometry(m @ Pi + (I - Pi)), Isometry(m @ (I - Pi) + Pi)
    if info.cls is IsometryClass.SCREW_PARABOLIC:
        Pi = lorentz_projector(lorentz_complement(info.twisting_plane))
        return Isometry(m @ (I - Pi) + Pi), Isometry(m @ Pi + (I - Pi))
    raise WrongClass(f"{info.cls.value} has no translation/rotation splitting")


def decompose_type2(M, tol: float | None = None) -> tuple[Isometry, Isometry]:
    """Commuting type-I factors ``(ρ₁, ρ₂)`` of a non-involutive type-II elliptic."""
    m = as_isometry(M).matrix
    info = classify(m, tol)
    if info.cls is not IsometryClass.ELLIPTIC_II:
        raise WrongClass(f"expected a type-II elliptic, got {info.cls.value}")
    if info.involution:
        raise IsInvolution("the antipodal map has no distinguished plane pair")
    I = np.eye(DIM)
    out = []
    for U in info.rotation_planes:
        Pi = lorentz_projector(U)
        out.append(Isometry(m @ Pi + (I - Pi)))
    return out[0], out[1]


# -- constructors ------------------------------------------------------------------


def from_boundary_similarity(A, b, lam: float = 1.0) -> Isometry:
    """Poincaré extension of ``x ↦ λAx + b`` on the boundary."""
    return Isometry(boundary.similarity_matrix(A, b, lam))


def rotation_block(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def sqrt2_hyperbolic(theta: float = 0.0) -> Isometry:
    """The block matrix with lower-right [[√2, 1], [1, √2]], optionally rotated in (e1, e2)."""
    m = np.eye(DIM)
    m[:2, :2] = rotation_block(theta)
    r = math.sqrt(2.0)
    m[3:, 3:] = [[r, 1.0], [1.0, r]]
    return Isometry(m)


def _jordan(size: int, blocks: Sequence[int]) -> np.ndarray:
    Jm = np.eye(size)
    start = 0
    for b in blocks:
        for i in range(start, start + b - 1):
            Jm[i, i + 1] = 1.0
        start += b
    return Jm


def reference_parabolic(n: int, params: Sequence[float], verbatim: bool = False):
    """Parabolic normal forms in PSO(n,1) with their Jordan decompositions.

    Returns ``(P, S, Jn)``. For ``n = 3`` the default ``S`` has the sign of
    its (2,1) entry flipped relative to the printed matrix, which is not an
    eigenvector; ``verbatim=True`` returns the printed entry instead.
    """
    params = [float(t) for t in np.atleast_1d(params)]
    if n == 2:
        if len(params) != 1 or params[0] == 0:
            raise BadParams("n=2 needs a single nonzero t")
        (t,) = params
        P = np.array([[1, -t, t], [t, 1 - t * t / 2, t * t / 2], [t, -t * t / 2, 1 + t * t / 2]])
        S = np.array([[0, t, -t / 2], [t * t, 0, -1], [t * t, 0, 0]])
        return P, S, _jordan(3, [3])
    if n == 3:
        if len(params) != 2:
            raise BadParams("n=3 needs (x, y)")
        x, y = params
        s = x * x + y * y
        if s <= 0 or x == 0:
            raise BadParams("n=3 needs x ≠ 0 (S is singular otherwise)")
        P = np.array(
            [
                [1, 0, -x, x],
                [0, 1, -y, y],
                [x, y, 1 - s / 2, s / 2],
                [x, y, -s / 2, 1 + s / 2],
            ]
        )
        sign = -1.0 if verbatim else 1.0
        S = np.array(
            [
                [-x * y / s, 0, x, 0],
                [sign * x * x / s, 0, y, 0],
                [-y / 2, s, s / 2, 0],
                [-y / 2, s, s / 2, 1],
            ]
        )
        return P, S, _jordan(4, [1, 3])
    if n == 4:
        if len(params) != 3:
            raise BadParams("n=4 needs (x, y, z)")
        x, y, z = params
        s = x * x + y * y + z * z
        if y == 0:
            raise BadParams("n=4 needs y ≠ 0 (S contains −z/y)")
        if x == 0 and z == 0:
            raise BadParams("n=4 needs (x, z) ≠ (0, 0) (S is singular otherwise)")
        P = boundary.translation_matrix([x, y, z])
        S = np.array(
            [
                [0, -x * y / s, 0, x, 0],
                [-z / y, (x * x + z * z) / s, 0, y, 0],
                [1, -y * z / s, 0, z, 0],
                [0, -y / 2, s, s / 2, 0],
                [0, -y / 2, s, s / 2, 1],
            ]
        )
        return P, S, _jordan(5, [1, 1, 3])
    raise BadParams("n must be 2, 3 or 4")


FIXED_LIGHT_LIKE = {
    2: np.array([0.0, 1.0, 1.0]),
    3: np.array([0.0, 0.0, 1.0, 1.0]),
    4: np.array([0.0, 0.0, 0.0, 1.0, 1.0]),
}


def rotation_about_complement(S: Subspace, theta: float) -> np.ndarray:
    """Rotation by ``theta`` of the (space-like, 2-dim) complement of ``S``, fixing ``S``."""
    c1, c2 = orthonormal_basis(lorentz_complement(S))
    I = np.eye(DIM)
    return (
        I
        + (math.cos(theta) - 1.0) * (np.outer(c1, c1) + np.outer(c2, c2)) @ J
        + math.sin(theta) * (np.outer(c2, c1) - np.outer(c1, c2)) @ J
    )


def screw_parabolic_from(params: Sequence[float], v3, theta: float, tol: float | None = None) -> Isometry:
    """``ρ·P₄`` where ρ fixes span{v₁, v₂, v₃} and rotates its complement by θ.

    v₁, v₂ are the third and fourth columns of the Jordan basis of P₄.
    """
    tol = get_tol() if tol is None else tol
    x, y, z = (float(t) for t in params)
    s = x * x + y * y + z * z
    if s <= 0:
        raise BadParams("translation vector must be nonzero")
    if abs(math.remainder(theta, 2.0 * math.pi)) <= tol:
        raise BadAngle("rotation angle is a multiple of 2π")
    v3 = np.asarray(v3, dtype=float)
    if classify_vector(v3) is not VectorType.TIME_LIKE:
        raise NotTimeLike("v3 must be time-like")
    v1 = np.array([0.0, 0.0, 0.0, s, s])
    v2 = np.array([x, y, z, s / 2.0, s / 2.0])
    fixed = span([v1, v2, v3])
    if fixed.dim != 3 or subspace_signature(fixed, tol) != (2, 1, 0):
        raise NotTimeLike("span{v1, v2, v3} is not a time-like 3-space")
    rho = rotation_about_complement(fixed, theta)
    return Isometry(rho @ boundary.translation_matrix([x, y, z]))


def conjugate(g, M) -> Isometry:
    g = np.asarray(g.matrix if isinstance(g, Isometry) else g, dtype=float)
    return Isometry(g @ as_isometry(M).matrix @ J @ g.T @ J)


def hyperbolic_from_fixed_points(p, q, length: float, angle: float = 0.0, twist=None) -> Isometry:
    """Hyperbolic map with attracting ideal point ``p`` and repelling ``q``.

    ``p`` and ``q`` are boundary points (``"inf"`` allowed) or light-like
    vectors. With ``angle`` nonzero the map also rotates by ``angle`` about
    the twisting plane spanned by the axis and ``twist`` (a space-like
    vector orthogonal to the axis; a deterministic one is chosen if omitted).
    """
    if not length > 0:
        raise BadParams("translation length must be positive")
    P = _ideal(p)
    Q = _ideal(q)
    pq = float(P @ J @ Q)
    if abs(pq) <= 1e-12 * np.linalg.norm(P) * np.linalg.norm(Q):
        raise BadParams("fixed points must be distinct")
    I = np.eye(DIM)
    # x ↦ x + (e^ℓ − 1)⟨x,q⟩/⟨p,q⟩ p + (e^{−ℓ} − 1)⟨x,p⟩/⟨q,p⟩ q
    M = I + (math.exp(length) - 1.0) * np.outer(P, Q) @ J / pq + (math.exp(-length) - 1.0) * np.outer(Q, P) @ J / pq
    if angle:
        axis = span([P, Q])
        comp = lorentz_complement(axis)
        if twist is None:
            twist = orthonormal_basis(comp)[0]
        fixed = span(np.vstack([axis.basis, np.asarray(twist, dtype=float)]))
        M = rotation_about_complement(fixed, angle) @ M
    return Isometry(M)


def _ideal(p) -> np.ndarray:
    if isinstance(p, str) or p is None or np.asarray(p).shape == (3,):
        return boundary.ideal_vector(p)
    return np.asarray(p, dtype=float)


def parabolic_from_fixed_point(x, b, angle: float = 0.0) -> Isometry:
    """Conjugate of ``u ↦ Rot_b(angle)·u + b`` moving ∞ to the boundary point ``x``.

    With ``angle`` nonzero the result is screw parabolic with twisting circle
    the image of the line through 0 in direction ``b``.
    """
    b = np.asarray(b, dtype=float)
    A = boundary.rotation_about(b, angle) if angle else np.eye(3)
    M = boundary.similarity_matrix(A, b)
    if boundary.is_infinity(x):
        return Isometry(M)
    g = inversion_swap(x)
    return Isometry(g @ M @ boundary.lorentz_inverse(g))


def inversion_swap(x) -> np.ndarray:
    """Orientation-preserving Lorentz map sending ∞ to the boundary point ``x`` and 0 to ∞."""
    # inversion in the unit sphere composed with the reflection u2 ↦ −u2 (det +1)
    inv = np.diag([1.0, -1.0, 1.0, -1.0, 1.0])
    return boundary.translation_matrix(np.asarray(x, dtype=float)) @ inv
