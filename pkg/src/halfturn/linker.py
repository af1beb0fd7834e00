"""Deciding whether two isometries share a half-turn.

``A`` and ``B`` are linked when ``A = H_α H_β`` and ``B = H_β H_γ`` for
planes α, β, γ, which happens exactly when their banks share β. The
pairwise constructions below each propose a β; certificates are always
completed through :func:`factor_about` and checked with
:func:`verify_link`, so an inapplicable construction can only decline.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, NamedTuple

import numpy as np
from scipy.optimize import least_squares

from . import boundary
from .errors import HalfTurnError
from .geometry import GeoObject, Kind, half_turn_matrix, perpendicular_of_lines, planes_orthogonal_along_line
from .isometries import Isometry, IsometryClass, IsometryClassSummary, as_isometry, classify
from .lorentz import (
    DIM,
    J,
    Subspace,
    get_tol,
    lorentz_complement,
    lorentz_gram,
    lorentz_inner,
    normalize,
    null_rays,
    orthonormal_basis,
    same_ray,
    same_subspace,
    span,
    subspace_intersection,
    subspace_signature,
    subspace_sum,
    unit_spacelike,
)
from .pencils import _isoclinic_K, bank_contains, bank_sample, bank_spaces, factor_about

#: subspace tolerance for deciding whether a construction's hypothesis holds;
#: looser than the verification tolerance, which has the final word
HYPOTHESIS_TOL = 1e-7
RESIDUAL_TOL = 1e-9


# -- certificates -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LinkCertificate:
    alpha: GeoObject
    beta: GeoObject
    gamma: GeoObject
    residuals: tuple[float, float]

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha.to_json(),
            "beta": self.beta.to_json(),
            "gamma": self.gamma.to_json(),
            "residuals": list(self.residuals),
        }


class LinkCheck(NamedTuple):
    ok: bool
    residuals: tuple[float, float]
    beta_in_a: bool
    beta_in_b: bool
    message: str

    def __bool__(self) -> bool:
        return self.ok


def _rel_residual(product: np.ndarray, M: np.ndarray) -> float:
    return float(np.linalg.norm(product - M) / max(1.0, np.linalg.norm(M)))


def verify_link(A, B, cert: LinkCertificate, tol: float | None = None) -> LinkCheck:
    """Recompute ``H_α H_β`` and ``H_β H_γ`` and re-check bank membership of β."""
    a, b = as_isometry(A).matrix, as_isometry(B).matrix
    try:
        Ha, Hb, Hc = (half_turn_matrix(p) for p in (cert.alpha, cert.beta, cert.gamma))
    except HalfTurnError as exc:
        return LinkCheck(False, (math.inf, math.inf), False, False, f"bad plane: {exc}")
    r = (_rel_residual(Ha @ Hb, a), _rel_residual(Hb @ Hc, b))
    in_a, in_b = bank_contains(a, cert.beta, tol), bank_contains(b, cert.beta, tol)
    problems = []
    if r[0] >= RESIDUAL_TOL:
        problems.append(f"A residual {r[0]:.3e}")
    if r[1] >= RESIDUAL_TOL:
        problems.append(f"B residual {r[1]:.3e}")
    if not in_a:
        problems.append("beta not in bank of A")
    if not in_b:
        problems.append("beta not in bank of B")
    return LinkCheck(not problems, r, in_a, in_b, "; ".join(problems) or "ok")


def certificate_from_beta(A, B, beta: GeoObject, tol: float | None = None) -> LinkCertificate:
    a, b = as_isometry(A).matrix, as_isometry(B).matrix
    alpha = factor_about(a, beta, tol).k1
    gamma = factor_about(b, beta, tol).k2
    Hb = half_turn_matrix(beta)
    r = (_rel_residual(half_turn_matrix(alpha) @ Hb, a), _rel_residual(Hb @ half_turn_matrix(gamma), b))
    return LinkCertificate(alpha, beta, gamma, r)


def reverse_certificate(A, B, cert: LinkCertificate, tol: float | None = None) -> LinkCertificate:
    """Certificate for ``(B, A)`` reusing the common plane of ``(A, B)``."""
    return certificate_from_beta(B, A, cert.beta, tol)


@dataclass(frozen=True, eq=False)
class LinkOutcome:
    status: str  # "Linked" | "NotLinked" | "Undetermined"
    condition: str | None = None
    certificate: LinkCertificate | None = None
    distance: float | None = None
    reason: str | None = None
    attempts: tuple = field(default_factory=tuple)

    @property
    def linked(self) -> bool:
        return self.status == "Linked"

    def to_json(self) -> dict:
        out: dict = {"status": self.status}
        if self.condition is not None:
            out["condition"] = self.condition
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
            out["residuals"] = list(self.certificate.residuals)
        if self.distance is not None:
            out["distance"] = self.distance
        if self.reason is not None:
            out["reason"] = self.reason
        return out


# -- per-map data ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _Map:
    m: np.ndarray
    info: IsometryClassSummary
    U: Subspace | None
    V: Subspace | None

    @property
    def cls(self) -> IsometryClass:
        return self.info.cls

    @property
    def x(self) -> np.ndarray:
        return self.info.fixed_ideal

    @property
    def T(self) -> Subspace:
        return self.info.twisting_plane

    @property
    def axis(self) -> Subspace:
        return self.info.axis


def _prepare(M, tol) -> _Map:
    m = as_isometry(M).matrix
    info = classify(m, tol)
    U = V = None
    if info.cls not in (IsometryClass.IDENTITY, IsometryClass.ELLIPTIC_II):
        bs = bank_spaces(m, tol)
        U, V = bs.U, bs.V
    elif info.cls is IsometryClass.ELLIPTIC_II and not info.involution and not info.non_unique:
        U, V = info.rotation_planes
    return _Map(m, info, U, V)


# -- Lorentz incidence helpers --------------------------------------------------------

_H = HYPOTHESIS_TOL


class _Decline(Exception):
    """A construction's hypothesis does not hold."""


def _perp(v) -> Subspace:
    return lorentz_complement(span([v]))


def _cap(*spaces: Subspace) -> Subspace:
    out = spaces[0]
    for S in spaces[1:]:
        out = subspace_intersection(out, S, _H)
    return out


def _spacelike_in(S: Subspace) -> np.ndarray | None:
    if S.dim == 0 or subspace_signature(S, _H)[0] == 0:
        return None
    return unit_spacelike(S, _H)


def _F_normal(X: _Map, p) -> np.ndarray:
    """Normal of the unique permuted-pencil element through ``p``."""
    N = _cap(X.U, _perp(p))
    if N.dim != 1 or subspace_signature(N, _H)[0] != 1:
        raise _Decline("no unique permuted-pencil element through the point")
    return normalize(N.basis[0])


def _dual(X: _Map, p) -> Subspace:
    S = subspace_sum(X.U, span([p]))
    if S.dim != 3:
        raise _Decline("point lies on the base of the dual pencil")
    return S


def _rays(S: Subspace) -> list[np.ndarray]:
    """Boundary points of a line carrier (the circle ∩ sphere points)."""
    if S.dim != 2 or subspace_signature(S, _H) != (1, 1, 0):
        raise _Decline("circle and sphere do not cross in two points")
    return null_rays(S, _H)


def _other_ray(S: Subspace, x) -> np.ndarray:
    r1, r2 = _rays(S)
    if same_ray(r1, x, _H):
        return r2
    if same_ray(r2, x, _H):
        return r1
    raise _Decline("expected point is not on the circle")


def _on(S: Subspace, v) -> bool:
    return S.contains(v, _H)


def _inside(S: Subspace, T: Subspace) -> bool:
    return T.contains_subspace(S, _H)


def _from_normals(n1, n2) -> Subspace:
    S = span([n1, n2], _H)
    if S.dim != 2 or subspace_signature(S, _H) != (2, 0, 0):
        raise _Decline("normals do not span a space-like plane")
    return lorentz_complement(S)


def _circle(*points) -> Subspace:
    S = span(points, _H)
    if S.dim != 3:
        raise _Decline("points are not concyclic")
    return S


def _circle_in_sphere(n, x, y) -> Subspace:
    """Some circle through boundary points ``x, y`` inside the sphere with normal ``n``."""
    w = _spacelike_in(_cap(_perp(n), lorentz_complement(span([x, y]))))
    if w is None:
        raise _Decline("no circle through both points in the sphere")
    return span([x, y, w])


def _point_on_line(P: Subspace, L: Subspace) -> np.ndarray:
    W = _cap(P, L)
    if W.dim != 1 or subspace_signature(W, _H)[1] != 1:
        raise _Decline("line does not cross in a single point")
    return normalize(W.basis[0])


def _tangent(L: Subspace, p) -> np.ndarray:
    T = _cap(L, _perp(p))
    if T.dim != 1:
        raise _Decline("degenerate tangent")
    return normalize(T.basis[0])


def _common_F(A: _Map, B: _Map) -> np.ndarray | None:
    return _spacelike_in(_cap(A.U, B.U))


def _bank_through(X: _Map, p) -> Subspace:
    """The bank element of an (atomic, loxodromic or screw) map through a boundary point."""
    a = _F_normal(X, p)
    b = _spacelike_in(_cap(X.V, _perp(p)))
    if b is None:
        raise _Decline("no companion normal through the point")
    return _from_normals(a, b)


def _ultra_parallel(L1: Subspace, L2: Subspace) -> Subspace:
    W = _cap(L1, L2)
    if W.dim and subspace_signature(W, _H)[0] != W.dim:
        # a shared time-like or null direction means the axes meet or are asymptotic
        raise _Decline("axes meet")
    try:
        return perpendicular_of_lines(L1, L2)
    except HalfTurnError as exc:
        raise _Decline(str(exc)) from exc


# -- constructions by class pair -----------------------------------------------------------

Candidate = tuple[str, Callable[[], Subspace]]


def _hyp_hyp(A: _Map, B: _Map) -> Iterator[Candidate]:
    def build():
        N = _ultra_parallel(A.axis, B.axis)
        C = subspace_sum(A.axis, B.axis)
        if C.dim == 3:
            return subspace_sum(N, span([unit_spacelike(lorentz_complement(C))]))
        return subspace_sum(N, lorentz_complement(C))

    yield "hyp-hyp/common-perpendicular", build


def _par_par(A: _Map, B: _Map) -> Iterator[Candidate]:
    def distinct():
        if same_ray(A.x, B.x, _H):
            raise _Decline("same fixed point")
        nA, nB = _F_normal(A, B.x), _F_normal(B, A.x)
        try:
            return _from_normals(nA, nB)
        except _Decline:
            return _circle_in_sphere(nA, A.x, B.x)

    def same():
        if not same_ray(A.x, B.x, _H):
            raise _Decline("different fixed points")
        if same_subspace(A.U, B.U, _H):
            return bank_sample(A.m, 1, seed=0)[0].carrier
        return _from_normals(unit_spacelike(A.U, _H), unit_spacelike(B.U, _H))

    yield "par-par/distinct-fixed-points", distinct
    yield "par-par/common-fixed-point", same


def _hyp_par(A: _Map, B: _Map) -> Iterator[Candidate]:
    def build():
        v = B.x
        n1 = _F_normal(A, v)
        a = _point_on_line(_perp(n1), A.axis)
        n2 = _F_normal(B, a)
        try:
            return _from_normals(n1, n2)
        except _Decline:
            w = _spacelike_in(_cap(_perp(n1), lorentz_complement(span([v, a]))))
            return span([v, a, w])

    yield "hyp-par/pencil-construction", build


def _par_lox(A: _Map, B: _Map) -> Iterator[Candidate]:
    x, T = A.x, B.T

    def via_common(h):
        y, z = _rays(_cap(T, _perp(h)))
        if same_ray(x, y, _H) or same_ray(x, z, _H):
            t = _spacelike_in(_cap(lorentz_complement(A.U), lorentz_complement(T)))
            if t is None:
                raise _Decline("no sphere through the twisting circle in the invariant pencil")
            return _from_normals(h, t)
        return _circle(x, y, z)

    def cond1():
        h = _common_F(A, B)
        if h is None:
            raise _Decline("no common permuted-pencil element")
        return via_common(h)

    def cond2():
        if not _on(T, x):
            raise _Decline("fixed point off the twisting circle")
        nx = _F_normal(B, x)
        m = _other_ray(_cap(T, _perp(nx)), x)
        nm = _F_normal(A, m)
        if same_ray(nm, nx, _H):
            return via_common(nx)
        return _from_normals(nx, nm)

    def cond3():
        if _spacelike_in(_cap(A.U, lorentz_complement(T))) is None:
            raise _Decline("twisting circle lies in no permuted-pencil sphere of A")
        return _bank_through(B, x)

    yield "par-lox/condition-1", cond1
    yield "par-lox/condition-2", cond2
    yield "par-lox/condition-3", cond3


class ComputationalCheck(NamedTuple):
    holds: bool
    defect: float
    v: np.ndarray
    w: np.ndarray
    beta: GeoObject | None
    scale: float = 1.0  # unit of ``defect``: the frame is already normalized
    threshold: float = 0.0  # numerical band used to decide ``holds``


def _screw_frame(A: _Map) -> np.ndarray:
    """Lorentz map sending A's fixed point to ∞ and its twisting circle to the z-axis."""
    g1 = boundary.ideal_conjugator(A.x)
    T1 = span(A.T.basis @ g1.T)
    # normals of T1 have the form (a, d, d); the circle is {u : a·u = d}
    rows = np.array(orthonormal_basis(lorentz_complement(T1)))
    a, d = rows[:, :3], rows[:, 3]
    p0 = np.linalg.lstsq(a, d, rcond=None)[0]
    direction = np.cross(a[0], a[1])
    R = boundary.rotation_to(direction / np.linalg.norm(direction), 2)
    g2 = boundary.similarity_matrix(R, -R @ p0)
    return g2 @ g1


def computational_condition(A, B, tol: float | None = None) -> ComputationalCheck:
    """Equidistance test for a screw parabolic ``A`` and a pure hyperbolic ``B``.

    In the frame where A fixes ∞ and its twisting circle is the z-axis,
    the defect is ``(−m₁, −m₂, 0)·(v − m)`` with ``m`` the midpoint of B's
    fixed points; when it vanishes the horizontal line from ``m`` to the
    z-axis is a common bank element.
    """
    tol = get_tol() if tol is None else tol
    Am, Bm = _prepare(A, tol), _prepare(B, tol)
    if Am.cls is not IsometryClass.SCREW_PARABOLIC or Bm.cls is not IsometryClass.PURE_HYPERBOLIC:
        raise ValueError("computational condition needs (screw parabolic, pure hyperbolic)")
    g = _screw_frame(Am)
    pts = [boundary.boundary_point(g @ f) for f in Bm.info.fixed_ideals]
    if any(isinstance(p, str) for p in pts):
        return ComputationalCheck(False, math.inf, np.full(3, np.nan), np.full(3, np.nan), None, 1.0, 0.0)
    v, w = pts
    m = (v + w) / 2.0
    defect = float(np.dot([-m[0], -m[1], 0.0], v - m))
    threshold = _H * max(1.0, float(v @ v), float(w @ w))
    holds = abs(defect) <= threshold
    beta = None
    if holds and math.hypot(m[0], m[1]) > math.sqrt(_H * threshold):
        carrier = span([boundary.ideal_vector(m), boundary.ideal_vector([0.0, 0.0, m[2]]), boundary.INFINITY])
        back = boundary.lorentz_inverse(g)
        beta = GeoObject.from_subspace(span(carrier.basis @ back.T))
    return ComputationalCheck(holds, defect, v, w, beta, 1.0, threshold)


def _screw_hyp(A: _Map, B: _Map) -> Iterator[Candidate]:
    x, T = A.x, A.T

    def cond1():
        h = _common_F(A, B)
        if h is None:
            raise _Decline("no common permuted-pencil element")
        dx = _dual(B, x)
        b = _other_ray(_cap(dx, _perp(h)), x)
        a = _other_ray(_cap(T, _perp(h)), x)
        if same_ray(a, b, _H):
            c = _spacelike_in(lorentz_complement(T))
            return _from_normals(h, c)
        return _circle(a, b, x)

    def cond2():
        n = _spacelike_in(_cap(B.U, lorentz_complement(T)))
        if n is None:
            raise _Decline("twisting circle lies in no permuted-pencil sphere of B")
        b = _other_ray(_cap(_dual(B, x), _perp(n)), x)
        nb = _F_normal(A, b)
        a = _other_ray(_cap(T, _perp(nb)), x)
        return _circle(a, b, x)

    def cond3():
        dx = _dual(B, x)
        nx = _F_normal(B, x)
        m = _other_ray(_cap(dx, _perp(nx)), x)
        if _on(T, m):
            if same_subspace(dx, T, _H):
                raise _Decline("dual circle equals the twisting circle")
            return _from_normals(_F_normal(A, m), nx)
        km = _bank_through(A, m)
        if not planes_orthogonal_along_line(km, dx, _H):
            raise _Decline("k_m is not orthogonal to d_x")
        return km

    def computational():
        chk = computational_condition(A.m, B.m)
        if not chk.holds or chk.beta is None:
            raise _Decline(f"equidistance defect {chk.defect:.3e}")
        return chk.beta.carrier

    yield "screw-hyp/condition-1", cond1
    yield "screw-hyp/condition-2", cond2
    yield "screw-hyp/condition-3", cond3
    yield "screw-hyp/computational", computational


def _screw_par(A: _Map, B: _Map) -> Iterator[Candidate]:
    x, y, T = A.x, B.x, A.T

    def cond1():
        h = _common_F(A, B)
        if h is None:
            raise _Decline("no common permuted-pencil element")
        a = _other_ray(_cap(T, _perp(h)), x)
        if same_ray(a, y, _H):
            return _circle_in_sphere(h, x, y)
        return _circle(a, x, y)

    def cond2():
        if not _on(T, y):
            raise _Decline("fixed point of B off the twisting circle")
        nx, ny = _F_normal(B, x), _F_normal(A, y)
        if same_ray(nx, ny, _H):
            return _circle_in_sphere(nx, x, y)
        return _from_normals(nx, ny)

    def cond3():
        if _spacelike_in(_cap(B.U, lorentz_complement(T))) is None:
            raise _Decline("twisting circle lies in no permuted-pencil sphere of B")
        return _bank_through(A, y)

    def cond4():
        if _on(T, y):
            raise _Decline("k_y not unique")
        ky = _bank_through(A, y)
        if not planes_orthogonal_along_line(ky, _dual(B, x), _H):
            raise _Decline("k_y is not orthogonal to d_x")
        return ky

    yield "screw-par/condition-1", cond1
    yield "screw-par/condition-2", cond2
    yield "screw-par/condition-3", cond3
    yield "screw-par/condition-4", cond4


def _axis_data(A: _Map, B: _Map):
    N = _ultra_parallel(A.axis, B.axis)
    a = _point_on_line(N, A.axis)
    b = _point_on_line(N, B.axis)
    return N, a, b, _tangent(A.axis, a), _tangent(B.axis, b)


def _lox_hyp(A: _Map, B: _Map) -> Iterator[Candidate]:
    def cond1():
        N, a, b, ta, tb = _axis_data(A, B)
        La = _cap(A.T, _perp(ta))
        if not same_subspace(La, N, _H):
            raise _Decline("L_a differs from the common perpendicular")
        if _inside(B.axis, A.T):
            return subspace_sum(N, span([unit_spacelike(lorentz_complement(A.T))]))
        h = subspace_sum(A.T, B.axis)
        if h.dim != 4:
            raise _Decline("twisting plane and axis do not span a hyperplane")
        return subspace_sum(N, lorentz_complement(h))

    def cond2():
        N, a, b, ta, tb = _axis_data(A, B)
        La = _cap(A.T, _perp(ta))
        if not _inside(La, _perp(tb)) or same_subspace(La, N, _H):
            raise _Decline("L_a is not inside h_b")
        S = subspace_sum(La, N)
        if S.dim != 3:
            raise _Decline("L_a and N do not span a plane")
        return S

    yield "lox-hyp/condition-1", cond1
    yield "lox-hyp/condition-2", cond2


def _screw_screw(A: _Map, B: _Map) -> Iterator[Candidate]:
    x, y = A.x, B.x

    def normals_xy():
        if same_ray(x, y, _H):
            raise _Decline("common fixed point")
        return _F_normal(B, x), _F_normal(A, y)

    def cond1():
        h = _common_F(A, B)
        if h is None:
            raise _Decline("no common permuted-pencil element")
        xh = _other_ray(_cap(A.T, _perp(h)), x)
        yh = _other_ray(_cap(B.T, _perp(h)), y)
        return _circle(x, y, xh, yh)

    def cond2():
        if not (_on(A.T, y) and _on(B.T, x)):
            raise _Decline("fixed points are not on each other's twisting circles")
        nx, ny = normals_xy()
        if same_ray(nx, ny, _H):
            return _circle_in_sphere(nx, x, y)
        return _from_normals(nx, ny)

    def cond3():
        nx, ny = normals_xy()
        if same_ray(nx, ny, _H):
            raise _Decline("h_x = h_y")
        if not (_inside(_cap(A.T, _perp(ny)), _perp(nx)) and _inside(_cap(B.T, _perp(nx)), _perp(ny))):
            raise _Decline("intersection points are not shared")
        return _from_normals(nx, ny)

    def cond4():
        nx, ny = normals_xy()
        if not (_inside(B.T, _perp(ny)) and _inside(A.T, _perp(nx))):
            raise _Decline("twisting circles are not inside h_y and h_x")
        return _from_normals(nx, ny)

    yield "screw-screw/condition-1", cond1
    yield "screw-screw/condition-2", cond2
    yield "screw-screw/condition-3", cond3
    yield "screw-screw/condition-4", cond4


def _lox_lox(A: _Map, B: _Map) -> Iterator[Candidate]:
    def build():
        N, a, b, ta, tb = _axis_data(A, B)
        S = subspace_sum(_cap(A.T, _perp(ta)), _cap(B.T, _perp(tb)))
        if S.dim != 3:
            raise _Decline("L_a and L_b are not coplanar")
        return S

    yield "lox-lox/coplanar", build


def _screw_lox(A: _Map, B: _Map) -> Iterator[Candidate]:
    x = A.x

    def setup():
        nx = _F_normal(B, x)
        x2 = _other_ray(_cap(_dual(B, x), _perp(nx)), x)
        n2 = _F_normal(A, x2)
        return nx, n2

    def cond1():
        h = _common_F(A, B)
        if h is None:
            raise _Decline("no common permuted-pencil element")
        pts = _rays(_cap(A.T, _perp(h))) + _rays(_cap(B.T, _perp(h)))
        return _circle(*pts)

    def cond2():
        nx, n2 = setup()
        a = _other_ray(_cap(A.T, _perp(n2)), x)
        b1, b2 = _rays(_cap(B.T, _perp(nx)))
        if same_ray(nx, n2, _H):
            raise _Decline("h_x = h_2")
        if not (_on(_perp(nx), a) and _on(_perp(n2), b1) and _on(_perp(n2), b2)):
            raise _Decline("intersection points are not shared")
        return _from_normals(nx, n2)

    def cond3():
        pA = _spacelike_in(_cap(A.U, lorentz_complement(B.T)))
        pB = _spacelike_in(_cap(B.U, lorentz_complement(A.T)))
        if pA is None or pB is None:
            raise _Decline("twisting circles are not inside the other map's permuted pencil")
        return _from_normals(pA, pB)

    yield "screw-lox/condition-1", cond1
    yield "screw-lox/condition-2", cond2
    yield "screw-lox/condition-3", cond3


_C = IsometryClass
HANDLERS: dict[tuple[IsometryClass, IsometryClass], Callable[[_Map, _Map], Iterator[Candidate]]] = {
    (_C.PURE_HYPERBOLIC, _C.PURE_HYPERBOLIC): _hyp_hyp,
    (_C.PURE_PARABOLIC, _C.PURE_PARABOLIC): _par_par,
    (_C.PURE_HYPERBOLIC, _C.PURE_PARABOLIC): _hyp_par,
    (_C.PURE_PARABOLIC, _C.PURE_LOXODROMIC): _par_lox,
    (_C.SCREW_PARABOLIC, _C.PURE_HYPERBOLIC): _screw_hyp,
    (_C.SCREW_PARABOLIC, _C.PURE_PARABOLIC): _screw_par,
    (_C.PURE_LOXODROMIC, _C.PURE_HYPERBOLIC): _lox_hyp,
    (_C.SCREW_PARABOLIC, _C.SCREW_PARABOLIC): _screw_screw,
    (_C.PURE_LOXODROMIC, _C.PURE_LOXODROMIC): _lox_lox,
    (_C.SCREW_PARABOLIC, _C.PURE_LOXODROMIC): _screw_lox,
}


def _direct(A: _Map, B: _Map) -> Iterator[Candidate]:
    """Identity and antipodal-involution cases, built without pencils."""

    def plane_for(X: _Map, Y: _Map) -> Subspace:
        # X is the identity or an involution; find an element of Y's bank through X's fixed point
        if Y.cls is _C.IDENTITY:
            if X.cls is _C.IDENTITY:
                return span(np.eye(DIM)[[0, 1, 4]])
            return _through_point(X.info.fixed_point, None)
        if X.cls is _C.IDENTITY:
            return bank_sample(Y.m, 1, seed=0)[0].carrier
        return _bank_element_through_point(Y, X.info.fixed_point)

    for X, Y in ((A, B), (B, A)):
        if X.cls is _C.IDENTITY or (X.cls is _C.ELLIPTIC_II and X.info.involution):
            yield "direct-construction", lambda X=X, Y=Y: plane_for(X, Y)
            return


def _through_point(p, q) -> Subspace:
    """Some plane through the point ``p`` (and ``q`` when given)."""
    pts = [p] if q is None or same_ray(p, q, _H) else [p, q]
    rest = lorentz_complement(span(pts))
    ob = orthonormal_basis(rest)
    need = 3 - len(pts)
    return span(pts + ob[:need])


def _bank_element_through_point(Y: _Map, p) -> Subspace:
    if Y.cls is _C.ELLIPTIC_II:
        if Y.info.involution:
            return _through_point(p, Y.info.fixed_point)
        q = Y.info.fixed_point
        if same_ray(p, q, _H):
            return bank_sample(Y.m, 1, seed=0)[0].carrier
        W = _cap(_perp(p), _perp(q))
        if Y.info.non_unique:
            a = unit_spacelike(W)
            K = _isoclinic_K(Y.m, Y.info)
            b = _spacelike_in(_cap(W, _perp(a), _perp(K @ a)))
        else:
            U1, U2 = Y.info.rotation_planes
            a, b = _spacelike_in(_cap(U1, W)), _spacelike_in(_cap(U2, W))
        if a is None or b is None:
            raise _Decline("no type-II bank element through the point")
        return _from_normals(a, b)
    a = _spacelike_in(_cap(Y.U, _perp(p)))
    b = _spacelike_in(_cap(Y.V, _perp(p)))
    if a is None or b is None:
        raise _Decline("no bank element through the point")
    return _from_normals(a, b)


def _handler_candidates(A: _Map, B: _Map) -> Iterator[Candidate]:
    yield from _direct(A, B)
    key = (A.cls, B.cls)
    if key in HANDLERS:
        yield from HANDLERS[key](A, B)
    elif key[::-1] in HANDLERS:
        yield from HANDLERS[key[::-1]](B, A)


# -- fallback search ------------------------------------------------------------------------


def _param_spaces(X: _Map):
    if X.U is None or X.V is None:
        return None
    return X.U, X.V


def _stack_smin(W: np.ndarray, S: Subspace) -> np.ndarray:
    """Smallest singular value of [W_i; S] for a batch of 2-row frames ``W``."""
    rows = np.broadcast_to(S.basis, (W.shape[0],) + S.basis.shape)
    st = np.concatenate([W, rows], axis=1)
    return np.linalg.svd(st, compute_uv=False)[:, -1]


def _membership_defect(W: np.ndarray, Y: _Map) -> np.ndarray:
    """Batch defect of normal frames ``W`` (Euclidean-orthonormal rows) for Y's bank."""
    if Y.cls is _C.IDENTITY:
        return np.zeros(W.shape[0])
    if Y.cls is _C.ELLIPTIC_II and (Y.info.involution or Y.info.non_unique):
        p = Y.info.fixed_point
        d = np.abs(W @ (J @ p)).sum(axis=1)
        if Y.info.non_unique:
            K = _isoclinic_K(Y.m, Y.info)
            # ⟨e2, K e1⟩ vanishes for a Lorentz-orthonormal frame; use the Euclidean frame of p^L
            d = d + np.abs(np.einsum("ni,ij,nj->n", W[:, 1], J @ K, W[:, 0]))
        return d
    return _stack_smin(W, Y.U) + _stack_smin(W, Y.V)


def _frames(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = a / np.linalg.norm(a, axis=1, keepdims=True)
    b = b - np.sum(a * b, axis=1, keepdims=True) * a
    b = b / np.linalg.norm(b, axis=1, keepdims=True)
    return np.stack([a, b], axis=1)


def _genuine(W: np.ndarray) -> np.ndarray:
    """Frames whose Lorentz Gram is positive definite, i.e. normals of a genuine plane."""
    G = np.einsum("nik,kl,njl->nij", W, J, W)
    return (G[:, 0, 0] > 1e-6) & (np.linalg.det(G) > 1e-9)


def _search_side(X: _Map, Y: _Map, samples: int, rng: np.random.Generator):
    spaces = _param_spaces(X)
    if spaces is None:
        return None
    S1, S2 = spaces
    ca = rng.normal(size=(samples, S1.dim))
    cb = rng.normal(size=(samples, S2.dim))
    a, b = ca @ S1.basis, cb @ S2.basis
    W = _frames(a, b)
    # keep frames whose Lorentz Gram is positive definite (genuine plane normals)
    ok = _genuine(W)
    if not ok.any():
        return None
    d = np.where(ok, _membership_defect(W, Y), np.inf)
    order = np.argsort(d, kind="stable")[:5]
    best = None
    for i in order:
        if not ok[i]:
            break
        x0 = np.concatenate([ca[i], cb[i], [0.0, math.pi / 2]])
        res = _refine(S1, S2, Y, x0)
        if not _genuine(res[1][None])[0]:
            # refinement slid onto the light cone; keep the sampled frame
            res = (float(d[i]), W[i])
        if best is None or res[0] < best[0]:
            best = res
    return best


def _refine(S1: Subspace, S2: Subspace, Y: _Map, x0: np.ndarray):
    k1 = S1.dim
    k2 = S2.dim
    targets = [Y.U, Y.V] if Y.U is not None else []

    def frame(z):
        a = z[:k1] @ S1.basis
        b = z[k1 : k1 + k2] @ S2.basis
        return _frames(a[None], b[None])[0]

    def resid(z):
        W = frame(z)
        out = []
        for S, phi in zip(targets, z[k1 + k2 :]):
            w = math.cos(phi) * W[0] + math.sin(phi) * W[1]
            out.append(w - S.basis.T @ (S.basis @ w))
        if not targets:
            out.append(np.atleast_1d(_membership_defect(W[None], Y)))
        out.append([1e-3 * (np.linalg.norm(z[:k1]) - 1.0), 1e-3 * (np.linalg.norm(z[k1 : k1 + k2]) - 1.0)])
        return np.concatenate(out)

    try:
        sol = least_squares(resid, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400)
        z = sol.x
    except (ValueError, np.linalg.LinAlgError):
        z = x0
    W = frame(z)
    return float(_membership_defect(W[None], Y)[0]), W


def _canonical_order(A: _Map, B: _Map) -> bool:
    """Whether (A, B) is already in the canonical order used by the search."""
    ka = (A.cls.value, A.m.tobytes())
    kb = (B.cls.value, B.m.tobytes())
    return ka <= kb


def _fallback(A: _Map, B: _Map, samples: int, seed: int):
    first, second = (A, B) if _canonical_order(A, B) else (B, A)
    best = None
    for idx, (X, Y) in enumerate(((first, second), (second, first))):
        rng = np.random.default_rng([seed, idx])
        res = _search_side(X, Y, samples, rng)
        if res is not None and (best is None or res[0] < best[0]):
            best = res
    return best


# -- the decision procedure ---------------------------------------------------------------


def _try_beta(A: _Map, B: _Map, carrier: Subspace, tol) -> LinkCertificate | None:
    try:
        beta = GeoObject(Kind.PLANE, carrier)
        cert = certificate_from_beta(A.m, B.m, beta, tol)
    except (HalfTurnError, _Decline, np.linalg.LinAlgError):
        return None
    return cert if verify_link(A.m, B.m, cert, tol) else None


def link(A, B, samples: int = 10_000, seed: int = 0, tol: float | None = None) -> LinkOutcome:
    """Search for a common half-turn of ``A`` and ``B``.

    Pairwise constructions are tried first, in the order of their
    conditions; if none applies a seeded search over bank samples runs.
    ``NotLinked`` is never returned: the constructions are sufficient
    conditions, so failure only means the question stays open.
    """
    tol = get_tol() if tol is None else tol
    Am, Bm = _prepare(A, tol), _prepare(B, tol)
    attempts = []
    for cond, build in _handler_candidates(Am, Bm):
        try:
            carrier = build()
        except (_Decline, HalfTurnError) as exc:
            attempts.append((cond, str(exc)))
            continue
        cert = _try_beta(Am, Bm, carrier, tol)
        if cert is not None:
            return LinkOutcome("Linked", cond, cert, attempts=tuple(attempts))
        attempts.append((cond, "construction did not verify"))

    best = _fallback(Am, Bm, samples, seed)
    if best is None:
        return LinkOutcome("Undetermined", reason="no searchable bank parametrization", attempts=tuple(attempts))
    dist, W = best
    if dist < 1e-8:
        carrier = lorentz_complement(span(W))
        cert = _try_beta(Am, Bm, carrier, tol)
        if cert is not None:
            return LinkOutcome("Linked", "bank-search", cert, distance=dist, attempts=tuple(attempts))
    return LinkOutcome("Undetermined", distance=dist, reason="no common bank element found", attempts=tuple(attempts))


# -- the pair with no common invariant subspace -------------------------------------------------


def counterexample_pair() -> tuple[Isometry, Isometry, GeoObject]:
    """A linked loxodromic/parabolic pair with no common invariant subspace.

    A fixes the boundary points (0,0,±1) and turns the vertical line through
    them by π/6, with translation length ln(1+√2); B is ``x ↦ x + (1,0,1)``.
    β is the plane over the boundary line through the origin and (0,1,0).
    """
    D = np.eye(DIM)
    c, s = math.cos(math.pi / 6), math.sin(math.pi / 6)
    D[:2, :2] = [[c, -s], [s, c]]
    r = math.sqrt(2.0)
    D[3:, 3:] = [[r, 1.0], [1.0, r]]
    g = np.eye(DIM)
    g[2:4, 2:4] = [[0.0, 1.0], [-1.0, 0.0]]  # e4 -> e3, e3 -> -e4
    A = Isometry(g @ D @ g.T)
    B = Isometry(boundary.translation_matrix([1.0, 0.0, 1.0]))
    e = np.eye(DIM)
    beta = GeoObject(Kind.PLANE, Subspace([e[1], e[3], e[4]]))
    return A, B, beta


# -- common invariant subspaces ---------------------------------------------------------------


def _invariant_blocks(M: np.ndarray, tol: float) -> list[Subspace]:
    """Real invariant subspaces built from eigenvectors and Jordan chains."""
    w, _ = np.linalg.eig(M)
    blocks: list[Subspace] = []
    scale = max(1.0, float(np.linalg.norm(M)))
    seen: list[complex] = []
    for lam in w:
        if any(abs(lam - mu) <= 1e-6 * scale for mu in seen):
            continue
        seen.append(lam)
        if abs(lam.imag) > 1e-9 * scale:
            if lam.imag < 0:
                continue
            # real invariant plane of a complex pair: null space of (M − λ)(M − λ̄)
            Q = M @ M - 2.0 * lam.real * M + abs(lam) ** 2 * np.eye(DIM)
            for k in (1, 2):
                blocks.append(_null_space(np.linalg.matrix_power(Q, k), 1e-7 * scale**2))
            continue
        lam = lam.real
        N = M - lam * np.eye(DIM)
        for k in range(1, DIM + 1):
            blocks.append(_null_space(np.linalg.matrix_power(N, k), 1e-6 * scale**k))
            blocks.append(span(_range(np.linalg.matrix_power(N, k) @ _null_space(np.linalg.matrix_power(N, k + 1), 1e-6 * scale ** (k + 1)).basis.T)))
    return [b for b in blocks if 0 < b.dim < DIM]


def _null_space(mat: np.ndarray, thr: float) -> Subspace:
    _, s, vt = np.linalg.svd(mat)
    return Subspace._from_orthonormal(vt[int(np.sum(s > thr)):])


def _range(mat: np.ndarray) -> np.ndarray:
    if mat.size == 0:
        return np.zeros((0, DIM))
    u, s, _ = np.linalg.svd(mat)
    if not s.size or s[0] == 0:
        return np.zeros((0, DIM))
    return u[:, : int(np.sum(s > 1e-9 * s[0]))].T


def _largest_invariant_inside(W: Subspace, mats: list[np.ndarray]) -> Subspace:
    for _ in range(DIM + 1):
        prev = W.dim
        for M in mats:
            if W.dim == 0:
                return W
            pre = span(W.basis @ (J @ M @ J))  # M⁻¹ = J Mᵀ J acts on rows as W (J M J)
            W = subspace_intersection(W, pre, 1e-7)
        if W.dim == prev:
            break
    return W


def _krylov(W: Subspace, mats: list[np.ndarray]) -> Subspace:
    for _ in range(DIM + 1):
        prev = W.dim
        W = subspace_sum(W, *[span(W.basis @ M.T) for M in mats], tol=1e-8)
        if W.dim == prev:
            break
    return W


def _invariant(W: Subspace, M: np.ndarray) -> bool:
    img = W.basis @ M.T
    img = img / np.linalg.norm(img, axis=1, keepdims=True)
    return all(W.contains(v, 1e-6) for v in img)


def _dedupe(spaces: list[Subspace]) -> list[Subspace]:
    out: list[Subspace] = []
    projectors: dict[int, list[np.ndarray]] = {}
    for S in spaces:
        P = S.projector()
        known = projectors.setdefault(S.dim, [])
        if any(np.linalg.norm(P - Q, 2) <= 1e-6 for Q in known):
            continue
        known.append(P)
        out.append(S)
    return out


def common_invariant_subspaces(A, B, tol: float | None = None) -> list[Subspace]:
    """Subspaces of dim 1–4 meeting H⁴ ∪ ∂H⁴ that both maps leave invariant."""
    tol = get_tol() if tol is None else tol
    a, b = as_isometry(A).matrix, as_isometry(B).matrix
    mats = [a, b]
    cands: list[Subspace] = []
    blocks = _dedupe(_invariant_blocks(a, tol) + _invariant_blocks(b, tol))
    pool = list(blocks)
    for r in (2, 3):
        for combo in itertools.combinations(blocks, r):
            S = subspace_sum(*combo, tol=1e-8)
            if 0 < S.dim < DIM:
                pool.append(S)
    for S in _dedupe(pool):
        for T in (_largest_invariant_inside(S, mats), _krylov(S, mats)):
            if 0 < T.dim < DIM:
                cands.append(T)
    out: list[Subspace] = []
    for S in cands:
        if not all(_invariant(S, M) for M in mats):
            continue
        sig = subspace_signature(S, 1e-7)
        if sig[1] == 0 and sig[2] == 0:
            continue
        if any(same_subspace(S, T, 1e-6) for T in out):
            continue
        out.append(S)
    out.sort(key=lambda S: (S.dim, subspace_signature(S, 1e-7)))
    return out


def algebra_dimension(A, B) -> int:
    """Dimension of the associative algebra generated by ``A`` and ``B``.

    It equals 25 exactly when the pair has no common invariant subspace
    over the complex numbers.
    """
    a, b = as_isometry(A).matrix, as_isometry(B).matrix
    words = [np.eye(DIM)]
    basis = np.zeros((0, DIM * DIM))
    frontier = [np.eye(DIM)]
    for _ in range(2 * DIM * DIM):
        new = []
        for W in frontier:
            for g in (a, b):
                P = W @ g
                v = P.ravel() / np.linalg.norm(P)
                trial = np.vstack([basis, v]) if basis.size else v[None]
                if np.linalg.matrix_rank(trial, tol=1e-8) > basis.shape[0]:
                    basis = trial
                    new.append(P)
        if not new:
            break
        frontier = new
    rank_with_identity = np.linalg.matrix_rank(np.vstack([basis, np.eye(DIM).ravel()]), tol=1e-8)
    return int(rank_with_identity)
