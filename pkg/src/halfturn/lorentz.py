"""Linear algebra in Minkowski space R^{4,1}.

Vectors are plain length-5 numpy arrays ``(x1, x2, x3, x4, x0)`` with the
time coordinate last, paired by

    <u, v>_L = u1 v1 + u2 v2 + u3 v3 + u4 v4 - u0 v0.

Subspaces keep a Euclidean-orthonormal basis internally: Lorentz-orthonormal
bases of time-like subspaces far from the origin are badly conditioned, and
every decision here (rank, signature, containment) is basis independent.
"""

from __future__ import annotations

import contextlib
import contextvars
import enum
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DegenerateBasis, DegenerateSubspace, ZeroVector

DIM = 5
J = np.diag([1.0, 1.0, 1.0, 1.0, -1.0])
J.flags.writeable = False

DEFAULT_TOL = 1e-9
_TOL = contextvars.ContextVar("halfturn_tol", default=DEFAULT_TOL)


def get_tol() -> float:
    """Current global relative tolerance."""
    return _TOL.get()


@contextlib.contextmanager
def tolerance(value: float) -> Iterator[float]:
    """Temporarily override the global tolerance.

    >>> with tolerance(1e-7):
    ...     get_tol()
    1e-07
    """
    if not value > 0:
        raise ValueError("tolerance must be positive")
    token = _TOL.set(float(value))
    try:
        yield float(value)
    finally:
        _TOL.reset(token)


def set_tol(value: float) -> None:
    """Set the tolerance for the current context (used by the CLI)."""
    if not value > 0:
        raise ValueError("tolerance must be positive")
    _TOL.set(float(value))


class VectorType(enum.Enum):
    SPACE_LIKE = "SpaceLike"
    TIME_LIKE = "TimeLike"
    LIGHT_LIKE = "LightLike"


def as_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.shape != (DIM,):
        raise ValueError(f"expected a vector of length {DIM}, got shape {arr.shape}")
    return arr


def lorentz_inner(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(u[:4] @ v[:4] - u[4] * v[4])


def lorentz_gram(rows: np.ndarray, other: np.ndarray | None = None) -> np.ndarray:
    """Matrix of pairings between the rows of ``rows`` and ``other``."""
    rows = np.atleast_2d(rows)
    other = rows if other is None else np.atleast_2d(other)
    return rows @ J @ other.T


def classify_vector(v, tol: float | None = None) -> VectorType:
    v = as_vector(v)
    tol = get_tol() if tol is None else tol
    n2 = float(v @ v)
    if np.sqrt(n2) <= tol:
        raise ZeroVector("cannot classify the zero vector")
    q = lorentz_inner(v, v)
    if q > tol * n2:
        return VectorType.SPACE_LIKE
    if q < -tol * n2:
        return VectorType.TIME_LIKE
    return VectorType.LIGHT_LIKE


def normalize(v, tol: float | None = None) -> np.ndarray:
    """Canonical representative of ``v`` by its causal type.

    Space-like vectors get <v,v> = 1, time-like ones <v,v> = -1 with
    positive last coordinate, light-like ones Euclidean norm 1 with
    nonnegative last coordinate.
    """
    v = as_vector(v)
    kind = classify_vector(v, tol)
    if kind is VectorType.SPACE_LIKE:
        return v / np.sqrt(lorentz_inner(v, v))
    if kind is VectorType.TIME_LIKE:
        w = v / np.sqrt(-lorentz_inner(v, v))
        return w if w[4] > 0 else -w
    w = v / np.linalg.norm(v)
    return -w if w[4] < 0 else w


def _null_rows(mat: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal rows spanning the right null space of ``mat``."""
    mat = np.atleast_2d(mat)
    if mat.size == 0:
        return np.eye(mat.shape[1])
    _, s, vt = np.linalg.svd(mat)
    rank = int(np.sum(s > tol))
    return vt[rank:]


def _range_rows(mat: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal rows spanning the column space of ``mat``."""
    mat = np.atleast_2d(mat)
    u, s, _ = np.linalg.svd(mat)
    scale = max(1.0, float(s[0])) if s.size else 1.0
    rank = int(np.sum(s > tol * scale))
    return u[:, :rank].T


class Subspace:
    """A linear subspace of R^{4,1}.

    ``basis`` is a read-only ``(dim, 5)`` array with Euclidean-orthonormal
    rows. Construction from explicit vectors is strict: a dependent list
    raises :class:`DegenerateBasis`. Use :func:`span` to absorb dependence.
    """

    __slots__ = ("basis",)

    def __init__(self, vectors=(), tol: float | None = None):
        tol = get_tol() if tol is None else tol
        arr = np.asarray(vectors, dtype=float)
        if arr.size == 0:
            basis = np.zeros((0, DIM))
        else:
            arr = np.atleast_2d(arr)
            if arr.shape[1] != DIM or arr.shape[0] > DIM:
                raise ValueError(f"bad basis shape {arr.shape}")
            s = np.linalg.svd(arr, compute_uv=False)
            if s[0] <= tol or s[-1] <= tol * s[0]:
                raise DegenerateBasis("basis vectors are linearly dependent")
            q, r = np.linalg.qr(arr.T)
            signs = np.where(np.diag(r) < 0, -1.0, 1.0)
            basis = (q * signs).T
        basis = np.ascontiguousarray(basis)
        basis.flags.writeable = False
        self.basis = basis

    @classmethod
    def _from_orthonormal(cls, rows: np.ndarray) -> "Subspace":
        obj = cls.__new__(cls)
        rows = np.ascontiguousarray(np.atleast_2d(rows).reshape(-1, DIM), dtype=float)
        rows.flags.writeable = False
        obj.basis = rows
        return obj

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, signature={subspace_signature(self) if self.dim else (0, 0, 0)})"

    def projector(self) -> np.ndarray:
        """Euclidean orthogonal projector onto the subspace."""
        return self.basis.T @ self.basis

    def residual(self, v) -> float:
        """Euclidean distance from unit-normalized ``v`` to the subspace."""
        v = as_vector(v)
        nv = np.linalg.norm(v)
        if nv == 0:
            return 0.0
        v = v / nv
        return float(np.linalg.norm(v - self.basis.T @ (self.basis @ v)))

    def contains(self, v, tol: float | None = None) -> bool:
        tol = get_tol() if tol is None else tol
        return self.residual(v) <= tol

    def contains_subspace(self, other: "Subspace", tol: float | None = None) -> bool:
        tol = get_tol() if tol is None else tol
        if other.dim == 0:
            return True
        defect = other.basis - (other.basis @ self.basis.T) @ self.basis
        return float(np.linalg.norm(defect, 2)) <= tol

    def orthogonal_complement(self) -> "Subspace":
        """Euclidean orthogonal complement."""
        return Subspace._from_orthonormal(_null_rows(self.basis, 0.5) if self.dim else np.eye(DIM))

    def to_json(self) -> dict:
        return {"basis": self.basis.tolist()}

    def to_dict(self) -> dict:
        return self.to_json()

    @classmethod
    def from_json(cls, data: dict) -> "Subspace":
        return cls(data["basis"])


def span(vectors, tol: float | None = None) -> Subspace:
    """Span of arbitrary (possibly dependent) vectors, rank decided by SVD."""
    tol = get_tol() if tol is None else tol
    arr = np.asarray(vectors, dtype=float)
    if arr.size == 0:
        return Subspace()
    arr = np.atleast_2d(arr).reshape(-1, DIM)
    norms = np.linalg.norm(arr, axis=1)
    keep = norms > tol * max(1.0, float(norms.max()))
    if not keep.any():
        return Subspace()
    arr = arr[keep] / norms[keep, None]
    return Subspace._from_orthonormal(_range_rows(arr.T, tol))


def zero_subspace() -> Subspace:
    return Subspace()


def subspace_signature(S: Subspace, tol: float | None = None) -> tuple[int, int, int]:
    """``(n_plus, n_minus, n_zero)`` of the Lorentz form restricted to ``S``.

    Eigenvalues of the Gram matrix of the orthonormal basis are banded by
    ``tol`` relative to the largest eigenvalue magnitude.
    """
    tol = get_tol() if tol is None else tol
    if S.dim == 0:
        return (0, 0, 0)
    w = np.linalg.eigvalsh(lorentz_gram(S.basis))
    band = tol * max(1.0, float(np.max(np.abs(w))))
    n_plus = int(np.sum(w > band))
    n_minus = int(np.sum(w < -band))
    return (n_plus, n_minus, S.dim - n_plus - n_minus)


def is_time_like(S: Subspace, tol: float | None = None) -> bool:
    return S.dim > 0 and subspace_signature(S, tol)[1] == 1


def is_space_like(S: Subspace, tol: float | None = None) -> bool:
    sig = subspace_signature(S, tol)
    return sig[1] == 0 and sig[2] == 0


def lorentz_complement(S: Subspace, tol: float | None = None) -> Subspace:
    """``S^L = {t : <s, t>_L = 0 for all s in S}``."""
    if S.dim == 0:
        return Subspace._from_orthonormal(np.eye(DIM))
    # J is orthogonal, so S^L is the Euclidean complement of J S.
    return Subspace._from_orthonormal(_null_rows(S.basis @ J, 0.5))


def subspace_intersection(S: Subspace, T: Subspace, tol: float | None = None) -> Subspace:
    """Intersection via the null space of the stacked Euclidean complements."""
    tol = get_tol() if tol is None else tol
    if S.dim == 0 or T.dim == 0:
        return Subspace()
    cs = S.orthogonal_complement().basis
    ct = T.orthogonal_complement().basis
    stacked = np.vstack([cs, ct])
    if stacked.shape[0] == 0:
        return Subspace._from_orthonormal(np.eye(DIM))
    return Subspace._from_orthonormal(_null_rows(stacked, tol))


def subspace_sum(*spaces: Subspace, tol: float | None = None) -> Subspace:
    rows = [s.basis for s in spaces if s.dim]
    if not rows:
        return Subspace()
    return span(np.vstack(rows), tol)


def subspace_distance(S: Subspace, T: Subspace) -> float:
    """Sine of the largest principal angle (inf when dimensions differ)."""
    if S.dim != T.dim:
        return float("inf")
    if S.dim == 0:
        return 0.0
    return float(np.linalg.norm(S.projector() - T.projector(), 2))


def same_subspace(S: Subspace, T: Subspace, tol: float | None = None) -> bool:
    tol = get_tol() if tol is None else tol
    return subspace_distance(S, T) <= tol


def radical(S: Subspace, tol: float | None = None) -> Subspace:
    """Null directions of the form restricted to ``S`` (``S ∩ S^L``)."""
    tol = get_tol() if tol is None else tol
    if S.dim == 0:
        return Subspace()
    g = lorentz_gram(S.basis)
    w, v = np.linalg.eigh(g)
    band = tol * max(1.0, float(np.max(np.abs(w))))
    idx = np.abs(w) <= band
    if not idx.any():
        return Subspace()
    return span(v[:, idx].T @ S.basis, tol)


def orthonormal_basis(S: Subspace, tol: float | None = None) -> list[np.ndarray]:
    """Lorentz-orthonormal basis of a non-degenerate subspace.

    Gram-Schmidt in basis order, skipping (for now) vectors whose Lorentz
    norm is negligible; a symmetric eigensolve finishes whatever Gram-Schmidt
    cannot. Space-like vectors come first and the time-like vector, if any,
    is last with positive time coordinate.
    """
    tol = get_tol() if tol is None else tol
    sig = subspace_signature(S, tol)
    if sig[2] > 0:
        raise DegenerateSubspace(f"subspace has degenerate signature {sig}")
    pending = [row.copy() for row in S.basis]
    done: list[np.ndarray] = []
    while pending:
        pick = None
        for i, v in enumerate(pending):
            q = lorentz_inner(v, v)
            if abs(q) > 1e-3 * float(v @ v):
                pick = i
                break
        if pick is None:
            break
        v = pending.pop(pick)
        v = v / np.sqrt(abs(lorentz_inner(v, v)))
        done.append(v)
        new_pending = []
        for w in pending:
            w = w - lorentz_inner(w, v) / lorentz_inner(v, v) * v
            nw = np.linalg.norm(w)
            if nw > tol:
                new_pending.append(w / nw)
        pending = new_pending
    if pending:
        rest = span(np.array(pending), tol)
        g = lorentz_gram(rest.basis)
        w, vecs = np.linalg.eigh(g)
        for k in range(len(w)):
            if abs(w[k]) <= tol:
                raise DegenerateSubspace("degenerate remainder in Gram-Schmidt")
            done.append((vecs[:, k] @ rest.basis) / np.sqrt(abs(w[k])))
    space = [v for v in done if lorentz_inner(v, v) > 0]
    time = [v if v[4] > 0 else -v for v in done if lorentz_inner(v, v) < 0]
    return space + time


def lorentz_projector(S: Subspace, tol: float | None = None) -> np.ndarray:
    """Lorentz-orthogonal projector onto a non-degenerate subspace."""
    tol = get_tol() if tol is None else tol
    if S.dim == 0:
        return np.zeros((DIM, DIM))
    b = S.basis
    g = lorentz_gram(b)
    if np.min(np.abs(np.linalg.eigvalsh(g))) <= tol:
        raise DegenerateSubspace("projector needs a non-degenerate subspace")
    return b.T @ np.linalg.solve(g, b @ J)


def null_rays(S: Subspace, tol: float | None = None) -> list[np.ndarray]:
    """The two light-like rays of a 2-dim time-like subspace (normalized)."""
    tol = get_tol() if tol is None else tol
    if S.dim != 2:
        raise ValueError("null_rays needs a 2-dim subspace")
    g = lorentz_gram(S.basis)
    w, v = np.linalg.eigh(g)
    if not (w[0] < -tol and w[1] > tol):
        raise DegenerateSubspace("subspace is not time-like of signature (1,1)")
    # in the eigenbasis the form is w0 a^2 + w1 b^2; null when b/a = ±sqrt(-w0/w1)
    r = np.sqrt(-w[0] / w[1])
    e0 = v[:, 0] @ S.basis
    e1 = v[:, 1] @ S.basis
    return [normalize(e0 + r * e1), normalize(e0 - r * e1)]


def unit_spacelike(S: Subspace, tol: float | None = None) -> np.ndarray:
    """A deterministic unit space-like vector in ``S`` (largest Gram eigenvalue)."""
    g = lorentz_gram(S.basis)
    w, v = np.linalg.eigh(g)
    if w[-1] <= (get_tol() if tol is None else tol):
        raise DegenerateSubspace("subspace has no space-like direction")
    return normalize(v[:, -1] @ S.basis, tol)


def same_ray(u, v, tol: float | None = None) -> bool:
    """Whether two nonzero vectors are proportional."""
    tol = get_tol() if tol is None else tol
    u = as_vector(u) / np.linalg.norm(u)
    v = as_vector(v) / np.linalg.norm(v)
    return float(np.linalg.norm(np.outer(u, v) - np.outer(v, u))) <= tol * 10


def vectors_to_json(vectors: Iterable[Sequence[float]]) -> list[list[float]]:
    return [list(map(float, v)) for v in vectors]
