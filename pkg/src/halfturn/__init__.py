"""Half-turn factorization of orientation-preserving isometries of H⁴.

Isometries are 5×5 Lorentz matrices acting on R^{4,1} with the time
coordinate last; planes are 3-dimensional time-like subspaces.
"""

from .errors import HalfTurnError
from .geometry import (
    GeoObject,
    Kind,
    classify_plane_pair,
    common_perpendicular,
    compose_half_turns,
    half_turn_matrix,
    principal_plane_pair,
)
from .isometries import Isometry, IsometryClass, classify, decompose
from .linker import (
    LinkCertificate,
    LinkOutcome,
    common_invariant_subspaces,
    computational_condition,
    counterexample_pair,
    link,
    verify_link,
)
from .lorentz import J, Subspace, get_tol, lorentz_inner, span, tolerance
from .pencils import PencilKind, bank_contains, bank_sample, bank_witness, factor_about, pencil

__all__ = [
    "GeoObject",
    "HalfTurnError",
    "Isometry",
    "IsometryClass",
    "J",
    "Kind",
    "LinkCertificate",
    "LinkOutcome",
    "PencilKind",
    "Subspace",
    "bank_contains",
    "bank_sample",
    "bank_witness",
    "classify",
    "classify_plane_pair",
    "common_invariant_subspaces",
    "common_perpendicular",
    "compose_half_turns",
    "computational_condition",
    "counterexample_pair",
    "decompose",
    "factor_about",
    "get_tol",
    "half_turn_matrix",
    "link",
    "lorentz_inner",
    "pencil",
    "principal_plane_pair",
    "span",
    "tolerance",
    "verify_link",
]
