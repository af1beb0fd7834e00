"""Exception hierarchy.

Every error raised by the library derives from ``HalfTurnError`` so callers
(and the CLI) can separate domain failures from programming errors.
"""


class HalfTurnError(Exception):
    """Base class for domain errors."""

    code = "HalfTurnError"


class ZeroVector(HalfTurnError, ValueError):
    code = "ZeroVector"


class DegenerateBasis(HalfTurnError, ValueError):
    code = "DegenerateBasis"


class DegenerateSubspace(HalfTurnError, ValueError):
    code = "DegenerateSubspace"


class WrongKind(HalfTurnError, ValueError):
    code = "WrongKind"


class NotUltraParallel(HalfTurnError, ValueError):
    code = "NotUltraParallel"


class EqualPlanes(HalfTurnError, ValueError):
    code = "EqualPlanes"


class NotSinglePoint(HalfTurnError, ValueError):
    code = "NotSinglePoint"


class OrthogonalPlanes(HalfTurnError, ValueError):
    code = "OrthogonalPlanes"


class NotInGroup(HalfTurnError, ValueError):
    code = "NotInGroup"


class WrongClass(HalfTurnError, ValueError):
    code = "WrongClass"


class IsInvolution(WrongClass):
    code = "IsInvolution"


class NotOrthogonal(HalfTurnError, ValueError):
    code = "NotOrthogonal"


class NonPositiveScale(HalfTurnError, ValueError):
    code = "NonPositiveScale"


class BadParams(HalfTurnError, ValueError):
    code = "BadParams"


class BadAngle(HalfTurnError, ValueError):
    code = "BadAngle"


class NotTimeLike(HalfTurnError, ValueError):
    code = "NotTimeLike"


class KindMismatch(HalfTurnError, ValueError):
    code = "KindMismatch"


class PencilUndefined(KindMismatch):
    """Type-II elliptic isometries carry no pencils."""

    code = "PencilUndefined"


class NotUnique(HalfTurnError, ValueError):
    code = "NotUnique"


class NotInBank(HalfTurnError, ValueError):
    code = "NotInBank"


class ClassificationError(HalfTurnError, ArithmeticError):
    """Eigenstructure fits none of the six classes within tolerance."""

    code = "ClassificationError"
