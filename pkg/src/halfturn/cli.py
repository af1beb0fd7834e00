"""Command-line interface: JSON in, JSON out.

Every verb reads JSON documents from files, inline strings or ``-``
(standard input) and writes one canonical JSON document to standard output.
Exit status is 0 on success, 2 on a domain error (with
``{"error": code, "detail": ...}`` on stdout) and 1 on unreadable input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any

import numpy as np

from . import linker
from .errors import HalfTurnError
from .geometry import GeoObject, compose_half_turns
from .isometries import FIXED_LIGHT_LIKE, Isometry, classify, reference_parabolic, sqrt2_hyperbolic
from .lorentz import DIM, tolerance
from .pencils import bank_contains, bank_witness, factor_about


class InputError(Exception):
    """Unreadable or malformed input (exit status 1)."""


# -- JSON plumbing ------------------------------------------------------------------


def _plain(obj: Any) -> Any:
    """Convert numpy values to builtins; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x + 0.0  # folds -0.0 into 0.0
    return obj


def dumps(obj: Any) -> str:
    """Canonical serialization: sorted keys, shortest round-trip floats."""
    return json.dumps(_plain(obj), sort_keys=True, allow_nan=False)


def load(source: str) -> Any:
    """Parse ``source``: ``-`` for stdin, an inline JSON literal, or a path."""
    try:
        if source == "-":
            text = sys.stdin.read()
        elif source.lstrip().startswith(("{", "[")):
            text = source
        else:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{source}: {exc}") from exc


def _is_pair(doc: dict) -> bool:
    return isinstance(doc.get("a"), dict) and isinstance(doc.get("b"), dict)


def isometry_from(doc: Any) -> Isometry:
    """Accept an isometry document or any wrapper holding one."""
    if not isinstance(doc, dict):
        raise InputError("expected a JSON object for an isometry")
    if "isometry" in doc:
        return isometry_from(doc["isometry"])
    if _is_pair(doc):
        return isometry_from(doc["a"])
    try:
        return Isometry.from_json(doc)
    except (ValueError, TypeError, KeyError) as exc:
        if isinstance(exc, HalfTurnError):
            raise
        raise InputError(f"bad isometry: {exc}") from exc


def plane_from(doc: Any) -> GeoObject:
    if not isinstance(doc, dict):
        raise InputError("expected a JSON object for a plane")
    for key in ("plane", "beta"):
        if key in doc and isinstance(doc[key], dict):
            return plane_from(doc[key])
    try:
        return GeoObject.from_json(doc)
    except (ValueError, TypeError, KeyError) as exc:
        if isinstance(exc, HalfTurnError):
            raise
        raise InputError(f"bad plane: {exc}") from exc


def _pick(args_value: str | None, doc: dict | None, keys: tuple[str, ...], what: str):
    if args_value is not None:
        return load(args_value)
    if doc is not None:
        for key in keys:
            if key in doc:
                return doc[key]
    raise InputError(f"missing {what}")


# -- verbs --------------------------------------------------------------------------


def cmd_classify(args) -> dict:
    return classify(isometry_from(load(args.input)).matrix).to_json()


def cmd_compose(args) -> dict:
    doc = load(args.input) if args.input else None
    P = plane_from(_pick(args.p, doc, ("p", "alpha"), "first plane (--p)"))
    Q = plane_from(_pick(args.q, doc, ("q", "beta"), "second plane (--q)"))
    product, predicted = compose_half_turns(P, Q)
    return {"product": product, "predicted": predicted.to_json(), "class": classify(product).cls.value}


def _isometry_and_plane(args) -> tuple[Isometry, GeoObject]:
    doc = load(args.input) if args.input else None
    if args.isometry is not None:
        M = isometry_from(load(args.isometry))
    elif doc is not None:
        M = isometry_from(doc)
    else:
        raise InputError("missing isometry (--isometry)")
    P = plane_from(_pick(args.plane, doc, ("plane", "beta"), "plane (--plane)"))
    return M, P


def cmd_factor(args) -> dict:
    M, P = _isometry_and_plane(args)
    f = factor_about(M.matrix, P)
    return {"k1": f.k1.to_json(), "k2": f.k2.to_json(), "residual": f.residual}


def cmd_bank(args) -> dict:
    M, P = _isometry_and_plane(args)
    inside = bank_contains(M.matrix, P)
    w = bank_witness(M.matrix, P) if inside else None
    return {"in_bank": inside, "witness": None if w is None else {"s": w.s.to_json(), "t": w.t.to_json()}}


def cmd_link(args) -> dict:
    doc = load(args.input) if args.input else None
    A = isometry_from(_pick(args.a, doc, ("a",), "first isometry (--a)"))
    B = isometry_from(_pick(args.b, doc, ("b",), "second isometry (--b)"))
    return linker.link(A, B, samples=args.samples, seed=args.seed).to_json()


def _embed(P: np.ndarray) -> np.ndarray:
    """Pad a PSO(n,1) matrix to 5×5, keeping the time coordinate last."""
    n = P.shape[0]
    idx = list(range(n - 2)) + [DIM - 2, DIM - 1]
    out = np.eye(DIM)
    out[np.ix_(idx, idx)] = P
    return out


def _reference(n: int, params: list[float]) -> dict:
    P, S, Jn = reference_parabolic(n, params)
    return {
        "matrix": _embed(P),
        "reference": {"P": P, "S": S, "J": Jn, "params": params, "fixed": FIXED_LIGHT_LIKE[n]},
    }


def _linked_pair() -> dict:
    A, B, beta = linker.counterexample_pair()
    cert = linker.certificate_from_beta(A, B, beta)
    return {
        "a": A.to_json(),
        "b": B.to_json(),
        "alpha": cert.alpha.to_json(),
        "beta": beta.to_json(),
        "gamma": cert.gamma.to_json(),
    }


EXAMPLES = {
    "p2": lambda: _reference(2, [1.0]),
    "p3": lambda: _reference(3, [3.0, 4.0]),
    "p4": lambda: _reference(4, [1.0, 2.0, 2.0]),
    "sqrt2-hyperbolic": lambda: sqrt2_hyperbolic().to_json(),
    "linked-pair": _linked_pair,
}
EXAMPLES["thm81-pair"] = _linked_pair  # name fixed by the published interface


def cmd_examples(args) -> dict:
    if args.name is None:
        return {"names": sorted(EXAMPLES)}
    return EXAMPLES[args.name]()


# -- entry point --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="halfturn", description="Half-turn factorization of isometries of H⁴.")
    parser.add_argument("--tol", type=float, default=None, help="override the subspace tolerance")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("classify", help="classify an isometry")
    p.add_argument("input", help="isometry JSON (path, inline, or -)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("compose", help="compose two half-turns")
    p.add_argument("input", nargs="?", help='document with "p" and "q" planes')
    p.add_argument("--p")
    p.add_argument("--q")
    p.set_defaults(func=cmd_compose)

    for verb, func, text in (("factor", cmd_factor, "factor about a bank plane"), ("bank", cmd_bank, "bank membership")):
        p = sub.add_parser(verb, help=text)
        p.add_argument("input", nargs="?", help='document with "isometry" and "plane"')
        p.add_argument("--isometry")
        p.add_argument("--plane")
        p.set_defaults(func=func)

    p = sub.add_parser("link", help="search for a common half-turn")
    p.add_argument("input", nargs="?", help='document with "a" and "b" isometries')
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=10_000)
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("examples", help="emit reference objects")
    p.add_argument("--name", choices=sorted(EXAMPLES))
    p.set_defaults(func=cmd_examples)
    return parser


def _run(args) -> dict:
    if args.tol is None:
        return args.func(args)
    with tolerance(args.tol):
        return args.func(args)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = _run(args)
    except InputError as exc:
        print(dumps({"error": "InputError", "detail": str(exc)}), file=sys.stderr)
        return 1
    except HalfTurnError as exc:
        print(dumps({"error": exc.code, "detail": str(exc)}))
        return 2
    print(dumps(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
