"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run under pytest (the lines are collected into the terminal summary) or
directly with ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import least_squares, minimize

sys.path.insert(0, str(Path(__file__).parent))

import factories as F  # noqa: E402
from halfturn import (  # noqa: E402
    bank_contains,
    bank_sample,
    classify,
    common_invariant_subspaces,
    compose_half_turns,
    computational_condition,
    counterexample_pair,
    factor_about,
    half_turn_matrix,
    link,
    verify_link,
)
from halfturn.geometry import GeoObject, Kind, common_perpendicular_data, from_ideal_points, orthogonality_defect  # noqa: E402
from halfturn.isometries import (  # noqa: E402
    FIXED_LIGHT_LIKE,
    hyperbolic_from_fixed_points,
    parabolic_from_fixed_point,
    reference_parabolic,
)
from halfturn.linker import certificate_from_beta, reverse_certificate  # noqa: E402
from halfturn.lorentz import DIM, J, lorentz_complement, span  # noqa: E402
from halfturn.pencils import _isoclinic_K, bank_spaces  # noqa: E402

RESULTS: dict[int, tuple[bool, str, str]] = {}
LINKED_PAIRS: list[tuple[str, np.ndarray, np.ndarray]] = []


@contextmanager
def criterion(n: int, title: str):
    note = {"detail": ""}
    try:
        yield note
    except BaseException as exc:
        RESULTS[n] = (False, title, f"{note['detail']} {type(exc).__name__}: {exc}".strip())
        print(f"criterion {n:2d} FAIL  {title}: {RESULTS[n][2]}")
        raise
    RESULTS[n] = (True, title, note["detail"])
    print(f"criterion {n:2d} PASS  {title}: {note['detail']}")


def summary_lines() -> list[str]:
    lines = []
    for n in range(1, 11):
        if n in RESULTS:
            ok, title, detail = RESULTS[n]
            lines.append(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        else:
            lines.append(f"criterion {n:2d} NOT RUN")
    return lines


def _fro(x) -> float:
    return float(np.linalg.norm(x))


# -- 1 ------------------------------------------------------------------------------


def test_criterion_01_half_turn_involutions():
    with criterion(1, "half-turns are involutions fixing their carrier") as note:
        rng = np.random.default_rng(101)
        planes = [F.random_plane(rng) for _ in range(1000)]
        t0 = time.perf_counter()
        worst = 0.0
        for P in planes:
            H = half_turn_matrix(P)
            worst = max(worst, _fro(H @ H - np.eye(DIM)))
            # fixed set: the +1 eigenspace is exactly the carrier
            fixed = span(np.linalg.svd(H - np.eye(DIM))[2][-3:])
            assert np.linalg.matrix_rank(H - np.eye(DIM), tol=1e-8) == 2
            assert fixed.contains_subspace(P.carrier, 1e-9)
        elapsed = time.perf_counter() - t0
        note["detail"] = f"max ||H^2-I||_F={worst:.2e}, {elapsed:.2f}s"
        assert worst < 1e-11
        assert elapsed < 5.0


# -- 2 ------------------------------------------------------------------------------


def _invariance(M: np.ndarray, tau: GeoObject) -> float:
    image = tau.basis @ M.T
    return _fro(image - (image @ tau.basis.T) @ tau.basis) / max(1.0, _fro(M))


def test_criterion_02_composition_concordance():
    with criterion(2, "composition prediction matches classification") as note:
        rng = np.random.default_rng(202)
        kinds = F.PAIR_KINDS
        mismatches, involutions, pairs_checked, worst_inv = [], 0, 0, 0.0
        for i in range(1000):
            kind = kinds[i % len(kinds)]
            P, Q = F.configured_pair(kind, rng)
            M, pred = compose_half_turns(P, Q)
            info = classify(M)
            if pred.cls != info.cls.value:
                mismatches.append((kind, pred.cls, info.cls.value))
                continue
            if pred.length is not None and abs(pred.length - info.length) > 1e-6:
                mismatches.append((kind, "length", pred.length, info.length))
            if pred.pair.tag.value == "MeetInPoint":
                if pred.involution:
                    involutions += 1
                    assert info.involution and _fro(M @ M - np.eye(DIM)) < 1e-9
                else:
                    pairs_checked += 1
                    for tau in pred.invariant_planes:
                        worst_inv = max(worst_inv, _invariance(M, GeoObject(Kind.PLANE, tau)))
        note["detail"] = (
            f"{len(mismatches)} mismatches, {involutions} involution pairs, "
            f"{pairs_checked} invariant-pair cases (max residual {worst_inv:.1e})"
        )
        assert not mismatches, mismatches[:5]
        assert involutions > 0 and pairs_checked > 0
        assert worst_inv < 1e-9


# -- 3 ------------------------------------------------------------------------------


def _chart(P: GeoObject):
    """Parametrize P ∩ H⁴ by R²: x ↦ sqrt(1+|x|²) t + x₁ s₁ + x₂ s₂."""
    rows = F.lorentz_orthonormal(P.basis)
    s, t = rows[:2], rows[2] * np.sign(rows[2][4])

    def point(x):
        return math.sqrt(1.0 + x @ x) * t + x @ s

    def jac(x):
        return np.outer(x, t) / math.sqrt(1.0 + x @ x) + s

    return point, jac


def _closest_points(P: GeoObject, Q: GeoObject):
    """Minimize cosh(distance) = −⟨p, q⟩ over both planes with BFGS."""
    p, dp = _chart(P)
    q, dq = _chart(Q)

    def f(z):
        return -float(p(z[:2]) @ J @ q(z[2:]))

    def grad(z):
        x, y = z[:2], z[2:]
        return -np.concatenate([dp(x) @ J @ q(y), dq(y) @ J @ p(x)])

    res = minimize(f, np.zeros(4), jac=grad, method="BFGS", options={"gtol": 1e-13, "maxiter": 2000})
    return p(res.x[:2]), q(res.x[2:])


def test_criterion_03_common_perpendicular():
    with criterion(3, "common perpendicular of ultra-parallel planes") as note:
        rng = np.random.default_rng(303)
        done, worst_orth, worst_foot = 0, 0.0, 0.0
        while done < 500:
            kind = ("random", "ultra-hyperbolic", "ultra-loxodromic")[done % 3]
            P, Q = F.configured_pair(kind, rng)
            try:
                perp = common_perpendicular_data(P, Q)
            except Exception as exc:  # not ultra-parallel: draw again
                if type(exc).__name__ != "NotUltraParallel":
                    raise
                continue
            worst_orth = max(worst_orth, orthogonality_defect(perp.line, P), orthogonality_defect(perp.line, Q))
            fp, fq = _closest_points(P, Q)
            err = max(
                _fro(fp - perp.foot_p) / max(1.0, _fro(fp)),
                _fro(fq - perp.foot_q) / max(1.0, _fro(fq)),
            )
            worst_foot = max(worst_foot, err)
            done += 1
        note["detail"] = f"max orthogonality residual {worst_orth:.1e}, max foot deviation {worst_foot:.1e}"
        assert worst_orth < 1e-9
        assert worst_foot < 1e-6


# -- 4 ------------------------------------------------------------------------------


def test_criterion_04_factorization_round_trip():
    with criterion(4, "factorization round trip for every class") as note:
        rng = np.random.default_rng(404)
        t0 = time.perf_counter()
        worst, failures, counted = 0.0, [], {}
        for case in F.CASES:
            n = 0
            while n < 100:
                M = F.sample_isometry(case, rng)
                for k in bank_sample(M, 10, seed=int(rng.integers(1 << 31))):
                    f = factor_about(M, k)
                    Hk = half_turn_matrix(k)
                    r = max(_fro(half_turn_matrix(f.k1) @ Hk - M), _fro(Hk @ half_turn_matrix(f.k2) - M))
                    worst = max(worst, r)
                    if not (bank_contains(M, f.k1) and bank_contains(M, f.k2)):
                        failures.append(case)
                    n += 1
            counted[case] = n
        elapsed = time.perf_counter() - t0
        note["detail"] = f"{sum(counted.values())} factorizations over {len(counted)} cases, max residual {worst:.1e}, {elapsed:.1f}s"
        assert worst < 1e-9
        assert not failures, failures[:5]
        assert elapsed < 30.0


# -- 5 ------------------------------------------------------------------------------


def test_criterion_05_products_contain_their_factors():
    with criterion(5, "H_P H_Q has P and Q in its bank") as note:
        rng = np.random.default_rng(505)
        misses = []
        for i in range(500):
            P, Q = F.configured_pair(F.PAIR_KINDS[i % len(F.PAIR_KINDS)], rng)
            M = F.half_turn_oracle(P) @ F.half_turn_oracle(Q)
            if not (bank_contains(M, P) and bank_contains(M, Q)):
                misses.append((i, classify(M).cls.value))
        note["detail"] = f"{500 - len(misses)}/500 pairs"
        assert not misses, misses[:5]


# -- 6 ------------------------------------------------------------------------------


def _sphere(k: int, n: int, rng) -> np.ndarray:
    if k == 1:
        return np.ones((1, 1))
    if k == 2:
        a = np.linspace(0.0, math.pi, n, endpoint=False)
        return np.stack([np.cos(a), np.sin(a)], axis=1)
    x = rng.normal(size=(n, k))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _family(M: np.ndarray, info):
    """(U, V(a)) describing the hyperplane pairs (s, t) whose intersections form the bank."""
    if info.cls.value == "EllipticII" and info.non_unique:
        p = info.fixed_point
        K = _isoclinic_K(M, info)
        U = lorentz_complement(span([p]))

        def V(a):
            return lorentz_complement(span([a, K @ a, p]))

        return U, V
    if info.cls.value == "EllipticII":
        U, V0 = info.rotation_planes
    else:
        bs = bank_spaces(M)
        U, V0 = bs.U, bs.V
    return U, (lambda a: V0)


def _witness_residual(a: np.ndarray, V, NL) -> tuple[np.ndarray, np.ndarray]:
    """Defect of (a, best b ∈ V(a)) as a witness for the plane with normal space NL."""
    a = a / np.linalg.norm(a)
    Vb = V(a).basis
    u, s, _ = np.linalg.svd(Vb @ NL.T)
    b = u[:, 0] @ Vb  # direction of V(a) closest to NL
    sin_b = math.sqrt(max(0.0, 1.0 - min(1.0, s[0]) ** 2))
    return np.append(a - NL.T @ (NL @ a), sin_b), b


def _witness_score(a: np.ndarray, V, NL) -> float:
    r, b = _witness_residual(a, V, NL)
    a = a / np.linalg.norm(a)
    # s ∩ t is a plane only when the two normals are independent
    parallel = 1.0 - min(1.0, abs(float(a @ b))) ** 2 < 1e-8
    return float(np.linalg.norm(r)) + (1.0 if parallel else 0.0)


def witness_search(M: np.ndarray, info, P: GeoObject, rng) -> float:
    """Discretized search over pencil normals followed by local refinement."""
    U, V = _family(M, info)
    NL = lorentz_complement(P.carrier).basis
    grid = _sphere(U.dim, 720 if U.dim == 2 else 3000, rng) @ U.basis
    proj = grid - (grid @ NL.T) @ NL
    best = math.inf
    for idx in np.argsort(np.linalg.norm(proj, axis=1))[:3]:
        fit = least_squares(
            lambda c: _witness_residual(c @ U.basis, V, NL)[0],
            grid[idx] @ U.basis.T,
            xtol=1e-15,
            ftol=1e-15,
            gtol=1e-15,
            max_nfev=100,
        )
        best = min(best, _witness_score(fit.x @ U.basis, V, NL))
        if best < 1e-10:
            break
    return best


WITNESS_CASES = ["EllipticI", "PureHyperbolic", "PureParabolic", "PureLoxodromic", "ScrewParabolic", "EllipticII", "Isoclinic"]


def test_criterion_06_criterion_matches_witness_search():
    with criterion(6, "geometric bank criterion agrees with pencil witness search") as note:
        rng = np.random.default_rng(606)
        disagreements, tally = [], {}
        for case in F.CASES:
            M = F.sample_isometry(case, rng)
            info = classify(M)
            inside = bank_sample(M, 100, seed=6)
            near = [F.moved(P, F.random_lorentz(rng, 1e-3)) for P in inside[:50]]
            far = [F.random_plane(rng) for _ in range(50)]
            positives = 0
            for P in inside + near + far:
                crit = bank_contains(M, P)
                positives += crit
                if crit != F.in_bank_oracle(M, P):
                    disagreements.append((case, "definition"))
                if case in WITNESS_CASES:
                    found = witness_search(M, info, P, rng) < 1e-7
                    if crit != found:
                        disagreements.append((case, "witness"))
            tally[case] = positives
        note["detail"] = f"{len(disagreements)} disagreements; in-bank counts {tally}"
        assert not disagreements, disagreements[:10]


# -- 7 ------------------------------------------------------------------------------


@pytest.mark.parametrize("n,params", [(2, [1.0]), (3, [3.0, 4.0]), (4, [1.0, 2.0, 2.0])])
def test_criterion_07_jordan_reproduction(n, params):
    P, S, Jn = reference_parabolic(n, params)
    err = _fro(S @ Jn @ np.linalg.inv(S) - P)
    v = FIXED_LIGHT_LIKE[n]
    fix = _fro(P @ v - v)
    _JORDAN[n] = (err, fix)
    if len(_JORDAN) == 3 or n == 4:
        with criterion(7, "Jordan forms of the reference parabolics") as note:
            note["detail"] = ", ".join(f"n={k}: {e:.1e}/{f:.1e}" for k, (e, f) in sorted(_JORDAN.items()))
            assert all(e < 1e-12 and f == 0.0 for e, f in _JORDAN.values())
    assert err < 1e-12
    assert fix == 0.0


_JORDAN: dict[int, tuple[float, float]] = {}


# -- 8 ------------------------------------------------------------------------------


def _algebra_dimension(mats) -> int:
    """Dimension of the unital algebra generated by ``mats`` (25 means irreducible)."""
    basis = [np.eye(DIM).ravel()]
    frontier = [np.eye(DIM)]
    while frontier:
        new = []
        for X in frontier:
            for G in mats:
                Y = G @ X
                trial = np.array(basis + [Y.ravel()])
                if np.linalg.matrix_rank(trial, tol=1e-8) > len(basis):
                    basis.append(Y.ravel())
                    new.append(Y)
        frontier = new
    return len(basis)


def test_criterion_08_linked_pair_without_common_invariant_subspace():
    with criterion(8, "linked pair with no common invariant subspace") as note:
        A, B, beta = counterexample_pair()
        cert = certificate_from_beta(A, B, beta)
        check = verify_link(A, B, cert)
        common = common_invariant_subspaces(A, B)
        dim = _algebra_dimension([A.matrix, B.matrix, A.inverse().matrix, B.inverse().matrix])
        note["detail"] = f"residuals {check.residuals[0]:.1e}/{check.residuals[1]:.1e}, {len(common)} common subspaces, algebra dim {dim}"
        assert check.ok and max(check.residuals) < 1e-9
        assert common == []
        assert dim == DIM * DIM
        LINKED_PAIRS.append(("counterexample", A.matrix, B.matrix))


# -- 9 ------------------------------------------------------------------------------


def _screw_at_infinity():
    return parabolic_from_fixed_point("inf", [0.0, 0.0, 1.0], 0.8)


def test_criterion_09_computational_condition():
    with criterion(9, "equidistance condition links, perturbation declines") as note:
        A = _screw_at_infinity()
        B = hyperbolic_from_fixed_points([1.0, 0.0, 0.0], [0.0, 1.0, 5.0], 0.6)
        check = computational_condition(A, B)
        assert check.holds and check.beta is not None
        expected = from_ideal_points([[0.5, 0.5, 2.5], [0.0, 0.0, 2.5], "inf"])
        assert check.beta == expected
        cert = certificate_from_beta(A, B, check.beta)
        ver = verify_link(A, B, cert)
        assert ver.ok and max(ver.residuals) < 1e-9
        outcome = link(A, B)
        assert outcome.linked
        LINKED_PAIRS.append(("computational", A.matrix, B.matrix))

        B2 = hyperbolic_from_fixed_points([1.0, 0.0, 0.0], [0.0, 1.1, 5.0], 0.6)
        bad = computational_condition(A, B2)
        declined = link(A, B2)
        handler = [msg for cond, msg in declined.attempts if cond.endswith("computational")]
        note["detail"] = (
            f"residual {max(ver.residuals):.1e}; perturbed defect {abs(bad.defect):.4f} "
            f"(scale {bad.scale:g}), outcome {declined.status}"
        )
        assert not bad.holds
        assert abs(bad.defect) > 0.05 * bad.scale
        assert handler, "computational handler was not consulted"
        assert declined.status != "Linked" or verify_link(A, B2, declined.certificate).ok


# -- 10 -----------------------------------------------------------------------------


def _constructed_pairs(rng, n):
    out = []
    for i in range(n):
        a, b = F.configured_pair(F.PAIR_KINDS[i % len(F.PAIR_KINDS)], rng)
        c = F.random_plane(rng)
        out.append((f"constructed-{i}", F.half_turn_oracle(a) @ F.half_turn_oracle(b), F.half_turn_oracle(b) @ F.half_turn_oracle(c)))
    return out


def test_criterion_10_order_symmetry():
    with criterion(10, "linking is symmetric with interconvertible certificates") as note:
        rng = np.random.default_rng(1010)
        pairs = list(LINKED_PAIRS)
        if not any(name == "counterexample" for name, *_ in pairs):
            A, B, _ = counterexample_pair()
            pairs.append(("counterexample", A.matrix, B.matrix))
        pairs += _constructed_pairs(rng, 18)
        linked, problems = 0, []
        for name, A, B in pairs:
            fwd = link(A, B)
            if not fwd.linked:
                continue
            linked += 1
            back = link(B, A)
            if not back.linked:
                problems.append((name, "reverse not linked"))
                continue
            # a certificate for one order yields one for the other through its β
            if not verify_link(B, A, reverse_certificate(A, B, fwd.certificate)).ok:
                problems.append((name, "forward certificate does not convert"))
            if not verify_link(A, B, reverse_certificate(B, A, back.certificate)).ok:
                problems.append((name, "reverse certificate does not convert"))
        note["detail"] = f"{linked}/{len(pairs)} pairs linked, {len(problems)} asymmetries"
        assert linked >= 3
        assert not problems, problems


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if not name.startswith("test_criterion_"):
            continue
        try:
            if name.endswith("jordan_reproduction"):
                for n, params in [(2, [1.0]), (3, [3.0, 4.0]), (4, [1.0, 2.0, 2.0])]:
                    fn(n, params)
            else:
                fn()
        except Exception:
            pass
    print("\n".join(summary_lines()))
    sys.exit(0 if all(RESULTS.get(n, (False,))[0] for n in range(1, 11)) else 1)
