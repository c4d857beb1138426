"""The nine acceptance criteria, run exactly as stated; each prints one PASS/FAIL line."""

import json
import time

import pytest

from heisenberg_coinv.checks import bracket_suite, virasoro_suite
from heisenberg_coinv.coinvariants import (
    CoinvariantProblem,
    coinvariant_dims,
    exp_series_terms,
    exponentiate,
    pi0_oracle,
    preserve_check,
)
from heisenberg_coinv.curves import curve_from_config, curve_outgoing, residue_isotropy_report, torelli_point
from heisenberg_coinv.fock import ConformalVector, FockVector, graded_dimensions, pbw_basis_upto
from heisenberg_coinv.lattice import preset_lattice
from heisenberg_coinv.ppav import SpMatrix, extract_outgoing, sp_act, standard_point

A1 = preset_lattice("A1")
A2 = preset_lattice("A2")


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, elapsed, limit):
        ok = ok and elapsed < limit
        with capsys.disabled():
            print(f"\nCRITERION {number} {'PASS' if ok else 'FAIL'}  {title}  ({elapsed:.1f}s, limit {limit}s)")
        assert ok, f"criterion {number} failed"

    return emit


def _report_bytes(report):
    return json.dumps(report.to_json(), sort_keys=True).encode()


def test_criterion_1_bracket(verdict):
    start = time.perf_counter()
    ok = True
    for lattice in (A1, A2):
        for level in (1, 0):
            ok &= bracket_suite(lattice, level, 8, 4).passed
    verdict(1, "Heisenberg bracket, A1 and A2, degree <= 8, |n|,|m| <= 4, both levels", ok, time.perf_counter() - start, 10)


def test_criterion_2_virasoro(verdict):
    start = time.perf_counter()
    ok = True
    for lattice in (A1, A2):
        for shift in (lattice.zero(), lattice.basis(0)):
            ok &= virasoro_suite(lattice, shift, 6, 3).passed
        ok &= ConformalVector(lattice, lattice.zero()).central_charge == lattice.rank
    verdict(2, "Virasoro cocycle for A in {0, gamma_1}, central charge d at A = 0", ok, time.perf_counter() - start, 30)


def _partition_power(d, N):
    coeffs = [1] + [0] * N
    for k in range(1, N + 1):
        for _ in range(d):
            for n in range(k, N + 1):
                coeffs[n] += coeffs[n - k]
    return coeffs


def test_criterion_3_graded_dimensions(verdict):
    start = time.perf_counter()
    ok = True
    for d in (1, 2, 3):
        lattice = preset_lattice(f"A1^{d}")
        for N in range(13):
            ok &= graded_dimensions(1, lattice, N) == _partition_power(d, N)
    verdict(3, "Fock graded dimensions vs prod (1-q^k)^-d, N <= 12, d <= 3", ok, time.perf_counter() - start, 5)


@pytest.mark.parametrize(
    "g,d,n_deg,phi",
    [(1, 1, 8, None), (2, 1, 8, None), (1, 2, 6, None), (1, 1, 8, {(1, 1): 1})],
    ids=["g1-d1", "g2-d1", "g1-d2", "g1-phi11"],
)
def test_criterion_4_pi0(verdict, g, d, n_deg, phi):
    start = time.perf_counter()
    lattice = preset_lattice(f"A1^{d}") if d > 1 else A1
    point = standard_point(g, phi)
    outgoing = extract_outgoing(point, n_deg + 4, n_deg + 4)
    engine = coinvariant_dims(CoinvariantProblem(lattice, 0, outgoing, n_deg))
    oracle = pi0_oracle(lattice, outgoing, n_deg)
    ok = engine.filtered_dims == oracle.filtered_dims and all(engine.stabilized)
    verdict(4, f"level-0 engine = Sym oracle, g={g} d={d} N_deg={n_deg} phi={phi or 0}: {list(engine.filtered_dims)}",
            ok, time.perf_counter() - start, 120)


def _cumulative_series(weights, N):
    per = [1] + [0] * N
    for w in weights:
        for n in range(w, N + 1):
            per[n] += per[n - w]
    return [sum(per[: n + 1]) for n in range(N + 1)]


def test_criterion_5_curves(verdict):
    start = time.perf_counter()
    elliptic = curve_from_config({"genus": 1, "f": [1, 0, 0, 1]})
    genus2 = curve_from_config({"genus": 2, "f": [1, 0, 0, 0, 0, 1]})
    ok = True
    for curve, gaps in ((elliptic, (1,)), (genus2, (1, 3))):
        F = curve_outgoing(curve, 40, 40)
        report = residue_isotropy_report(F)
        ok &= F.gap_set == gaps and report.passed and not report.needs_retry
    F = curve_outgoing(genus2, 10, 10)
    dims = coinvariant_dims(CoinvariantProblem(A1, 0, F, 6)).filtered_dims
    ok &= list(dims) == _cumulative_series([1, 3], 6)
    verdict(5, f"curve gaps, isotropy at N_trunc = 40, y^2 = x^5 + 1 level-0 dims {list(dims)}",
            ok, time.perf_counter() - start, 120)


def test_criterion_6_sp_invariance(verdict):
    start = time.perf_counter()
    ok = True
    cases = [(1, SpMatrix.S(1)), (1, SpMatrix.T(1))]
    cases += [(2, SpMatrix.S(2)), (2, SpMatrix.T(2)), (2, SpMatrix.T(2, [[0, 1], [1, 0]])), (2, SpMatrix.T(2, [[1, 0], [0, 0]]))]
    for g, sigma in cases:
        base = standard_point(g)
        moved = sp_act(sigma, base)
        F0, F1 = extract_outgoing(base, 10, 10), extract_outgoing(moved, 10, 10)
        ok &= F0.span_equals(F1)
        for level in (0, 1):
            r0 = coinvariant_dims(CoinvariantProblem(A1, level, F0, 6))
            r1 = coinvariant_dims(CoinvariantProblem(A1, level, F1, 6))
            ok &= _report_bytes(r0) == _report_bytes(r1)
    verdict(6, "S and T generators, g = 1 and 2: same span, byte-identical reports", ok, time.perf_counter() - start, 60)


def test_criterion_7_torelli(verdict):
    start = time.perf_counter()
    ok = True
    for name in ("elliptic-j0", "genus2-bolza-like"):
        curve = curve_from_config(name)
        from_curve = curve_outgoing(curve, 9, 12)
        from_point = extract_outgoing(torelli_point(curve, 12), 9, 12)
        ok &= from_curve.span_equals(from_point)
        for level in (0, 1):
            a = coinvariant_dims(CoinvariantProblem(A1, level, from_curve, 5))
            b = coinvariant_dims(CoinvariantProblem(A1, level, from_point, 5))
            ok &= _report_bytes(a) == _report_bytes(b)
    verdict(7, "curve-sourced and point-sourced outgoing data give identical reports, d = 1, N_deg = 5",
            ok, time.perf_counter() - start, 120)


@pytest.mark.xfail(
    strict=True,
    reason="generators whose tangent leaves F, e.g. (2,2) with f = t^-2, send U outside U; "
           "Q_{2,2} gamma_{-2}^2|0> = 16|0>. The equivariant form of the check holds for every pair.",
)
def test_criterion_8_preservation(verdict):
    start = time.perf_counter()
    problem = CoinvariantProblem(A1, 1, extract_outgoing(standard_point(1), 12, 12), 4)
    pairs = [(m, n) for m in range(-2, 3) for n in range(-2, 3) if not (m < 0 and n < 0)]
    reports = [preserve_check(problem, m, n) for m, n in pairs]
    failing = [(r.m, r.n) for r in reports if not r.passed]
    verdict(8, f"preserve_check for |m|,|n| <= 2, phi = 0, g = d = 1, N_deg = 4; strict failures {failing}",
            not failing, time.perf_counter() - start, 120)


def test_criterion_8_equivariant_form():
    # companion to the literal criterion: q u - (A (x) delta f) v lies in span(S') for every pair
    problem = CoinvariantProblem(A1, 1, extract_outgoing(standard_point(1), 12, 12), 4)
    pairs = [(m, n) for m in range(-2, 3) for n in range(-2, 3) if not (m < 0 and n < 0)]
    assert all(preserve_check(problem, m, n).equivariant_passed for m, n in pairs)


def test_criterion_9_exponentiation(verdict):
    start = time.perf_counter()
    ok = True
    pairs = [(m, n) for m in range(-3, 4) for n in range(m, 4) if not (m < 0 and n < 0) and m + n != 0]
    for lattice in (A1, A2):
        for mono in pbw_basis_upto(lattice.rank, 6):
            v = FockVector(lattice, 1, {mono: 1})
            for m, n in pairs:
                if m + n > 0:
                    ok &= len(exp_series_terms(m, n, v)) <= -(-v.degree // (m + n)) + 1
                ok &= exponentiate(m, n, exponentiate(m, n, v), scale=-1) == v
    verdict(9, "exp(X) terminates within ceil(deg/(m+n)) + 1 terms; exp(X)exp(-X) = id on degree <= 6",
            ok, time.perf_counter() - start, 30)
