from fractions import Fraction

import pytest
import sympy
from hypothesis import assume, given, settings, strategies as st

from heisenberg_coinv.curves import (
    HyperellipticCurve,
    curve_from_config,
    curve_outgoing,
    expand_functions,
    poly_derivative,
    poly_gcd,
    residue_isotropy_report,
    torelli_point,
)
from heisenberg_coinv.errors import ConfigInvalid, TruncationInsufficient
from heisenberg_coinv.exactseries import LaurentPoly, residue_pairing
from heisenberg_coinv.ppav import OutgoingLattice, extract_outgoing

T = sympy.Symbol("t")


def _sympy_y(curve, N):
    """y = t^-(2g+1) sqrt(t^(2(2g+1)) f(t^-2)) via sympy's own series machinery."""
    top = curve.y_pole
    u = sum(sympy.Rational(c.numerator, c.denominator) * T ** (2 * (top - k)) for k, c in enumerate(curve.f_coeffs))
    s = sympy.series(sympy.sqrt(u), T, 0, N + top + 1).removeO()
    poly = sympy.Poly(sympy.expand(s), T)
    return {e - top: Fraction(int(c.p), int(c.q)) for (e,), c in poly.terms() if e - top <= N}


def test_y_expansion_examples():
    y = expand_functions(HyperellipticCurve(1, (1, 0, 0, 1)), 9)[(0, 1)]
    assert {n: y.coeff(n) for n in range(-3, 10) if y.coeff(n)} == {-3: 1, 3: Fraction(1, 2), 9: Fraction(-1, 8)}
    y = expand_functions(HyperellipticCurve(2, (1, 0, 0, 0, 0, 1)), 15)[(0, 1)]
    assert {n: y.coeff(n) for n in range(-5, 16) if y.coeff(n)} == {-5: 1, 5: Fraction(1, 2), 15: Fraction(-1, 8)}
    x2 = expand_functions(HyperellipticCurve(1, (1, 0, 0, 1)), 9)[(2, 0)]
    assert x2.terms == {-4: 1}


@pytest.mark.parametrize("curve", [HyperellipticCurve(1, (1, 0, 0, 1)), HyperellipticCurve(2, (3, -1, 0, 2, 0, 1))])
def test_y_against_sympy_series(curve):
    N = 12
    y = expand_functions(curve, N)[(0, 1)]
    assert {n: y.coeff(n) for n in range(-curve.y_pole, N + 1) if y.coeff(n)} == _sympy_y(curve, N)


def test_y_squares_to_f():
    curve = HyperellipticCurve(2, (3, -1, 0, 2, 0, 1))
    funcs = expand_functions(curve, 20)
    y = funcs[(0, 1)]
    f_of_x = LaurentPoly({-2 * k: c for k, c in enumerate(curve.f_coeffs)})
    sq = y * y
    assert sq.trunc is not None
    assert all(sq.coeff(n) == f_of_x.coeff(n) for n in range(-10, sq.trunc + 1))


def test_curve_validation():
    with pytest.raises(ConfigInvalid):
        HyperellipticCurve(1, (0, 0, 0, 1))  # x^3
    with pytest.raises(ConfigInvalid):
        HyperellipticCurve(1, (1, 0, 0, 2))
    with pytest.raises(ConfigInvalid):
        HyperellipticCurve(1, (1, 0, 1))
    with pytest.raises(ConfigInvalid):
        HyperellipticCurve(1, (0, 1, -2, 1))  # x (x - 1)^2
    assert curve_from_config("elliptic-j0") == HyperellipticCurve(1, (1, 0, 0, 1))
    assert curve_from_config({"genus": 2, "f": ["1", 0, 0, 0, 0, 1]}).genus == 2


def test_poly_helpers():
    assert poly_gcd([-1, 0, 1], [1, 1]) == [1, 1]
    assert poly_gcd([1, 0, 1], [0, 1]) == [1]
    assert poly_derivative([5, 3, 0, 1]) == [3, 0, 3]


@pytest.mark.parametrize("curve,gaps", [
    (HyperellipticCurve(1, (1, 0, 0, 1)), (1,)),
    (HyperellipticCurve(2, (1, 0, 0, 0, 0, 1)), (1, 3)),
])
def test_gaps_and_isotropy(curve, gaps):
    F = curve_outgoing(curve, 12, 24)
    assert F.gap_set == gaps
    report = residue_isotropy_report(F)
    assert report.passed and not report.needs_retry
    assert report.to_json()["pairs_checked"] == len(F.basis) * (len(F.basis) - 1) // 2


def test_isotropy_report_flags_truncation():
    lat = OutgoingLattice.from_span([LaurentPoly({-5: 1, 1: 1}, 2), LaurentPoly({-4: 1})], 1, 5, 2)
    report = residue_isotropy_report(lat)
    assert report.needs_retry and not report.passed
    assert report.to_json()["truncation"] == [[1, 2]]


def test_nonzero_pairing_reported():
    lat = OutgoingLattice.from_span([LaurentPoly({-2: 1, 3: 1}), LaurentPoly({-3: 1})], 1, 3, 4)
    lat2 = OutgoingLattice.from_span([LaurentPoly({-2: 1}), LaurentPoly({-3: 1, 2: 1})], 1, 3, 4)
    for F in (lat, lat2):
        report = residue_isotropy_report(F)
        assert not report.passed
        assert report.to_json()["nonzero"]


def test_truncation_guard():
    with pytest.raises(TruncationInsufficient):
        curve_outgoing(HyperellipticCurve(1, (1, 0, 0, 1)), 10, 8)


@st.composite
def squarefree_curves(draw):
    g = draw(st.integers(1, 3))
    coeffs = [draw(st.integers(-3, 3)) for _ in range(2 * g + 1)] + [1]
    assume(len(poly_gcd(coeffs, poly_derivative(coeffs))) == 1)
    return HyperellipticCurve(g, tuple(coeffs))


@settings(max_examples=25, deadline=None)
@given(squarefree_curves())
def test_random_curves_isotropic_with_genus_gaps(curve):
    M = 2 * curve.y_pole + 2
    F = curve_outgoing(curve, M, 2 * M)
    assert len(F.gap_set) == curve.genus
    assert F.gap_set == tuple(range(1, 2 * curve.genus, 2))
    assert residue_isotropy_report(F).passed
    # every pair of basis vectors pairs to zero exactly
    assert all(residue_pairing(a, b) == 0 for a in F.basis for b in F.basis)


@pytest.mark.parametrize("curve", [HyperellipticCurve(1, (1, 0, 0, 1)), HyperellipticCurve(2, (1, 0, 0, 0, 0, 1))])
def test_torelli_point_recovers_curve_lattice(curve):
    N = 14
    point = torelli_point(curve, N)
    assert extract_outgoing(point, 10, N).same_data(curve_outgoing(curve, 10, N))


@settings(max_examples=10, deadline=None)
@given(squarefree_curves())
def test_torelli_point_random(curve):
    N = 2 * curve.y_pole + 4
    M = N - 2
    assert extract_outgoing(torelli_point(curve, N), M, N).same_data(curve_outgoing(curve, M, N))
