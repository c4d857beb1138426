"""Fock module checks; the sympy model realizes gamma_{i,-k} as x_{i,k} and gamma_{i,k} as k * sum_j G_ij d/dx_{j,k}."""

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from heisenberg_coinv.errors import ConfigInvalid, LevelUnsupported, RankMismatch
from heisenberg_coinv.fock import (
    ConformalVector,
    FockVector,
    apply_mode,
    apply_quadratic,
    change_basis,
    graded_dimensions,
    pbw_basis,
    pbw_basis_upto,
    virasoro,
)
from heisenberg_coinv.lattice import HVector, Lattice, QuadraticOperator, dual_quadratic, preset_lattice

A1 = preset_lattice("A1")
A2 = preset_lattice("A2")


class DiffModel:
    def __init__(self, lattice, max_mode=8):
        self.lattice = lattice
        self.x = {(i, k): sympy.Symbol(f"x{i}_{k}") for i in range(lattice.rank) for k in range(1, max_mode + 1)}

    def encode(self, v):
        expr = sympy.Integer(0)
        for mono, c in v.terms.items():
            term = sympy.Rational(c.numerator, c.denominator)
            for n, i in mono:
                term *= self.x[(i, -n)]
            expr += term
        return sympy.expand(expr)

    def mode(self, i, n, expr):
        if n < 0:
            return sympy.expand(self.x[(i, -n)] * expr)
        if n == 0:
            return sympy.Integer(0)
        G = self.lattice.gram
        return sympy.expand(n * sum(G[i][j] * sympy.diff(expr, self.x[(j, n)]) for j in range(self.lattice.rank)))


def test_mode_examples():
    vac = FockVector.vacuum(A1, 1)
    g = A1.basis(0)
    assert apply_mode(g, 1, apply_mode(g, -1, vac)) == vac.scale(2)
    vac0 = FockVector.vacuum(A1, 0)
    assert apply_mode(g, 1, apply_mode(g, -1, vac0)).is_zero()
    assert apply_mode(g, -2, vac) == FockVector.monomial(A1, 1, [(0, -2)])


@st.composite
def fock_vectors(draw, lattice, max_degree=5):
    monos = list(pbw_basis_upto(lattice.rank, max_degree))
    picks = draw(st.lists(st.sampled_from(monos), min_size=1, max_size=4))
    return FockVector(lattice, 1, {m: draw(st.fractions(-3, 3, max_denominator=4)) for m in picks})


@settings(max_examples=40, deadline=None)
@given(fock_vectors(A2), st.integers(0, 1), st.integers(-4, 4))
def test_mode_action_matches_differential_model(v, i, n):
    model = DiffModel(A2)
    assert model.encode(apply_mode(A2.basis(i), n, v)) == model.mode(i, n, model.encode(v))


def test_quadratic_examples():
    vac = FockVector.vacuum(A1, 1)
    for v in (vac, FockVector.monomial(A1, 1, [(0, -1), (0, -3)])):
        assert apply_quadratic(QuadraticOperator.central_element(), v) == v.scale(A1.rank)
    assert apply_quadratic(dual_quadratic(-1, -1, A1), vac) == FockVector.monomial(A1, 1, [(0, -1), (0, -1)], Fraction(1, 2))


def test_quadratic_one_one_on_double_creation():
    # differential model: 1/2 * (2 d/dx)^2 applied to x^2 = 4
    model = DiffModel(A1)
    v = FockVector.monomial(A1, 1, [(0, -1), (0, -1)])
    expr = model.encode(v)
    want = sympy.Rational(1, 2) * model.mode(0, 1, model.mode(0, 1, expr))
    got = apply_quadratic(dual_quadratic(1, 1, A1), v)
    assert model.encode(got) == want == 4
    assert got == FockVector.vacuum(A1, 1).scale(4)


@settings(max_examples=30, deadline=None)
@given(fock_vectors(A2, 4), st.integers(-3, 3), st.integers(-3, 3))
def test_quadratic_matches_differential_model(v, m, n):
    model = DiffModel(A2)
    ginv = A2.gram_inverse
    expr = model.encode(v)
    # normal order: the larger mode acts first
    lo, hi = sorted((m, n))
    want = sympy.Integer(0)
    for i in range(2):
        for j in range(2):
            c = ginv[i][j]
            want += sympy.Rational(c.numerator, c.denominator) * model.mode(i, lo, model.mode(j, hi, expr))
    assert model.encode(apply_quadratic(dual_quadratic(m, n, A2), v)) == sympy.expand(want)


def test_quadratic_needs_level_one():
    with pytest.raises(LevelUnsupported):
        apply_quadratic(dual_quadratic(1, 1, A1), FockVector.vacuum(A1, 0))


def test_virasoro_examples():
    zero = A1.zero()
    v = FockVector.monomial(A1, 1, [(0, -3)])
    assert virasoro(0, zero, v) == v.scale(3)
    vac = FockVector.vacuum(A1, 1)
    assert virasoro(2, zero, virasoro(-2, zero, vac)) - virasoro(-2, zero, virasoro(2, zero, vac)) == vac.scale(Fraction(1, 2))
    assert virasoro(-1, zero, vac).is_zero()


def test_virasoro_level_zero_only_grading():
    v = FockVector(A1, 0, {((-2, 0), (-1, 0)): 1})
    assert virasoro(0, A1.zero(), v) == v.scale(3)
    with pytest.raises(LevelUnsupported):
        virasoro(1, A1.zero(), v)


def test_conformal_vector():
    cv = ConformalVector(A1, A1.basis(0))
    assert cv.central_charge == 1 - 24
    assert cv.L(-2, FockVector.vacuum(A1, 1)) == cv.vector()
    assert ConformalVector(A2, A2.zero()).central_charge == 2


@pytest.mark.parametrize("lattice", [A1, A2], ids=["A1", "A2"])
def test_virasoro_is_a_quadratic_sum(lattice):
    zero = lattice.zero()
    for v_mono in pbw_basis_upto(lattice.rank, 6):
        v = FockVector(lattice, 1, {v_mono: 1})
        D = v.degree
        for p in range(-3, 4):
            q = QuadraticOperator()
            for n in range(-(D + abs(p) + 1), D + abs(p) + 2):
                q = q + dual_quadratic(n, p - n, lattice).scale(Fraction(1, 2))
            assert apply_quadratic(q, v) == virasoro(p, zero, v)


def test_graded_dimension_examples():
    assert graded_dimensions(1, A1, 6) == [1, 1, 2, 3, 5, 7, 11]
    assert graded_dimensions(0, A2, 3) == [1, 2, 5, 10]
    assert graded_dimensions(1, preset_lattice("A1^3"), 0) == [1]
    with pytest.raises(ConfigInvalid):
        graded_dimensions(2, A1, 3)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_graded_dimensions_match_generating_function(d):
    # expand prod_k (1 + q^k + q^2k + ...)^d as truncated polynomials
    q = sympy.Symbol("q")
    gen = sympy.Poly(1, q)
    for k in range(1, 13):
        geometric = sympy.Poly(sum(q ** (k * j) for j in range(12 // k + 1)), q)
        for _ in range(d):
            gen = sympy.Poly(sum(c * q**e for (e,), c in (gen * geometric).terms() if e <= 12), q)
    coeffs = [gen.coeff_monomial(q**n) for n in range(13)]
    assert graded_dimensions(1, preset_lattice(f"A1^{d}"), 12) == [int(c) for c in coeffs]


def test_basis_independence_of_dual_quadratic():
    # new basis (gamma_1, gamma_1 + gamma_2); gamma_2 = e_2 - e_1
    new = Lattice([[2, 1], [1, 2]])
    old_in_new = [[1, 0], [-1, 1]]
    for m, n in [(1, 1), (-1, 2), (2, -3), (-1, -1), (0, 1), (1, -1)]:
        q_old, q_new = dual_quadratic(m, n, A2), dual_quadratic(m, n, new)
        for mono in pbw_basis_upto(2, 6):
            v = FockVector(A2, 1, {mono: 1})
            lhs = change_basis(apply_quadratic(q_old, v), old_in_new, new)
            rhs = apply_quadratic(q_new, change_basis(v, old_in_new, new))
            assert lhs == rhs


def test_fock_vector_json_and_errors():
    v = FockVector(A2, 1, {((-2, 1), (-1, 0)): Fraction(3, 2)})
    data = v.to_json()
    assert data == [[[[2, -2], [1, -1]], "3/2"]]
    assert FockVector.from_json(A2, 1, data) == v
    with pytest.raises(ConfigInvalid):
        FockVector(A1, 1, {((1, 0),): 1})
    with pytest.raises(RankMismatch):
        apply_mode(HVector((1, 0)), -1, FockVector.vacuum(A1, 1))
    with pytest.raises(RankMismatch):
        FockVector.vacuum(A1, 1) + FockVector.vacuum(A2, 1)


def test_pbw_basis_sorted_and_counted():
    basis = pbw_basis(2, 4)
    assert list(basis) == sorted(basis)
    assert len(set(basis)) == len(basis) == 20
