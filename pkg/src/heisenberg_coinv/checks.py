"""Exhaustive identity checks on low-degree Fock vectors.

Each suite returns a list of mismatches; an empty list means every identity
held exactly on every basis vector it visited.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .fock import (
    FockVector,
    _accumulate,
    _virasoro_on_monomial,
    apply_basis_mode,
    apply_quadratic,
    basis_mode_on_monomial,
    pbw_basis_upto,
)
from .lattice import HVector, Lattice, QuadraticOperator, dual_quadratic, pairing


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    mismatches: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.mismatches

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "checked": self.checked,
            "passed": self.passed,
            "mismatches": self.mismatches[:20],
        }


def _compose(lattice, level, first, second, mono):
    """second(first(mono)) where both are (index, mode) basis modes."""
    acc: dict = {}
    for m1, c1 in basis_mode_on_monomial(lattice, level, first[0], first[1], mono):
        _accumulate(acc, basis_mode_on_monomial(lattice, level, second[0], second[1], m1), c1)
    return acc


def bracket_suite(lattice: Lattice, level: int, max_degree: int, max_mode: int) -> SuiteResult:
    """[gamma_{i,n}, gamma_{j,m}] = G_ij n delta_{n,-m} at level 1, and 0 at level 0."""
    res = SuiteResult(f"bracket level {level}")
    d = lattice.rank
    modes = range(-max_mode, max_mode + 1)
    for mono in pbw_basis_upto(d, max_degree):
        for i in range(d):
            for j in range(d):
                for n in modes:
                    for m in modes:
                        ab = _compose(lattice, level, (j, m), (i, n), mono)
                        ba = _compose(lattice, level, (i, n), (j, m), mono)
                        comm = dict(ab)
                        _accumulate(comm, ba.items(), -1)
                        central = lattice.gram[i][j] * n if (level == 1 and n == -m) else 0
                        expected = {mono: Fraction(central)} if central else {}
                        res.checked += 1
                        if comm != expected:
                            res.mismatches.append([i + 1, n, j + 1, m, repr(mono)])
    return res


def _virasoro_apply(lattice, p, shift, terms: dict) -> dict:
    acc: dict = {}
    for mono, c in terms.items():
        _accumulate(acc, _virasoro_on_monomial(lattice, p, shift, mono), c)
    return acc


def virasoro_suite(lattice: Lattice, shift: HVector, max_degree: int, max_p: int) -> SuiteResult:
    """[L_p, L_q] = (p - q) L_{p+q} + (p^3 - p)/12 delta_{p,-q} c on basis vectors."""
    res = SuiteResult(f"virasoro shift {list(map(str, shift.coeffs))}")
    c = lattice.rank - 12 * pairing(lattice, shift, shift)
    key = shift.coeffs
    for mono in pbw_basis_upto(lattice.rank, max_degree):
        base = {mono: Fraction(1)}
        for p in range(-max_p, max_p + 1):
            for q in range(-max_p, max_p + 1):
                lhs = _virasoro_apply(lattice, p, key, _virasoro_apply(lattice, q, key, base))
                _accumulate(lhs, _virasoro_apply(lattice, q, key, _virasoro_apply(lattice, p, key, base)).items(), -1)
                rhs: dict = {}
                _accumulate(rhs, _virasoro_apply(lattice, p + q, key, base).items(), p - q)
                if p == -q:
                    _accumulate(rhs, ((mono, Fraction(p ** 3 - p, 12) * c),), 1)
                res.checked += 1
                if lhs != rhs:
                    res.mismatches.append([p, q, repr(mono)])
    return res


def metaplectic_suite(lattice: Lattice, max_degree: int, max_mode: int) -> SuiteResult:
    """The central element acts as d, and [Q_{m,n}, gamma_{i,k}] = n delta_{n,-k} gamma_{i,m} + m delta_{m,-k} gamma_{i,n}."""
    res = SuiteResult("metaplectic")
    d = lattice.rank
    one = QuadraticOperator.central_element()
    modes = range(-max_mode, max_mode + 1)
    quads = {(m, n): dual_quadratic(m, n, lattice) for m in modes for n in modes if not (m < 0 and n < 0)}
    for mono in pbw_basis_upto(d, max_degree):
        v = FockVector._raw(lattice, 1, {mono: Fraction(1)})
        res.checked += 1
        if apply_quadratic(one, v) != v.scale(d):
            res.mismatches.append(["central", repr(mono)])
        for (m, n), q in quads.items():
            qv = apply_quadratic(q, v)
            for i in range(d):
                for k in modes:
                    lhs = apply_quadratic(q, apply_basis_mode(i, k, v)) - apply_basis_mode(i, k, qv)
                    rhs = FockVector.zero(lattice, 1)
                    if n == -k:
                        rhs = rhs + apply_basis_mode(i, m, v).scale(n)
                    if m == -k:
                        rhs = rhs + apply_basis_mode(i, n, v).scale(m)
                    res.checked += 1
                    if lhs != rhs:
                        res.mismatches.append([m, n, i + 1, k, repr(mono)])
    return res


def axioms_suites(lattice: Lattice, depth: int) -> list[SuiteResult]:
    """The bracket suites at both levels, Virasoro for A = 0 and A = gamma_1, and the metaplectic checks."""
    out = [
        bracket_suite(lattice, 1, depth, 4),
        bracket_suite(lattice, 0, depth, 4),
        virasoro_suite(lattice, lattice.zero(), min(depth, 6), 3),
        virasoro_suite(lattice, lattice.basis(0), min(depth, 6), 3),
        metaplectic_suite(lattice, min(depth, 4), 2),
    ]
    return out
