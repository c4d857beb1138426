"""Fock modules pi_Gamma (level 1) and pi^0_Gamma (level 0).

A PBW monomial is a sorted tuple of factors ``(n, i)`` with mode ``n < 0`` and
0-based basis index ``i``; it stands for gamma_{i,n} ... |0>.  Creation modes
commute, so the sorted multiset is already a basis and no ordering correction
is ever needed.

At level 1 a positive mode acts as a derivation through
[gamma_{i,n}, gamma_{j,-n}] = G_ij n; at level 0 every mode n >= 0 acts by 0.
The zero modes act by 0 at both levels (zero momentum).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

from .errors import ConfigInvalid, LevelUnsupported, RankMismatch
from .exactseries import Scalar, format_scalar, to_scalar
from .lattice import HVector, Lattice, QuadraticOperator, pairing

Monomial = tuple  # tuple[tuple[int, int], ...]

VACUUM: Monomial = ()


def monomial_degree(mono: Monomial) -> int:
    return -sum(n for n, _ in mono)


def _insert(mono: Monomial, factor: tuple[int, int]) -> Monomial:
    lst = list(mono)
    k = 0
    while k < len(lst) and lst[k] <= factor:
        k += 1
    lst.insert(k, factor)
    return tuple(lst)


@lru_cache(maxsize=None)
def basis_mode_on_monomial(lattice: Lattice, level: int, i: int, n: int, mono: Monomial) -> tuple:
    """gamma_{i,n} applied to a PBW monomial, as a tuple of (monomial, coefficient)."""
    if n < 0:
        return ((_insert(mono, (n, i)), Fraction(1)),)
    if n == 0 or level == 0:
        return ()
    out: dict = {}
    row = lattice.gram[i]
    k = 0
    while k < len(mono):
        fn, fj = mono[k]
        if fn == -n and row[fj]:
            mult = 1
            while k + mult < len(mono) and mono[k + mult] == (fn, fj):
                mult += 1
            rest = mono[:k] + mono[k + 1:]
            out[rest] = out.get(rest, 0) + Fraction(mult * n * row[fj])
            k += mult
        else:
            k += 1
    return tuple(out.items())


class FockVector:
    """Finite linear combination of PBW monomials in pi_Gamma (level 1) or pi^0_Gamma (level 0)."""

    __slots__ = ("lattice", "level", "terms")

    def __init__(self, lattice: Lattice, level: int, terms: Mapping | Iterable = ()):
        if level not in (0, 1):
            raise ConfigInvalid(f"level must be 0 or 1, got {level!r}")
        acc: dict = {}
        for mono, c in (terms.items() if isinstance(terms, Mapping) else terms):
            mono = tuple(sorted((int(n), int(i)) for n, i in mono))
            acc[mono] = acc.get(mono, 0) + to_scalar(c)
        for n, i in {f for mono in acc for f in mono}:
            if n >= 0 or not 0 <= i < lattice.rank:
                raise ConfigInvalid(f"invalid PBW factor (index {i}, mode {n})")
        self.lattice = lattice
        self.level = level
        self.terms = {m: c for m, c in acc.items() if c != 0}

    @classmethod
    def _raw(cls, lattice: Lattice, level: int, terms: dict) -> "FockVector":
        v = object.__new__(cls)
        v.lattice, v.level = lattice, level
        v.terms = {m: c for m, c in terms.items() if c != 0}
        return v

    @classmethod
    def vacuum(cls, lattice: Lattice, level: int = 1) -> "FockVector":
        return cls._raw(lattice, level, {VACUUM: Fraction(1)})

    @classmethod
    def zero(cls, lattice: Lattice, level: int = 1) -> "FockVector":
        return cls._raw(lattice, level, {})

    @classmethod
    def monomial(cls, lattice: Lattice, level: int, factors: Iterable[tuple[int, int]], c=1) -> "FockVector":
        """Monomial from ``(index, mode)`` factors, e.g. ``[(0, -1), (0, -2)]``."""
        return cls(lattice, level, [(tuple((n, i) for i, n in factors), c)])

    def _check(self, other: "FockVector") -> None:
        if other.lattice != self.lattice:
            raise RankMismatch("Fock vectors over different lattices")
        if other.level != self.level:
            raise ConfigInvalid("Fock vectors at different levels")

    def __add__(self, other: "FockVector") -> "FockVector":
        self._check(other)
        acc = dict(self.terms)
        for m, c in other.terms.items():
            acc[m] = acc.get(m, 0) + c
        return FockVector._raw(self.lattice, self.level, acc)

    def __sub__(self, other: "FockVector") -> "FockVector":
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "FockVector":
        c = to_scalar(c)
        return FockVector._raw(self.lattice, self.level, {m: c * v for m, v in self.terms.items()})

    __rmul__ = scale

    def __eq__(self, other):
        if not isinstance(other, FockVector):
            return NotImplemented
        return (self.lattice, self.level, self.terms) == (other.lattice, other.level, other.terms)

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        """Maximal degree of a term (-1 for the zero vector)."""
        return max((monomial_degree(m) for m in self.terms), default=-1)

    def coeff(self, mono: Monomial) -> Scalar:
        return self.terms.get(mono, Fraction(0))

    def to_json(self) -> list:
        """``[[[[i, n], ...], "coeff"], ...]`` with 1-based basis indices."""
        return [[[[i + 1, n] for n, i in mono], format_scalar(c)] for mono, c in sorted(self.terms.items())]

    @classmethod
    def from_json(cls, lattice: Lattice, level: int, data) -> "FockVector":
        try:
            terms = [(tuple((int(n), int(i) - 1) for i, n in mono), c) for mono, c in data]
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(f"malformed Fock vector: {data!r}") from exc
        return cls(lattice, level, terms)

    def __repr__(self):
        if not self.terms:
            return "FockVector(0)"
        parts = []
        for mono, c in sorted(self.terms.items()):
            ops = "".join(f"g{i + 1}({n})" for n, i in mono) or "|0>"
            parts.append(f"{format_scalar(c)}*{ops}")
        return f"FockVector[level {self.level}](" + " + ".join(parts) + ")"


def _accumulate(acc: dict, items, c) -> None:
    for m, v in items:
        nv = acc.get(m, 0) + c * v
        if nv == 0:
            acc.pop(m, None)
        else:
            acc[m] = nv


def apply_basis_mode(i: int, n: int, v: FockVector) -> FockVector:
    acc: dict = {}
    for mono, c in v.terms.items():
        _accumulate(acc, basis_mode_on_monomial(v.lattice, v.level, i, n, mono), c)
    return FockVector._raw(v.lattice, v.level, acc)


def apply_mode(A: HVector, n: int, v: FockVector) -> FockVector:
    """A_n v."""
    if A.rank != v.lattice.rank:
        raise RankMismatch(f"vector of rank {A.rank} on a rank {v.lattice.rank} Fock module")
    acc: dict = {}
    for i, a in A.items():
        for mono, c in v.terms.items():
            _accumulate(acc, basis_mode_on_monomial(v.lattice, v.level, i, n, mono), a * c)
    return FockVector._raw(v.lattice, v.level, acc)


@lru_cache(maxsize=None)
def _normal_pair_on_monomial(lattice: Lattice, level: int, i: int, a: int, j: int, b: int, mono: Monomial) -> tuple:
    # :gamma_{i,a} gamma_{j,b}: with (a, i) <= (b, j): apply the right factor first
    acc: dict = {}
    for m1, c1 in basis_mode_on_monomial(lattice, level, j, b, mono):
        _accumulate(acc, basis_mode_on_monomial(lattice, level, i, a, m1), c1)
    return tuple(acc.items())


def apply_quadratic(q: QuadraticOperator, v: FockVector) -> FockVector:
    """Action of a Weyl-algebra element of filtration degree <= 2 on pi_Gamma."""
    if v.level != 1:
        raise LevelUnsupported("quadratic operators are only exposed on the level-1 module")
    d = v.lattice.rank
    acc: dict = {}
    for (i, m, j, n), c in q.quad.items():
        if max(i, j) >= d:
            raise RankMismatch(f"operator index out of range for rank {d}")
        for mono, cv in v.terms.items():
            _accumulate(acc, _normal_pair_on_monomial(v.lattice, 1, i, m, j, n, mono), c * cv)
    for (i, k), c in q.linear.items():
        for mono, cv in v.terms.items():
            _accumulate(acc, basis_mode_on_monomial(v.lattice, 1, i, k, mono), c * cv)
    if q.central:
        for mono, cv in v.terms.items():
            _accumulate(acc, ((mono, Fraction(d)),), q.central * cv)
    return FockVector._raw(v.lattice, 1, acc)


@lru_cache(maxsize=None)
def _virasoro_on_monomial(lattice: Lattice, p: int, shift: tuple, mono: Monomial) -> tuple:
    d = lattice.rank
    ginv = lattice.gram_inverse
    D = monomial_degree(mono)
    acc: dict = {}
    # unordered pairs {a, b}, a + b = p, a <= b; b acts first and must not exceed D
    b_lo = -((-p) // 2)
    for b in range(b_lo, max(D, 0) + 1):
        a = p - b
        weight = Fraction(1, 2) if a == b else Fraction(1)
        for i in range(d):
            for j in range(d):
                g = ginv[i][j]
                if not g:
                    continue
                for m1, c1 in basis_mode_on_monomial(lattice, 1, j, b, mono):
                    _accumulate(acc, basis_mode_on_monomial(lattice, 1, i, a, m1), weight * g * c1)
    if p != 0 and any(shift):
        for i, s in enumerate(shift):
            if s:
                _accumulate(acc, basis_mode_on_monomial(lattice, 1, i, p, mono), -(p + 1) * s)
    return tuple(acc.items())


def virasoro(p: int, A: HVector, v: FockVector) -> FockVector:
    """L_p of the conformal vector omega^A.

    L_p = 1/2 sum_n sum_i :H^i_n H^i_{p-n}: - (p+1) A_p.  Only pairs whose
    annihilating mode is at most deg(v) can act, so the sum is finite.  On the
    level-0 module only the grading operator L_0 is exposed.
    """
    if A.rank != v.lattice.rank:
        raise RankMismatch("conformal shift has the wrong rank")
    if v.level == 0:
        if p != 0:
            raise LevelUnsupported("level-0 Virasoro action is limited to the grading operator L_0")
        return FockVector._raw(v.lattice, 0, {m: c * monomial_degree(m) for m, c in v.terms.items()})
    acc: dict = {}
    for mono, c in v.terms.items():
        _accumulate(acc, _virasoro_on_monomial(v.lattice, p, A.coeffs, mono), c)
    return FockVector._raw(v.lattice, 1, acc)


@dataclass(frozen=True)
class ConformalVector:
    """omega^A = 1/2 sum_i H^i_{-1} H^i_{-1} |0> + A_{-2} |0>."""

    lattice: Lattice
    shift: HVector

    @property
    def central_charge(self) -> Scalar:
        return self.lattice.rank - 12 * pairing(self.lattice, self.shift, self.shift)

    def vector(self) -> FockVector:
        L = self.lattice
        ginv = L.gram_inverse
        terms = []
        for i in range(L.rank):
            for j in range(L.rank):
                if ginv[i][j]:
                    terms.append(((( -1, i), (-1, j)), ginv[i][j] / 2))
        for i, a in self.shift.items():
            terms.append((((-2, i),), a))
        return FockVector(L, 1, terms)

    def L(self, p: int, v: FockVector) -> FockVector:
        return virasoro(p, self.shift, v)


@lru_cache(maxsize=None)
def _pbw_basis(d: int, degree: int) -> tuple:
    out = []

    def rec(remaining: int, start: tuple[int, int], acc: list):
        if remaining == 0:
            out.append(tuple(acc))
            return
        # factors (n, i) in nondecreasing tuple order
        for k in range(remaining, 0, -1):
            n = -k
            for i in range(d):
                if (n, i) < start:
                    continue
                acc.append((n, i))
                rec(remaining - k, (n, i), acc)
                acc.pop()

    rec(degree, (-degree - 1, 0), [])
    return tuple(sorted(out))


def pbw_basis(d: int, degree: int) -> tuple:
    """All PBW monomials of the given degree for a rank-d lattice."""
    if degree < 0:
        return ()
    return _pbw_basis(d, degree)


def pbw_basis_upto(d: int, max_degree: int) -> Iterator[Monomial]:
    for n in range(max_degree + 1):
        yield from pbw_basis(d, n)


def graded_dimensions(level: int, lattice: Lattice, N: int) -> list[int]:
    """dim of the degree-n part for n = 0..N (the same at both levels)."""
    if level not in (0, 1):
        raise ConfigInvalid(f"level must be 0 or 1, got {level!r}")
    if N < 0:
        raise ConfigInvalid("N must be nonnegative")
    return [len(pbw_basis(lattice.rank, n)) for n in range(N + 1)]


def change_basis(v: FockVector, old_in_new, new_lattice: Lattice) -> FockVector:
    """Rewrite ``v`` in a new lattice basis; row i of ``old_in_new`` expresses gamma_i in the new basis."""
    if len(old_in_new) != v.lattice.rank or any(len(r) != new_lattice.rank for r in old_in_new):
        raise RankMismatch("basis change matrix has the wrong shape")
    rows = [HVector(tuple(r)) for r in old_in_new]
    out = FockVector.zero(new_lattice, v.level)
    for mono, c in v.terms.items():
        w = FockVector.vacuum(new_lattice, v.level).scale(c)
        for n, i in mono:
            w = apply_mode(rows[i], n, w)
        out = out + w
    return out
