"""Even positive-definite lattices, Heisenberg modes and quadratic operators.

Orthonormal bases of h_Gamma need square roots (gamma/sqrt(2) already for A1),
so sums over an orthonormal basis {H^i} are always rewritten in dual-basis form

    sum_i H^i_m H^i_n  =  sum_{i,j} (G^-1)_{ij} gamma_{i,m} gamma_{j,n},

which is basis independent and stays inside Q.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConfigInvalid, NotEven, NotPositiveDefinite, NotSymmetric, RankMismatch
from .exactseries import Scalar, format_scalar, to_scalar
from .linalg import inverse, leading_minors


@dataclass(frozen=True)
class Lattice:
    gram: tuple[tuple[int, ...], ...]
    gram_inverse: tuple[tuple[Fraction, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        gram = _as_int_matrix(self.gram)
        d = len(gram)
        for i in range(d):
            for j in range(i + 1, d):
                if gram[i][j] != gram[j][i]:
                    raise NotSymmetric(f"Gram matrix not symmetric at ({i + 1},{j + 1})")
        for i in range(d):
            if gram[i][i] % 2:
                raise NotEven(f"diagonal entry ({i + 1},{i + 1}) = {gram[i][i]} is odd")
        minors = leading_minors([[Fraction(x) for x in row] for row in gram])
        for k, m in enumerate(minors, 1):
            if m <= 0:
                raise NotPositiveDefinite(f"leading principal minor of order {k} is {m}")
        inv = inverse([[Fraction(x) for x in row] for row in gram])
        object.__setattr__(self, "gram", gram)
        object.__setattr__(self, "gram_inverse", tuple(tuple(r) for r in inv))

    @property
    def rank(self) -> int:
        return len(self.gram)

    def basis(self, i: int) -> "HVector":
        return HVector(tuple(Fraction(int(j == i)) for j in range(self.rank)))

    def basis_vectors(self) -> list["HVector"]:
        return [self.basis(i) for i in range(self.rank)]

    def zero(self) -> "HVector":
        return HVector((Fraction(0),) * self.rank)

    def to_json(self) -> dict:
        return {"gram": [list(r) for r in self.gram]}


def _as_int_matrix(gram) -> tuple[tuple[int, ...], ...]:
    try:
        rows = [list(r) for r in gram]
    except TypeError as exc:
        raise ConfigInvalid("Gram matrix must be a list of rows") from exc
    d = len(rows)
    if d == 0 or any(len(r) != d for r in rows):
        raise ConfigInvalid("Gram matrix must be square and nonempty")
    out = []
    for r in rows:
        row = []
        for x in r:
            if isinstance(x, bool) or Fraction(x).denominator != 1:
                raise ConfigInvalid(f"Gram entries must be integers, got {x!r}")
            row.append(int(x))
        out.append(tuple(row))
    return tuple(out)


def lattice_validate(gram: Sequence[Sequence[int]]) -> Lattice:
    return Lattice(gram)


def preset_lattice(name: str) -> Lattice:
    """Named presets: ``A1``, ``A2``, ``A1^k`` (orthogonal sum of k copies of A1)."""
    if name == "A1":
        return Lattice(((2,),))
    if name == "A2":
        return Lattice(((2, -1), (-1, 2)))
    m = re.fullmatch(r"A1\^(\d+)", name)
    if m and int(m.group(1)) >= 1:
        k = int(m.group(1))
        return Lattice(tuple(tuple(2 if i == j else 0 for j in range(k)) for i in range(k)))
    raise ConfigInvalid(f"unknown lattice preset {name!r}")


def lattice_from_config(config) -> Lattice:
    """Preset name, inline JSON (``{"gram": ...}`` or bare matrix), a JSON file path, or a dict."""
    if isinstance(config, Lattice):
        return config
    if isinstance(config, Mapping):
        if "gram" not in config:
            raise ConfigInvalid("lattice config needs a 'gram' field")
        return Lattice(config["gram"])
    if isinstance(config, (list, tuple)):
        return Lattice(config)
    text = str(config).strip()
    if text.startswith(("{", "[")):
        try:
            return lattice_from_config(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"bad inline lattice JSON: {exc}") from exc
    path = Path(text)
    if path.suffix == ".json" or path.exists():
        try:
            return lattice_from_config(json.loads(path.read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read lattice file {text}: {exc}") from exc
    return preset_lattice(text)


@dataclass(frozen=True)
class HVector:
    """Element sum_i coeffs[i] * gamma_i of h_Gamma."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(to_scalar(c) for c in self.coeffs))

    @property
    def rank(self) -> int:
        return len(self.coeffs)

    def __add__(self, other: "HVector") -> "HVector":
        _check_rank(self.rank, other.rank)
        return HVector(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "HVector") -> "HVector":
        return self + other.scale(-1)

    def scale(self, c) -> "HVector":
        c = to_scalar(c)
        return HVector(tuple(c * a for a in self.coeffs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def items(self):
        return ((i, c) for i, c in enumerate(self.coeffs) if c != 0)


def _check_rank(a: int, b: int) -> None:
    if a != b:
        raise RankMismatch(f"rank mismatch: {a} vs {b}")


def pairing(lattice: Lattice, A: HVector, B: HVector) -> Scalar:
    """(A, B) = A^T G B."""
    _check_rank(A.rank, lattice.rank)
    _check_rank(B.rank, lattice.rank)
    total = Fraction(0)
    for i, a in A.items():
        row = lattice.gram[i]
        for j, b in B.items():
            total += a * row[j] * b
    return total


@dataclass(frozen=True)
class Mode:
    """A_n = A (x) t^n."""

    vec: HVector
    n: int


def mode_bracket(lattice: Lattice, a: Mode, b: Mode) -> Scalar:
    """Central coefficient of [A_n, B_m] = (A,B) n delta_{n,-m}."""
    if a.n != -b.n:
        return Fraction(0)
    return pairing(lattice, a.vec, b.vec) * a.n


def _canon_key(i: int, m: int, j: int, n: int) -> tuple[int, int, int, int]:
    # normal ordering is symmetric; store the smaller (mode, index) on the left
    if (m, i) <= (n, j):
        return (i, m, j, n)
    return (j, n, i, m)


class QuadraticOperator:
    """Formal sum of normally ordered :gamma_{i,m} gamma_{j,n}:, linear gamma_{i,k}, and a central term.

    Keys of ``quad`` are ``(i, m, j, n)`` with ``(m, i) <= (n, j)``: the creation
    (more negative) mode sits on the left, the annihilation mode acts first.
    The central coefficient multiplies the element 1 of the metaplectic algebra,
    which acts on Fock space as ``d * id``.
    """

    __slots__ = ("quad", "linear", "central")

    def __init__(self, quad: Mapping | Iterable = (), linear: Mapping | Iterable = (), central=0):
        q: dict = {}
        for (i, m, j, n), c in (quad.items() if isinstance(quad, Mapping) else quad):
            k = _canon_key(i, m, j, n)
            q[k] = q.get(k, 0) + to_scalar(c)
        lin: dict = {}
        for (i, k), c in (linear.items() if isinstance(linear, Mapping) else linear):
            lin[(i, k)] = lin.get((i, k), 0) + to_scalar(c)
        self.quad = {k: v for k, v in sorted(q.items()) if v != 0}
        self.linear = {k: v for k, v in sorted(lin.items()) if v != 0}
        self.central = to_scalar(central)

    def __add__(self, other: "QuadraticOperator") -> "QuadraticOperator":
        return QuadraticOperator(
            list(self.quad.items()) + list(other.quad.items()),
            list(self.linear.items()) + list(other.linear.items()),
            self.central + other.central,
        )

    def scale(self, c) -> "QuadraticOperator":
        c = to_scalar(c)
        return QuadraticOperator(
            {k: c * v for k, v in self.quad.items()},
            {k: c * v for k, v in self.linear.items()},
            c * self.central,
        )

    def __neg__(self):
        return self.scale(-1)

    def __eq__(self, other):
        if not isinstance(other, QuadraticOperator):
            return NotImplemented
        return (self.quad, self.linear, self.central) == (other.quad, other.linear, other.central)

    def __repr__(self):
        parts = [f"{format_scalar(c)}:g{i}_{m} g{j}_{n}:" for (i, m, j, n), c in self.quad.items()]
        parts += [f"{format_scalar(c)}g{i}_{k}" for (i, k), c in self.linear.items()]
        if self.central:
            parts.append(f"{format_scalar(self.central)}*1")
        return "QuadraticOperator(" + (" + ".join(parts) or "0") + ")"

    @classmethod
    def central_element(cls, c=1) -> "QuadraticOperator":
        return cls(central=c)

    def degree_shift(self) -> int | None:
        """Common value of -(m+n) over quadratic terms, or None if mixed/empty."""
        shifts = {-(m + n) for (_, m, _, n) in self.quad}
        return shifts.pop() if len(shifts) == 1 else None


def dual_quadratic(m: int, n: int, lattice: Lattice) -> QuadraticOperator:
    """sum_i H^i_m H^i_n for any orthonormal {H^i}, in normally ordered dual-basis form."""
    d = lattice.rank
    ginv = lattice.gram_inverse
    return QuadraticOperator(
        ((i, m, j, n), ginv[i][j]) for i in range(d) for j in range(d) if ginv[i][j] != 0
    )
