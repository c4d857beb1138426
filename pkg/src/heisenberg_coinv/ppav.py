"""Extended Siegel points (phi, h, Omega), their outgoing spaces F, and the Sp(2g, Z) action.

For a point, Z is the graph of phi: H_- -> H'_+, spanned by
z_i = b_{-i} + phi(b_{-i}).  Each frame vector h_k in H'_+ is read as the
linear form z -> <h_k, z> through the residue pairing, and F is the common
kernel of these g forms inside Z.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import (
    ConfigInvalid,
    FrameDegenerate,
    GraphNotIsotropic,
    InvariantViolation,
    NotSymplectic,
    OmegaNotSiegel,
    RankDeficient,
    SingularFactor,
    TruncationInsufficient,
)
from .exactseries import (
    I,
    LaurentPoly,
    field_of,
    format_scalar,
    imag_part,
    residue_pairing,
    to_scalar,
)
from .linalg import identity, inverse, leading_minors, matmul, nullspace, rank, rref, transpose


# -- outgoing lattices ------------------------------------------------------------

@dataclass(frozen=True)
class OutgoingLattice:
    """Reduced echelon basis of the truncated isotropic space F.

    ``basis[k]`` has leading term t^{-p} with coefficient 1 for its pole order p,
    and no basis element carries a nonzero coefficient at another element's
    leading exponent.  The basis is therefore canonical for the span, which is
    what makes span comparisons and report byte-identity meaningful.
    """

    basis: tuple[LaurentPoly, ...]
    genus: int
    max_pole: int
    trunc: int | None
    source: str = "ppav"
    gap_set: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        poles = [b.pole_order for b in self.basis]
        if len(set(poles)) != len(poles) or 0 in poles:
            raise InvariantViolation("outgoing basis must have distinct positive pole orders", poles)
        gaps = tuple(p for p in range(1, self.max_pole + 1) if p not in set(poles))
        object.__setattr__(self, "gap_set", gaps)

    @classmethod
    def from_span(
        cls,
        elements: Iterable[LaurentPoly],
        genus: int,
        max_pole: int,
        trunc: int | None,
        source: str = "ppav",
    ) -> "OutgoingLattice":
        elems = [e.drop_constant() for e in elements]
        if trunc is not None:
            elems = [e.truncate(trunc) for e in elems]
        known = [e.trunc for e in elems if e.trunc is not None]
        if known:
            eff = min(known)
            trunc = eff if trunc is None else min(trunc, eff)
        rows = rref((e.terms for e in elems), order=lambda n: n)
        basis = []
        for r in rows:
            lead = next(iter(r))
            if lead >= 0:
                raise InvariantViolation("F meets H'_+ (an outgoing element has no pole)", r)
            basis.append(LaurentPoly(r, trunc))
        basis.sort(key=lambda b: b.pole_order)
        if basis and basis[-1].pole_order > max_pole:
            raise InvariantViolation("outgoing element exceeds the declared pole bound", basis[-1].pole_order)
        return cls(tuple(basis), genus, max_pole, trunc, source)

    @property
    def field(self) -> str:
        return field_of(c for b in self.basis for _, c in b.items())

    @property
    def pole_orders(self) -> tuple[int, ...]:
        return tuple(b.pole_order for b in self.basis)

    def upto_pole(self, M: int) -> tuple[LaurentPoly, ...]:
        return tuple(b for b in self.basis if b.pole_order <= M)

    def is_complete(self) -> bool:
        return len(self.gap_set) == self.genus

    def span_equals(self, other: "OutgoingLattice") -> bool:
        if self.max_pole != other.max_pole or len(self.basis) != len(other.basis):
            return False
        return all(a.same_known_values(b) for a, b in zip(self.basis, other.basis))

    def same_data(self, other: "OutgoingLattice") -> bool:
        """Identical basis, truncation and gaps, whatever the source tag."""
        return (self.basis, self.trunc, self.gap_set, self.genus) == (other.basis, other.trunc, other.gap_set, other.genus)

    def isotropy_matrix(self) -> list[list]:
        return [[residue_pairing(a, b) for b in self.basis] for a in self.basis]

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "genus": self.genus,
            "field": self.field,
            "max_pole": self.max_pole,
            "trunc": self.trunc,
            "gap_set": list(self.gap_set),
            "basis": [b.to_json() for b in self.basis],
        }


# -- extended Siegel points -------------------------------------------------------

def _phi_dict(phi) -> dict[tuple[int, int], object]:
    out: dict = {}
    items = phi.items() if isinstance(phi, Mapping) else ((tuple(e[:2]), e[2]) for e in phi)
    for (i, j), c in items:
        i, j = int(i), int(j)
        if i < 1 or j < 1:
            raise ConfigInvalid(f"phi indices start at 1, got ({i},{j})")
        c = to_scalar(c)
        if c != 0:
            out[(i, j)] = out.get((i, j), 0) + c
    return {k: v for k, v in sorted(out.items()) if v != 0}


@dataclass(frozen=True)
class ExtendedSiegelPoint:
    """(phi, h, Omega) with phi(b_{-i}) = sum_j phi[(i, j)] b_j.

    ``p_max`` bounds the support of phi in both indices; graph isotropy is
    checked for all pairs up to it.  Construction validates everything.
    """

    g: int
    phi: Mapping[tuple[int, int], object]
    frame: tuple[LaurentPoly, ...]
    omega: tuple[tuple, ...]
    p_max: int = 0

    def __post_init__(self):
        if not isinstance(self.g, int) or self.g < 1:
            raise ConfigInvalid("g must be a positive integer")
        phi = _phi_dict(self.phi)
        support = max((max(k) for k in phi), default=1)
        p_max = max(self.p_max or 0, support)
        frame = tuple(h if isinstance(h, LaurentPoly) else LaurentPoly.from_json(h) for h in self.frame)
        omega = tuple(tuple(to_scalar(x) for x in row) for row in self.omega)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "p_max", p_max)
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "omega", omega)
        self._validate()

    def _validate(self) -> None:
        g = self.g
        # graph isotropy <z_i, z_j> = 0
        zs = {i: self.graph_vector(i) for i in range(1, self.p_max + 1)}
        for i in range(1, self.p_max + 1):
            for j in range(i + 1, self.p_max + 1):
                val = residue_pairing(zs[i], zs[j])
                if val != 0:
                    raise GraphNotIsotropic(
                        f"<b_-{i}+phi(b_-{i}), b_-{j}+phi(b_-{j})> = {format_scalar(val)} != 0",
                        witness=(i, j, val),
                    )
        # frame
        if len(self.frame) != g:
            raise FrameDegenerate(f"expected {g} frame vectors, got {len(self.frame)}")
        for k, h in enumerate(self.frame):
            if h.is_zero() or h.min_exponent <= 0:
                raise FrameDegenerate(f"frame vector {k + 1} must be a nonzero element of H'_+")
        exps = sorted({n for h in self.frame for n in h.exponents()})
        if rank([[h.coeff(n) for n in exps] for h in self.frame]) < g:
            raise FrameDegenerate("frame vectors are linearly dependent")
        # Siegel period matrix
        om = self.omega
        if len(om) != g or any(len(r) != g for r in om):
            raise OmegaNotSiegel(f"Omega must be {g}x{g}")
        for a in range(g):
            for b in range(a + 1, g):
                if om[a][b] != om[b][a]:
                    raise OmegaNotSiegel(f"Omega not symmetric at ({a + 1},{b + 1})")
        minors = leading_minors([[imag_part(x) for x in r] for r in om])
        if any(m <= 0 for m in minors):
            raise OmegaNotSiegel("Im(Omega) is not positive definite")

    def phi_image(self, i: int) -> LaurentPoly:
        """phi(b_{-i}) as an exact element of H'_+."""
        return LaurentPoly({j: c for (a, j), c in self.phi.items() if a == i})

    def graph_vector(self, i: int) -> LaurentPoly:
        return LaurentPoly({-i: 1}) + self.phi_image(i)

    def with_frame_omega(self, frame, omega) -> "ExtendedSiegelPoint":
        return ExtendedSiegelPoint(self.g, self.phi, tuple(frame), tuple(tuple(r) for r in omega), self.p_max)

    def to_json(self) -> dict:
        return {
            "g": self.g,
            "pmax": self.p_max,
            "phi": [[i, j, format_scalar(c)] for (i, j), c in self.phi.items()],
            "frame": [h.to_json() for h in self.frame],
            "omega": [[format_scalar(x) for x in r] for r in self.omega],
        }


def validate_point(raw) -> ExtendedSiegelPoint:
    """Build a validated point from a JSON-like mapping (or pass a point through)."""
    if isinstance(raw, ExtendedSiegelPoint):
        return raw
    try:
        g = int(raw["g"])
        phi = raw.get("phi", [])
        frame = [LaurentPoly.from_json(h) if not isinstance(h, LaurentPoly) else h for h in raw["frame"]]
        omega = raw["omega"]
        p_max = int(raw.get("pmax", 0) or 0)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigInvalid(f"malformed point config: {exc}") from exc
    return ExtendedSiegelPoint(g, phi, tuple(frame), tuple(tuple(r) for r in omega), p_max)


def standard_point(g: int, phi=None) -> ExtendedSiegelPoint:
    """Frame (b_1, ..., b_g), Omega = i * Id, and the given phi (default 0)."""
    frame = tuple(LaurentPoly({k: 1}) for k in range(1, g + 1))
    omega = tuple(tuple(I if a == b else Fraction(0) for b in range(g)) for a in range(g))
    return ExtendedSiegelPoint(g, phi or {}, frame, omega)


POINT_PRESETS = {
    "zero-g1": lambda: standard_point(1),
    "zero-g2": lambda: standard_point(2),
    "phi11-g1": lambda: standard_point(1, {(1, 1): 1}),
}


def point_from_config(config) -> ExtendedSiegelPoint:
    if isinstance(config, ExtendedSiegelPoint):
        return config
    if isinstance(config, Mapping):
        return validate_point(config)
    text = str(config)
    if text in POINT_PRESETS:
        return POINT_PRESETS[text]()
    try:
        return validate_point(json.loads(Path(text).read_text()))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read point {text!r}: {exc}") from exc


def phi_coefficient_identity(point: ExtendedSiegelPoint) -> dict[str, bool]:
    """Which coefficient identity the stored phi satisfies on its support box."""
    P = point.p_max
    get = lambda i, j: point.phi.get((i, j), 0)
    plus = all(j * get(i, j) == i * get(j, i) for i in range(1, P + 1) for j in range(1, P + 1))
    minus = all(j * get(i, j) == -i * get(j, i) for i in range(1, P + 1) for j in range(1, P + 1))
    return {"j*phi_ij == i*phi_ji": plus, "j*phi_ij == -i*phi_ji": minus}


def extract_outgoing(point: ExtendedSiegelPoint, M: int, N: int) -> OutgoingLattice:
    """Basis of {z in Z_M : <h_k, z> = 0 for all k}, truncated at t^N."""
    if M < 1 or N < 1:
        raise ConfigInvalid("M and N must be positive")
    zs = [point.graph_vector(i).truncate(N) for i in range(1, M + 1)]
    try:
        forms = [[residue_pairing(h, z) for z in zs] for h in point.frame]
    except TruncationInsufficient:
        raise
    r = rank(forms)
    if r < point.g:
        raise RankDeficient(
            f"frame forms restricted to pole orders <= {M} have rank {r} < g = {point.g}",
            witness={"rank": r, "M": M},
        )
    elements = []
    for c in nullspace(forms, M):
        acc = LaurentPoly.zero(N)
        for ci, z in zip(c, zs):
            if ci != 0:
                acc = acc + z.scale(ci)
        elements.append(acc)
    return OutgoingLattice.from_span(elements, point.g, M, N, source="ppav")


# -- Sp(2g, Z) ---------------------------------------------------------------------

@dataclass(frozen=True)
class SpMatrix:
    alpha: tuple
    beta: tuple
    gamma: tuple
    delta: tuple

    def __post_init__(self):
        blocks = [tuple(tuple(int(x) for x in r) for r in b) for b in (self.alpha, self.beta, self.gamma, self.delta)]
        g = len(blocks[0])
        if any(len(b) != g or any(len(r) != g for r in b) for b in blocks):
            raise NotSymplectic("Sp blocks must all be g x g")
        for name, b in zip(("alpha", "beta", "gamma", "delta"), blocks):
            object.__setattr__(self, name, b)
        S = self.matrix()
        J = _J(g)
        if matmul(matmul(transpose(S), J), S) != J:
            raise NotSymplectic("sigma^T J sigma != J")

    @property
    def g(self) -> int:
        return len(self.alpha)

    def matrix(self) -> list[list]:
        g = len(self.alpha)
        top = [list(self.alpha[r]) + list(self.beta[r]) for r in range(g)]
        bot = [list(self.gamma[r]) + list(self.delta[r]) for r in range(g)]
        return [[Fraction(x) for x in row] for row in top + bot]

    @classmethod
    def from_matrix(cls, m: Sequence[Sequence[int]]) -> "SpMatrix":
        n = len(m)
        if n % 2:
            raise NotSymplectic("Sp matrix must be 2g x 2g")
        g = n // 2
        blk = lambda r0, c0: tuple(tuple(m[r][c] for c in range(c0, c0 + g)) for r in range(r0, r0 + g))
        return cls(blk(0, 0), blk(0, g), blk(g, 0), blk(g, g))

    @classmethod
    def identity(cls, g: int) -> "SpMatrix":
        Id = _int_id(g)
        Z = _int_zero(g)
        return cls(Id, Z, Z, Id)

    @classmethod
    def S(cls, g: int) -> "SpMatrix":
        """(0, -I; I, 0)."""
        Id = _int_id(g)
        return cls(_int_zero(g), tuple(tuple(-x for x in r) for r in Id), Id, _int_zero(g))

    @classmethod
    def T(cls, g: int, B: Sequence[Sequence[int]] | None = None) -> "SpMatrix":
        """(I, B; 0, I) with B symmetric (default I)."""
        Id = _int_id(g)
        return cls(Id, tuple(tuple(r) for r in (B if B is not None else Id)), _int_zero(g), Id)


def _int_id(g):
    return tuple(tuple(int(a == b) for b in range(g)) for a in range(g))


def _int_zero(g):
    return tuple(tuple(0 for _ in range(g)) for _ in range(g))


def _J(g: int) -> list[list]:
    J = [[Fraction(0)] * (2 * g) for _ in range(2 * g)]
    for k in range(g):
        J[k][g + k] = Fraction(1)
        J[g + k][k] = Fraction(-1)
    return J


def sp_act(sigma: SpMatrix, point: ExtendedSiegelPoint) -> ExtendedSiegelPoint:
    """sigma(phi, h, Omega) = (phi, h (gamma Omega + delta)^-1, (alpha Omega + beta)(gamma Omega + delta)^-1)."""
    g = point.g
    if sigma.g != g:
        raise ConfigInvalid(f"Sp matrix is for g={sigma.g}, point has g={g}")
    Om = [list(r) for r in point.omega]
    a, b, c, d = ([[Fraction(x) for x in r] for r in blk] for blk in (sigma.alpha, sigma.beta, sigma.gamma, sigma.delta))
    factor = [[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(matmul(c, Om), d)]
    inv = inverse(factor)
    if inv is None:
        raise SingularFactor("gamma*Omega + delta is singular")
    num = [[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(matmul(a, Om), b)]
    new_omega = matmul(num, inv)
    new_frame = []
    for k in range(g):
        acc = LaurentPoly.zero(None)
        for j in range(g):
            if inv[j][k] != 0:
                acc = acc + point.frame[j].scale(inv[j][k])
        new_frame.append(acc)
    return point.with_frame_omega(new_frame, new_omega)


def word_matrix(word: str, g: int) -> list[SpMatrix]:
    """Generators for a word over {S, T}, in application order."""
    out = []
    for ch in word.strip():
        if ch == "S":
            out.append(SpMatrix.S(g))
        elif ch == "T":
            out.append(SpMatrix.T(g))
        elif ch in " ,":
            continue
        else:
            raise ConfigInvalid(f"unknown Sp generator {ch!r} (use S and T)")
    return out
