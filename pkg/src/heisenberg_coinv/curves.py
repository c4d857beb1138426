"""Hyperelliptic curves y^2 = f(x) with the exact coordinate x = t^-2 at infinity.

With deg f = 2g + 1, the point at infinity is a Weierstrass point and
y = t^-(2g+1) * sqrt(t^(2(2g+1)) f(t^-2)), the square root being a power
series with constant term 1.  Functions regular away from infinity are
spanned by x^a and x^a y, so everything is exact over Q.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .errors import ConfigInvalid, TruncationInsufficient
from .exactseries import I, LaurentPoly, format_scalar, residue_pairing, series_sqrt
from .ppav import ExtendedSiegelPoint, OutgoingLattice


# -- polynomials over Q, coefficient lists lowest degree first ----------------------

def _trim(p: list) -> list:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_rem(a: list, b: list) -> list:
    a = _trim(a)
    b = _trim(b)
    while len(a) >= len(b) and a:
        q = a[-1] / b[-1]
        shift = len(a) - len(b)
        for k, c in enumerate(b):
            a[k + shift] -= q * c
        a = _trim(a)
    return a


def poly_gcd(a: Sequence, b: Sequence) -> list:
    """Monic gcd over Q."""
    a = _trim(Fraction(x) for x in a)
    b = _trim(Fraction(x) for x in b)
    while b:
        a, b = b, _poly_rem(a, b)
    return [c / a[-1] for c in a] if a else []


def poly_derivative(p: Sequence) -> list:
    return [k * Fraction(c) for k, c in enumerate(p)][1:]


@dataclass(frozen=True)
class HyperellipticCurve:
    """y^2 = f(x), ``f_coeffs`` = (c_0, ..., c_{2g+1}) with c_{2g+1} = 1."""

    genus: int
    f_coeffs: tuple

    def __post_init__(self):
        g = self.genus
        if not isinstance(g, int) or g < 1:
            raise ConfigInvalid("genus must be a positive integer")
        try:
            coeffs = tuple(Fraction(c) for c in self.f_coeffs)
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(f"f coefficients must be rational: {exc}") from exc
        if len(coeffs) != 2 * g + 2:
            raise ConfigInvalid(f"genus {g} needs deg f = {2 * g + 1} ({2 * g + 2} coefficients)")
        if coeffs[-1] != 1:
            raise ConfigInvalid("f must be monic")
        if len(poly_gcd(coeffs, poly_derivative(coeffs))) > 1:
            raise ConfigInvalid("f is not squarefree, the curve is singular")
        object.__setattr__(self, "f_coeffs", coeffs)

    @property
    def y_pole(self) -> int:
        return 2 * self.genus + 1

    def to_json(self) -> dict:
        return {"genus": self.genus, "f": [format_scalar(c) for c in self.f_coeffs]}


CURVE_PRESETS = {
    "elliptic-j0": lambda: HyperellipticCurve(1, (1, 0, 0, 1)),
    "genus2-bolza-like": lambda: HyperellipticCurve(2, (1, 0, 0, 0, 0, 1)),
}


def curve_from_config(config) -> HyperellipticCurve:
    if isinstance(config, HyperellipticCurve):
        return config
    if isinstance(config, Mapping):
        try:
            return HyperellipticCurve(int(config["genus"]), tuple(config["f"]))
        except (KeyError, TypeError) as exc:
            raise ConfigInvalid(f"malformed curve config: {exc}") from exc
    text = str(config)
    if text in CURVE_PRESETS:
        return CURVE_PRESETS[text]()
    try:
        return curve_from_config(json.loads(Path(text).read_text()))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read curve {text!r}: {exc}") from exc


def _y_unit(curve: HyperellipticCurve, K: int) -> LaurentPoly:
    """sqrt(t^(2(2g+1)) f(t^-2)) modulo t^(K+1)."""
    top = 2 * curve.genus + 1
    u = LaurentPoly({2 * (top - k): c for k, c in enumerate(curve.f_coeffs)})
    return series_sqrt(u, K)


def expand_functions(curve: HyperellipticCurve, N: int, max_pole: int | None = None) -> dict:
    """Expansions of x^a (key ``(a, 0)``) and x^a y (key ``(a, 1)``) with pole order <= max_pole, known through t^N."""
    if N < 2 * curve.y_pole:
        raise ConfigInvalid(f"N must be at least {2 * curve.y_pole} for genus {curve.genus}")
    max_pole = N if max_pole is None else max_pole
    s = _y_unit(curve, N + max_pole)
    out = {}
    for a in range(max_pole // 2 + 1):
        out[(a, 0)] = LaurentPoly({-2 * a: 1}, N)
        pole = 2 * a + curve.y_pole
        if pole <= max_pole:
            out[(a, 1)] = LaurentPoly({n - pole: c for n, c in s.items()}, N)
    return dict(sorted(out.items(), key=lambda kv: (2 * kv[0][0] + kv[0][1] * curve.y_pole)))


def curve_outgoing(curve: HyperellipticCurve, M: int, N: int) -> OutgoingLattice:
    """Echelon basis of the expansions of functions with pole order <= M, modulo constants."""
    if N < M:
        raise TruncationInsufficient(f"trunc order {N} below the pole bound {M}: pairings would be undetermined")
    funcs = expand_functions(curve, max(N, 2 * curve.y_pole), M)
    return OutgoingLattice.from_span(funcs.values(), curve.genus, M, N, source="curve")


@dataclass(frozen=True)
class IsotropyReport:
    entries: tuple  # ((i, j, status, value), ...) for i < j, 1-based basis positions
    pole_orders: tuple

    @property
    def passed(self) -> bool:
        return all(status == "zero" for _, _, status, _ in self.entries)

    @property
    def needs_retry(self) -> bool:
        return any(status == "truncation" for _, _, status, _ in self.entries)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "pole_orders": list(self.pole_orders),
            "pairs_checked": len(self.entries),
            "nonzero": [[i, j, v] for i, j, s, v in self.entries if s == "nonzero"],
            "truncation": [[i, j] for i, j, s, _ in self.entries if s == "truncation"],
        }


def residue_isotropy_report(lattice: OutgoingLattice) -> IsotropyReport:
    entries = []
    basis = lattice.basis
    for a in range(len(basis)):
        for b in range(a + 1, len(basis)):
            try:
                val = residue_pairing(basis[a], basis[b])
            except TruncationInsufficient:
                entries.append((a + 1, b + 1, "truncation", None))
                continue
            entries.append((a + 1, b + 1, "zero" if val == 0 else "nonzero", format_scalar(val)))
    return IsotropyReport(tuple(entries), lattice.pole_orders)


def torelli_point(curve: HyperellipticCurve, N: int) -> ExtendedSiegelPoint:
    """A point whose Z contains the curve's F, with the frame cutting F out of Z.

    Z is spanned by the curve functions plus, for each gap j, the vector
    t^-j + psi_j with psi_j supported on non-gap exponents and chosen so that
    Z stays isotropic.  Omega is the placeholder i * Id: periods never enter F.
    """
    F = curve_outgoing(curve, N, N)
    gaps = F.gap_set
    rows = {b.pole_order: b for b in F.basis}
    tails = {p: b.positive_part() for p, b in rows.items()}
    polar = {p: {-n: c for n, c in b.items() if n < 0 and -n != p} for p, b in rows.items()}

    psi = {j: {i: Fraction(j) * tails[i].coeff(j) / i for i in rows} for j in gaps}
    phi: dict = {}
    for j in gaps:
        for i, c in psi[j].items():
            if c != 0:
                phi[(j, i)] = c
    for p in rows:
        img = dict(tails[p].items())
        for j, nu in polar[p].items():
            for i, c in psi[j].items():
                img[i] = img.get(i, 0) - nu * c
        for k, c in img.items():
            if c != 0 and k <= N:
                phi[(p, k)] = c

    frame = []
    for j in gaps:
        h = {j: Fraction(1)}
        for p in rows:
            nu = polar[p].get(j, 0)
            if nu != 0:
                h[p] = -Fraction(j) * nu / p
        frame.append(LaurentPoly(h))
    g = curve.genus
    omega = tuple(tuple(I if a == b else Fraction(0) for b in range(g)) for a in range(g))
    return ExtendedSiegelPoint(g, phi, tuple(frame), omega, N)
