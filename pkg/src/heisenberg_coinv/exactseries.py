"""Exact scalars (Q and Q(i)) and truncated Laurent polynomials.

A :class:`LaurentPoly` stores finitely many coefficients together with a
truncation order ``trunc``: coefficients of exponents above ``trunc`` are
unknown.  ``trunc=None`` means the value is an exact Laurent polynomial.  Every
operation propagates ``trunc`` conservatively, and the residue pairing refuses
to answer when the t^-1 coefficient could depend on unknown coefficients.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Union

from .errors import BadLeadingTerm, ConfigInvalid, TruncationInsufficient

MAX_EXPONENT = 2**31 - 1


class GaussianRational:
    """Element re + im*i of Q(i).

    Arithmetic collapses results with zero imaginary part back to ``Fraction``
    so that Q is literally a subset of the values in circulation: equal numbers
    compare and hash equal whichever route produced them.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @staticmethod
    def _parts(x):
        if isinstance(x, GaussianRational):
            return x.re, x.im
        if isinstance(x, (int, Rational)):
            return Fraction(x), Fraction(0)
        return None

    def __add__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return make_scalar(self.re + p[0], self.im + p[1])

    __radd__ = __add__

    def __sub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return make_scalar(self.re - p[0], self.im - p[1])

    def __rsub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return make_scalar(p[0] - self.re, p[1] - self.im)

    def __mul__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        a, b = self.re, self.im
        c, d = p
        return make_scalar(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        c, d = p
        n = c * c + d * d
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        a, b = self.re, self.im
        return make_scalar((a * c + b * d) / n, (b * c - a * d) / n)

    def __rtruediv__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return GaussianRational(*p) / self

    def __neg__(self):
        return make_scalar(-self.re, -self.im)

    def __pos__(self):
        return self

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return self.re == p[0] and self.im == p[1]

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def conjugate(self):
        return make_scalar(self.re, -self.im)

    def __repr__(self):
        return f"GaussianRational({self.re!s}, {self.im!s})"

    def __str__(self):
        return format_scalar(self)


Scalar = Union[Fraction, GaussianRational]
I = GaussianRational(0, 1)


def make_scalar(re, im=0) -> Scalar:
    if im == 0:
        return Fraction(re)
    return GaussianRational(re, im)


def to_scalar(x) -> Scalar:
    """Coerce int/Fraction/GaussianRational/str to a canonical exact scalar."""
    if isinstance(x, GaussianRational):
        return make_scalar(x.re, x.im)
    if isinstance(x, str):
        return parse_scalar(x)
    if isinstance(x, bool) or not isinstance(x, (int, Rational)):
        raise ConfigInvalid(f"not an exact scalar: {x!r}")
    return Fraction(x)


def real_part(x) -> Fraction:
    return x.re if isinstance(x, GaussianRational) else Fraction(x)


def imag_part(x) -> Fraction:
    return x.im if isinstance(x, GaussianRational) else Fraction(0)


def format_scalar(x) -> str:
    """Canonical string: ``"a/b"`` for rationals, ``"a/b+c/d*i"`` otherwise."""
    x = to_scalar(x)
    if isinstance(x, Fraction):
        return str(x)
    sign = "-" if x.im < 0 else "+"
    return f"{x.re}{sign}{abs(x.im)}*i"


def parse_scalar(s: str) -> Scalar:
    text = s.replace(" ", "")
    if not text:
        raise ConfigInvalid("empty scalar string")
    try:
        if not text.endswith("i"):
            return Fraction(text)
        body = text[:-1]
        if body.endswith("*"):
            body = body[:-1]
        split = max(body.rfind("+"), body.rfind("-"))
        if split > 0:
            re_txt, im_txt = body[:split], body[split:]
        else:
            re_txt, im_txt = "0", body
        if im_txt in ("", "+"):
            im = Fraction(1)
        elif im_txt == "-":
            im = Fraction(-1)
        else:
            im = Fraction(im_txt)
        return make_scalar(Fraction(re_txt), im)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigInvalid(f"cannot parse scalar {s!r}") from exc


def field_of(values: Iterable) -> str:
    """``"Q(i)"`` if any value has a nonzero imaginary part, else ``"Q"``."""
    for v in values:
        if isinstance(v, GaussianRational) and v.im != 0:
            return "Q(i)"
    return "Q"


def _check_exponent(n: int) -> int:
    if not isinstance(n, int) or isinstance(n, bool):
        raise ConfigInvalid(f"exponent must be an integer, got {n!r}")
    if abs(n) > MAX_EXPONENT:
        raise ConfigInvalid(f"exponent {n} out of range")
    return n


class LaurentPoly:
    """Finitely supported Laurent polynomial with a truncation order."""

    __slots__ = ("_terms", "trunc", "_hash")

    def __init__(self, terms: Mapping[int, object] | Iterable = (), trunc: int | None = None):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[int, Scalar] = {}
        for n, c in items:
            n = _check_exponent(n)
            c = to_scalar(c)
            acc[n] = acc.get(n, 0) + c
        if trunc is not None:
            trunc = _check_exponent(trunc)
        self._terms = {
            n: to_scalar(c)
            for n, c in sorted(acc.items())
            if c != 0 and (trunc is None or n <= trunc)
        }
        self.trunc = trunc
        self._hash = None

    @classmethod
    def monomial(cls, n: int, c=1, trunc: int | None = None) -> "LaurentPoly":
        return cls({n: c}, trunc)

    @classmethod
    def zero(cls, trunc: int | None = None) -> "LaurentPoly":
        return cls({}, trunc)

    # -- inspection ---------------------------------------------------------
    @property
    def terms(self) -> dict[int, Scalar]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def exponents(self):
        return self._terms.keys()

    def coeff(self, n: int) -> Scalar:
        if self.trunc is not None and n > self.trunc:
            raise TruncationInsufficient(f"coefficient of t^{n} is beyond trunc_order {self.trunc}")
        return self._terms.get(n, Fraction(0))

    def __getitem__(self, n: int) -> Scalar:
        return self.coeff(n)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    @property
    def min_exponent(self) -> int | None:
        return next(iter(self._terms), None)

    @property
    def max_exponent(self) -> int | None:
        return next(reversed(self._terms), None) if self._terms else None

    @property
    def pole_order(self) -> int:
        m = self.min_exponent
        return 0 if m is None or m >= 0 else -m

    def lowest_possible(self) -> float:
        """Smallest exponent at which the (possibly unknown) value may be nonzero."""
        if self._terms:
            return self.min_exponent
        if self.trunc is None:
            return math.inf
        return self.trunc + 1

    @property
    def field(self) -> str:
        return field_of(self._terms.values())

    # -- ring operations ----------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, LaurentPoly):
            if isinstance(other, (int, Rational, GaussianRational)):
                other = LaurentPoly({0: other})
            else:
                return NotImplemented
        acc = dict(self._terms)
        for n, c in other._terms.items():
            acc[n] = acc.get(n, 0) + c
        return LaurentPoly(acc, _min_trunc(self.trunc, other.trunc))

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({n: -c for n, c in self._terms.items()}, self.trunc)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "LaurentPoly":
        c = to_scalar(c)
        return LaurentPoly({n: c * v for n, v in self._terms.items()}, self.trunc)

    def __mul__(self, other):
        if isinstance(other, (int, Rational, GaussianRational)):
            return self.scale(other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        acc: dict[int, Scalar] = {}
        for a, ca in self._terms.items():
            for b, cb in other._terms.items():
                acc[a + b] = acc.get(a + b, 0) + ca * cb
        bounds = []
        if self.trunc is not None and other.lowest_possible() != math.inf:
            bounds.append(self.trunc + other.lowest_possible())
        if other.trunc is not None and self.lowest_possible() != math.inf:
            bounds.append(other.trunc + self.lowest_possible())
        trunc = min(bounds) if bounds else None
        return LaurentPoly(acc, trunc)

    __rmul__ = __mul__

    def derivative(self) -> "LaurentPoly":
        trunc = None if self.trunc is None else self.trunc - 1
        return LaurentPoly({n - 1: n * c for n, c in self._terms.items() if n != 0}, trunc)

    def truncate(self, N: int) -> "LaurentPoly":
        return LaurentPoly(self._terms, _min_trunc(self.trunc, N))

    def negative_part(self) -> "LaurentPoly":
        """Projection to H_- (exact: only finitely many negative exponents exist)."""
        return LaurentPoly({n: c for n, c in self._terms.items() if n < 0})

    def positive_part(self) -> "LaurentPoly":
        return LaurentPoly({n: c for n, c in self._terms.items() if n > 0}, self.trunc)

    def drop_constant(self) -> "LaurentPoly":
        """Image in H' = H / C b_0."""
        return LaurentPoly({n: c for n, c in self._terms.items() if n != 0}, self.trunc)

    def residue(self) -> Scalar:
        return self.coeff(-1)

    # -- comparison / serialization ----------------------------------------
    def __eq__(self, other):
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self._terms == other._terms and self.trunc == other.trunc

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((tuple(self._terms.items()), self.trunc))
        return self._hash

    def same_known_values(self, other: "LaurentPoly") -> bool:
        """Equality of coefficients up to the smaller truncation order."""
        N = _min_trunc(self.trunc, other.trunc)
        return self.truncate(N)._terms == other.truncate(N)._terms if N is not None else self._terms == other._terms

    def to_json(self) -> dict:
        return {"terms": [[n, format_scalar(c)] for n, c in self._terms.items()], "trunc": self.trunc}

    @classmethod
    def from_json(cls, obj) -> "LaurentPoly":
        try:
            terms = [(int(n), to_scalar(c)) for n, c in obj["terms"]]
            trunc = obj.get("trunc")
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigInvalid(f"malformed Laurent polynomial: {obj!r}") from exc
        return cls(terms, None if trunc is None else int(trunc))

    def __repr__(self):
        if not self._terms:
            body = "0"
        else:
            body = " + ".join(f"({format_scalar(c)})t^{n}" for n, c in self._terms.items())
        tail = "" if self.trunc is None else f" + O(t^{self.trunc + 1})"
        return f"LaurentPoly({body}{tail})"


def _min_trunc(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def t(n: int, c=1, trunc: int | None = None) -> LaurentPoly:
    """Shorthand for ``c * t**n``."""
    return LaurentPoly.monomial(n, c, trunc)


def residue_pairing(f: LaurentPoly, g: LaurentPoly) -> Scalar:
    """<f, g> = -Res_{t=0} f dg."""
    if f.trunc is not None and g.lowest_possible() <= -(f.trunc + 1):
        raise TruncationInsufficient(
            f"<f,g>: unknown coefficients of f beyond t^{f.trunc} meet poles of g"
        )
    if g.trunc is not None and f.lowest_possible() <= -(g.trunc + 1):
        raise TruncationInsufficient(
            f"<f,g>: unknown coefficients of g beyond t^{g.trunc} meet poles of f"
        )
    total = Fraction(0)
    for a, ca in f.items():
        b = -a
        if b != 0 and b in g._terms:
            total += ca * g._terms[b] * b
    return -total


def series_sqrt(u: LaurentPoly, N: int) -> LaurentPoly:
    """Square root of a power series with constant term 1, modulo t^(N+1)."""
    if N < 0:
        raise ConfigInvalid("N must be nonnegative")
    if any(n < 0 for n in u.exponents()) or u._terms.get(0) != 1:
        raise BadLeadingTerm("series_sqrt needs a power series with constant term 1")
    if u.trunc is not None and u.trunc < N:
        raise TruncationInsufficient(f"input known through t^{u.trunc}, need t^{N}")
    v = [Fraction(0)] * (N + 1)
    v[0] = Fraction(1)
    for n in range(1, N + 1):
        s = u._terms.get(n, Fraction(0))
        for k in range(1, n):
            s -= v[k] * v[n - k]
        v[n] = s / 2
    return LaurentPoly(enumerate(v), N)
