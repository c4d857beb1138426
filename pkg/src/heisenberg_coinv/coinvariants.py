"""Truncated coinvariants V / (h_Gamma (x) F) V.

Generators (A (x) f) v are expanded in the PBW basis and fed into a sparse
echelon whose column order puts higher Fock degree first.  A row's pivot is
then its top-degree term, so the rows with pivot degree <= n span exactly
U cap V_{<=n} among the generators considered, and

    d_n = dim V_{<=n} - #{pivots of degree <= n}.

The closed-form oracle takes a separate route: it never touches Fock space
and counts monomials in Sym(h (x) H_- / F_-) by weight.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import (
    ConfigInvalid,
    GapSetIncomplete,
    LevelUnsupported,
    MarginTooSmall,
    NotNilpotent,
    TruncationInsufficient,
)
from .exactseries import LaurentPoly, to_scalar
from .fock import (
    FockVector,
    Monomial,
    apply_quadratic,
    basis_mode_on_monomial,
    monomial_degree,
    pbw_basis,
    pbw_basis_upto,
)
from .lattice import Lattice, QuadraticOperator, dual_quadratic
from .linalg import SparseEchelon
from .ppav import OutgoingLattice

_STRIDE = 1 << 40
_TOP = 1 << 20


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("COINV_THREADS", "").strip()
    if not env:
        return 1
    try:
        return max(1, int(env))
    except ValueError as exc:
        raise ConfigInvalid(f"COINV_THREADS must be an integer, got {env!r}") from exc


@dataclass(frozen=True)
class CoinvariantProblem:
    lattice: Lattice
    level: int
    outgoing: OutgoingLattice
    n_deg: int
    m_pole: int | None = None
    m_deg: int = 0
    n_trunc: int | None = None

    def __post_init__(self):
        if self.level not in (0, 1):
            raise ConfigInvalid(f"level must be 0 or 1, got {self.level!r}")
        if self.n_deg < 0 or self.m_deg < 0:
            raise ConfigInvalid("N_deg and M_deg must be nonnegative")
        if self.m_pole is None:
            object.__setattr__(self, "m_pole", self.n_deg)
        if self.n_trunc is None:
            object.__setattr__(self, "n_trunc", self.n_deg + self.m_deg)
        if self.m_pole < self.n_deg:
            raise ConfigInvalid(f"M_pole = {self.m_pole} must be >= N_deg = {self.n_deg}")
        if self.n_trunc < self.n_deg:
            raise ConfigInvalid(f"N_trunc = {self.n_trunc} must be >= N_deg = {self.n_deg}")

    @property
    def vector_degree(self) -> int:
        return self.n_deg + self.m_deg

    def with_margins(self, m_pole=None, m_deg=None, n_trunc=None) -> "CoinvariantProblem":
        m_deg = self.m_deg if m_deg is None else m_deg
        return CoinvariantProblem(
            self.lattice,
            self.level,
            self.outgoing,
            self.n_deg,
            self.m_pole if m_pole is None else m_pole,
            m_deg,
            max(self.n_trunc, self.n_deg + m_deg) if n_trunc is None else n_trunc,
        )

    def check_certified(self) -> None:
        """Raise unless the truncations make the generator set exact in the reported range."""
        if self.n_trunc < self.vector_degree:
            raise TruncationInsufficient(
                f"N_trunc = {self.n_trunc} < N_deg + M_deg = {self.vector_degree}: dropped tails could act"
            )
        if self.outgoing.trunc is not None and self.outgoing.trunc < self.n_trunc:
            raise TruncationInsufficient(
                f"outgoing basis known through t^{self.outgoing.trunc}, need t^{self.n_trunc}"
            )
        if self.outgoing.max_pole < self.m_pole:
            raise TruncationInsufficient(
                f"outgoing basis covers pole orders <= {self.outgoing.max_pole}, need {self.m_pole}"
            )


@dataclass(frozen=True)
class CoinvariantReport:
    filtered_dims: tuple
    stabilized: tuple
    generator_count: int
    rank: int
    elapsed_ms: float | None = None
    m_deg_used: int = field(default=0, compare=False)

    def to_json(self) -> dict:
        return {
            "filtered_dims": list(self.filtered_dims),
            "stabilized": list(self.stabilized),
            "generator_count": self.generator_count,
            "rank": self.rank,
            "elapsed_ms": self.elapsed_ms,
        }


# -- generator rows ---------------------------------------------------------------

def _generator_on_monomial(lattice: Lattice, level: int, i: int, f_terms: tuple, mono: Monomial) -> dict:
    """(gamma_i (x) f) applied to a PBW monomial, as {monomial: coefficient}."""
    deg = monomial_degree(mono)
    out: dict = {}
    for k, c in f_terms:
        if k > deg or k == 0 or (level == 0 and k > 0):
            continue
        for m, v in basis_mode_on_monomial(lattice, level, i, k, mono):
            nv = out.get(m, 0) + c * v
            if nv == 0:
                out.pop(m, None)
            else:
                out[m] = nv
    return out


def _rows_for_chunk(args) -> list[dict]:
    lattice, level, fs, monos = args
    return [
        _generator_on_monomial(lattice, level, i, f, mono)
        for mono in monos
        for i in range(lattice.rank)
        for f in fs
    ]


class _Span:
    """Echelonized span of generators with degree-major column indices."""

    def __init__(self, problem: CoinvariantProblem, workers: int | None = None):
        problem.check_certified()
        self.problem = problem
        self.lattice = problem.lattice
        self.level = problem.level
        self.fs = tuple(
            tuple((k, c) for k, c in f.items() if k <= problem.n_trunc)
            for f in problem.outgoing.upto_pole(problem.m_pole)
        )
        self.echelon = SparseEchelon()
        self.columns: dict[Monomial, int] = {}
        self.monomial_of: dict[int, Monomial] = {}
        self._next_local: dict[int, int] = {}
        self.generator_count = 0
        self.max_vector_degree = -1
        self.workers = _worker_count(workers)

    def column(self, mono: Monomial) -> int:
        col = self.columns.get(mono)
        if col is None:
            deg = monomial_degree(mono)
            local = self._next_local.get(deg, 0)
            self._next_local[deg] = local + 1
            col = (_TOP - deg) * _STRIDE + local
            self.columns[mono] = col
            self.monomial_of[col] = mono
        return col

    @staticmethod
    def degree_of_column(col: int) -> int:
        return _TOP - col // _STRIDE

    def to_row(self, terms: dict) -> dict:
        return {self.column(m): c for m, c in sorted(terms.items())}

    def extend_to(self, vector_degree: int) -> None:
        """Add generators (A (x) f) v for all PBW v up to the given degree."""
        d = self.lattice.rank
        for deg in range(self.max_vector_degree + 1, vector_degree + 1):
            monos = list(pbw_basis(d, deg))
            if self.workers > 1 and len(monos) > 64:
                size = -(-len(monos) // self.workers)
                chunks = [(self.lattice, self.level, self.fs, monos[s:s + size]) for s in range(0, len(monos), size)]
                with ProcessPoolExecutor(max_workers=self.workers) as pool:
                    batches = list(pool.map(_rows_for_chunk, chunks))
                rows = [r for b in batches for r in b]
            else:
                rows = _rows_for_chunk((self.lattice, self.level, self.fs, monos))
            self.generator_count += len(rows)
            for r in rows:
                if r:
                    self.echelon.add(self.to_row(r))
        self.max_vector_degree = max(self.max_vector_degree, vector_degree)

    def filtered_dims(self, n_deg: int) -> tuple[int, ...]:
        d = self.lattice.rank
        per_degree = [0] * (n_deg + 1)
        for col in self.echelon.pivots:
            deg = self.degree_of_column(col)
            if deg <= n_deg:
                per_degree[deg] += 1
        out, total, killed = [], 0, 0
        for n in range(n_deg + 1):
            total += len(pbw_basis(d, n))
            killed += per_degree[n]
            out.append(total - killed)
        return tuple(out)

    def reduce(self, v: FockVector) -> FockVector:
        red = self.echelon.reduce(self.to_row(v.terms))
        return FockVector(self.lattice, self.level, {self.monomial_of[c]: x for c, x in red.items()})

    def contains(self, v: FockVector) -> bool:
        return self.echelon.contains(self.to_row(v.terms))


def _margin_sequence(start: int, limit: int) -> list[int]:
    seq = [start]
    while seq[-1] < limit:
        seq.append(min(limit, max(1, 2 * seq[-1]) if seq[-1] else 1))
    return seq


def coinvariant_dims(
    problem: CoinvariantProblem,
    *,
    auto_retry: bool = True,
    max_m_deg: int | None = None,
    workers: int | None = None,
    timing: bool = False,
) -> CoinvariantReport:
    """Filtered dimensions d_0..d_{N_deg} with per-degree stabilization flags.

    M_deg runs through start, then 1, 2, 4, ... (capped at ``max_m_deg``,
    default start + 4) until two consecutive passes agree on every d_n.
    Without ``auto_retry`` only one extra pass is made and disagreement raises
    MarginTooSmall.
    """
    start = time.perf_counter()
    limit = problem.m_deg + 4 if max_m_deg is None else max(max_m_deg, problem.m_deg)
    stages = _margin_sequence(problem.m_deg, limit)
    if not auto_retry:
        stages = stages[:2]
    # every stage must be certified; the widest one sets the truncation
    widest = problem.with_margins(m_deg=stages[-1])
    try:
        widest.check_certified()
    except TruncationInsufficient:
        problem.check_certified()
        stages = [m for m in stages if _certified(problem.with_margins(m_deg=m))]
    span = _Span(problem.with_margins(m_deg=stages[-1]), workers)

    previous = None
    stable = tuple(False for _ in range(problem.n_deg + 1))
    dims = None
    used = stages[0]
    for m in stages:
        span.extend_to(problem.n_deg + m)
        dims = span.filtered_dims(problem.n_deg)
        used = m
        if previous is not None:
            stable = tuple(a == b for a, b in zip(previous, dims))
            if all(stable):
                break
        previous = dims
    if not all(stable) and not auto_retry:
        raise MarginTooSmall(
            f"filtered dims changed between M_deg = {stages[0]} and {used}: {previous} -> {dims}"
        )
    elapsed = round((time.perf_counter() - start) * 1000, 3) if timing else None
    return CoinvariantReport(dims, stable, span.generator_count, span.echelon.rank, elapsed, used)


def _certified(problem: CoinvariantProblem) -> bool:
    try:
        problem.check_certified()
    except TruncationInsufficient:
        return False
    return True


def filtered_dims_at(problem: CoinvariantProblem) -> tuple[int, ...]:
    """Filtered dims from exactly the generators fixed by the problem's margins."""
    span = _Span(problem)
    span.extend_to(problem.vector_degree)
    return span.filtered_dims(problem.n_deg)


# -- closed-form oracle --------------------------------------------------------------

def _quotient_class_degrees(outgoing: OutgoingLattice, reps: Sequence[LaurentPoly]) -> list[int]:
    """Degrees of a filtration-adapted basis of span(reps) modulo F_-."""
    ech = SparseEchelon()
    for f in outgoing.basis:
        ech.add(dict(f.negative_part().items()))
    leading = SparseEchelon()
    for r in reps:
        nf = ech.reduce(dict(r.negative_part().items()))
        if not nf:
            raise GapSetIncomplete("a representative lies in F", witness=r)
        if leading.add(nf) is None:
            raise GapSetIncomplete("representatives are dependent modulo F", witness=r)
    return sorted(-col for col in leading.pivots)


def sym_filtered_dims(weights: Iterable[int], n_deg: int) -> tuple[int, ...]:
    """Cumulative counts of monomials of weighted degree <= n in generators of the given weights."""
    counts = [1] + [0] * n_deg
    for w in weights:
        for n in range(w, n_deg + 1):
            counts[n] += counts[n - w]
    out, total = [], 0
    for c in counts:
        total += c
        out.append(total)
    return tuple(out)


def pi0_oracle(
    lattice: Lattice,
    outgoing: OutgoingLattice,
    n_deg: int,
    representatives: Sequence[LaurentPoly] | None = None,
) -> CoinvariantReport:
    """Level-0 coinvariants as Sym(h (x) Z/F) with the induced filtration.

    Representatives default to the gap monomials t^-j; any coset
    representatives give the same answer since only their negative parts
    matter at level 0.
    """
    if len(outgoing.gap_set) != outgoing.genus:
        raise GapSetIncomplete(
            f"{len(outgoing.gap_set)} gaps for genus {outgoing.genus}",
            witness=list(outgoing.gap_set),
        )
    reps = list(representatives) if representatives is not None else [LaurentPoly({-j: 1}) for j in outgoing.gap_set]
    if len(reps) != outgoing.genus:
        raise GapSetIncomplete(f"{len(reps)} representatives for genus {outgoing.genus}")
    degrees = _quotient_class_degrees(outgoing, reps)
    weights = [w for w in degrees for _ in range(lattice.rank)]
    dims = sym_filtered_dims(weights, n_deg)
    return CoinvariantReport(dims, tuple(True for _ in dims), len(weights), len(outgoing.basis), None)


# -- quadratic generators -------------------------------------------------------------

def _check_sp_plus(m: int, n: int) -> None:
    if m < 0 and n < 0:
        raise ConfigInvalid(f"({m},{n}): both modes negative is outside the allowed generators")


def outgoing_tangent(f: LaurentPoly, m: int, n: int) -> LaurentPoly:
    """delta f with [Q_{m,n}, A (x) f] = A (x) delta f, for Q_{m,n} = dual_quadratic(m, n)."""
    return LaurentPoly({m: n * f.coeff(-n)}) + LaurentPoly({n: m * f.coeff(-m)})


def _apply_generator(lattice: Lattice, level: int, i: int, f: LaurentPoly, v: FockVector) -> FockVector:
    terms = tuple(f.items())
    acc: dict = {}
    for mono, c in v.terms.items():
        for m2, x in _generator_on_monomial(lattice, level, i, terms, mono).items():
            acc[m2] = acc.get(m2, 0) + c * x
    return FockVector(lattice, level, acc)


@dataclass(frozen=True)
class PreserveReport:
    m: int
    n: int
    checked: int
    strict_failures: tuple
    equivariant_failures: tuple
    moves_outgoing: bool

    @property
    def passed(self) -> bool:
        return not self.strict_failures

    @property
    def equivariant_passed(self) -> bool:
        return not self.equivariant_failures

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "checked": self.checked,
            "passed": self.passed,
            "equivariant_passed": self.equivariant_passed,
            "moves_outgoing": self.moves_outgoing,
            "strict_failures": [list(w) for w in self.strict_failures],
            "equivariant_failures": [list(w) for w in self.equivariant_failures],
        }


def preserve_check_operator(
    problem: CoinvariantProblem,
    q: QuadraticOperator,
    enlarge: int,
    tangent: Callable[[LaurentPoly], LaurentPoly] | None = None,
    label: tuple[int, int] = (0, 0),
) -> PreserveReport:
    """Does q map every generator u in S with deg u <= N_deg into span(S')?

    S' uses margins enlarged by ``enlarge``.  With ``tangent`` given, the
    equivariant form is also checked: q u - (A (x) tangent(f)) v must lie in
    span(S').  Witnesses are (basis index, pole order of f, v as JSON).
    """
    if problem.level != 1:
        raise LevelUnsupported("preservation is checked on the level-1 Fock module")
    wide = problem.with_margins(
        m_pole=problem.m_pole + enlarge,
        m_deg=problem.m_deg + enlarge,
        n_trunc=problem.n_trunc + enlarge,
    )
    try:
        wide.check_certified()
    except TruncationInsufficient as exc:
        raise MarginTooSmall(f"outgoing data too short for enlarged margins: {exc}") from exc
    big = _Span(wide)
    big.extend_to(wide.vector_degree)
    lat, lvl = problem.lattice, problem.level
    fs = [f.truncate(problem.n_trunc) for f in problem.outgoing.upto_pole(problem.m_pole)]
    strict, equiv, checked = [], [], 0
    moves = False
    for v_mono in pbw_basis_upto(lat.rank, problem.vector_degree):
        v = FockVector._raw(lat, lvl, {v_mono: Fraction(1)})
        for i in range(lat.rank):
            for f in fs:
                u = _apply_generator(lat, lvl, i, f, v)
                if u.is_zero() or u.degree > problem.n_deg:
                    continue
                checked += 1
                qu = apply_quadratic(q, u)
                witness = (i + 1, f.pole_order, v.to_json())
                if not big.contains(qu):
                    strict.append(witness)
                if tangent is not None:
                    df = tangent(f)
                    correction = _apply_generator(lat, lvl, i, df, v)
                    if not correction.is_zero():
                        moves = True
                    if not big.contains(qu - correction):
                        equiv.append(witness)
    return PreserveReport(label[0], label[1], checked, tuple(strict), tuple(equiv), moves)


def preserve_check(problem: CoinvariantProblem, m: int, n: int) -> PreserveReport:
    _check_sp_plus(m, n)
    q = dual_quadratic(m, n, problem.lattice)
    return preserve_check_operator(
        problem, q, abs(m) + abs(n), tangent=lambda f: outgoing_tangent(f, m, n), label=(m, n)
    )


# -- exponentials -------------------------------------------------------------------------

def exp_series_terms(m: int, n: int, v: FockVector, scale=1, max_terms: int = 10_000) -> list[FockVector]:
    """Nonzero terms (s X)^k v / k! of the exponential series, X = dual_quadratic(m, n)."""
    _check_sp_plus(m, n)
    if m + n == 0:
        raise NotNilpotent(f"({m},{n}) acts diagonally; use scale_by_eigenvalue")
    if v.level != 1:
        raise LevelUnsupported("exponentials act on the level-1 Fock module")
    X = dual_quadratic(m, n, v.lattice).scale(scale)
    terms = []
    cur = v
    k = 0
    while not cur.is_zero():
        terms.append(cur)
        k += 1
        if k > max_terms:
            raise NotNilpotent(f"series did not terminate after {max_terms} terms")
        cur = apply_quadratic(X, cur).scale(Fraction(1, k))
    return terms


def exponentiate(m: int, n: int, v: FockVector, scale=1) -> FockVector:
    """exp(s X) v for X = dual_quadratic(m, n), a finite sum."""
    out = FockVector.zero(v.lattice, v.level)
    for term in exp_series_terms(m, n, v, scale):
        out = out + term
    return out


def diagonal_eigenvalue(k: int, mono: Monomial) -> int:
    """Eigenvalue of dual_quadratic(-k, k) on a PBW monomial: k times the number of mode -k factors."""
    return k * sum(1 for n, _ in mono if n == -k)


def scale_by_eigenvalue(k: int, a, v: FockVector) -> FockVector:
    """The multiplicative-group action a^{X} for the diagonal generator X = dual_quadratic(-k, k), k > 0."""
    if k <= 0:
        raise ConfigInvalid("k must be positive")
    a = to_scalar(a)
    if a == 0:
        raise ConfigInvalid("a must be invertible")
    return FockVector(v.lattice, v.level, {mono: c * a ** diagonal_eigenvalue(k, mono) for mono, c in v.terms.items()})


def coinvariant_class(problem: CoinvariantProblem, v: FockVector) -> FockVector:
    """Canonical representative of v modulo the generators of the problem."""
    span = _Span(problem)
    span.extend_to(problem.vector_degree)
    return span.reduce(v)


def exp_on_coinvariants(problem: CoinvariantProblem, m: int, n: int, cls: FockVector, scale=1) -> FockVector:
    """exp(s X) on a class: act on a representative, then reduce modulo U."""
    span = _Span(problem)
    span.extend_to(problem.vector_degree)
    return span.reduce(exponentiate(m, n, cls, scale))
