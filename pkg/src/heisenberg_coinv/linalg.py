"""Exact linear algebra over Q and Q(i).

Two tools live here: :class:`SparseEchelon`, an incremental sparse row
reduction keyed by integer columns (smaller column = earlier pivot), and a few
dense helpers for the small matrices that show up in lattices, frames and
period matrices.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

Row = dict  # column -> nonzero exact scalar


class SparseEchelon:
    """Row echelon form of a growing set of sparse rows.

    Each stored row is normalized so that its pivot (its smallest column) has
    coefficient 1.  No two stored rows share a pivot, so ``reduce`` yields a
    canonical normal form modulo the span.
    """

    def __init__(self):
        self._rows: dict[int, Row] = {}

    def __len__(self):
        return len(self._rows)

    @property
    def rank(self) -> int:
        return len(self._rows)

    @property
    def pivots(self):
        return self._rows.keys()

    def pivot_row(self, col: int) -> Row | None:
        return self._rows.get(col)

    def _eliminate(self, row: Mapping[int, object], stop_at_free: bool) -> tuple[Row, int | None]:
        work = {k: v for k, v in row.items() if v != 0}
        heap = list(work)
        heapq.heapify(heap)
        seen = set(heap)
        while heap:
            col = heapq.heappop(heap)
            seen.discard(col)
            c = work.get(col)
            if c is None:
                continue
            piv = self._rows.get(col)
            if piv is None:
                if stop_at_free:
                    return work, col
                continue
            for k, v in piv.items():
                nv = work.get(k, 0) - c * v
                if nv == 0:
                    work.pop(k, None)
                else:
                    if k not in work and k not in seen:
                        heapq.heappush(heap, k)
                        seen.add(k)
                    work[k] = nv
        return work, None

    def add(self, row: Mapping[int, object]) -> int | None:
        """Insert ``row``; return its new pivot column, or None if it was dependent."""
        work, lead = self._eliminate(row, stop_at_free=True)
        if lead is None:
            return None
        inv = 1 / work[lead]
        if inv != 1:
            work = {k: v * inv for k, v in work.items()}
        self._rows[lead] = work
        return lead

    def reduce(self, row: Mapping[int, object]) -> Row:
        """Normal form of ``row`` modulo the span (only non-pivot columns remain)."""
        work, _ = self._eliminate(row, stop_at_free=False)
        return work

    def contains(self, row: Mapping[int, object]) -> bool:
        return not self.reduce(row)

    def reduced_rows(self) -> dict[int, Row]:
        """Fully reduced echelon form: pivot columns vanish from every other row."""
        out: dict[int, Row] = {}
        for col in sorted(self._rows, reverse=True):
            row = self._rows[col]
            work = dict(row)
            # rows with larger pivots are already fully reduced, so one pass suffices
            for k in sorted(k for k in row if k != col and k in out):
                c = work.get(k)
                if c is None:
                    continue
                for k2, v2 in out[k].items():
                    nv = work.get(k2, 0) - c * v2
                    if nv == 0:
                        work.pop(k2, None)
                    else:
                        work[k2] = nv
            out[col] = work
        return dict(sorted(out.items()))


def rref(rows: Iterable[Mapping[Hashable, object]], order: Callable[[Hashable], object]) -> list[dict]:
    """Reduced row echelon basis of the span of ``rows``.

    Columns are compared through ``order``; the pivot of each output row is its
    smallest column and carries coefficient 1.  The result is canonical: equal
    spans give identical outputs.
    """
    rows = [dict(r) for r in rows]
    cols = sorted({k for r in rows for k in r}, key=order)
    index = {k: i for i, k in enumerate(cols)}
    ech = SparseEchelon()
    for r in rows:
        ech.add({index[k]: v for k, v in r.items()})
    return [{cols[i]: v for i, v in sorted(r.items())} for r in ech.reduced_rows().values()]


# -- dense helpers -------------------------------------------------------------

def identity(n: int) -> list[list]:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> list[list]:
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), Fraction(0)) for j in range(len(B[0]))]
            for i in range(len(A))]


def transpose(A: Sequence[Sequence]) -> list[list]:
    return [list(col) for col in zip(*A)]


def determinant(A: Sequence[Sequence]):
    n = len(A)
    M = [list(r) for r in A]
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            det = -det
        det = det * M[c][c]
        inv = 1 / M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] * inv
            if f != 0:
                for k in range(c, n):
                    M[r][k] = M[r][k] - f * M[c][k]
    return det


def leading_minors(A: Sequence[Sequence]) -> list:
    return [determinant([row[:k] for row in A[:k]]) for k in range(1, len(A) + 1)]


def inverse(A: Sequence[Sequence]) -> list[list] | None:
    """Gauss-Jordan inverse; None if singular."""
    n = len(A)
    M = [list(A[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            return None
        M[c], M[p] = M[p], M[c]
        inv = 1 / M[c][c]
        M[c] = [v * inv for v in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return [row[n:] for row in M]


def rank(A: Sequence[Sequence]) -> int:
    ech = SparseEchelon()
    for row in A:
        ech.add({j: v for j, v in enumerate(row) if v != 0})
    return ech.rank


def nullspace(A: Sequence[Sequence], ncols: int) -> list[list]:
    """Basis of {x : A x = 0}, one vector per free column, in column order."""
    ech = SparseEchelon()
    for row in A:
        ech.add({j: v for j, v in enumerate(row) if v != 0})
    red = ech.reduced_rows()
    free = [j for j in range(ncols) if j not in red]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for p, row in red.items():
            x[p] = -row.get(f, 0)
        basis.append(x)
    return basis
