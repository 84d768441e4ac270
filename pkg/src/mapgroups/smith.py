"""Exact Smith normal form and Hom-group ranks for finitely presented abelian groups.

All arithmetic uses Python integers, so there is no overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

from mapgroups.errors import InvalidArgumentError


def _identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _check_integer_matrix(rows):
    out = []
    width = None
    for r in rows:
        row = []
        for x in r:
            if isinstance(x, bool) or int(x) != x:
                raise InvalidArgumentError(f"entry {x!r} is not an integer")
            row.append(int(x))
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InvalidArgumentError("ragged integer matrix")
        out.append(row)
    return out


def smith_normal_form(matrix):
    """Return (U, D, V) with D = U R V, U and V unimodular, D diagonal with d1 | d2 | ...

    Matrices are lists of lists of ints; an m x 0 or 0 x n input is allowed.
    Diagonal entries are non-negative.
    """
    r = _check_integer_matrix(matrix)
    m = len(r)
    n = len(r[0]) if m else 0
    d = [row[:] for row in r]
    u = _identity(m)
    v = _identity(n)

    def swap_rows(a, b):
        d[a], d[b] = d[b], d[a]
        u[a], u[b] = u[b], u[a]

    def swap_cols(a, b):
        for row in d:
            row[a], row[b] = row[b], row[a]
        for row in v:
            row[a], row[b] = row[b], row[a]

    def add_row(src, dst, q):  # row_dst += q * row_src
        d[dst] = [x + q * y for x, y in zip(d[dst], d[src])]
        u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, q):  # col_dst += q * col_src
        for row in d:
            row[dst] += q * row[src]
        for row in v:
            row[dst] += q * row[src]

    for t in range(min(m, n)):
        while True:
            nonzero = [(abs(d[i][j]), i, j) for i in range(t, m) for j in range(t, n) if d[i][j]]
            if not nonzero:
                break
            _, pi, pj = min(nonzero)
            swap_rows(t, pi)
            swap_cols(t, pj)
            p = d[t][t]
            clean = True
            for i in range(t + 1, m):
                q = d[i][t] // p
                if q:
                    add_row(t, i, -q)
                if d[i][t]:
                    clean = False
            for j in range(t + 1, n):
                q = d[t][j] // p
                if q:
                    add_col(t, j, -q)
                if d[t][j]:
                    clean = False
            if not clean:
                continue
            # divisibility: fold any entry not divisible by the pivot into row t
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if d[i][j] % p), None)
            if bad is None:
                break
            add_row(bad[0], t, 1)
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
    return u, d, v


def invariant_factors(matrix) -> list:
    _, d, _ = smith_normal_form(matrix)
    k = min(len(d), len(d[0]) if d else 0)
    return [d[i][i] for i in range(k)]


@dataclass(frozen=True)
class AbelianPresentation:
    """A = Z^n / (column span of the n x m relation matrix)."""

    n: int
    relations: tuple = ()

    def __post_init__(self):
        if self.n < 0:
            raise InvalidArgumentError("rank of the free cover must be >= 0")
        rows = _check_integer_matrix(self.relations) if self.relations else []
        if rows and len(rows) != self.n:
            raise InvalidArgumentError(f"relation matrix needs {self.n} rows, got {len(rows)}")
        object.__setattr__(self, "relations", tuple(tuple(r) for r in rows))

    @property
    def matrix(self):
        if not self.relations:
            return [[] for _ in range(self.n)]
        return [list(r) for r in self.relations]


def hom_rank(a: AbelianPresentation) -> int:
    """Rank of Hom(A, Z): the number of zero invariant factors after padding to n."""
    if not a.relations or not a.relations[0]:
        return a.n
    nonzero = sum(1 for x in invariant_factors(a.matrix) if x != 0)
    return a.n - nonzero


@dataclass(frozen=True)
class DiscretenessReport:
    invariant_factors: tuple
    hom_rank: int
    lattice_rank: int
    discrete: bool
    verdict: str


def discreteness_report(a: AbelianPresentation, lattice_rank: int) -> DiscretenessReport:
    """Is Hom(A, Gamma) discrete in Hom(A, k)?

    Hom(A, Gamma) is isomorphic to Gamma^J with J the rank of Hom(A, Z); it is
    discrete exactly when Gamma is trivial or J is finite. A finite
    presentation always has finite J, so the verdict is "discrete"; the report
    records J and the shape of Hom(A, Gamma).
    """
    factors = tuple(invariant_factors(a.matrix)) if a.relations and a.relations[0] else ()
    j = hom_rank(a)
    if lattice_rank == 0:
        verdict = "discrete: Gamma is trivial, so Hom(A, Gamma) = 0"
    else:
        verdict = f"discrete: Hom(A, Z) = Z^{j} is finitely generated, so Hom(A, Gamma) = Gamma^{j}"
    return DiscretenessReport(factors, j, lattice_rank, True, verdict)
