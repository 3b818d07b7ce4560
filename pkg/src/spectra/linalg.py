"""Exact integer, rational and Z/m matrix kernels.

Everything here works on Python integers (arbitrary precision) or
``Fraction`` entries; no floating point is ever involved. Matrices with zero
rows or zero columns are legal and stand for maps between zero modules.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .rings import QQ, ZZ, Ring


class Matrix:
    """A dense matrix of exact numbers, stored row-major.

    Instances are treated as immutable once built.
    """

    __slots__ = ("nrows", "ncols", "_rows")

    def __init__(self, rows: Iterable[Sequence], ncols: int | None = None):
        data = [list(r) for r in rows]
        if ncols is None:
            if not data:
                raise ValueError("ncols is required for a matrix with no rows")
            ncols = len(data[0])
        for r in data:
            if len(r) != ncols:
                raise ValueError("ragged matrix rows")
        self.nrows = len(data)
        self.ncols = ncols
        self._rows = data

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "Matrix":
        return cls([[0] * ncols for _ in range(nrows)], ncols)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], nrows: int) -> "Matrix":
        for c in columns:
            if len(c) != nrows:
                raise ValueError("column length does not match nrows")
        return cls([[c[i] for c in columns] for i in range(nrows)], len(columns))

    @classmethod
    def diagonal(cls, entries: Sequence, nrows: int | None = None, ncols: int | None = None):
        nrows = len(entries) if nrows is None else nrows
        ncols = len(entries) if ncols is None else ncols
        m = [[0] * ncols for _ in range(nrows)]
        for i, e in enumerate(entries):
            m[i][i] = e
        return cls(m, ncols)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def rows(self) -> list[list]:
        return [r[:] for r in self._rows]

    def row(self, i: int) -> list:
        return self._rows[i][:]

    def column(self, j: int) -> list:
        return [r[j] for r in self._rows]

    def columns(self) -> list[list]:
        return [self.column(j) for j in range(self.ncols)]

    def __getitem__(self, ij):
        i, j = ij
        return self._rows[i][j]

    def transpose(self) -> "Matrix":
        return Matrix.from_columns(self._rows, self.ncols)

    @property
    def T(self) -> "Matrix":
        return self.transpose()

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.ncols != other.nrows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            cols = other.columns()
            return Matrix(
                [[_dot(r, c) for c in cols] for r in self._rows], other.ncols
            )
        vec = list(other)
        if len(vec) != self.ncols:
            raise ValueError(f"shape mismatch {self.shape} @ vector of length {len(vec)}")
        return [_dot(r, vec) for r in self._rows]

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.nrows != other.nrows:
            raise ValueError("hstack needs equal row counts")
        return Matrix([a + b for a, b in zip(self._rows, other._rows)], self.ncols + other.ncols)

    def block(self, nrows: int, ncols: int) -> "Matrix":
        """Top-left ``nrows x ncols`` block."""
        return Matrix([r[:ncols] for r in self._rows[:nrows]], ncols)

    def select_columns(self, idx: Sequence[int]) -> "Matrix":
        return Matrix([[r[j] for j in idx] for r in self._rows], len(idx))

    def scale_columns(self, factors: Sequence) -> "Matrix":
        return Matrix([[x * f for x, f in zip(r, factors)] for r in self._rows], self.ncols)

    def map(self, fn) -> "Matrix":
        return Matrix([[fn(x) for x in r] for r in self._rows], self.ncols)

    def is_zero(self) -> bool:
        return all(x == 0 for r in self._rows for x in r)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def __hash__(self):
        return hash((self.shape, tuple(tuple(r) for r in self._rows)))

    def __repr__(self):
        return f"Matrix({self._rows!r}, ncols={self.ncols})"


IntMatrix = Matrix


def _dot(a, b):
    s = 0
    for x, y in zip(a, b):
        if x and y:
            s += x * y
    return s


@dataclass(frozen=True)
class SnfDecomposition:
    """``U @ A @ V == D`` with ``U``, ``V`` unimodular and ``D`` in Smith form.

    ``Uinv`` and ``Vinv`` are the exact inverses of ``U`` and ``V``.
    """

    U: Matrix
    D: Matrix
    V: Matrix
    Uinv: Matrix
    Vinv: Matrix

    @property
    def diagonal(self) -> list[int]:
        return [self.D[i, i] for i in range(min(self.D.shape))]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)

    @property
    def invariant_factors(self) -> list[int]:
        return [d for d in self.diagonal if d != 0]


def smith_normal_form(A: Matrix) -> SnfDecomposition:
    """Smith normal form over Z by pivoting on the smallest nonzero entry.

    The pivot is always the entry of least absolute value in the active
    block; its row and column are cleared by Euclidean reduction, and any
    remaining entry the pivot does not divide is folded back into the pivot
    row before continuing.
    """
    m, n = A.shape
    D = A.rows
    U = Matrix.identity(m).rows
    Ui = Matrix.identity(m).rows
    V = Matrix.identity(n).rows
    Vi = Matrix.identity(n).rows

    def row_add(dst, src, q):
        # row_dst += q * row_src
        if q == 0:
            return
        rd, rs = D[dst], D[src]
        for j in range(n):
            if rs[j]:
                rd[j] += q * rs[j]
        ud, us = U[dst], U[src]
        for j in range(m):
            if us[j]:
                ud[j] += q * us[j]
        for r in Ui:
            if r[dst]:
                r[src] -= q * r[dst]

    def col_add(dst, src, q):
        # col_dst += q * col_src
        if q == 0:
            return
        for r in D:
            if r[src]:
                r[dst] += q * r[src]
        for r in V:
            if r[src]:
                r[dst] += q * r[src]
        vd, vs = Vi[dst], Vi[src]
        for j in range(n):
            if vd[j]:
                vs[j] -= q * vd[j]

    def row_swap(a, b):
        if a != b:
            D[a], D[b] = D[b], D[a]
            U[a], U[b] = U[b], U[a]
            for r in Ui:
                r[a], r[b] = r[b], r[a]

    def col_swap(a, b):
        if a != b:
            for r in D:
                r[a], r[b] = r[b], r[a]
            for r in V:
                r[a], r[b] = r[b], r[a]
            Vi[a], Vi[b] = Vi[b], Vi[a]

    def row_negate(a):
        D[a] = [-x for x in D[a]]
        U[a] = [-x for x in U[a]]
        for r in Ui:
            r[a] = -r[a]

    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            row = D[i]
            for j in range(t, n):
                x = row[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        row_swap(t, best[1])
        col_swap(t, best[2])
        while True:
            p = D[t][t]
            clean = True
            for i in range(t + 1, m):
                if D[i][t]:
                    row_add(i, t, -(D[i][t] // p))
                    if D[i][t]:
                        clean = False
            for j in range(t + 1, n):
                if D[t][j]:
                    col_add(j, t, -(D[t][j] // p))
                    if D[t][j]:
                        clean = False
            if not clean:
                # a remainder survived: it is smaller than the pivot, use it
                cand = None
                for i in range(t + 1, m):
                    x = D[i][t]
                    if x and (cand is None or abs(x) < cand[0]):
                        cand = (abs(x), i, t)
                for j in range(t + 1, n):
                    x = D[t][j]
                    if x and (cand is None or abs(x) < cand[0]):
                        cand = (abs(x), t, j)
                row_swap(t, cand[1])
                col_swap(t, cand[2])
                continue
            bad = None
            for i in range(t + 1, m):
                row = D[i]
                for j in range(t + 1, n):
                    if row[j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            row_add(t, bad, 1)
        if D[t][t] < 0:
            row_negate(t)

    return SnfDecomposition(
        U=Matrix(U, m), D=Matrix(D, n), V=Matrix(V, n), Uinv=Matrix(Ui, m), Vinv=Matrix(Vi, n)
    )


def _solve_snf(snf: SnfDecomposition, b, rational: bool):
    c = snf.U @ b
    diag = snf.diagonal
    r = snf.rank
    n = snf.V.nrows
    y = [0] * n
    for i in range(r):
        d = diag[i]
        if rational:
            y[i] = Fraction(c[i]) / d
        else:
            if c[i] % d:
                return None
            y[i] = c[i] // d
    for i in range(r, len(c)):
        if c[i] != 0:
            return None
    return snf.V @ y


def snf_solve(snf: SnfDecomposition, b: Sequence, rational: bool = False):
    """Solve ``A x = b`` reusing a precomputed decomposition of ``A``.

    Integer solutions unless ``rational``; ``None`` when there is none.
    """
    return _solve_snf(snf, list(b), rational)


def solve_linear(A: Matrix, b: Sequence, ring: Ring = ZZ):
    """Return some ``x`` with ``A @ x == b`` in ``ring``, or ``None``.

    Over Z/m the system is lifted to Z by appending the columns ``m * I``;
    the solution is reported with entries reduced into ``[0, m)``.
    """
    b = list(b)
    if len(b) != A.nrows:
        raise ValueError(f"right-hand side has length {len(b)}, expected {A.nrows}")
    if ring.is_rationals:
        return _solve_snf(smith_normal_form(A), b, rational=True)
    if ring.is_integers:
        return _solve_snf(smith_normal_form(A), [int(x) for x in b], rational=False)
    m = ring.modulus
    lifted = A.hstack(Matrix.diagonal([m] * A.nrows))
    x = _solve_snf(smith_normal_form(lifted), [ring.reduce(v) for v in b], rational=False)
    if x is None:
        return None
    return [v % m for v in x[: A.ncols]]


def lattice_membership(generators: Matrix, v: Sequence) -> bool:
    """True iff ``v`` is an integer combination of the columns of ``generators``."""
    return solve_linear(generators, v, ZZ) is not None


def kernel_basis(A: Matrix, ring: Ring = ZZ) -> Matrix:
    """Columns generating the kernel of ``A`` over ``ring``.

    Over Z the columns form a lattice basis of the kernel, so the quotient
    of Z^n by their span is torsion-free.
    """
    snf = smith_normal_form(A)
    n = A.ncols
    r = snf.rank
    if not ring.is_cyclic:
        return snf.V.select_columns(range(r, n))
    m = ring.modulus
    cols = []
    for i, s in cycle_lattice_scales(snf, m):
        col = [(x * s) % m for x in snf.V.column(i)]
        if any(col):
            cols.append(col)
    return Matrix.from_columns(cols, n)


def cycle_lattice_scales(snf: SnfDecomposition, modulus: int | None) -> list[tuple[int, int]]:
    """Describe ``{x : A x = 0 (mod modulus)}`` as a lattice in Z^n.

    Returns pairs ``(i, s)`` meaning that the columns ``s * V[:, i]`` form a
    lattice basis. ``modulus`` 0 or ``None`` means the plain kernel.
    """
    diag = snf.diagonal
    r = snf.rank
    n = snf.V.nrows
    out = []
    for i in range(n):
        if i < r:
            if modulus:
                out.append((i, modulus // gcd(diag[i], modulus)))
        else:
            out.append((i, 1))
    return out


def lattice_basis(P: Matrix) -> Matrix:
    """A basis (full column rank) of the lattice spanned by the columns of ``P``."""
    snf = smith_normal_form(P)
    diag = snf.diagonal
    cols = [[x * diag[i] for x in snf.Uinv.column(i)] for i in range(snf.rank)]
    return Matrix.from_columns(cols, P.nrows)


def rank_over(A: Matrix, ring: Ring) -> int:
    """Rank over Q, or over Z/p for prime p."""
    if ring.is_rationals or ring.is_integers:
        return smith_normal_form(A).rank
    p = ring.modulus
    return sum(1 for d in smith_normal_form(A).diagonal if d % p)


def det(A: Matrix):
    """Exact determinant by fraction-free elimination (Bareiss)."""
    n = A.nrows
    if n != A.ncols:
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return 1
    M = A.rows
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


__all__ = [
    "Matrix",
    "IntMatrix",
    "SnfDecomposition",
    "smith_normal_form",
    "solve_linear",
    "lattice_membership",
    "kernel_basis",
    "lattice_basis",
    "cycle_lattice_scales",
    "rank_over",
    "det",
    "QQ",
    "ZZ",
]
