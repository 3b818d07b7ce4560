"""Finitely generated abelian groups given by presentations.

A group is ``Z^ngens / (column span of relations)``. Homomorphisms carry an
explicit integer matrix on generators, so two groups with the same invariant
factors but different generating sets are *not* interchangeable inside a
diagram: images are compared inside one fixed presentation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

from .linalg import (
    Matrix,
    kernel_basis,
    lattice_basis,
    lattice_membership,
    smith_normal_form,
    solve_linear,
)
from .rings import ZZ


class InvalidHomomorphism(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FgAbelianGroup:
    ngens: int
    relations: Matrix = None

    def __post_init__(self):
        if self.relations is None:
            object.__setattr__(self, "relations", Matrix.zeros(self.ngens, 0))
        if self.relations.nrows != self.ngens:
            raise ValueError(
                f"relation matrix has {self.relations.nrows} rows for {self.ngens} generators"
            )

    @classmethod
    def from_orders(cls, orders) -> "FgAbelianGroup":
        """Direct sum of cyclic groups; order 0 means a copy of Z."""
        orders = list(orders)
        cols = []
        for i, d in enumerate(orders):
            if d != 0:
                col = [0] * len(orders)
                col[i] = d
                cols.append(col)
        return cls(len(orders), Matrix.from_columns(cols, len(orders)))

    @classmethod
    def free(cls, rank: int) -> "FgAbelianGroup":
        return cls(rank)

    def normal_form(self) -> tuple[int, list[int]]:
        return normal_form(self)

    def same_presentation(self, other: "FgAbelianGroup") -> bool:
        if self.ngens != other.ngens:
            return False
        return _same_lattice(self.relations, other.relations)

    def is_zero_element(self, v) -> bool:
        return lattice_membership(self.relations, list(v))

    def elements_equal(self, u, v) -> bool:
        return self.is_zero_element([a - b for a, b in zip(u, v)])

    def is_trivial(self) -> bool:
        rank, factors = normal_form(self)
        return rank == 0 and not factors

    def element_order(self, v) -> int:
        """Order of the element ``v``; 0 when it has infinite order."""
        snf = smith_normal_form(self.relations)
        diag = snf.diagonal
        c = snf.U @ list(v)
        order = 1
        for i, x in enumerate(c):
            d = diag[i] if i < len(diag) else 0
            if d == 0:
                if x != 0:
                    return 0
                continue
            k = d // gcd(x, d)
            order = order * k // gcd(order, k)
        return order

    def free_content(self, v) -> int:
        """gcd of the free coordinates of ``v`` in a Smith basis (0 if torsion)."""
        snf = smith_normal_form(self.relations)
        diag = snf.diagonal
        c = snf.U @ list(v)
        g = 0
        for i, x in enumerate(c):
            d = diag[i] if i < len(diag) else 0
            if d == 0:
                g = gcd(g, x)
        return g

    def __eq__(self, other):
        if not isinstance(other, FgAbelianGroup):
            return NotImplemented
        return normal_form(self) == normal_form(other)

    def __hash__(self):
        rank, factors = normal_form(self)
        return hash((rank, tuple(factors)))

    def __str__(self):
        rank, factors = normal_form(self)
        parts = ["Z"] * min(rank, 1)
        if rank > 1:
            parts = [f"Z^{rank}"]
        parts += [f"Z/{d}" for d in factors]
        return " + ".join(parts) if parts else "0"


def normal_form(G: FgAbelianGroup) -> tuple[int, list[int]]:
    """``(rank, [d1, d2, ...])`` with each ``di >= 2`` and ``di | d(i+1)``."""
    snf = smith_normal_form(G.relations)
    factors = snf.invariant_factors
    rank = G.ngens - len(factors)
    return rank, [d for d in factors if d != 1]


def _same_lattice(A: Matrix, B: Matrix) -> bool:
    return all(lattice_membership(B, c) for c in A.columns()) and all(
        lattice_membership(A, c) for c in B.columns()
    )


@dataclass(frozen=True)
class GroupHom:
    source: FgAbelianGroup
    target: FgAbelianGroup
    matrix: Matrix

    def __post_init__(self):
        if self.matrix.shape != (self.target.ngens, self.source.ngens):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match "
                f"{self.target.ngens} x {self.source.ngens}"
            )

    @classmethod
    def identity(cls, G: FgAbelianGroup) -> "GroupHom":
        return cls(G, G, Matrix.identity(G.ngens))

    @classmethod
    def zero(cls, A: FgAbelianGroup, B: FgAbelianGroup) -> "GroupHom":
        return cls(A, B, Matrix.zeros(B.ngens, A.ngens))

    def is_valid(self) -> bool:
        target_rel = self.target.relations
        return all(
            lattice_membership(target_rel, self.matrix @ c)
            for c in self.source.relations.columns()
        )

    def check(self):
        if not self.is_valid():
            raise InvalidHomomorphism("a source relation does not map into the target relations")

    def __call__(self, v):
        return self.matrix @ list(v)

    def compose(self, first: "GroupHom") -> "GroupHom":
        """``self o first``."""
        if first.target.ngens != self.source.ngens:
            raise ValueError("homomorphisms are not composable")
        return GroupHom(first.source, self.target, self.matrix @ first.matrix)

    def equals(self, other: "GroupHom") -> bool:
        """Equality as maps: every source generator has the same image mod relations."""
        if self.matrix.shape != other.matrix.shape:
            return False
        for j in range(self.source.ngens):
            if not self.target.elements_equal(self.matrix.column(j), other.matrix.column(j)):
                return False
        return True

    def is_surjective(self) -> bool:
        gens = self.matrix.hstack(self.target.relations)
        for i in range(self.target.ngens):
            e = [int(i == j) for j in range(self.target.ngens)]
            if not lattice_membership(gens, e):
                return False
        return True


@dataclass(frozen=True)
class Subquotient:
    """A group together with its structure map (inclusion or projection)."""

    group: FgAbelianGroup
    map: GroupHom = field(repr=False)


def hom_cokernel(f: GroupHom) -> Subquotient:
    """Cokernel with the projection from the target."""
    f.check()
    C = FgAbelianGroup(f.target.ngens, f.target.relations.hstack(f.matrix))
    return Subquotient(C, GroupHom(f.target, C, Matrix.identity(f.target.ngens)))


def _preimage_lattice(f: GroupHom) -> Matrix:
    """Basis of ``{x in Z^n : f(x) = 0 in the target}``."""
    n = f.source.ngens
    stacked = f.matrix.hstack(f.target.relations)
    K = kernel_basis(stacked, ZZ)
    top = Matrix([K.row(i) for i in range(n)], K.ncols)
    return lattice_basis(top)


def hom_image(f: GroupHom) -> Subquotient:
    """Image, presented on the source generators, with its inclusion into the target."""
    f.check()
    rel = _preimage_lattice(f)
    im = FgAbelianGroup(f.source.ngens, rel)
    return Subquotient(im, GroupHom(im, f.target, f.matrix))


def hom_kernel(f: GroupHom) -> Subquotient:
    """Kernel, with its inclusion into the source."""
    f.check()
    K = _preimage_lattice(f)
    rel_cols = []
    for c in f.source.relations.columns():
        x = solve_linear(K, c, ZZ)
        assert x is not None, "source relations must lie in the kernel lattice"
        rel_cols.append(x)
    G = FgAbelianGroup(K.ncols, Matrix.from_columns(rel_cols, K.ncols))
    return Subquotient(G, GroupHom(G, f.source, K))


def _injective_relations(G: FgAbelianGroup) -> Matrix:
    return lattice_basis(G.relations)


def ext_object(G: FgAbelianGroup) -> FgAbelianGroup:
    """``Ext(G, Z)`` from the resolution ``0 -> Z^s -R-> Z^n -> G -> 0``.

    The relation matrix is first replaced by a lattice basis of its column
    span so that it is injective; Ext is then the cokernel of its transpose.
    """
    R = _injective_relations(G)
    return FgAbelianGroup(R.ncols, R.transpose())


def ext_map(f: GroupHom) -> GroupHom:
    """The contravariant map ``Ext(B, Z) -> Ext(A, Z)`` for ``f: A -> B``."""
    f.check()
    RA = _injective_relations(f.source)
    RB = _injective_relations(f.target)
    cols = []
    for c in (f.matrix @ RA).columns():
        g = solve_linear(RB, c, ZZ)
        assert g is not None, "a valid homomorphism lifts to the resolutions"
        cols.append(g)
    G = Matrix.from_columns(cols, RB.ncols)
    return GroupHom(
        FgAbelianGroup(RB.ncols, RB.transpose()),
        FgAbelianGroup(RA.ncols, RA.transpose()),
        G.transpose(),
    )


def image_lattices_equal(f: GroupHom, g: GroupHom) -> bool:
    """Whether ``f`` and ``g`` have the same image inside their common target."""
    if f.target.ngens != g.target.ngens or not f.target.same_presentation(g.target):
        raise ValueError("image comparison needs the same target presentation")
    rel = f.target.relations
    span_f = f.matrix.hstack(rel)
    span_g = g.matrix.hstack(rel)
    return all(lattice_membership(span_g, c) for c in f.matrix.columns()) and all(
        lattice_membership(span_f, c) for c in g.matrix.columns()
    )


def torsion_part(G: FgAbelianGroup) -> list[int]:
    return normal_form(G)[1]
