"""Sublevel homology over Z, Q and Z/m with explicit cycle lifts.

Homology with Z/m coefficients is the homology of ``C (x) Z/m``: the cycles
are the integer vectors ``x`` with ``d x = 0 (mod m)`` and the boundaries are
the image of the next differential plus ``m Z^n``. Everything is computed on
integer lifts, so classes over any ring are represented by integer chains
(rational chains over Q).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .abelian import FgAbelianGroup, GroupHom
from .complex import INF, FilteredComplex
from .linalg import Matrix, cycle_lattice_scales, smith_normal_form, snf_solve
from .rings import QQ, ZZ, Ring, format_rational, parse_rational


class NotACycle(ValueError):
    """The chain handed in as a class representative has nonzero boundary."""

    def __init__(self, boundary: dict):
        self.boundary = boundary
        shown = ", ".join(f"{k}={format_rational(v)}" for k, v in boundary.items())
        super().__init__(f"not a cycle: boundary is {{{shown}}}")


class ClassSelectorError(ValueError):
    pass


def _is_zero_vec(vec, ring: Ring) -> bool:
    return all(ring.is_zero(v) for v in vec)


class HomologyPresentation:
    """Homology of one sublevel in one degree, presented on cycle lifts.

    ``cycles[i]`` is an integer chain (in :meth:`FilteredComplex.basis`
    order, truncated to the sublevel) whose class generates a cyclic summand
    of order ``orders[i]`` (0 for a free summand). Over Q only the free
    summands are kept.
    """

    def __init__(self, C: FilteredComplex, ring: Ring, degree: int, prefixes: tuple):
        self.complex = C
        self.ring = ring
        self.degree = degree
        self.prefixes = prefixes
        p_lo, n, p_hi = prefixes
        self.size = n
        A = C.boundary_matrix(degree).block(p_lo, n)
        B = C.boundary_matrix(degree + 1).block(n, p_hi)
        self._A = A
        snf_a = smith_normal_form(A)
        self._Vinv = snf_a.Vinv
        modulus = ring.modulus if ring.is_cyclic else 0
        scales = cycle_lattice_scales(snf_a, modulus)
        self._scales = scales
        basis_cols = [[x * s for x in snf_a.V.column(i)] for i, s in scales]
        Z = Matrix.from_columns(basis_cols, n)
        rel_cols = [self._lattice_coords(b) for b in B.columns()]
        if modulus:
            for i in range(n):
                e = [0] * n
                e[i] = modulus
                rel_cols.append(self._lattice_coords(e))
        R = Matrix.from_columns(rel_cols, len(scales))
        snf_r = smith_normal_form(R)
        diag = snf_r.diagonal
        orders = [diag[i] if i < len(diag) else 0 for i in range(len(scales))]
        if ring.is_rationals:
            kept = [i for i, d in enumerate(orders) if d == 0]
        else:
            kept = [i for i, d in enumerate(orders) if d != 1]
        self._U = snf_r.U
        self._kept = kept
        self.orders = [orders[i] for i in kept]
        self.cycles = [Z @ snf_r.Uinv.column(i) for i in kept]
        if ring.is_rationals:
            self.group = FgAbelianGroup.free(len(kept))
        else:
            self.group = FgAbelianGroup.from_orders(self.orders)

    def _lattice_coords(self, x):
        """Coordinates of an integer vector in the cycle lattice basis."""
        w = self._Vinv @ x
        out = []
        for i, s in self._scales:
            if w[i] % s:
                raise ValueError("vector is not in the cycle lattice")
            out.append(w[i] // s)
        return out

    @property
    def rank(self) -> int:
        return sum(1 for d in self.orders if d == 0)

    @property
    def torsion(self) -> list[int]:
        return sorted(d for d in self.orders if d != 0)

    def __len__(self):
        return len(self.orders)

    def boundary_of(self, x) -> list:
        return self._A @ x

    def is_cycle(self, x) -> bool:
        return _is_zero_vec(self.boundary_of(x), self.ring)

    def coordinates(self, x) -> tuple:
        """Coordinates of the class of the chain ``x`` (length :attr:`size`).

        Raises :class:`NotACycle` if ``x`` is not a cycle over the ring.
        """
        x = list(x)
        if len(x) != self.size:
            raise ValueError(f"chain has length {len(x)}, expected {self.size}")
        ring = self.ring
        if not ring.is_rationals:
            x = [ring.reduce(v) for v in x]
        bd = self.boundary_of(x)
        if not _is_zero_vec(bd, ring):
            C = self.complex
            names = C.basis(self.degree - 1)
            raise NotACycle({names[i].id: ring.reduce(v) for i, v in enumerate(bd) if not ring.is_zero(v)})
        if ring.is_rationals:
            w = self._Vinv @ [Fraction(v) for v in x]
            y = [w[i] for i, _ in self._scales]
        else:
            y = self._lattice_coords(x)
        c = self._U @ y
        out = []
        for i, d in zip(self._kept, self.orders):
            v = c[i]
            out.append(v % d if d else v)
        return tuple(out)

    def cycle_of(self, coords) -> list:
        """An integer (or rational) chain representing the given coordinates."""
        vec = [0] * self.size
        for c, z in zip(coords, self.cycles):
            if c:
                for i, v in enumerate(z):
                    vec[i] += c * v
        if self.ring.is_cyclic:
            vec = [v % self.ring.modulus for v in vec]
        return vec

    def normalize(self, coords) -> tuple:
        out = []
        for v, d in zip(coords, self.orders):
            if self.ring.is_rationals:
                out.append(Fraction(v))
            else:
                v = self.ring.reduce(v) if self.ring.is_cyclic else v
                out.append(v % d if d else v)
        return tuple(out)


def _prefixes(C: FilteredComplex, degree: int, level) -> tuple:
    return (C.prefix(degree - 1, level), C.prefix(degree, level), C.prefix(degree + 1, level))


def homology(C: FilteredComplex, ring: Ring = ZZ, degree: int = 0, level=INF) -> HomologyPresentation:
    """Homology of the sublevel ``action <= level`` in ``degree``."""
    C.require_valid()
    pre = _prefixes(C, degree, level)
    return C.cached(("H", ring, degree, pre), lambda: HomologyPresentation(C, ring, degree, pre))


def _check_levels(level, level2):
    if level > level2:
        raise ValueError(f"induced map needs level <= level2, got {level} > {level2}")


def pad(vec, n) -> list:
    return list(vec) + [0] * (n - len(vec))


def induced_map(C: FilteredComplex, ring: Ring, degree: int, level, level2=INF) -> GroupHom:
    """Map on homology induced by including one sublevel into a higher one."""
    _check_levels(level, level2)
    H1 = homology(C, ring, degree, level)
    H2 = homology(C, ring, degree, level2)

    def compute():
        cols = [H2.coordinates(pad(z, H2.size)) for z in H1.cycles]
        return GroupHom(H1.group, H2.group, Matrix.from_columns(cols, len(H2)))

    return C.cached(("i", ring, degree, H1.prefixes, H2.prefixes), compute)


@dataclass(frozen=True, eq=False)
class HomologyClass:
    complex: FilteredComplex
    ring: Ring
    degree: int
    level: object
    coords: tuple

    @property
    def presentation(self) -> HomologyPresentation:
        return homology(self.complex, self.ring, self.degree, self.level)

    @property
    def cycle(self) -> list:
        return self.presentation.cycle_of(self.coords)

    def chain(self) -> dict:
        return self.complex.chain_dict(self.degree, self.cycle)

    def _same_space(self, other: "HomologyClass"):
        if (
            self.complex is not other.complex
            and self.complex != other.complex
            or self.ring != other.ring
            or self.degree != other.degree
            or self.level != other.level
        ):
            raise ValueError("classes live in different homology groups")

    def __add__(self, other: "HomologyClass") -> "HomologyClass":
        self._same_space(other)
        coords = self.presentation.normalize([a + b for a, b in zip(self.coords, other.coords)])
        return HomologyClass(self.complex, self.ring, self.degree, self.level, coords)

    def __neg__(self) -> "HomologyClass":
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k) -> "HomologyClass":
        coords = self.presentation.normalize([k * a for a in self.coords])
        return HomologyClass(self.complex, self.ring, self.degree, self.level, coords)

    def __rmul__(self, k):
        return self.scale(k)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def order(self) -> int:
        """Additive order (0 for infinite order)."""
        if self.ring.is_rationals:
            return 1 if self.is_zero() else 0
        return self.presentation.group.element_order(self.coords)

    def is_torsion(self) -> bool:
        return self.order() != 0

    def __eq__(self, other):
        if not isinstance(other, HomologyClass):
            return NotImplemented
        try:
            self._same_space(other)
        except ValueError:
            return False
        return self.coords == other.coords

    def __hash__(self):
        return hash((self.ring, self.degree, self.coords))

    def __repr__(self):
        lvl = format_rational(self.level)
        chain = ", ".join(f"{k}={format_rational(v)}" for k, v in self.chain().items())
        return f"HomologyClass({self.ring}, deg {self.degree}, level {lvl}, [{chain}])"


def class_of_vector(C: FilteredComplex, ring: Ring, degree: int, vec, level=INF) -> HomologyClass:
    """Class of a chain given in sublevel basis coordinates."""
    H = homology(C, ring, degree, level)
    vec = pad(vec, H.size)
    if len(vec) > H.size:
        raise ValueError("chain is not supported in the sublevel")
    return HomologyClass(C, ring, degree, level, H.coordinates(vec))


def class_from_chain(C: FilteredComplex, ring: Ring, chain: dict, degree=None, level=INF) -> HomologyClass:
    """Class of the cycle ``{id: coefficient}`` at the given level."""
    if not chain:
        if degree is None:
            raise ClassSelectorError("empty chain needs an explicit degree")
        return zero_class(C, ring, degree, level)
    degs = set()
    for gid in chain:
        if gid not in {g.id for g in C.generators}:
            raise ClassSelectorError(f"unknown generator id {gid!r}")
        degs.add(C.generator(gid).degree)
    if len(degs) > 1:
        raise ClassSelectorError(f"chain mixes degrees {sorted(degs)}")
    chain_degree = degs.pop()
    if degree is not None and degree != chain_degree:
        raise ClassSelectorError(f"chain has degree {chain_degree}, not {degree}")
    for gid, c in chain.items():
        g = C.generator(gid)
        if g.action > level:
            raise ClassSelectorError(f"generator {gid!r} has action {g.action} above level {format_rational(level)}")
        if ring.is_integers and Fraction(c).denominator != 1:
            raise ClassSelectorError(f"coefficient of {gid!r} is not an integer")
        if ring.is_cyclic:
            try:
                ring.reduce(Fraction(c))
            except ValueError as exc:
                raise ClassSelectorError(f"coefficient of {gid!r}: {exc}") from None
    vec = C.chain_vector(chain_degree, chain)
    if ring.is_integers:
        vec = [int(v) for v in vec]
    elif ring.is_cyclic:
        vec = [ring.reduce(Fraction(v)) for v in vec]
    else:
        vec = [Fraction(v) for v in vec]
    H = homology(C, ring, chain_degree, level)
    return HomologyClass(C, ring, chain_degree, level, H.coordinates(vec[: H.size]))


def zero_class(C, ring, degree, level=INF) -> HomologyClass:
    H = homology(C, ring, degree, level)
    zero = Fraction(0) if ring.is_rationals else 0
    return HomologyClass(C, ring, degree, level, tuple(zero for _ in H.orders))


def generator_classes(C: FilteredComplex, ring: Ring, degree: int, level=INF) -> list[HomologyClass]:
    """The classes of the presentation generators (one per cyclic summand)."""
    H = homology(C, ring, degree, level)
    out = []
    for i in range(len(H)):
        coords = [0] * len(H)
        coords[i] = 1
        out.append(HomologyClass(C, ring, degree, level, H.normalize(coords)))
    return out


def push_forward(a: HomologyClass, level2=INF) -> HomologyClass:
    """Image of ``a`` under the inclusion into a higher sublevel."""
    _check_levels(a.level, level2)
    return class_of_vector(a.complex, a.ring, a.degree, a.cycle, level2)


def change_ring_class(a: HomologyClass, ring: Ring) -> HomologyClass:
    """Image of ``a`` under Z -> Q, Z -> Z/m or Z/m -> Z/d with d | m."""
    src = a.ring
    ok = (
        src == ring
        or (src.is_integers and (ring.is_rationals or ring.is_cyclic))
        or (src.is_cyclic and ring.is_cyclic and src.modulus % ring.modulus == 0)
    )
    if not ok:
        raise ValueError(f"unsupported coefficient change {src} -> {ring}")
    vec = a.cycle
    if ring.is_rationals:
        vec = [Fraction(v) for v in vec]
    return class_of_vector(a.complex, ring, a.degree, vec, a.level)


_TERM_RE = re.compile(r"^\s*([^=,\s]+)\s*=\s*([+-]?\d+(?:/\d+)?)\s*$")


def parse_class_selector(expr: str) -> dict:
    """Parse ``"x=1,w=-2"`` into ``{"x": 1, "w": -2}`` (rational values allowed)."""
    chain: dict = {}
    if not expr.strip():
        raise ClassSelectorError("empty class selector")
    for part in expr.split(","):
        m = _TERM_RE.match(part)
        if not m:
            raise ClassSelectorError(f"malformed term {part.strip()!r}; expected id=coefficient")
        gid, value = m.group(1), parse_rational(m.group(2))
        chain[gid] = chain.get(gid, 0) + value
    return {k: (int(v) if v.denominator == 1 else v) for k, v in chain.items() if v != 0} or chain


def parse_level(text: str):
    t = text.strip()
    if t in ("inf", "+inf"):
        return INF
    return parse_rational(t)


__all__ = [
    "ClassSelectorError",
    "HomologyClass",
    "HomologyPresentation",
    "NotACycle",
    "QQ",
    "ZZ",
    "change_ring_class",
    "class_from_chain",
    "class_of_vector",
    "generator_classes",
    "homology",
    "induced_map",
    "parse_class_selector",
    "parse_level",
    "push_forward",
    "zero_class",
]
