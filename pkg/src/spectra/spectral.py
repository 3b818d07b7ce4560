"""Spectral invariants, spectral and torsion depth, and the duality pairing."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .abelian import ext_map, hom_cokernel, image_lattices_equal
from .complex import INF, FilteredComplex, dual_id
from .homology import (
    HomologyClass,
    change_ring_class,
    homology,
    induced_map,
    pad,
)
from .linalg import Matrix, smith_normal_form, snf_solve
from .rings import QQ, ZZ, Ring

NEG_INF = -INF


def _image_solver(C: FilteredComplex, ring: Ring, degree: int, level):
    """Decomposition used to test membership in the image of ``i_level``."""
    f = induced_map(C, ring, degree, level, INF)
    H = homology(C, ring, degree, level)
    Hf = homology(C, ring, degree, INF)

    def compute():
        gens = f.matrix
        if not ring.is_rationals:
            torsion = [d for d in Hf.orders]
            extra = Matrix.diagonal(torsion) if torsion else Matrix.zeros(0, 0)
            gens = gens.hstack(extra) if extra.nrows else gens
        return smith_normal_form(gens)

    return C.cached(("imgsnf", ring, degree, H.prefixes), compute)


def in_image(C: FilteredComplex, ring: Ring, degree: int, level, coords) -> bool:
    """Whether the full-level class with ``coords`` comes from the sublevel."""
    if all(c == 0 for c in coords):
        return True
    snf = _image_solver(C, ring, degree, level)
    return snf_solve(snf, list(coords), rational=ring.is_rationals) is not None


def _require_full(a: HomologyClass):
    if a.level != INF:
        raise ValueError("spectral invariants are defined for classes of the full complex")


def spectral_invariant(C: FilteredComplex, ring: Ring, a: HomologyClass):
    """Least critical level whose sublevel homology hits ``a`` (``-inf`` for 0)."""
    _require_full(a)
    if a.complex is not C and a.complex != C:
        raise ValueError("class does not belong to this complex")
    if a.ring != ring:
        raise ValueError(f"class is over {a.ring}, not {ring}")
    if a.is_zero():
        return NEG_INF

    def compute():
        for tau in C.critical_values:
            if in_image(C, ring, a.degree, tau, a.coords):
                return tau
        raise AssertionError("a class of the full complex must lie in the top sublevel")

    return C.cached(("c", ring, a.degree, a.coords), compute)


def c(a: HomologyClass):
    """Shorthand for ``spectral_invariant(a.complex, a.ring, a)``."""
    return spectral_invariant(a.complex, a.ring, a)


def cokernel_order(a: HomologyClass, level) -> int:
    """Order of the image of ``a`` in ``coker(i_level)`` (0 when infinite)."""
    C = a.complex
    f = induced_map(C, a.ring, a.degree, level, INF)
    H = homology(C, a.ring, a.degree, level)
    G = C.cached(("coker", a.ring, a.degree, H.prefixes), lambda: hom_cokernel(f).group)
    return G.element_order(a.coords)


def witness_bound(a: HomologyClass, level) -> int:
    """A multiplier ``k`` with ``k a`` in the integral image at ``level``.

    ``a`` must already lie in the rational image at ``level``. Solve
    ``cycle(a) = y + d z`` over Q with ``y`` a sublevel cycle and ``z`` a
    chain of the full complex; clearing the denominators of ``y`` and ``z``
    gives an integral solution for the multiple.
    """
    C = a.complex
    k = a.degree
    Hq = homology(C, QQ, k, level)
    n = C.prefix(k, INF)
    lifts = [pad(z, n) for z in Hq.cycles]
    B = C.boundary_matrix(k + 1)
    cols = lifts + B.columns()
    M = Matrix.from_columns(cols, n)
    sol = snf_solve(smith_normal_form(M), [Fraction(v) for v in a.cycle], rational=True)
    if sol is None:
        raise ValueError("class is not in the rational image at this level")
    coeffs = sol[: len(lifts)]
    y = [sum((cf * z[i] for cf, z in zip(coeffs, lifts)), Fraction(0)) for i in range(n)]
    zchain = sol[len(lifts):]
    bound = 1
    for v in list(y) + list(zchain):
        bound = lcm(bound, Fraction(v).denominator)
    return bound


def _divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


@dataclass(frozen=True)
class SpectralDepth:
    beta: Fraction
    witness: int
    c_z: Fraction
    infimum: Fraction
    c_q: Fraction
    bound: int


def spectral_depth(a: HomologyClass) -> SpectralDepth:
    """``c_Z(a) - inf_k c_Z(k a)`` with the least multiplier attaining the infimum.

    The infimum is taken over the divisors of :func:`witness_bound` at the
    rational threshold, which contains every attaining multiplier's least
    element.
    """
    if not a.ring.is_integers:
        raise ValueError("spectral depth is defined for integral classes")
    if a.is_zero():
        raise ValueError("spectral depth of the zero class is undefined")
    if a.is_torsion():
        raise ValueError("spectral depth of a torsion class is undefined")

    def compute():
        cz = c(a)
        cq = c(change_ring_class(a, QQ))
        bound = witness_bound(a, cq)
        values = {k: c(a.scale(k)) for k in _divisors(bound)}
        inf_value = min(values.values())
        witness = min(k for k, v in values.items() if v == inf_value)
        return SpectralDepth(cz - inf_value, witness, cz, inf_value, cq, bound)

    return a.complex.cached(("depth", a.degree, a.coords), compute)


@dataclass(frozen=True)
class TorsionDepth:
    beta: Fraction
    per_level: dict  # critical level -> least stabilizing shift (levels with Ext = 0 omitted)


def torsion_depth(C: FilteredComplex, degree: int) -> TorsionDepth:
    """Least shift after which the Ext images from every sublevel stabilize."""

    def compute():
        crit = C.critical_values
        per_level = {}
        for i, tau in enumerate(crit):
            H = homology(C, ZZ, degree, tau)
            if not H.torsion:
                continue
            full = ext_map(induced_map(C, ZZ, degree, tau, INF))
            for tau2 in crit[i:]:
                step = ext_map(induced_map(C, ZZ, degree, tau, tau2))
                if image_lattices_equal(step, full):
                    per_level[tau] = tau2 - tau
                    break
            else:
                raise AssertionError("Ext images must stabilize at the top level")
        beta = max(per_level.values(), default=Fraction(0))
        return TorsionDepth(Fraction(beta), per_level)

    return C.cached(("tordepth", degree), compute)


def torsion_depth_all(C: FilteredComplex) -> tuple[Fraction, dict]:
    """``(beta_tor, {degree: beta_k})`` over the degrees carrying generators."""
    table = {k: torsion_depth(C, k).beta for k in C.degrees}
    return max(table.values(), default=Fraction(0)), table


def _dual_permutation(C: FilteredComplex, degree: int) -> list[int]:
    """Positions in the dual basis of degree ``D - degree`` of the duals of ``C.basis(degree)``."""

    def compute():
        Dc = C.dual()
        pos = {g.id: i for i, g in enumerate(Dc.basis(C.top_degree - degree))}
        return [pos[dual_id(g.id)] for g in C.basis(degree)]

    return C.cached(("dualperm", degree), compute)


def pair_chains(C: FilteredComplex, degree: int, z, w):
    """Evaluation of the dual chain ``z`` (dual basis of degree ``D - degree``)
    on the chain ``w`` of ``C`` in ``degree``; shorter vectors are zero-padded."""
    perm = _dual_permutation(C, degree)
    total = 0
    for i, v in enumerate(w):
        if v:
            j = perm[i]
            if j < len(z) and z[j]:
                total += z[j] * v
    return total


def pd_pairing(C: FilteredComplex, z: HomologyClass, w: HomologyClass):
    """Pairing of a dual class ``z`` with a class ``w`` of complementary degree."""
    if z.complex != C.dual():
        raise ValueError("first argument must be a class of the dual complex")
    if w.complex != C:
        raise ValueError("second argument must be a class of the complex")
    if z.degree + w.degree != C.top_degree:
        raise ValueError(
            f"degrees {z.degree} and {w.degree} are not complementary for top degree {C.top_degree}"
        )
    if z.ring != w.ring:
        raise ValueError("classes are over different rings")
    return z.ring.reduce(pair_chains(C, w.degree, z.cycle, w.cycle))


def pairing_threshold(C: FilteredComplex, ring: Ring, z_cycle, degree: int):
    """Least critical level at which the functional ``<z, ->`` is nonzero on the
    image of sublevel homology of ``degree`` (``inf`` if it never is)."""
    for tau in C.critical_values:
        H = homology(C, ring, degree, tau)
        for cyc in H.cycles:
            if not ring.is_zero(pair_chains(C, degree, z_cycle, cyc)):
                return tau
    return INF


def spectral_norm(a: HomologyClass, a_dual: HomologyClass):
    """``c(a) + c(a_dual)`` for a class of ``C`` and a class of its dual."""
    C = a.complex
    if a_dual.complex != C.dual():
        raise ValueError("second class must belong to the dual complex")
    if a.is_zero() or a_dual.is_zero():
        raise ValueError("spectral norm needs nonzero classes")
    return c(a) + c(a_dual)
